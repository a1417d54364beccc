import json
import re
from ast import literal_eval
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Tuple, Union

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, VisitError
from lark.lexer import PatternStr
from loguru import logger

from desgraph.constants import WILDCARD
from desgraph.dsl.ast_nodes import (
    AllotDecl,
    Block,
    ConstrainDecl,
    ExpectDecl,
    FactorDecl,
    Item,
    LabelNestedDecl,
    OrderDecl,
    RecordDecl,
    SeedDecl,
    SpecAst,
)
from desgraph.dsl.grammar import GRAMMAR
from desgraph.exceptions.dsl import SpecSemanticError, SpecSyntaxError
from desgraph.exceptions.exceptions import DesignError
from desgraph.levels import (
    Conditioned,
    Count,
    Crossed,
    LevelSpec,
    Nested,
    PerParentRule,
    SingleLevels,
    Values,
    referenced_factors,
    rules,
)
from desgraph.models import Role, Scalar

_PARSER = Lark(GRAMMAR, parser="lalr", lexer="contextual", propagate_positions=True)

_INTEGER = re.compile(r"-?\d+")

ROLE_WORDS = {Role.UNIT: "unit", Role.TREATMENT: "treatment", Role.RECORD: "record"}


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def _unquote(token: Token) -> str:
    return literal_eval(str(token))


def _number(token: Token) -> Union[int, float]:
    text = str(token)
    return int(text) if _INTEGER.fullmatch(text) else float(text)


def _literal(token: Token) -> Scalar:
    return _unquote(token) if token.type == "STRING" else _number(token)


@dataclass(frozen=True)
class _RawRule:
    match: Tuple[str, ...]
    # a bare number is a count when nesting and a single value when conditioning
    spec: Union[int, float, Values]


@v_args(meta=True)
class SpecTransformer(Transformer):
    """
    Turns the parse tree into a SpecAst
    """

    def start(self, meta, children):
        title, *blocks = children
        return SpecAst(title=title, blocks=tuple(blocks))

    def design_line(self, meta, children):
        return _unquote(children[0])

    def _block(self, kind: str, meta, children) -> Block:
        return Block(kind=kind, items=tuple(children), line=meta.line)

    def units_block(self, meta, children):
        return self._block("units", meta, children)

    def trts_block(self, meta, children):
        return self._block("trts", meta, children)

    def rcrds_block(self, meta, children):
        return self._block("rcrds", meta, children)

    def expect_block(self, meta, children):
        return self._block("expect", meta, children)

    def allot_block(self, meta, children):
        return self._block("allot", meta, children)

    def assign_block(self, meta, children):
        return self._block("assign", meta, children)

    def output_block(self, meta, children):
        return self._block("output", meta, children)

    # level specifications

    def factor(self, meta, children):
        name, spec = children
        if not isinstance(spec, (Values, Nested, Crossed, Conditioned)):
            spec = Count(spec)
        return FactorDecl(name=str(name), spec=spec, line=meta.line)

    def count(self, meta, children):
        return _number(children[0])

    def values(self, meta, children):
        return Values(tuple(_literal(token) for token in children))

    def seq(self, meta, children):
        start, stop = (_number(token) for token in children)
        if not isinstance(start, int) or not isinstance(stop, int) or start > stop:
            raise ValueError(f"{start}:{stop} is not an increasing range of integers")
        return Values(tuple(range(start, stop + 1)))

    def single(self, meta, children):
        return SingleLevels(children[0].values)

    def nested(self, meta, children):
        parent, *rest = children
        if len(rest) == 1 and not isinstance(rest[0], _RawRule):
            inner = rest[0]
            if not isinstance(inner, (Values, Crossed)):
                inner = Count(inner)
            return Nested(str(parent), inner)
        built = [
            PerParentRule(raw.match, raw.spec if isinstance(raw.spec, Values) else Count(raw.spec))
            for raw in rest
        ]
        return Nested(str(parent), rules(built))

    def crossed(self, meta, children):
        return Crossed(tuple(str(name) for name in children))

    def conditioned(self, meta, children):
        parent, *rest = children
        built = [
            PerParentRule(raw.match, raw.spec if isinstance(raw.spec, Values) else Values((raw.spec,)))
            for raw in rest
        ]
        return Conditioned(str(parent), rules(built))

    def rule(self, meta, children):
        *match, spec = children
        labels = tuple(WILDCARD if token.type == "WILDCARD" else _unquote(token) for token in match)
        return _RawRule(labels, spec)

    # records and their expected values

    def record(self, meta, children):
        name, unit = children
        return RecordDecl(name=str(name), unit=str(unit), line=meta.line)

    def compare(self, meta, children):
        name, op, value = children
        return ExpectDecl(record=str(name), op=str(op), value=_number(value), line=meta.line)

    def member(self, meta, children):
        name, values = children
        return ExpectDecl(record=str(name), op="in", allowed=values.values, line=meta.line)

    # links

    def allotment(self, meta, children):
        *lhs, rhs = (str(name) for name in children)
        return AllotDecl(lhs=tuple(lhs), rhs=rhs, line=meta.line)

    def order(self, meta, children):
        return OrderDecl(target="trts", names=tuple(str(c) for c in children), line=meta.line)

    def unit_order(self, meta, children):
        return OrderDecl(target="units", names=tuple(str(c) for c in children), line=meta.line)

    def seed(self, meta, children):
        value = _number(children[0])
        if not isinstance(value, int):
            raise ValueError(f"seed must be an integer, got {value}")
        return SeedDecl(value=value, line=meta.line)

    def constrain(self, meta, children):
        unit, *names = (str(name) for name in children)
        return ConstrainDecl(unit=unit, names=tuple(names), line=meta.line)

    def label_nested(self, meta, children):
        return LabelNestedDecl(names=tuple(str(name) for name in children), line=meta.line)

    def label_nested_all(self, meta, children):
        return LabelNestedDecl(names=True, line=meta.line)


def _terminal_text(name: str) -> str:
    if name == "_NL":
        return "end of line"
    if name == "$END":
        return "end of input"
    try:
        pattern = _PARSER.get_terminal(name).pattern
    except KeyError:
        return name
    if isinstance(pattern, PatternStr):
        return f"'{pattern.value}'"
    return name.lower()


def _position(value: Any):
    return value if isinstance(value, int) and value > 0 else None


def _syntax_error(e: UnexpectedInput) -> SpecSyntaxError:
    if isinstance(e, UnexpectedEOF):
        return SpecSyntaxError("unexpected end of input")
    expected = set(getattr(e, "expected", None) or getattr(e, "allowed", None) or ())
    line, column = _position(e.line), _position(e.column)
    if isinstance(e, UnexpectedCharacters):
        token = e.char
        found = f"character {e.char!r}"
    else:
        token = str(e.token)
        found = _terminal_text(e.token.type) if e.token.type in ("_NL", "$END") else repr(token)
    if "DESIGN" in expected:
        message = "expected 'design'"
    else:
        names = sorted(_terminal_text(name) for name in expected)
        message = f"unexpected {found}, expected one of {', '.join(names)}"
    return SpecSyntaxError(message, line=line, column=column, token=token)


class _Scope(object):
    """
    Names declared so far, in document order
    """

    def __init__(self):
        self.roles: Dict[str, Role] = {}

    def declare(self, name: str, role: Role, line: int):
        if name in self.roles:
            raise SpecSemanticError(f"{name!r} is already declared", line=line, token=name)
        self.roles[name] = role

    def need(self, name: str, line: int, *roles: Role) -> Role:
        if name not in self.roles:
            raise SpecSemanticError(f"unknown factor {name!r}", line=line, token=name)
        role = self.roles[name]
        if roles and role not in roles:
            wanted = " or ".join(ROLE_WORDS[r] for r in roles)
            raise SpecSemanticError(
                f"{name!r} is a {ROLE_WORDS[role]}, expected a {wanted}", line=line, token=name
            )
        return role


def _check_factor(scope: _Scope, item: FactorDecl, role: Role):
    spec = item.spec
    if role == Role.UNIT and isinstance(spec, Conditioned):
        raise SpecSemanticError(
            f"{item.name!r}: conditioned_on is only for treatments", line=item.line, token=item.name
        )
    if role == Role.TREATMENT and isinstance(spec, (Nested, Crossed)):
        raise SpecSemanticError(
            f"{item.name!r}: treatments can not be nested_in or crossed_by",
            line=item.line,
            token=item.name,
        )
    for ref in referenced_factors(spec):
        scope.need(ref, item.line, role)
    scope.declare(item.name, role, item.line)


def _check_allotment(scope: _Scope, item: AllotDecl):
    scope.need(item.rhs, item.line, Role.UNIT)
    roles = [scope.need(name, item.line) for name in item.lhs]
    if all(role == Role.TREATMENT for role in roles):
        return
    if len(roles) == 1 and roles[0] == Role.UNIT:
        if item.lhs[0] == item.rhs:
            raise SpecSemanticError(
                f"{item.rhs!r} can not be alloted to itself", line=item.line, token=item.rhs
            )
        return
    raise SpecSemanticError(
        f"{item.formula!r} must allot treatments or a single unit", line=item.line, token=item.lhs[0]
    )


def check_spec(spec: SpecAst) -> SpecAst:
    """
    Semantic checks in document order: names are declared once and before use, and every
    reference has the role its position needs
    """
    scope = _Scope()
    for block in spec.blocks:
        for item in block.items:
            if block.kind == "units":
                _check_factor(scope, item, Role.UNIT)
            elif block.kind == "trts":
                _check_factor(scope, item, Role.TREATMENT)
            elif block.kind == "rcrds":
                scope.need(item.unit, item.line, Role.UNIT)
                scope.declare(item.name, Role.RECORD, item.line)
            elif block.kind == "expect":
                scope.need(item.record, item.line, Role.RECORD)
            elif block.kind == "allot":
                _check_allotment(scope, item)
            elif isinstance(item, ConstrainDecl):
                scope.need(item.unit, item.line, Role.UNIT)
                for name in item.names:
                    scope.need(name, item.line, Role.UNIT)
            elif isinstance(item, LabelNestedDecl) and item.names is not True:
                for name in item.names:
                    scope.need(name, item.line)
    return spec


def parse_spec(text: str) -> SpecAst:
    """
    Parse and check a design spec
    :param text: spec source
    :return: SpecAst
    """
    try:
        tree = _PARSER.parse(text + "\n")
    except UnexpectedInput as e:
        raise _syntax_error(e) from None
    try:
        spec = SpecTransformer().transform(tree)
    except VisitError as e:
        meta = getattr(e.obj, "meta", None)
        orig = e.orig_exc
        message = orig.message if isinstance(orig, DesignError) else str(orig)
        raise SpecSemanticError(message, line=getattr(meta, "line", None)) from orig
    logger.debug(f"Parsed spec {spec.title!r} with {len(spec.blocks)} blocks")
    return check_spec(spec)


# canonical text


def _literal_text(value: Scalar) -> str:
    if isinstance(value, str):
        return _quote(value)
    return repr(value)


def _values_text(values: Iterable[Scalar]) -> str:
    return "[" + ", ".join(_literal_text(v) for v in values) + "]"


def _names_text(names: Tuple[str, ...]) -> str:
    return names[0] if len(names) == 1 else "[" + ", ".join(names) + "]"


def _rule_text(rule: PerParentRule) -> str:
    match = WILDCARD if rule.is_wildcard else ", ".join(_quote(label) for label in rule.match)
    spec = str(rule.spec.n) if isinstance(rule.spec, Count) else _values_text(rule.spec.values)
    return f"{match} ~ {spec}"


def spec_text(spec: LevelSpec) -> str:
    if isinstance(spec, SingleLevels):
        return f"lvls({_values_text(spec.values)})"
    if isinstance(spec, Count):
        return str(spec.n)
    if isinstance(spec, Values):
        return _values_text(spec.values)
    if isinstance(spec, Crossed):
        return f"crossed_by({', '.join(spec.factors)})"
    if isinstance(spec, Nested):
        if isinstance(spec.inner, tuple):
            inner = ", ".join(_rule_text(rule) for rule in spec.inner)
        else:
            inner = spec_text(spec.inner)
        return f"nested_in({spec.parent}, {inner})"
    if isinstance(spec, Conditioned):
        return f"conditioned_on({spec.parent}, {', '.join(_rule_text(rule) for rule in spec.rules)})"
    raise TypeError(f"Unknown level specification {spec!r}")


def _item_text(item: Item) -> str:
    if isinstance(item, FactorDecl):
        return f"{item.name} = {spec_text(item.spec)}"
    if isinstance(item, RecordDecl):
        return f"{item.name} of {item.unit}"
    if isinstance(item, ExpectDecl):
        if item.op == "in":
            return f"{item.record} in {_values_text(item.allowed)}"
        return f"{item.record} {item.op} {_literal_text(item.value)}"
    if isinstance(item, AllotDecl):
        return item.formula
    if isinstance(item, OrderDecl):
        key = "order" if item.target == "trts" else "unit_order"
        return f"{key} = {_names_text(item.names)}"
    if isinstance(item, SeedDecl):
        return f"seed = {item.value}"
    if isinstance(item, ConstrainDecl):
        return f"constrain: {item.unit} = {_names_text(item.names)}"
    if isinstance(item, LabelNestedDecl):
        return "label_nested = all" if item.names is True else f"label_nested = {_names_text(item.names)}"
    raise TypeError(f"Unknown spec item {item!r}")


def unparse(spec: SpecAst) -> str:
    """
    Canonical text of a spec: one item per line, two space indents, a blank line
    between blocks
    """
    lines: List[str] = [f"design {_quote(spec.title)}"]
    for block in spec.blocks:
        lines.append("")
        lines.append(f"{block.kind}:")
        lines.extend(f"  {_item_text(item)}" for item in block.items)
    return "\n".join(lines) + "\n"
