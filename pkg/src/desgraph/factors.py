import itertools
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd
from loguru import logger

from desgraph.exceptions.exceptions import (
    DuplicateFactorError,
    IncompleteRulesError,
    InvalidRulesError,
    NoTreatmentsError,
    RoleMismatchError,
    TargetNotAUnitError,
    UnknownParentError,
    UnknownUnitError,
)
from desgraph.levels import (
    Conditioned,
    Count,
    Crossed,
    LevelSpec,
    Nested,
    PerParentRule,
    Values,
    as_spec,
    referenced_factors,
)
from desgraph.models import EdgeKind, FactorNode, LevelNode, Role, Scalar
from desgraph.provenance import Provenance
from desgraph.utils import index_labels, value_type_of

if TYPE_CHECKING:
    from desgraph.design import Design


def _entries(specs: Optional[Mapping[str, Any]], kwargs: Mapping[str, Any]):
    entries = list((specs or {}).items()) + list(kwargs.items())
    names = [name for name, _ in entries]
    if len(set(names)) != len(names):
        raise DuplicateFactorError(f"Factor names repeat in one call: {names}")
    return entries


def level_value(prov: Provenance, level: Union[LevelNode, int]) -> Scalar:
    """
    Value shown in tables for a level: its label for indexed factors, its value otherwise
    """
    if isinstance(level, int):
        level = prov.level(level)
    if prov.factor(level.factor).indexed:
        return level.label
    return level.value


def _match_rules(
    name: str, parent_levels: List[LevelNode], rules: Sequence[PerParentRule]
) -> List[Tuple[LevelNode, Union[Count, Values]]]:
    by_label: Dict[str, LevelNode] = {}
    for level in parent_levels:
        by_label.setdefault(level.label, level)
        by_label.setdefault(str(level.value), level)
    explicit: Dict[int, Union[Count, Values]] = {}
    wildcard = None
    for rule in rules:
        if rule.is_wildcard:
            wildcard = rule.spec
            continue
        for label in rule.match:
            if label not in by_label:
                raise InvalidRulesError(
                    f"Rule for {name!r} names unknown parent level {label!r}"
                )
            level = by_label[label]
            if level.id in explicit:
                raise InvalidRulesError(
                    f"Parent level {label!r} is matched twice in rules for {name!r}"
                )
            explicit[level.id] = rule.spec
    matched = []
    missing = []
    for level in parent_levels:
        spec = explicit.get(level.id, wildcard)
        if spec is None:
            missing.append(level.label)
        else:
            matched.append((level, spec))
    if missing:
        raise IncompleteRulesError(
            f"Rules for {name!r} do not cover parent levels {missing}",
            factor=name,
            missing=missing,
        )
    return matched


def _crossed_levels(
    prov: Provenance, factors: Sequence[FactorNode], within: Optional[LevelNode] = None
) -> List[Tuple[LevelNode, ...]]:
    per_factor = []
    for factor in factors:
        levels = prov.levels(factor.id)
        if within is not None:
            levels = [
                lvl for lvl in levels if prov.ancestor_level(lvl.id, within.factor) == within.id
            ]
        per_factor.append(levels)
    # first factor varies fastest
    return [tuple(reversed(combo)) for combo in itertools.product(*reversed(per_factor))]


def _add_nested(prov: Provenance, name: str, spec: Nested, role: Role) -> FactorNode:
    parent = prov.factor(spec.parent)
    if parent.role != Role.UNIT or role != Role.UNIT:
        raise RoleMismatchError(
            f"Only units can be nested, {spec.parent!r} is {parent.role.value}", name=name
        )
    parent_levels = prov.levels(parent.id)

    if isinstance(spec.inner, Crossed):
        crossed = _crossed_factors(prov, name, spec.inner)
        groups = []
        for plevel in parent_levels:
            combos = _crossed_levels(prov, crossed, within=plevel)
            if not combos:
                raise UnknownParentError(
                    f"{', '.join(spec.inner.factors)} have no levels within {plevel.label}",
                    name=spec.parent,
                )
            groups.append((plevel, combos))
        total = sum(len(combos) for _, combos in groups)
        node = prov.add_factor(name, role, nesting_parent=parent.id)
        labels = iter(index_labels(name, total))
        for plevel, combos in groups:
            for combo in combos:
                label = next(labels)
                (child,) = prov.add_levels(node.id, [label], [label])
                prov.link_levels(plevel.id, child.id, EdgeKind.NESTS)
                for level in combo:
                    prov.link_levels(level.id, child.id, EdgeKind.NESTS)
        prov.link_factors(parent.id, node.id, EdgeKind.NESTS)
        for factor in crossed:
            prov.link_factors(factor.id, node.id, EdgeKind.NESTS)
        return node

    if isinstance(spec.inner, tuple):
        matched = _match_rules(name, parent_levels, spec.inner)
    else:
        matched = [(plevel, spec.inner) for plevel in parent_levels]
    kinds = {isinstance(inner, Count) for _, inner in matched}
    if len(kinds) > 1:
        raise InvalidRulesError(f"Rules for {name!r} mix level counts and level values")

    if kinds == {True}:
        total = sum(inner.n for _, inner in matched)
        node = prov.add_factor(name, role, nesting_parent=parent.id)
        labels = iter(index_labels(name, total))
        for plevel, inner in matched:
            chunk = [next(labels) for _ in range(inner.n)]
            for child in prov.add_levels(node.id, chunk, chunk):
                prov.link_levels(plevel.id, child.id, EdgeKind.NESTS)
    else:
        node = prov.add_factor(
            name,
            role,
            indexed=False,
            value_type="chr",
            nesting_parent=parent.id,
        )
        for plevel, inner in matched:
            labels = [f"{plevel.label}:{v}" for v in inner.values]
            for child in prov.add_levels(node.id, labels, list(inner.values)):
                prov.link_levels(plevel.id, child.id, EdgeKind.NESTS)
    prov.link_factors(parent.id, node.id, EdgeKind.NESTS)
    return node


def _crossed_factors(prov: Provenance, name: str, spec: Crossed) -> List[FactorNode]:
    factors = [prov.factor(fname) for fname in spec.factors]
    for factor in factors:
        if factor.role != Role.UNIT:
            raise RoleMismatchError(
                f"Only units can be crossed, {factor.name!r} is {factor.role.value}",
                name=name,
            )
    return factors


def _add_crossed(prov: Provenance, name: str, spec: Crossed, role: Role) -> FactorNode:
    if role != Role.UNIT:
        raise RoleMismatchError(f"Treatment {name!r} can not be crossed_by", name=name)
    crossed = _crossed_factors(prov, name, spec)
    combos = _crossed_levels(prov, crossed)
    node = prov.add_factor(name, role)
    labels = index_labels(name, len(combos))
    for label, combo in zip(labels, combos):
        (child,) = prov.add_levels(node.id, [label], [label])
        for level in combo:
            prov.link_levels(level.id, child.id, EdgeKind.NESTS)
    for factor in crossed:
        prov.link_factors(factor.id, node.id, EdgeKind.NESTS)
    return node


def _add_conditioned(
    prov: Provenance, name: str, spec: Conditioned, role: Role
) -> FactorNode:
    parent = prov.factor(spec.parent)
    if role != Role.TREATMENT or parent.role != Role.TREATMENT:
        raise RoleMismatchError(
            f"conditioned_on links treatments only, {name!r} on {spec.parent!r}", name=name
        )
    matched = _match_rules(name, prov.levels(parent.id), spec.rules)
    if any(isinstance(inner, Count) for _, inner in matched):
        raise InvalidRulesError(f"Rules for {name!r} must give values, not counts")
    values: List[Scalar] = []
    for _, inner in matched:
        values.extend(v for v in inner.values if v not in values)
    node = prov.add_factor(
        name,
        role,
        indexed=False,
        value_type=value_type_of(values),
        conditioned_on=parent.id,
    )
    created = prov.add_levels(node.id, [str(v) for v in values], values)
    by_value = {level.value: level for level in created}
    for plevel, inner in matched:
        for value in inner.values:
            prov.link_levels(plevel.id, by_value[value].id, EdgeKind.NESTS)
    prov.link_factors(parent.id, node.id, EdgeKind.NESTS)
    return node


def add_factor(design: "Design", name: str, spec: LevelSpec, role: Role) -> FactorNode:
    prov = design.provenance
    if prov.has_factor(name):
        raise DuplicateFactorError(f"Factor {name!r} is already defined", name=name)
    for ref in referenced_factors(spec):
        if not prov.has_factor(ref):
            raise UnknownParentError(
                f"{name!r} refers to {ref!r} which is not defined yet", name=ref
            )
    if isinstance(spec, Count):
        labels = index_labels(name, spec.n)
        node = prov.add_factor(name, role)
        prov.add_levels(node.id, labels, labels)
    elif isinstance(spec, Values):
        node = prov.add_factor(
            name, role, indexed=False, value_type=value_type_of(spec.values)
        )
        prov.add_levels(node.id, [str(v) for v in spec.values], list(spec.values))
    elif isinstance(spec, Nested):
        node = _add_nested(prov, name, spec, role)
    elif isinstance(spec, Crossed):
        node = _add_crossed(prov, name, spec, role)
    elif isinstance(spec, Conditioned):
        node = _add_conditioned(prov, name, spec, role)
    else:
        raise TypeError(f"Unknown level specification {spec!r}")
    logger.debug(f"{role.value} {name} has {len(prov.levels(node.id))} levels")
    return node


def set_units(design: "Design", specs: Optional[Mapping[str, Any]] = None, **kwargs) -> "Design":
    for name, value in _entries(specs, kwargs):
        add_factor(design, name, as_spec(value), Role.UNIT)
    return design


def set_trts(design: "Design", specs: Optional[Mapping[str, Any]] = None, **kwargs) -> "Design":
    for name, value in _entries(specs, kwargs):
        add_factor(design, name, as_spec(value), Role.TREATMENT)
    return design


def set_rcrds(
    design: "Design", records: Optional[Mapping[str, str]] = None, **kwargs
) -> "Design":
    """
    Record factors measured on units, given as record=unit
    """
    prov = design.provenance
    for record, unit in _entries(records, kwargs):
        if not prov.has_factor(unit):
            raise UnknownUnitError(f"Record {record!r} refers to unknown unit {unit!r}", name=unit)
        target = prov.factor(unit)
        if target.role != Role.UNIT:
            raise TargetNotAUnitError(
                f"Record {record!r} must be measured on a unit, {unit!r} is {target.role.value}",
                name=unit,
                role=target.role.value,
            )
        node = prov.add_factor(record, Role.RECORD, indexed=False, value_type="dbl")
        prov.link_factors(target.id, node.id, EdgeKind.RECORDS)
    return design


def set_rcrds_of(
    design: "Design", records: Optional[Mapping[str, Iterable[str]]] = None, **kwargs
) -> "Design":
    """
    Same as set_rcrds with unit=[records]
    """
    for unit, names in _entries(records, kwargs):
        if isinstance(names, str):
            names = [names]
        set_rcrds(design, {name: unit for name in names})
    return design


def trts_level_table(design: "Design", names: Optional[Iterable[str]] = None) -> pd.DataFrame:
    """
    Treatment combinations as level ids, one column per treatment factor.

    Treatment factors are crossed with the first declared factor varying fastest; a conditioned
    factor is expanded together with its parent, per parent level.
    :param names: restrict to these treatment factors
    """
    prov = design.provenance
    trts = prov.factors(Role.TREATMENT)
    if names is not None:
        wanted = set(names)
        trts = [factor for factor in trts if factor.name in wanted]
    if not trts:
        raise NoTreatmentsError("The design has no treatment factors")
    selected = {factor.id for factor in trts}

    groups: List[Tuple[List[int], List[Tuple[int, ...]]]] = []
    for factor in trts:
        if factor.conditioned_on in selected:
            continue
        members = [factor.id]
        rows = [(lid,) for lid in (level.id for level in prov.levels(factor.id))]
        for child in trts:
            if child.conditioned_on not in members or child.id in members:
                continue
            at = members.index(child.conditioned_on)
            rows = [
                row + (lid,)
                for row in rows
                for lid in prov.level_graph.successors(row[at])
                if prov.level(lid).factor == child.id
            ]
            members.append(child.id)
        groups.append((members, rows))

    columns = [factor.id for factor in trts]
    records = []
    for combo in itertools.product(*(rows for _, rows in reversed(groups))):
        by_factor = {}
        for (members, _), row in zip(reversed(groups), combo):
            by_factor.update(zip(members, row))
        records.append([by_factor[fid] for fid in columns])
    return pd.DataFrame(records, columns=[factor.name for factor in trts])


def trts_table(design: "Design") -> pd.DataFrame:
    """
    Full set of treatment combinations with their level values
    """
    prov = design.provenance
    table = trts_level_table(design)
    return table.apply(lambda column: column.map(lambda lid: level_value(prov, int(lid))))
