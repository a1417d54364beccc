import operator
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict

from desgraph.constants import DEFAULT_ORDER
from desgraph.design import Design, design
from desgraph.dsl.ast_nodes import (
    AllotDecl,
    ConstrainDecl,
    ExpectDecl,
    LabelNestedDecl,
    OrderDecl,
    SeedDecl,
    SpecAst,
)
from desgraph.exceptions.exceptions import DesignError
from desgraph.models import AllotmentKind, Role
from desgraph.records import RuleExpr, export_design, rcrd
from desgraph.table import DesignTable

EXIT_OK = 0
EXIT_DESIGN_ERROR = 1
EXIT_PARSE_ERROR = 2

COMPARATORS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


class RunFlags(BaseModel):
    """
    Options of one spec run; every path is optional
    """

    out: Optional[str] = None
    export: Optional[str] = None
    overwrite: bool = False
    # ("factors" | "levels", file); a .json file gets the JSON document, anything else DOT
    graph: Optional[Tuple[str, str]] = None
    tree: bool = False
    seed: Optional[int] = None
    autofill: bool = False


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    status: int
    table: Optional[DesignTable] = None
    tree: Optional[str] = None
    paths: List[str] = []
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == EXIT_OK


def _rule_expr(item: ExpectDecl) -> RuleExpr:
    builder = rcrd(item.record)
    if item.op == "in":
        return builder.isin(item.allowed)
    return COMPARATORS[item.op](builder, item.value)


def build_design(spec: SpecAst) -> Design:
    """
    Declare factors, records, expected values and allotments of a spec; nothing is assigned yet
    """
    out = design(spec.title)
    for block in spec.blocks:
        if block.kind == "units":
            out.set_units({item.name: item.spec for item in block.items})
        elif block.kind == "trts":
            out.set_trts({item.name: item.spec for item in block.items})
        elif block.kind == "rcrds":
            out.set_rcrds({item.name: item.unit for item in block.items})
        elif block.kind == "expect":
            out.expect_rcrds(*[_rule_expr(item) for item in block.items])
        elif block.kind == "allot":
            for item in block.items:
                _allot(out, item)
    return out


def _allot(d: Design, item: AllotDecl):
    if d.provenance.factor(item.lhs[0]).role == Role.UNIT:
        d.allot_units(item.formula)
    else:
        d.allot_trts(item.formula)


def _assign_options(spec: SpecAst):
    orders: Dict[str, Union[str, List[str]]] = {}
    seed: Optional[int] = None
    constrain: Dict[str, List[str]] = {}
    for item in spec.items("assign"):
        if isinstance(item, OrderDecl):
            orders[item.target] = list(item.names)
        elif isinstance(item, SeedDecl):
            seed = item.value
        elif isinstance(item, ConstrainDecl):
            constrain[item.unit] = list(item.names)
    return orders, seed, constrain


def assign_spec(d: Design, spec: SpecAst, seed: Optional[int] = None) -> Design:
    """
    Run the assign block: unit allotments first, then treatment allotments.
    A spec without an assign block leaves the design unassigned.
    :param seed: overrides the seed of the spec
    """
    if not spec.items("assign"):
        return d
    orders, spec_seed, constrain = _assign_options(spec)
    seed = seed if seed is not None else spec_seed
    kinds = {allotment.kind for allotment in d.allotments}
    if AllotmentKind.UNIT_TO_UNIT in kinds:
        d.assign_units(order=orders.get("units", DEFAULT_ORDER), seed=seed)
        seed = d.seed
    if AllotmentKind.TRTS_TO_UNIT in kinds:
        d.assign_trts(order=orders.get("trts", DEFAULT_ORDER), seed=seed, constrain=constrain or None)
    return d


def _label_nested(spec: SpecAst):
    selected: Union[bool, List[str], None] = None
    for item in spec.items("output"):
        if isinstance(item, LabelNestedDecl):
            selected = True if item.names is True else list(item.names)
    return selected


def _write(path: Union[str, os.PathLike], text: str) -> str:
    target = Path(path)
    with open(target, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    return str(target)


def run_spec(spec: SpecAst, flags: Optional[RunFlags] = None, **kwargs) -> RunResult:
    """
    Build, assign and serve a parsed spec, then write the requested artifacts.
    Errors of the design pipeline end the run with status 1.
    :param flags: RunFlags, or the same options as keyword arguments
    """
    flags = flags or RunFlags(**kwargs)
    paths: List[str] = []
    try:
        d = assign_spec(build_design(spec), spec, seed=flags.seed)
        tree = d.print_tree() if flags.tree else None
        label_nested = _label_nested(spec)
        if flags.autofill:
            table = d.autofill_rcrds(seed=flags.seed, label_nested=label_nested)
        else:
            table = d.serve_table(label_nested=label_nested)
        if flags.out:
            table.to_csv(flags.out)
            paths.append(str(flags.out))
        if flags.export:
            export_design(table, flags.export, overwrite=flags.overwrite)
            paths.append(str(flags.export))
        if flags.graph:
            which, file = flags.graph
            fmt = "json" if str(file).endswith(".json") else "dot"
            paths.append(_write(file, d.graph_export(which=which, fmt=fmt) + "\n"))
    except DesignError as e:
        logger.error(f"{e.kind}: {e.message}")
        return RunResult(status=EXIT_DESIGN_ERROR, paths=paths, error=f"{e.kind}: {e.message}")
    except (ValueError, OSError) as e:
        logger.error(str(e))
        return RunResult(status=EXIT_DESIGN_ERROR, paths=paths, error=str(e))
    logger.debug(f"Ran spec {spec.title!r}, wrote {paths}")
    return RunResult(status=EXIT_OK, table=table, tree=tree, paths=paths)
