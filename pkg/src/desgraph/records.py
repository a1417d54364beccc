import math
import os
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Optional, Tuple, Union

from loguru import logger

from desgraph.constants import CSV_LINE_TERMINATOR
from desgraph.exceptions.exceptions import (
    ContradictoryBoundsError,
    IoFailureError,
    TargetExistsError,
    UnknownRecordError,
)
from desgraph.models import (
    VALIDATION_RULES,
    ExportManifest,
    FactorNode,
    LevelsRule,
    RangeRule,
    Role,
    RuleKind,
    ValidationRule,
    ValueTypeRule,
)
from desgraph.utils import is_missing, is_number

if TYPE_CHECKING:
    from desgraph.design import Design
    from desgraph.table import DesignTable

DESIGN_FILE = "design.csv"
VALIDATION_FILE = "validation.json"
MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RuleExpr:
    """
    Expected values of one record, before it is attached to a design
    """

    record: str
    rule: RuleKind


class rcrd(object):
    """
    Builder for expected values of a record factor:

    rcrd("yield") > 0, rcrd("yield") <= 10, rcrd("rainfall").isin(["high", "low"])
    """

    def __init__(self, name: str):
        self.name = name

    def __repr__(self):
        return f"rcrd({self.name!r})"

    def __gt__(self, other) -> RuleExpr:
        return RuleExpr(self.name, RangeRule(min=other, min_inclusive=False))

    def __ge__(self, other) -> RuleExpr:
        return RuleExpr(self.name, RangeRule(min=other, min_inclusive=True))

    def __lt__(self, other) -> RuleExpr:
        return RuleExpr(self.name, RangeRule(max=other, max_inclusive=False))

    def __le__(self, other) -> RuleExpr:
        return RuleExpr(self.name, RangeRule(max=other, max_inclusive=True))

    def isin(self, allowed: Iterable[Any]) -> RuleExpr:
        return RuleExpr(self.name, LevelsRule(allowed=[str(v) for v in allowed]))

    def valuetype(self, kind: str) -> RuleExpr:
        return RuleExpr(self.name, ValueTypeRule(valuetype=kind))


def _record(design: "Design", name: str) -> FactorNode:
    prov = design.provenance
    if not prov.has_factor(name) or prov.factor(name).role != Role.RECORD:
        raise UnknownRecordError(f"{name!r} is not a record factor", name=name)
    return prov.factor(name)


def _merge_range(record: str, old: RangeRule, new: RangeRule) -> RangeRule:
    merged = old.model_copy()
    if new.min is not None:
        merged = merged.model_copy(update={"min": new.min, "min_inclusive": new.min_inclusive})
    if new.max is not None:
        merged = merged.model_copy(update={"max": new.max, "max_inclusive": new.max_inclusive})
    return _checked(record, merged)


def _checked(record: str, rule: RangeRule) -> RangeRule:
    if rule.min is None or rule.max is None:
        return rule
    if rule.min > rule.max or (
        rule.min == rule.max and not (rule.min_inclusive and rule.max_inclusive)
    ):
        raise ContradictoryBoundsError(
            f"Expected values of {record!r} are empty: min {rule.min}, max {rule.max}",
            record=record,
        )
    return rule


def integer_bounds(rule: Optional[RangeRule]) -> Tuple[float, float]:
    """
    Smallest and largest integer inside a range rule, infinite when unbounded
    """
    lower, upper = -math.inf, math.inf
    if rule is not None and rule.min is not None:
        lower = math.ceil(rule.min) if rule.min_inclusive else math.floor(rule.min) + 1
    if rule is not None and rule.max is not None:
        upper = math.floor(rule.max) if rule.max_inclusive else math.ceil(rule.max) - 1
    return lower, upper


def _check_integers(record: str, rules: List[ValidationRule]):
    mine = [rule.rule for rule in rules if rule.record == record]
    span = next((rule for rule in mine if isinstance(rule, RangeRule)), None)
    integer = any(isinstance(rule, ValueTypeRule) and rule.valuetype == "integer" for rule in mine)
    if integer and span is not None:
        lower, upper = integer_bounds(span)
        if lower > upper:
            raise ContradictoryBoundsError(
                f"Expected values of {record!r} hold no integer: min {span.min}, max {span.max}",
                record=record,
            )


def expect_rcrds(design: "Design", *rules: RuleExpr) -> "Design":
    """
    Attach expected values to records; one-sided ranges on the same record merge and a
    repeated bound replaces the earlier one. A failing call leaves the design unchanged.
    """
    prov = design.provenance
    merged = list(design.rules)
    for expr in rules:
        record = _record(design, expr.record)
        (unit,) = prov.parents(record.id, Role.UNIT)
        for i, existing in enumerate(merged):
            if existing.record != expr.record or existing.rule.type != expr.rule.type:
                continue
            if isinstance(expr.rule, RangeRule):
                rule = _merge_range(expr.record, existing.rule, expr.rule)
            else:
                rule = expr.rule
            merged[i] = existing.model_copy(update={"rule": rule})
            break
        else:
            rule = _checked(expr.record, expr.rule) if isinstance(expr.rule, RangeRule) else expr.rule
            merged.append(ValidationRule(record=expr.record, unit=unit.name, rule=rule))
    for name in dict.fromkeys(expr.record for expr in rules):
        _check_integers(name, merged)
    design.rules = merged
    return design


def _passes(rule: RuleKind, value: Any) -> bool:
    if isinstance(rule, RangeRule):
        if not is_number(value):
            return False
        if rule.min is not None and (value < rule.min or (value == rule.min and not rule.min_inclusive)):
            return False
        if rule.max is not None and (value > rule.max or (value == rule.max and not rule.max_inclusive)):
            return False
        return True
    if isinstance(rule, LevelsRule):
        return str(value) in rule.allowed
    if rule.valuetype == "numeric":
        return is_number(value)
    if rule.valuetype == "integer":
        return is_number(value) and float(value).is_integer()
    return isinstance(value, str)


def check_value(rules: Iterable[ValidationRule], value: Any) -> bool:
    if is_missing(value):
        return True
    return all(_passes(rule.rule, value) for rule in rules)


def validate_values(design: "Design", record: str, values: Iterable[Any]) -> List[bool]:
    """
    One verdict per value; missing values always pass
    """
    _record(design, record)
    rules = [rule for rule in design.rules if rule.record == record]
    return [check_value(rules, value) for value in values]


def load_rules(path: Union[str, os.PathLike]) -> List[ValidationRule]:
    with open(path, "rb") as f:
        return VALIDATION_RULES.validate_json(f.read())


def _sheets(table: "DesignTable") -> Dict[str, List[str]]:
    sheets: Dict[str, List[str]] = {}
    for name in table.names(Role.RECORD):
        # ingested records are not tied to a unit
        if name in table.record_units:
            sheets.setdefault(table.record_units[name], []).append(name)
    return sheets


def _write_export(table: "DesignTable", target: Path) -> ExportManifest:
    rows: Dict[str, int] = {}
    table.to_csv(target / DESIGN_FILE)
    rows[DESIGN_FILE] = len(table)

    frame = table.export_frame()
    order = table.names()
    for unit, records in _sheets(table).items():
        keys = [name for name in order if name in table.unit_ancestry.get(unit, [])] + [unit]
        sheet = frame[keys + records].drop_duplicates(subset=keys).reset_index(drop=True)
        file = f"sheet_{unit}.csv"
        sheet.to_csv(target / file, index=False, na_rep="", lineterminator=CSV_LINE_TERMINATOR)
        rows[file] = len(sheet)
        logger.debug(f"Wrote {file} with {len(sheet)} rows")

    files = list(rows)
    if table.rules:
        (target / VALIDATION_FILE).write_bytes(VALIDATION_RULES.dump_json(table.rules, indent=2))
        files.append(VALIDATION_FILE)
    manifest = ExportManifest(title=table.title, seed=table.seed, files=files + [MANIFEST_FILE], rows=rows)
    (target / MANIFEST_FILE).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
    return manifest


def export_design(
    table: "DesignTable", path: Union[str, os.PathLike], overwrite: bool = False
) -> ExportManifest:
    """
    Write a served design to a directory: the full table, one data sheet per unit that
    carries records, the expected values of the records and a manifest.

    Files are written to a temporary directory next to the target and moved in place once
    complete, a failed export leaves nothing behind.
    :param overwrite: replace an existing directory
    """
    target = Path(path)
    if target.exists() and not overwrite:
        raise TargetExistsError(f"{target} already exists", path=str(target))
    staging = None
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(prefix=f".{target.name}-", dir=target.parent))
        manifest = _write_export(table, staging)
        if target.exists():
            if target.is_dir():
                shutil.rmtree(target)
            else:
                target.unlink()
        staging.rename(target)
    except OSError as e:
        raise IoFailureError(f"Export to {target} failed: {e}", path=str(target))
    finally:
        if staging is not None and staging.exists():
            shutil.rmtree(staging, ignore_errors=True)
    logger.debug(f"Exported {table.title!r} to {target}")
    return manifest
