import inspect
import math
import numbers
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.constants import AUTOFILL_STREAM, SIMULATION_STREAM
from desgraph.exceptions.exceptions import (
    BadNameError,
    InconsistentCensorError,
    ShapeMismatchError,
    UnknownProcessError,
    UnknownRecordColumnError,
)
from desgraph.models import LevelsRule, RangeRule, Role, ValidationRule, ValueTypeRule
from desgraph.records import integer_bounds
from desgraph.rng import env_seed, resolve_seed, stream
from desgraph.table import DesignTable, serve_table

if TYPE_CHECKING:
    from desgraph.design import Design

MULTI_PREFIX = "."
# spread of one-sided autofill values relative to the size of the bound
EFFECT_SCALE = 0.1


class ProcessKind(str, Enum):
    SINGLE = "single"
    MULTI = "multi"


class TableView(object):
    """
    Read-only column access for process bodies: view["trt"] or view.trt, and view.n rows
    """

    def __init__(self, frame: pd.DataFrame):
        self._columns = {}
        for name in frame.columns:
            values = frame[name].to_numpy(copy=True)
            values.setflags(write=False)
            self._columns[name] = values
        self.n = len(frame)

    @property
    def columns(self) -> List[str]:
        return list(self._columns)

    def __getitem__(self, name: str) -> np.ndarray:
        return self._columns[name]

    def __getattr__(self, name: str) -> np.ndarray:
        try:
            return self.__dict__["_columns"][name]
        except KeyError:
            raise AttributeError(name)


@dataclass(frozen=True)
class SimProcess:
    name: str
    body: Callable[..., Any]
    kind: ProcessKind
    params: Dict[str, Any] = field(default_factory=dict)
    # records a multi-record process declares it produces
    outputs: Tuple[str, ...] = ()


@dataclass(frozen=True)
class CensorSpec:
    mode: str = "missing"
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if self.mode not in ("none", "missing", "clamp"):
            raise ValueError(f"Censor mode must be none, missing or clamp, got {self.mode!r}")


@dataclass(frozen=True)
class Invocation:
    params: Dict[str, Any] = field(default_factory=dict)
    censor: Any = "missing"


def with_params(censor: Any = "missing", **params) -> Invocation:
    """
    Parameters for one simulate_rcrds run of a process
    :param censor: "missing", "none", (lower, upper) to clamp, a lower clamp bound, a
        CensorSpec, or for multi-record processes a dict of these per record
    """
    return Invocation(params=params, censor=censor)


def _defaults(body: Callable) -> Dict[str, Any]:
    parameters = list(inspect.signature(body).parameters.values())[2:]
    return {p.name: p.default for p in parameters if p.default is not inspect.Parameter.empty}


def _record_names(design: "Design") -> List[str]:
    return [node.name for node in design.provenance.factors(Role.RECORD)]


def simulate_process(
    design: "Design", processes: Optional[Mapping[str, Any]] = None, **kwargs
) -> "Design":
    """
    Register simulation processes; a name matching a record makes a single-record process,
    a name starting with "." a multi-record process. Bodies are called as f(view, rng, **params).

    A value is the body itself, or (body, outputs) to declare the records a multi-record
    process produces.
    """
    records = set(_record_names(design))
    for name, value in list((processes or {}).items()) + list(kwargs.items()):
        body, outputs = (value if isinstance(value, tuple) else (value, ()))
        if name.startswith(MULTI_PREFIX):
            kind = ProcessKind.MULTI
            for output in outputs:
                if output not in records:
                    raise UnknownRecordColumnError(
                        f"Process {name!r} declares {output!r} which is not a record", name=output
                    )
        elif name in records:
            kind = ProcessKind.SINGLE
        else:
            raise BadNameError(
                f"Process {name!r} neither names a record nor starts with {MULTI_PREFIX!r}", name=name
            )
        if name in design.processes:
            logger.debug(f"Process {name} is replaced")
        design.processes[name] = SimProcess(
            name=name, body=body, kind=kind, params=_defaults(body), outputs=tuple(outputs)
        )
    return design


def _rule_of(rules: Sequence[ValidationRule], record: str, kind) -> Optional[Any]:
    for rule in rules:
        if rule.record == record and isinstance(rule.rule, kind):
            return rule.rule
    return None


def _censor_spec(value: Any) -> CensorSpec:
    if isinstance(value, CensorSpec):
        return value
    if value is None or value == "none":
        return CensorSpec("none")
    if value == "missing":
        return CensorSpec("missing")
    if isinstance(value, (tuple, list)) and len(value) == 2:
        return CensorSpec("clamp", value[0], value[1])
    if isinstance(value, numbers.Real):
        return CensorSpec("clamp", lower=value)
    raise ValueError(f"Unknown censor {value!r}")


def _clamp_bounds(record: str, spec: CensorSpec, rule: Optional[RangeRule]) -> Tuple[float, float]:
    lower = spec.lower if spec.lower is not None else (rule.min if rule else None)
    upper = spec.upper if spec.upper is not None else (rule.max if rule else None)
    lower = -math.inf if lower is None else lower
    upper = math.inf if upper is None else upper
    if lower > upper:
        raise InconsistentCensorError(f"Clamp bounds of {record!r} are reversed", record=record)
    if rule is not None:
        if (rule.min is not None and lower < rule.min) or (rule.max is not None and upper > rule.max):
            raise InconsistentCensorError(
                f"Clamp bounds [{lower}, {upper}] of {record!r} leave its expected values", record=record
            )
    return lower, upper


def censor_values(
    record: str, values: np.ndarray, spec: CensorSpec, rules: Sequence[ValidationRule]
) -> np.ndarray:
    """
    Out of range values become missing (or are clamped to the bounds); values outside an
    allowed level set and non-integral values of an integer record become missing.
    Records without numeric rules pass through unchanged unless clamped.
    """
    if spec.mode == "none":
        return values
    levels = _rule_of(rules, record, LevelsRule)
    if levels is not None:
        if spec.mode == "clamp":
            raise InconsistentCensorError(f"{record!r} has levels, it can not be clamped", record=record)
        return np.array([v if str(v) in levels.allowed else None for v in values], dtype=object)
    span = _rule_of(rules, record, RangeRule)
    kind = _rule_of(rules, record, ValueTypeRule)
    integer = kind is not None and kind.valuetype == "integer"
    if spec.mode != "clamp" and span is None and not integer:
        return values
    values = np.asarray(values, dtype=float)
    if spec.mode == "clamp":
        values = np.clip(values, *_clamp_bounds(record, spec, span))
    keep = np.ones(len(values), dtype=bool)
    if span is not None and spec.mode != "clamp":
        if span.min is not None:
            keep &= (values >= span.min) if span.min_inclusive else (values > span.min)
        if span.max is not None:
            keep &= (values <= span.max) if span.max_inclusive else (values < span.max)
    if integer:
        keep &= np.mod(values, 1) == 0
    return np.where(keep, values, np.nan)


def _invocations(design: "Design", invocations: Optional[Mapping[str, Any]], kwargs) -> Dict[str, Invocation]:
    given = dict(invocations or {})
    given.update(kwargs)
    if not given:
        given = {name: Invocation() for name in design.processes}
    out = {}
    for name, value in given.items():
        if name not in design.processes:
            raise UnknownProcessError(f"Process {name!r} is not registered", name=name)
        if value is None:
            value = Invocation()
        elif isinstance(value, Mapping):
            value = Invocation(params=dict(value))
        out[name] = value
    return out


def _outputs(process: SimProcess, result: Any, n: int, records: Sequence[str]) -> Dict[str, np.ndarray]:
    if process.kind == ProcessKind.SINGLE:
        columns = {process.name: result}
    elif isinstance(result, pd.DataFrame):
        columns = {name: result[name].to_numpy() for name in result.columns}
    elif isinstance(result, Mapping):
        columns = dict(result)
    else:
        raise ShapeMismatchError(
            f"Process {process.name!r} must return columns by record name", name=process.name
        )
    out = {}
    for name, values in columns.items():
        if name not in records:
            raise UnknownRecordColumnError(
                f"Process {process.name!r} returned {name!r} which is not a record", name=name
            )
        values = np.asarray(values)
        if values.shape != (n,):
            raise ShapeMismatchError(
                f"Process {process.name!r} returned {values.size} values for {name!r}, expected {n}",
                name=process.name,
            )
        out[name] = values
    return out


def simulate_rcrds(
    design: "Design",
    invocations: Optional[Mapping[str, Any]] = None,
    seed: Optional[int] = None,
    **kwargs,
) -> DesignTable:
    """
    Run simulation processes against the served table and fill in their records.

    Every process reads the table as served, without records simulated by other processes.
    :param invocations: process name -> with_params(...) (or a dict of parameters); all
        registered processes run with defaults when nothing is given
    """
    pristine = serve_table(design)
    seed = resolve_seed(seed, design.seed, env_seed())
    view = TableView(pristine.frame)
    records = pristine.names(Role.RECORD)
    out = pristine.model_copy(update={"seed": seed})
    for index, (name, invocation) in enumerate(_invocations(design, invocations, kwargs).items()):
        process = design.processes[name]
        params = {**process.params, **invocation.params}
        result = process.body(view, stream(seed, SIMULATION_STREAM, index), **params)
        columns = _outputs(process, result, view.n, records)
        for record, values in columns.items():
            censor = invocation.censor
            if isinstance(censor, Mapping):
                censor = censor.get(record, "missing")
            censored = censor_values(record, values, _censor_spec(censor), design.rules)
            out = out.with_values(record, censored)
        logger.debug(f"Simulated {list(columns)} with process {name}")
    return out


def _unit_groups(table: DesignTable, unit: str) -> Tuple[List[str], np.ndarray]:
    keys = [name for name in table.names() if name in table.unit_ancestry.get(unit, [])] + [unit]
    groups = table.frame.groupby(keys, sort=False).ngroup().to_numpy()
    return keys, groups


def _influences(table: DesignTable, unit: str, keys: List[str]) -> List[str]:
    frame = table.frame
    names = [n for n in table.names(Role.UNIT) + table.names(Role.TREATMENT) if n != unit]
    return [n for n in names if frame.groupby(keys, sort=False)[n].nunique().max() <= 1]


def _expit(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(z / 2.0))


def _to_range(z: np.ndarray, rule: Optional[RangeRule]) -> np.ndarray:
    if rule is None:
        return z
    if rule.min is not None and rule.max is not None:
        width = rule.max - rule.min
        if width == 0:
            return np.full(len(z), rule.min, dtype=float)
        eps = 1e-6 * width
        return rule.min + eps + (width - 2 * eps) * _expit(z)
    scale = max(1.0, EFFECT_SCALE * abs(rule.min if rule.min is not None else rule.max))
    lift = np.logaddexp(0.0, z) * scale + 1e-6 * scale
    return rule.min + lift if rule.min is not None else rule.max - lift


def autofill_rcrds(
    design: "Design", seed: Optional[int] = None, label_nested: Any = None
) -> DesignTable:
    """
    Fill every record with random values that keep to its expected values.

    Values are drawn per level of the record's unit from a latent score made of noise plus
    effects of up to two factors that are constant within that unit, then mapped into the
    expected range; records with allowed levels draw them with random weights.
    :param label_nested: as in serve_table, only the labels of the returned table change
    """
    table = serve_table(design)
    seed = resolve_seed(seed, design.seed, env_seed())
    served = serve_table(design, label_nested=label_nested) if label_nested else table
    out = served.model_copy(update={"seed": seed})
    for index, record in enumerate(table.names(Role.RECORD)):
        rng = stream(seed, AUTOFILL_STREAM, index)
        unit = table.record_units[record]
        keys, groups = _unit_groups(table, unit)
        n_units = int(groups.max()) + 1 if len(groups) else 0

        levels = _rule_of(design.rules, record, LevelsRule)
        kind = _rule_of(design.rules, record, ValueTypeRule)
        if levels is not None or (kind is not None and kind.valuetype == "text"):
            allowed = levels.allowed if levels is not None else [f"{record}{i}" for i in (1, 2, 3)]
            weights = rng.dirichlet(np.ones(len(allowed)))
            drawn = rng.choice(np.array(allowed, dtype=object), size=n_units, p=weights)
            out = out.with_values(record, drawn[groups])
            continue

        candidates = _influences(table, unit, keys)
        k = min(int(rng.integers(0, 3)), len(candidates))
        chosen = [str(c) for c in rng.choice(candidates, size=k, replace=False)] if k else []
        first = pd.Series(groups).drop_duplicates().index.to_numpy()
        z = rng.standard_normal(n_units)
        for name in chosen:
            codes, uniques = pd.factorize(table.frame[name].to_numpy()[first])
            effects = rng.standard_normal(len(uniques))
            z = z + effects[codes]
        span = _rule_of(design.rules, record, RangeRule)
        values = _to_range(z, span)
        if kind is not None and kind.valuetype == "integer":
            values = np.clip(np.round(values), *integer_bounds(span))
        out = out.with_values(record, values[groups])
        logger.debug(f"Autofilled {record} over {n_units} {unit} levels, influenced by {chosen}")
    return out
