import io
from typing import TYPE_CHECKING, Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from desgraph.assignment import allot_trts, assign_trts, treatment_level
from desgraph.constants import (
    CSV_LINE_TERMINATOR,
    DEFAULT_MAX_ROWS,
    DEFAULT_ORDER,
    DEFAULT_TITLE,
    RECORD_PLACEHOLDER,
)
from desgraph.exceptions.exceptions import (
    NoAllotmentError,
    NotConvertibleError,
    UnassignedTreatmentsError,
    UnknownColumnError,
)
from desgraph.factors import level_value
from desgraph.models import ColumnInfo, FactorNode, LevelNode, Role, ValidationRule
from desgraph.provenance import Provenance
from desgraph.utils import format_cell, is_missing, is_number

if TYPE_CHECKING:
    from desgraph.design import Design

NOT_CONVERTIBLE = "The graph cannot be converted to a table format."

Selector = Union[bool, str, Iterable[str], None]

# column types printed left aligned within their data width
TEXT_TYPES = ("chr", "fct", "lgl")


class DesignTable(BaseModel):
    """
    Served design: one row per level of the finest unit, one column per factor in
    declaration order. Values are read through `data`, which returns a copy.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    title: str = DEFAULT_TITLE
    frame: pd.DataFrame = Field(repr=False)
    columns: List[ColumnInfo]
    rules: List[ValidationRule] = []
    seed: Optional[int] = None
    # record name -> unit it is measured on
    record_units: Dict[str, str] = {}
    # unit name -> unit names above it, in declaration order
    unit_ancestry: Dict[str, List[str]] = {}

    @property
    def data(self) -> pd.DataFrame:
        return self.frame.copy()

    @property
    def shape(self):
        return self.frame.shape

    def __len__(self):
        return len(self.frame)

    def __str__(self):
        return self.render()

    def column(self, name: str) -> ColumnInfo:
        for info in self.columns:
            if info.name == name:
                return info
        raise UnknownColumnError(f"Column {name!r} is not in the table", name=name)

    def names(self, role: Optional[Role] = None) -> List[str]:
        return [info.name for info in self.columns if role is None or info.role == role]

    def render(self, max_rows: int = DEFAULT_MAX_ROWS) -> str:
        return render_table(self, max_rows=max_rows)

    def export_frame(self) -> pd.DataFrame:
        """
        Data as written to files: unfilled record cells become missing
        """
        out = self.data
        for name in self.names(Role.RECORD):
            out[name] = out[name].map(lambda v: None if v == RECORD_PLACEHOLDER else v)
        return out

    def to_csv(self, path=None) -> Optional[str]:
        """
        RFC 4180 CSV with a header of column names; returns the text when no path is given
        """
        buffer = io.StringIO()
        self.export_frame().to_csv(buffer, index=False, na_rep="", lineterminator=CSV_LINE_TERMINATOR)
        text = buffer.getvalue()
        if path is None:
            return text
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return None

    def with_values(self, name: str, values: Sequence[Any]) -> "DesignTable":
        """
        Copy of the table with one column replaced
        """
        info = self.column(name)
        frame = self.data
        frame[name] = list(values)
        present = [v for v in frame[name] if not is_missing(v) and v != RECORD_PLACEHOLDER]
        value_type = "dbl" if all(is_number(v) for v in present) else "chr"
        columns = [
            c if c.name != name else info.model_copy(update={"value_type": value_type})
            for c in self.columns
        ]
        return self.model_copy(update={"frame": frame, "columns": columns})


def _selection(prov: Provenance, label_nested: Selector) -> Set[int]:
    if label_nested is None or label_nested is False:
        return set()
    if label_nested is True:
        return {node.id for node in prov.factors()}
    if isinstance(label_nested, str):
        label_nested = [label_nested]
    return {prov.factor(name).id for name in label_nested}


def finest_unit(prov: Provenance) -> FactorNode:
    """
    The unit that every other unit reaches through unit-to-unit edges
    """
    units = prov.factors(Role.UNIT)
    sinks = [node for node in units if not prov.children(node.id, Role.UNIT)]
    if len(sinks) != 1:
        raise NotConvertibleError(NOT_CONVERTIBLE)
    (finest,) = sinks
    above = {node.id for node in prov.unit_ancestors(finest.id)}
    if any(node.id != finest.id and node.id not in above for node in units):
        raise NotConvertibleError(NOT_CONVERTIBLE)
    return finest


def _distinct_value(prov: Provenance, level: LevelNode):
    # nested value levels carry "parent:value" labels to stay distinct
    if not prov.factor(level.factor).indexed and level.label != str(level.value):
        return level.label
    return level_value(prov, level)


def _nested_labels(prov: Provenance, factor: FactorNode) -> Dict[int, Any]:
    levels = prov.levels(factor.id)
    if factor.nesting_parent is None:
        return {level.id: _distinct_value(prov, level) for level in levels}
    groups: Dict[Optional[int], List[LevelNode]] = {}
    for level in levels:
        groups.setdefault(prov.ancestor_level(level.id, factor.nesting_parent), []).append(level)
    width = len(str(max(len(members) for members in groups.values())))
    out = {}
    for members in groups.values():
        for i, level in enumerate(members, start=1):
            out[level.id] = f"{factor.name}{i:0{width}d}" if factor.indexed else level.value
    return out


def _record_unit(prov: Provenance, record: FactorNode) -> FactorNode:
    (unit,) = prov.parents(record.id, Role.UNIT)
    return unit


def serve_table(design: "Design", label_nested: Selector = None) -> DesignTable:
    """
    Reconcile the level graph into one row per level of the finest unit
    :param label_nested: factors shown with labels restarting within each parent level;
        True selects every factor
    """
    prov = design.provenance
    finest = finest_unit(prov)
    selected = _selection(prov, label_nested)
    rows = [level.id for level in prov.levels(finest.id)]

    unassigned = []
    data: Dict[str, list] = {}
    columns: List[ColumnInfo] = []
    record_units: Dict[str, str] = {}
    for factor in prov.factors():
        if factor.role == Role.UNIT:
            shown = (
                _nested_labels(prov, factor)
                if factor.id in selected
                else {level.id: _distinct_value(prov, level) for level in prov.levels(factor.id)}
            )
            cells = []
            for row in rows:
                lid = prov.ancestor_level(row, factor.id)
                if lid is None:
                    raise NotConvertibleError(NOT_CONVERTIBLE)
                cells.append(shown[lid])
            data[factor.name] = cells
            columns.append(
                ColumnInfo(
                    name=factor.name,
                    role=factor.role,
                    levels=len(prov.levels(factor.id)),
                    value_type=factor.value_type,
                )
            )
        elif factor.role == Role.TREATMENT:
            cells = []
            for row in rows:
                lid = treatment_level(design, row, factor)
                if lid is None:
                    unassigned.append(factor.name)
                    break
                cells.append(level_value(prov, lid))
            data[factor.name] = cells
            columns.append(
                ColumnInfo(
                    name=factor.name,
                    role=factor.role,
                    levels=len(prov.levels(factor.id)),
                    value_type=factor.value_type,
                )
            )
        else:
            unit = _record_unit(prov, factor)
            record_units[factor.name] = unit.name
            data[factor.name] = [RECORD_PLACEHOLDER] * len(rows)
            columns.append(
                ColumnInfo(
                    name=factor.name,
                    role=factor.role,
                    levels=len(prov.levels(unit.id)),
                    value_type=factor.value_type,
                )
            )
    if unassigned:
        raise UnassignedTreatmentsError(
            f"Treatments {unassigned} are not assigned to units", names=unassigned
        )
    ancestry = {
        unit.name: [node.name for node in prov.unit_ancestors(unit.id)]
        for unit in prov.factors(Role.UNIT)
    }
    return DesignTable(
        title=design.title,
        frame=pd.DataFrame(data, columns=[info.name for info in columns]),
        columns=columns,
        rules=[rule.model_copy(deep=True) for rule in design.rules],
        seed=design.seed,
        record_units=record_units,
        unit_ancestry=ancestry,
    )


def allot_table(
    design: "Design",
    *formulas: str,
    order: Union[str, Sequence[str]] = DEFAULT_ORDER,
    seed: Optional[int] = None,
    constrain: Optional[Mapping[str, Union[str, Sequence[str]]]] = None,
    label_nested: Selector = None,
) -> DesignTable:
    """
    allot_trts, assign_trts and serve_table in one call
    """
    if not formulas:
        raise NoAllotmentError("allot_table needs at least one formula")
    allot_trts(design, *formulas)
    assign_trts(design, order=order, seed=seed, constrain=constrain)
    return serve_table(design, label_nested=label_nested)


def _pad(cells: List[str], header: List[str], value_type: str) -> List[str]:
    data_width = max((len(c) for c in cells), default=0)
    width = max([data_width] + [len(h) for h in header])
    if value_type in TEXT_TYPES:
        cells = [c.ljust(data_width) for c in cells]
    return [h.rjust(width) for h in header] + [c.rjust(width) for c in cells]


def render_table(t: DesignTable, max_rows: int = DEFAULT_MAX_ROWS) -> str:
    """
    Text rendering: title, dimensions, header of names, roles and types, then up to
    `max_rows` rows and a count of the rows left out
    """
    n_rows, n_cols = t.shape
    lines = [f"# {t.title}", f"# An edibble: {n_rows} x {n_cols}"]
    shown = t.frame.head(max(max_rows, 0))
    index = [str(i) for i in range(1, len(shown) + 1)]
    index_width = max((len(i) for i in index), default=1)
    blocks = [[" " * index_width] * 3 + [i.rjust(index_width) for i in index]]
    for info in t.columns:
        cells = [format_cell(v) for v in shown[info.name]]
        blocks.append(_pad(cells, [info.name, info.role_tag, f"<{info.value_type}>"], info.value_type))
    for parts in zip(*blocks):
        lines.append(" ".join(parts).rstrip())
    if n_rows > len(shown):
        lines.append(f"# i {n_rows - len(shown)} more rows")
    return "\n".join(lines)


def _column_type(series: pd.Series) -> str:
    if pd.api.types.is_bool_dtype(series):
        return "lgl"
    if pd.api.types.is_integer_dtype(series):
        return "int"
    if pd.api.types.is_float_dtype(series):
        return "dbl"
    if isinstance(series.dtype, pd.CategoricalDtype):
        return "fct"
    return "chr"


def _names(selector: Union[str, Iterable[str], None]) -> List[str]:
    if selector is None:
        return []
    if isinstance(selector, str):
        return [selector]
    return list(selector)


def ingest_table(
    data: Union[pd.DataFrame, Mapping[str, Sequence[Any]]],
    units: Union[str, Iterable[str], None] = None,
    trts: Union[str, Iterable[str], None] = None,
    rcrds: Union[str, Iterable[str], None] = None,
    title: Optional[str] = None,
) -> DesignTable:
    """
    Wrap existing rectangular data as a design table; columns not selected keep no role
    """
    frame = pd.DataFrame(data).reset_index(drop=True)
    roles: Dict[str, Role] = {}
    for role, selector in ((Role.UNIT, units), (Role.TREATMENT, trts), (Role.RECORD, rcrds)):
        for name in _names(selector):
            if name not in frame.columns:
                raise UnknownColumnError(f"Column {name!r} is not in the data", name=name)
            roles[name] = role
    columns = [
        ColumnInfo(
            name=str(name),
            role=roles.get(name),
            levels=int(frame[name].nunique(dropna=True)),
            value_type=_column_type(frame[name]),
        )
        for name in frame.columns
    ]
    return DesignTable(title=title or DEFAULT_TITLE, frame=frame, columns=columns)
