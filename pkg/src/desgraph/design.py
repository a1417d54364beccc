import copy
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import pandas as pd

from desgraph import assignment, display, factors, records, simulate, table
from desgraph.constants import DEFAULT_ORDER, DEFAULT_TITLE
from desgraph.models import Allotment, Role, Scalar, ValidationRule
from desgraph.provenance import Provenance

Selector = Union[bool, str, Iterable[str], None]


class Design(object):
    """
    An experimental design: a factor graph and a level graph, the allotments between
    factors, expected values of records and simulation processes.

    Every builder method changes the design in place and returns it, so calls chain:

    design("Calf feeding").set_units(pen=8, calf=nested_in("pen", 10)).set_trts(hay=2)
    """

    def __init__(self, title: Optional[str] = None):
        self.title = title or DEFAULT_TITLE
        self.provenance = Provenance()
        self.allotments: List[Allotment] = []
        self.rules: List[ValidationRule] = []
        self.processes: Dict[str, simulate.SimProcess] = {}
        self.seed: Optional[int] = None

    def __str__(self):
        return self.print_tree()

    def __repr__(self):
        return f"<Design {self.title!r}: {len(self.provenance.factors())} factors>"

    def __add__(self, other: "Design") -> "Design":
        return combine(self, other)

    def copy(self) -> "Design":
        other = Design(self.title)
        other.provenance = self.provenance.copy()
        other.allotments = list(self.allotments)
        other.rules = [rule.model_copy(deep=True) for rule in self.rules]
        other.processes = copy.copy(self.processes)
        other.seed = self.seed
        return other

    # inspection

    def factor_names(self, role: Optional[Role] = None) -> List[str]:
        return [node.name for node in self.provenance.factors(role)]

    def levels_of(self, name: str) -> List[Scalar]:
        """
        Level values of a factor as they appear in tables
        """
        prov = self.provenance
        return [factors.level_value(prov, level) for level in prov.levels(prov.factor(name).id)]

    def print_tree(self) -> str:
        return display.print_tree(self)

    def graph_export(self, which: str = "factors", fmt: str = "dot") -> str:
        return display.graph_export(self, which=which, fmt=fmt)

    # factors

    def set_units(self, specs: Optional[Mapping[str, Any]] = None, **kwargs) -> "Design":
        return factors.set_units(self, specs, **kwargs)

    def set_trts(self, specs: Optional[Mapping[str, Any]] = None, **kwargs) -> "Design":
        return factors.set_trts(self, specs, **kwargs)

    def set_rcrds(self, mapping: Optional[Mapping[str, str]] = None, **kwargs) -> "Design":
        return factors.set_rcrds(self, mapping, **kwargs)

    def set_rcrds_of(
        self, mapping: Optional[Mapping[str, Iterable[str]]] = None, **kwargs
    ) -> "Design":
        return factors.set_rcrds_of(self, mapping, **kwargs)

    def trts_table(self) -> pd.DataFrame:
        return factors.trts_table(self)

    # links

    def allot_trts(self, *formulas: str) -> "Design":
        return assignment.allot_trts(self, *formulas)

    def allot_units(self, *formulas: str) -> "Design":
        return assignment.allot_units(self, *formulas)

    def assign_trts(
        self,
        order: Union[str, Sequence[str]] = DEFAULT_ORDER,
        seed: Optional[int] = None,
        constrain: Optional[Mapping[str, Union[str, Sequence[str]]]] = None,
    ) -> "Design":
        return assignment.assign_trts(self, order=order, seed=seed, constrain=constrain)

    def assign_units(
        self,
        order: Union[str, Sequence[str]] = DEFAULT_ORDER,
        seed: Optional[int] = None,
        constrain: Optional[Mapping[str, Union[str, Sequence[str]]]] = None,
    ) -> "Design":
        return assignment.assign_units(self, order=order, seed=seed, constrain=constrain)

    # tables

    def serve_table(self, label_nested: Selector = None) -> "table.DesignTable":
        return table.serve_table(self, label_nested=label_nested)

    def allot_table(
        self,
        *formulas: str,
        order: Union[str, Sequence[str]] = DEFAULT_ORDER,
        seed: Optional[int] = None,
        constrain: Optional[Mapping[str, Union[str, Sequence[str]]]] = None,
        label_nested: Selector = None,
    ) -> "table.DesignTable":
        return table.allot_table(
            self,
            *formulas,
            order=order,
            seed=seed,
            constrain=constrain,
            label_nested=label_nested,
        )

    # records

    def expect_rcrds(self, *rules: "records.RuleExpr") -> "Design":
        return records.expect_rcrds(self, *rules)

    def validate_values(self, record: str, values: Iterable[Any]) -> List[bool]:
        return records.validate_values(self, record, values)

    def export_design(self, path, overwrite: bool = False, label_nested: Selector = None):
        return records.export_design(
            self.serve_table(label_nested=label_nested), path, overwrite=overwrite
        )

    # simulation

    def simulate_process(
        self, processes: Optional[Mapping[str, Any]] = None, **kwargs
    ) -> "Design":
        return simulate.simulate_process(self, processes, **kwargs)

    def simulate_rcrds(
        self,
        invocations: Optional[Mapping[str, Any]] = None,
        seed: Optional[int] = None,
        **kwargs,
    ) -> "table.DesignTable":
        return simulate.simulate_rcrds(self, invocations, seed=seed, **kwargs)

    def autofill_rcrds(
        self, seed: Optional[int] = None, label_nested: Selector = None
    ) -> "table.DesignTable":
        return simulate.autofill_rcrds(self, seed=seed, label_nested=label_nested)


def design(title: Optional[str] = None) -> Design:
    """
    Start a new, empty design
    :param title: shown by every renderer, defaults to DEFAULT_TITLE
    """
    return Design(title)


def combine(a: Design, b: Design) -> Design:
    """
    Union of two designs with disjoint factor names; the title of `a` is kept and the
    allotments of `b` follow those of `a`
    """
    out = Design(a.title)
    out.provenance = a.provenance.merged(b.provenance)
    out.allotments = list(a.allotments) + list(b.allotments)
    out.rules = [rule.model_copy(deep=True) for rule in a.rules + b.rules]
    out.processes = {**b.processes, **a.processes}
    out.seed = a.seed if a.seed is not None else b.seed
    return out
