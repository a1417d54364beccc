from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.constants import ASSIGNMENT_STREAM, DEFAULT_ORDER
from desgraph.exceptions.exceptions import (
    ConstraintRefersToNonAncestorError,
    DuplicateAllotmentError,
    LengthMismatchError,
    NoAllotmentError,
    RoleMismatchError,
    SelfAllotmentError,
    UnassignedTreatmentsError,
)
from desgraph.factors import level_value, trts_level_table
from desgraph.models import Allotment, AllotmentKind, EdgeKind, FactorNode, Role
from desgraph.orderings import get_ordering
from desgraph.provenance import Provenance
from desgraph.rng import env_seed, resolve_seed, stream
from desgraph.utils import parse_formula

if TYPE_CHECKING:
    from desgraph.design import Design

# units table column holding the level id of the alloted unit
ID_COLUMN = "_id"

Constraint = Mapping[str, Union[str, Sequence[str]]]


def _formulas(formulas) -> List[Tuple[List[str], str]]:
    out = []
    for formula in formulas:
        if isinstance(formula, (list, tuple)):
            out.extend(_formulas(formula))
        else:
            out.append(parse_formula(formula))
    return out


def allot_trts(design: "Design", *formulas: str) -> "Design":
    """
    Allot treatments to units: "trt ~ unit" or "trt1:trt2 ~ unit" for jointly alloted treatments
    """
    prov = design.provenance
    alloted = {name for allotment in design.allotments for name in allotment.lhs}
    for lhs, rhs in _formulas(formulas):
        unit = prov.factor(rhs)
        trts = [prov.factor(name) for name in lhs]
        if unit.role != Role.UNIT:
            raise RoleMismatchError(f"Treatments must be alloted to a unit, {rhs!r} is {unit.role.value}", name=rhs)
        for trt in trts:
            if trt.role != Role.TREATMENT:
                raise RoleMismatchError(
                    f"{trt.name!r} is {trt.role.value}, use allot_units to allot units", name=trt.name
                )
            if trt.name in alloted:
                raise DuplicateAllotmentError(f"Treatment {trt.name!r} is already alloted", name=trt.name)
            alloted.add(trt.name)
        for trt in trts:
            prov.link_factors(trt.id, unit.id, EdgeKind.ALLOTS)
        design.allotments.append(Allotment(lhs=lhs, rhs=rhs, kind=AllotmentKind.TRTS_TO_UNIT))
        logger.debug(f"Alloted {':'.join(lhs)} to {rhs}")
    return design


def allot_units(design: "Design", *formulas: str) -> "Design":
    """
    Allot a coarser unit to a finer one: "block ~ row"
    """
    prov = design.provenance
    for lhs, rhs in _formulas(formulas):
        if len(lhs) != 1:
            raise RoleMismatchError(f"Only one unit can be alloted at a time, got {lhs}", name=":".join(lhs))
        (name,) = lhs
        if name == rhs:
            raise SelfAllotmentError(f"Unit {name!r} can not be alloted to itself", name=name)
        source, target = prov.factor(name), prov.factor(rhs)
        for node in (source, target):
            if node.role != Role.UNIT:
                raise RoleMismatchError(f"{node.name!r} is {node.role.value}, not a unit", name=node.name)
        for allotment in design.allotments:
            if allotment.kind == AllotmentKind.UNIT_TO_UNIT and allotment.lhs == lhs and allotment.rhs == rhs:
                raise DuplicateAllotmentError(f"{name!r} is already alloted to {rhs!r}", name=name)
        prov.link_factors(source.id, target.id, EdgeKind.ALLOTS)
        if target.nesting_parent is None:
            prov.update_factor(target.id, nesting_parent=source.id)
        design.allotments.append(Allotment(lhs=lhs, rhs=rhs, kind=AllotmentKind.UNIT_TO_UNIT))
        logger.debug(f"Alloted unit {name} to {rhs}")
    return design


def treatment_level(design: "Design", unit_level: int, trt: FactorNode) -> Optional[int]:
    """
    Level of `trt` assigned to a unit level or to one of its unit ancestors
    """
    prov = design.provenance
    for allotment in design.allotments:
        if allotment.kind != AllotmentKind.TRTS_TO_UNIT or trt.name not in allotment.lhs:
            continue
        owner = prov.ancestor_level(unit_level, prov.factor(allotment.rhs).id)
        if owner is None:
            return None
        found = prov.level_parents(owner, trt.id)
        return found[0] if len(found) == 1 else None
    return None


def units_table(prov: Provenance, target: FactorNode, exclude: Sequence[int] = ()) -> pd.DataFrame:
    """
    One row per level of `target`: labels of the unit ancestors and of the target itself, plus
    the level id in ID_COLUMN
    """
    ancestors = prov.unit_ancestors(target.id, exclude=exclude)
    levels = prov.levels(target.id)
    data: Dict[str, list] = {}
    for factor in ancestors:
        column = []
        for level in levels:
            lid = prov.ancestor_level(level.id, factor.id)
            column.append(None if lid is None else prov.level(lid).label)
        data[factor.name] = column
    data[target.name] = [level.label for level in levels]
    data[ID_COLUMN] = [level.id for level in levels]
    return pd.DataFrame(data)


def _constraint(
    prov: Provenance, target: FactorNode, ancestors: List[FactorNode], given: Optional[Constraint], exclude: Sequence[int]
) -> List[str]:
    if given is None or target.name not in given:
        return [node.name for node in prov.parents(target.id, Role.UNIT) if node.id not in exclude]
    names = given[target.name]
    names = [names] if isinstance(names, str) else list(names)
    allowed = {node.name for node in ancestors}
    for name in names:
        if name not in allowed:
            raise ConstraintRefersToNonAncestorError(
                f"Constraint of {target.name!r} names {name!r} which is not a unit above it",
                unit=target.name,
                name=name,
            )
    return names


def _partitions(keys: List[tuple]) -> List[Tuple[tuple, np.ndarray]]:
    order: Dict[tuple, List[int]] = {}
    for i, key in enumerate(keys):
        order.setdefault(key, []).append(i)
    return [(key, np.array(ix)) for key, ix in order.items()]


def _run_ordering(
    name: str, trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    func = get_ordering(name)
    out = np.asarray(func(trts.reset_index(drop=True), units.reset_index(drop=True), list(constrain), rng))
    if out.shape != (len(units),):
        raise LengthMismatchError(
            f"Ordering {name!r} returned {out.size} indices for {len(units)} units",
            expected=len(units),
            actual=int(out.size),
        )
    if len(out) and (out.min() < 0 or out.max() >= len(trts)):
        raise LengthMismatchError(
            f"Ordering {name!r} returned indices outside 0..{len(trts) - 1}",
            expected=len(trts),
            actual=int(out.max()) + 1,
        )
    return out.astype(int)


def _assign_trts_allotment(
    design: "Design", allotment: Allotment, order: str, seed: int, index: int, given: Optional[Constraint]
):
    prov = design.provenance
    target = prov.factor(allotment.rhs)
    lhs = [prov.factor(name) for name in allotment.lhs]
    for trt in lhs:
        prov.unlink_levels(trt.id, target.id)

    trts = trts_level_table(design, allotment.lhs)
    units = units_table(prov, target)
    ancestors = prov.unit_ancestors(target.id)
    constrain = _constraint(prov, target, ancestors, given, ())

    # conditioned treatments whose parent is alloted elsewhere only admit rows under the parent's level
    lhs_ids = {trt.id for trt in lhs}
    outer = [trt for trt in lhs if trt.conditioned_on is not None and trt.conditioned_on not in lhs_ids]
    keys = []
    for lid in units[ID_COLUMN]:
        key = []
        for trt in outer:
            parent = prov.factor(trt.conditioned_on)
            level = treatment_level(design, int(lid), parent)
            if level is None:
                raise UnassignedTreatmentsError(
                    f"{trt.name!r} depends on {parent.name!r} which is not assigned to units above {target.name!r}",
                    names=[parent.name],
                )
            key.append(level)
        keys.append(tuple(key))

    partitions = _partitions(keys)
    for part, (key, positions) in enumerate(partitions):
        admissible = np.ones(len(trts), dtype=bool)
        for trt, parent_level in zip(outer, key):
            allowed = set(prov.level_graph.successors(parent_level))
            admissible &= trts[trt.name].isin(allowed).to_numpy()
        rows = trts[admissible]
        labelled = rows.apply(lambda column: column.map(lambda lid: level_value(prov, int(lid))))
        idx = _run_ordering(
            order, labelled, units.iloc[positions], constrain, stream(seed, ASSIGNMENT_STREAM, index, part)
        )
        chosen = rows.to_numpy()[idx]
        for unit_lid, trt_lids in zip(units[ID_COLUMN].iloc[positions], chosen):
            for trt_lid in trt_lids:
                prov.link_levels(int(trt_lid), int(unit_lid), EdgeKind.ALLOTS)
    logger.debug(
        f"Assigned {allotment} with {order!r} over {len(partitions)} partitions, constraint {constrain}"
    )


def _assign_units_allotment(
    design: "Design", allotment: Allotment, order: str, seed: int, index: int, given: Optional[Constraint]
):
    prov = design.provenance
    source = prov.factor(allotment.lhs[0])
    target = prov.factor(allotment.rhs)
    prov.unlink_levels(source.id, target.id)

    units = units_table(prov, target, exclude=[source.id])
    ancestors = prov.unit_ancestors(target.id, exclude=[source.id])
    constrain = _constraint(prov, target, ancestors, given, [source.id])
    source_above = {node.id for node in prov.unit_ancestors(source.id)}
    common = [node for node in ancestors if node.id in source_above]

    candidates = prov.levels(source.id)
    keys = [tuple(prov.ancestor_level(int(lid), node.id) for node in common) for lid in units[ID_COLUMN]]
    partitions = _partitions(keys)
    for part, (key, positions) in enumerate(partitions):
        rows = [
            level.id
            for level in candidates
            if all(prov.ancestor_level(level.id, node.id) == lid for node, lid in zip(common, key))
        ]
        table = pd.DataFrame({source.name: [prov.level(lid).label for lid in rows]})
        idx = _run_ordering(
            order, table, units.iloc[positions], constrain, stream(seed, ASSIGNMENT_STREAM, index, part)
        )
        for unit_lid, i in zip(units[ID_COLUMN].iloc[positions], idx):
            prov.link_levels(rows[i], int(unit_lid), EdgeKind.ALLOTS)
    logger.debug(f"Assigned {allotment} with {order!r} over {len(partitions)} partitions")


def _assign(
    design: "Design",
    kind: AllotmentKind,
    order: Union[str, Sequence[str]],
    seed: Optional[int],
    constrain: Optional[Constraint],
) -> "Design":
    allotments = [(i, a) for i, a in enumerate(design.allotments) if a.kind == kind]
    if not allotments:
        raise NoAllotmentError(f"No {kind.value} allotment to assign")
    orders = [order] if isinstance(order, str) else list(order)
    if len(orders) == 1:
        orders = orders * len(allotments)
    if len(orders) != len(allotments):
        raise LengthMismatchError(
            f"{len(orders)} orderings given for {len(allotments)} allotments",
            expected=len(allotments),
            actual=len(orders),
        )
    for name in orders:
        get_ordering(name)
    seed = resolve_seed(seed, design.seed, env_seed())
    design.seed = seed
    step = _assign_trts_allotment if kind == AllotmentKind.TRTS_TO_UNIT else _assign_units_allotment
    for (index, allotment), name in zip(allotments, orders):
        step(design, allotment, name, seed, index, constrain)
    return design


def assign_trts(
    design: "Design",
    order: Union[str, Sequence[str]] = DEFAULT_ORDER,
    seed: Optional[int] = None,
    constrain: Optional[Constraint] = None,
) -> "Design":
    """
    Link treatment levels to unit levels for every treatment allotment, in declared order
    :param order: one ordering for all allotments or one per allotment
    :param seed: falls back to the design seed, then to DESGRAPH_SEED, then to fresh entropy
    :param constrain: unit name -> unit factors whose levels form the randomisation groups
    """
    return _assign(design, AllotmentKind.TRTS_TO_UNIT, order, seed, constrain)


def assign_units(
    design: "Design",
    order: Union[str, Sequence[str]] = DEFAULT_ORDER,
    seed: Optional[int] = None,
    constrain: Optional[Constraint] = None,
) -> "Design":
    return _assign(design, AllotmentKind.UNIT_TO_UNIT, order, seed, constrain)
