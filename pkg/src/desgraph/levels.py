from dataclasses import dataclass
from typing import Any, Mapping, Sequence, Tuple, Union

import numpy as np

from desgraph.constants import WILDCARD
from desgraph.exceptions.exceptions import (
    EmptySpecError,
    FewerThanTwoParentsError,
    InvalidRulesError,
)
from desgraph.models import Scalar


def _scalar(value: Any) -> Scalar:
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise TypeError(f"Level values must be text or numbers, got {value!r}")
    return value


@dataclass(frozen=True)
class Count:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise TypeError(f"Level count must be an integer, got {self.n!r}")
        if self.n < 1:
            raise EmptySpecError(f"Level count must be at least 1, got {self.n}")


@dataclass(frozen=True)
class Values:
    values: Tuple[Scalar, ...]

    def __post_init__(self):
        values = tuple(_scalar(v) for v in self.values)
        if not values:
            raise EmptySpecError("Level values must not be empty")
        if len(set(values)) != len(values):
            raise InvalidRulesError(f"Level values must be unique: {list(values)}")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class SingleLevels(Values):
    pass


@dataclass(frozen=True)
class PerParentRule:
    match: Tuple[str, ...]
    spec: Union[Count, Values]

    @property
    def is_wildcard(self) -> bool:
        return self.match == (WILDCARD,)


@dataclass(frozen=True)
class Crossed:
    factors: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if len(self.factors) < 2:
            raise FewerThanTwoParentsError(
                f"crossed_by needs at least two factors, got {list(self.factors)}"
            )


@dataclass(frozen=True)
class Nested:
    parent: str
    inner: Union[Count, Values, Crossed, Tuple[PerParentRule, ...]]


@dataclass(frozen=True)
class Conditioned:
    parent: str
    rules: Tuple[PerParentRule, ...]


LevelSpec = Union[Count, Values, SingleLevels, Nested, Crossed, Conditioned]
RuleArgs = Union[Mapping[Any, Any], Sequence[PerParentRule]]


def as_spec(value: Any) -> LevelSpec:
    """
    Normalise user input into a level specification
    :param value: integer count, list of values or a ready made spec
    :return: LevelSpec
    """
    if isinstance(value, (Count, Values, Nested, Crossed, Conditioned)):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Count(int(value))
    if isinstance(value, (list, tuple, range, np.ndarray)):
        return Values(tuple(value))
    raise TypeError(f"Can not build levels from {value!r}")


def _as_rule_spec(value: Any, number_is_count: bool) -> Union[Count, Values]:
    if isinstance(value, (Count, Values)):
        return value
    if isinstance(value, (int, np.integer)) and number_is_count:
        return Count(int(value))
    if isinstance(value, (list, tuple, range, np.ndarray)):
        return Values(tuple(value))
    return Values((value,))


def rules(args: RuleArgs, number_is_count: bool = True) -> Tuple[PerParentRule, ...]:
    """
    Build per-parent rules from a mapping like {("Narrabri", "Roseworthy"): 9, ".": 6}
    :param args: mapping from level label (or tuple of labels, or ".") to levels,
        or a sequence of PerParentRule
    :param number_is_count: a bare number means a level count (nesting) or a single value (conditioning)
    :return: tuple of PerParentRule
    """
    if isinstance(args, Mapping):
        built = []
        for match, value in args.items():
            labels = tuple(match) if isinstance(match, (tuple, list)) else (match,)
            built.append(
                PerParentRule(
                    tuple(str(label) for label in labels),
                    _as_rule_spec(value, number_is_count),
                )
            )
    else:
        built = list(args)
    if not built:
        raise EmptySpecError("At least one rule is needed")
    wildcards = sum(rule.is_wildcard for rule in built)
    if wildcards > 1:
        raise InvalidRulesError("The '.' catch-all can only be used once")
    if any(WILDCARD in rule.match and not rule.is_wildcard for rule in built):
        raise InvalidRulesError("The '.' catch-all can not be combined with labels")
    return tuple(built)


def lvls(values: Sequence[Any]) -> SingleLevels:
    """
    Levels given literally, every value forming one level
    """
    if not isinstance(values, (list, tuple, range, np.ndarray)):
        values = [values]
    return SingleLevels(tuple(values))


def nested_in(parent: str, *args: Any) -> Nested:
    """
    Levels that exist only within the levels of `parent`

    nested_in("site", 18)
    nested_in("site", crossed_by("row", "col"))
    nested_in("site", {("Narrabri", "Roseworthy"): 9, ".": 6})
    """
    if not args:
        raise EmptySpecError(f"nested_in({parent!r}) needs levels")
    if len(args) == 1 and not isinstance(args[0], (Mapping, PerParentRule)):
        inner = args[0]
        if isinstance(inner, Crossed):
            return Nested(parent, inner)
        spec = as_spec(inner)
        if not isinstance(spec, (Count, Values)):
            raise TypeError(f"Can not nest {spec!r} in {parent!r}")
        return Nested(parent, spec)
    if len(args) == 1 and isinstance(args[0], Mapping):
        return Nested(parent, rules(args[0]))
    return Nested(parent, rules(list(args)))


def crossed_by(*factors: str) -> Crossed:
    """
    One level per combination of the levels of `factors`, first factor varying fastest
    """
    return Crossed(tuple(factors))


def conditioned_on(parent: str, *args: Any) -> Conditioned:
    """
    Treatment levels that depend on the level of another treatment

    conditioned_on("fertilizer", {"none": 0, ".": [0.5, 1, 2]})
    """
    if len(args) == 1 and isinstance(args[0], Mapping):
        return Conditioned(parent, rules(args[0], number_is_count=False))
    return Conditioned(parent, rules(list(args), number_is_count=False))


def referenced_factors(spec: LevelSpec) -> Tuple[str, ...]:
    """
    Names a level specification depends on, in order
    """
    if isinstance(spec, Nested):
        inner = referenced_factors(spec.inner) if isinstance(spec.inner, Crossed) else ()
        return (spec.parent,) + inner
    if isinstance(spec, Crossed):
        return spec.factors
    if isinstance(spec, Conditioned):
        return (spec.parent,)
    return ()
