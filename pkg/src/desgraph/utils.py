import math
import numbers
from typing import Any, Iterable, List, Tuple

import pandas as pd

from desgraph.constants import SI_PREFIXES


def index_labels(name: str, n: int, start: int = 1) -> List[str]:
    """
    Labels `name` + 1-based index, zero padded to the width of the largest index
    :param name: factor name used as prefix
    :param n: number of labels
    :param start: first index
    :return: list of labels
    """
    width = len(str(start + n - 1))
    return [f"{name}{i:0{width}d}" for i in range(start, start + n)]


def si_format(n: int) -> str:
    """
    Format a count with an SI prefix, prefixed with "~" when the rounding is inexact
    :param n: non-negative count
    :return: 999 -> "999", 1000 -> "1k", 1800 -> "~2k"
    """
    if n < 1000:
        return str(n)
    power = min(int(math.log10(n) // 3), len(SI_PREFIXES) - 1)
    rounded = math.floor(n / 1000**power + 0.5)
    if rounded >= 1000 and power + 1 < len(SI_PREFIXES):
        power += 1
        rounded = math.floor(n / 1000**power + 0.5)
    mark = "" if rounded * 1000**power == n else "~"
    return f"{mark}{rounded}{SI_PREFIXES[power]}"


def is_missing(value: Any) -> bool:
    if value is None or value is pd.NA:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and value == ""


def is_number(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def value_type_of(values: Iterable[Any]) -> str:
    """
    Column type tag for level values: "dbl" for numbers, "chr" otherwise
    """
    values = list(values)
    if values and all(is_number(v) for v in values):
        return "dbl"
    return "chr"


def parse_formula(formula: str) -> Tuple[List[str], str]:
    """
    Split "a:b ~ unit" into (["a", "b"], "unit")
    """
    if formula.count("~") != 1:
        raise ValueError(f"Formula must have exactly one '~': {formula!r}")
    lhs, rhs = (part.strip() for part in formula.split("~"))
    names = [name.strip() for name in lhs.split(":")]
    if not rhs or not all(names):
        raise ValueError(f"Formula has an empty side: {formula!r}")
    return names, rhs


def format_cell(value: Any) -> str:
    if is_missing(value):
        return "NA"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)
