import math
from typing import List

import numpy as np
import pandas as pd

from desgraph.orderings.core import register_ordering
from desgraph.orderings.exceptions import BadConstraintArityError, RowCountMismatchError


def williams_square(t: int) -> np.ndarray:
    """
    Latin square balanced for first order carryover. Rows are periods, columns are subjects.

    For odd t the square is followed by its mirror image, giving t x 2t.
    :param t: number of treatments, at least 2
    :return: matrix of 0-based treatment indices
    """
    if t < 2:
        raise ValueError(f"Williams square needs at least 2 treatments, got {t}")
    seq = [0] + [(i + 1) // 2 if i % 2 else t - i // 2 for i in range(1, t)]
    square = (np.array(seq)[:, None] + np.arange(t)[None, :]) % t
    if t % 2:
        square = np.hstack([square, square[::-1, :]])
    return square


def ordering_williams(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    """
    Tiles treatment-relabelled Williams squares over units crossed by two factors.
    The factor with fewer levels gives the periods and must have one level per treatment;
    surplus columns of the last square are left out.
    """
    if len(constrain) != 2:
        raise BadConstraintArityError(
            f"williams needs 2 constraining factors, got {list(constrain)}",
            expected=2,
            actual=len(constrain),
        )
    t = len(trts)
    levels = {name: list(pd.unique(units[name])) for name in constrain}
    row, col = sorted(constrain, key=lambda name: len(levels[name]))
    if len(levels[row]) != t:
        raise RowCountMismatchError(
            f"{row} has {len(levels[row])} levels but there are {t} treatments"
        )
    square = williams_square(t)
    width = square.shape[1]
    tiles = math.ceil(len(levels[col]) / width)
    relabels = [rng.permutation(t) for _ in range(tiles)]

    row_pos = {value: i for i, value in enumerate(levels[row])}
    col_pos = {value: j for j, value in enumerate(levels[col])}
    out = np.empty(len(units), dtype=int)
    for i, (r, c) in enumerate(zip(units[row], units[col])):
        j = col_pos[c]
        out[i] = relabels[j // width][square[row_pos[r], j % width]]
    return out


register_ordering("williams", ordering_williams)
