import itertools
import math
from collections import Counter
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from desgraph.orderings.core import OrderingFunc, register_ordering
from desgraph.orderings.exceptions import (
    BadConstraintArityError,
    RowCountMismatchError,
    UnsupportedOrderError,
)

# brute force searches above this many candidates are not attempted
SEARCH_LIMIT = 250_000


def _smallest_prime_factor(n: int) -> int:
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return p
    return n


def _prime_power(t: int) -> Optional[Tuple[int, int]]:
    p = _smallest_prime_factor(t)
    m, rest = 0, t
    while rest % p == 0:
        rest //= p
        m += 1
    return (p, m) if rest == 1 else None


def _digits(e: int, p: int, m: int) -> np.ndarray:
    return np.array([(e // p**i) % p for i in range(m)])


def _mulmod(a: np.ndarray, b: np.ndarray, modulus: np.ndarray, p: int) -> np.ndarray:
    m = len(modulus) - 1
    prod = np.convolve(a, b) % p
    for deg in range(len(prod) - 1, m - 1, -1):
        coef = prod[deg]
        if coef:
            prod[deg - m : deg + 1] = (prod[deg - m : deg + 1] - coef * modulus) % p
    return prod[:m]


def field_tables(p: int, m: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Addition and multiplication tables of GF(p^m); element e has base-p digits as
    polynomial coefficients, lowest first
    """
    q = p**m
    if m == 1:
        grid = np.arange(q)
        return (grid[:, None] + grid[None, :]) % p, (grid[:, None] * grid[None, :]) % p
    digits = [_digits(e, p, m) for e in range(q)]
    weights = p ** np.arange(m)
    add = np.array([[int(((digits[i] + digits[j]) % p) @ weights) for j in range(q)] for i in range(q)])
    for low in itertools.product(range(p), repeat=m):
        if low[0] == 0:
            continue
        modulus = np.array(list(low) + [1])
        mul = np.array(
            [
                [int(_mulmod(digits[i], digits[j], modulus, p) @ weights) for j in range(q)]
                for i in range(q)
            ]
        )
        # irreducible modulus <=> every nonzero element has an inverse
        if all(1 in mul[i, 1:] for i in range(1, q)):
            return add, mul
    raise UnsupportedOrderError(f"No irreducible polynomial of degree {m} over GF({p})")


def mols(t: int, k: int) -> List[np.ndarray]:
    """
    k mutually orthogonal Latin squares of order t, symbols 0..t-1.

    Prime powers use the finite field construction (up to t-1 squares); other orders use
    cyclic squares (i * a + j) mod t with multipliers below the smallest prime factor of t.
    """
    if t < 2 or k < 1:
        raise ValueError(f"Need t >= 2 and k >= 1, got t={t}, k={k}")
    pp = _prime_power(t)
    capacity = t - 1 if pp else _smallest_prime_factor(t) - 1
    capacity = max(capacity, 1)
    if k > capacity:
        raise UnsupportedOrderError(
            f"Can not construct {k} mutually orthogonal Latin squares of order {t}"
        )
    grid = np.arange(t)
    if pp and pp[1] > 1:
        add, mul = field_tables(*pp)
        return [add[mul[f][grid][:, None], grid[None, :]] for f in range(1, k + 1)]
    return [(f * grid[:, None] + grid[None, :]) % t for f in range(1, k + 1)]


def difference_set(t: int, k: int) -> Optional[Tuple[int, ...]]:
    """
    Cyclic (t, k, lambda) difference set containing 0, or None when there is none
    """
    if not 2 <= k < t:
        return None
    lam, rem = divmod(k * (k - 1), t - 1)
    if rem or math.comb(t - 1, k - 1) > SEARCH_LIMIT:
        return None
    for rest in itertools.combinations(range(1, t), k - 1):
        candidate = (0,) + rest
        counts = Counter((a - b) % t for a in candidate for b in candidate if a != b)
        if all(counts[d] == lam for d in range(1, t)):
            return candidate
    return None


def youden_square(t: int, nc: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    t x nc array: every column holds each of t treatments once and the rows form a
    symmetric balanced incomplete block design
    """
    base = difference_set(t, nc)
    if base is None:
        raise UnsupportedOrderError(f"No Youden square with {t} treatments and {nc} columns")
    square = (np.arange(t)[:, None] + np.array(base)[None, :]) % t
    if rng is not None:
        square = rng.permutation(t)[square[np.ix_(rng.permutation(t), rng.permutation(nc))]]
    return square


def _positions(values) -> Dict:
    return {value: i for i, value in enumerate(pd.unique(values))}


def latin_ordering(k: int) -> OrderingFunc:
    """
    Ordering for units crossed by a row and a column factor with t levels each, using
    k orthogonal squares for k jointly alloted treatment factors of t levels
    """

    def ordering(
        trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
    ) -> np.ndarray:
        if len(constrain) != 2:
            raise BadConstraintArityError(
                f"Latin square orderings need 2 constraining factors, got {list(constrain)}",
                expected=2,
                actual=len(constrain),
            )
        row, col = constrain
        rows, cols = _positions(units[row]), _positions(units[col])
        t = len(rows)
        if len(cols) != t:
            raise RowCountMismatchError(f"{row} has {t} levels but {col} has {len(cols)}")
        if k == 1:
            lookup = {(i,): i for i in range(len(trts))}
        else:
            if trts.shape[1] != k:
                raise UnsupportedOrderError(
                    f"Needs {k} jointly alloted treatment factors, got {list(trts.columns)}"
                )
            per_column = [_positions(trts[name]) for name in trts.columns]
            lookup = {
                tuple(per_column[c][value] for c, value in enumerate(row_values)): i
                for i, row_values in enumerate(trts.itertuples(index=False))
            }
        if len(lookup) != t**k:
            raise RowCountMismatchError(
                f"{row} and {col} have {t} levels but there are {len(trts)} treatments"
            )
        row_perm, col_perm = rng.permutation(t), rng.permutation(t)
        squares = [rng.permutation(t)[sq[np.ix_(row_perm, col_perm)]] for sq in mols(t, k)]
        out = np.empty(len(units), dtype=int)
        for i, (r, c) in enumerate(zip(units[row], units[col])):
            out[i] = lookup[tuple(int(sq[rows[r], cols[c]]) for sq in squares)]
        return out

    return ordering


def ordering_youden(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    """
    Rows are blocks with one level per treatment, columns are positions within a block
    """
    if len(constrain) != 2:
        raise BadConstraintArityError(
            f"youden needs 2 constraining factors, got {list(constrain)}",
            expected=2,
            actual=len(constrain),
        )
    t = len(trts)
    positions = {name: _positions(units[name]) for name in constrain}
    candidates = [name for name in constrain if len(positions[name]) == t]
    if not candidates:
        raise RowCountMismatchError(f"Neither of {list(constrain)} has {t} levels")
    row = candidates[-1]
    col = constrain[0] if row == constrain[1] else constrain[1]
    square = youden_square(t, len(positions[col]), rng)
    out = np.empty(len(units), dtype=int)
    for i, (r, c) in enumerate(zip(units[row], units[col])):
        out[i] = square[positions[row][r], positions[col][c]]
    return out


register_ordering("latin", latin_ordering(1))
register_ordering("graeco", latin_ordering(2))
register_ordering("hyper-graeco", latin_ordering(3))
register_ordering("youden", ordering_youden)
