import itertools
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.orderings.builtin import randomisation_groups
from desgraph.orderings.core import register_ordering
from desgraph.orderings.exceptions import BadConstraintArityError, UnsupportedOrderError
from desgraph.orderings.latin import difference_set

MAX_RESTARTS = 20
MAX_STEPS = 20_000


def bibd_parameters(t: int, k: int, r: int) -> Tuple[int, int]:
    """
    Number of blocks and pair concurrence of a balanced incomplete block design
    :return: (b, lambda)
    :raises UnsupportedOrderError: when the necessary conditions fail
    """
    if not 2 <= k < t:
        raise UnsupportedOrderError(f"Block size must be in [2, {t - 1}], got {k}")
    if r < 1:
        raise UnsupportedOrderError(f"Replication must be positive, got {r}")
    if (r * (k - 1)) % (t - 1):
        raise UnsupportedOrderError(f"r(k-1) = {r * (k - 1)} is not divisible by t-1 = {t - 1}")
    if (r * t) % k:
        raise UnsupportedOrderError(f"rt = {r * t} is not divisible by k = {k}")
    b = r * t // k
    if b < t:
        raise UnsupportedOrderError(f"Fisher's inequality fails: b = {b} < t = {t}")
    return b, r * (k - 1) // (t - 1)


def bibd_feasible(t: int, k: int, r: int) -> bool:
    try:
        bibd_parameters(t, k, r)
    except UnsupportedOrderError:
        return False
    return True


def pair_counts(blocks: np.ndarray, t: int) -> np.ndarray:
    """
    t x t matrix of how often each pair of treatments shares a block
    """
    incidence = np.zeros((len(blocks), t), dtype=int)
    np.put_along_axis(incidence, np.asarray(blocks), 1, axis=1)
    return incidence.T @ incidence


def _deficit(blocks: np.ndarray, t: int, lam: int) -> int:
    counts = pair_counts(blocks, t)
    off = counts[~np.eye(t, dtype=bool)]
    return int(np.abs(off - lam).sum())


def _hill_climb(t: int, k: int, b: int, lam: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    # replication stays exact: elements only move by swaps between blocks
    blocks = np.array([[(j * k + i) % t for i in range(k)] for j in range(b)])
    score = _deficit(blocks, t, lam)
    for _ in range(MAX_STEPS):
        if score == 0:
            return blocks
        b1, b2 = rng.choice(b, size=2, replace=False)
        i1, i2 = rng.integers(k, size=2)
        x, y = blocks[b1, i1], blocks[b2, i2]
        if x == y or y in blocks[b1] or x in blocks[b2]:
            continue
        blocks[b1, i1], blocks[b2, i2] = y, x
        new = _deficit(blocks, t, lam)
        if new <= score:
            score = new
        else:
            blocks[b1, i1], blocks[b2, i2] = x, y
    return blocks if score == 0 else None


def bibd_blocks(t: int, k: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """
    Blocks of a balanced incomplete block design with t treatments, block size k and
    replication r. Rows are blocks, entries are 0-based treatment indices; treatment labels,
    block order and the order inside each block are randomised.
    """
    b, lam = bibd_parameters(t, k, r)
    complete = math.comb(t - 1, k - 1)
    blocks = None
    if r % complete == 0:
        blocks = np.array(list(itertools.combinations(range(t), k)) * (r // complete))
    elif r % k == 0 and difference_set(t, k) is not None:
        base = np.array(difference_set(t, k))
        developed = (np.arange(t)[:, None] + base[None, :]) % t
        blocks = np.vstack([developed] * (r // k))
    else:
        for attempt in range(MAX_RESTARTS):
            blocks = _hill_climb(t, k, b, lam, rng)
            if blocks is not None:
                logger.debug(f"BIBD({t}, {k}, {r}) found after {attempt + 1} restarts")
                break
        if blocks is None:
            raise UnsupportedOrderError(f"Search found no BIBD with t={t}, k={k}, r={r}")
    relabel = rng.permutation(t)
    blocks = relabel[blocks][rng.permutation(len(blocks))]
    return rng.permuted(blocks, axis=1)


def ordering_bibd(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    """
    Units grouped by one block factor; every block gets k distinct treatments and every
    pair of treatments meets equally often
    """
    if len(constrain) != 1:
        raise BadConstraintArityError(
            f"bibd needs 1 constraining factor, got {list(constrain)}",
            expected=1,
            actual=len(constrain),
        )
    groups = randomisation_groups(units, constrain)
    sizes = {len(positions) for positions in groups}
    if len(sizes) != 1:
        raise UnsupportedOrderError(f"Blocks of {constrain[0]} have unequal sizes {sorted(sizes)}")
    (k,) = sizes
    t, b = len(trts), len(groups)
    r, rem = divmod(b * k, t)
    if rem:
        raise UnsupportedOrderError(f"{b} blocks of size {k} can not replicate {t} treatments equally")
    blocks = bibd_blocks(t, k, r, rng)
    out = np.empty(len(units), dtype=int)
    for block, positions in zip(blocks, groups):
        out[positions] = block
    return out


register_ordering("bibd", ordering_bibd)
