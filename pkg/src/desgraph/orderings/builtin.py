from typing import List

import numpy as np
import pandas as pd

from desgraph.orderings.core import _builtin


def _fastest(n: int, t: int) -> np.ndarray:
    return np.arange(n) % t


def _slowest(n: int, t: int) -> np.ndarray:
    # same replication as fastest, earlier levels take the extra replicate
    return np.sort(_fastest(n, t), kind="stable")


@_builtin("systematic-fastest")
def ordering_systematic_fastest(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    return _fastest(len(units), len(trts))


@_builtin("systematic-slowest")
def ordering_systematic_slowest(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    return _slowest(len(units), len(trts))


@_builtin("systematic-random-fastest")
def ordering_systematic_random_fastest(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    return rng.permutation(len(trts))[_fastest(len(units), len(trts))]


@_builtin("systematic-random-slowest")
def ordering_systematic_random_slowest(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    return rng.permutation(len(trts))[_slowest(len(units), len(trts))]


def balanced_draw(n: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """
    n draws from t levels, each level floor(n/t) or ceil(n/t) times, in random order
    """
    base = np.repeat(np.arange(t), n // t)
    extra = rng.choice(t, size=n % t, replace=False)
    return rng.permutation(np.concatenate([base, extra]))


def randomisation_groups(units: pd.DataFrame, constrain: List[str]) -> List[np.ndarray]:
    """
    Row positions of each group of units sharing the constraint levels, in order of first appearance
    """
    if not constrain:
        return [np.arange(len(units))]
    indices = units.groupby(list(constrain), sort=False, dropna=False).indices
    return sorted((np.asarray(ix) for ix in indices.values()), key=lambda ix: ix[0])


@_builtin("random")
def ordering_random(
    trts: pd.DataFrame, units: pd.DataFrame, constrain: List[str], rng: np.random.Generator
) -> np.ndarray:
    out = np.empty(len(units), dtype=int)
    groups = randomisation_groups(units, constrain)
    for child, positions in zip(rng.spawn(len(groups)), groups):
        out[positions] = balanced_draw(len(positions), len(trts), child)
    return out
