import os
from typing import Optional

import numpy as np
from loguru import logger

from desgraph.constants import SEED_BITS, SEED_ENV


def draw_seed() -> int:
    """
    Fresh seed from OS entropy
    """
    seed = int(np.random.SeedSequence().entropy % (1 << SEED_BITS))
    logger.warning(f"No seed given, drew {seed} from entropy")
    return seed


def env_seed() -> Optional[int]:
    value = os.environ.get(SEED_ENV)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"{SEED_ENV} must be an integer, got {value!r}")


def resolve_seed(*candidates: Optional[int]) -> int:
    """
    First seed that is not None, else one drawn from entropy
    """
    for seed in candidates:
        if seed is not None:
            return int(seed)
    return draw_seed()


def stream(seed: int, *key: int) -> np.random.Generator:
    """
    Counter based generator for one independent stream of a seed.

    stream(seed, 0, 2, 1) -> the stream of partition 1 of allotment 2
    """
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))
    )
