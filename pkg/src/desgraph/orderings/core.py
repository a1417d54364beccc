from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.exceptions.exceptions import ReservedNameError, UnknownOrderingError

# (treatments table, units table, constraint, rng) -> one treatment row index per unit row
OrderingFunc = Callable[
    [pd.DataFrame, pd.DataFrame, List[str], np.random.Generator], Sequence[int]
]

RESERVED_NAMES = (
    "systematic-fastest",
    "systematic",
    "systematic-random-fastest",
    "systematic-random",
    "systematic-slowest",
    "systematic-random-slowest",
    "random",
)
SYNONYMS = {
    "systematic": "systematic-fastest",
    "systematic-random": "systematic-random-fastest",
}

_REGISTRY: Dict[str, OrderingFunc] = {}


def _builtin(name: str):
    def wrapper(func: OrderingFunc) -> OrderingFunc:
        _REGISTRY[name] = func
        return func

    return wrapper


def register_ordering(name: str, func: Optional[OrderingFunc] = None):
    """
    Make an ordering algorithm usable by name in assign_trts and assign_units.
    Works as a plain call or as a decorator.

    :param name: ordering name, must not be a built-in name
    :param func: f(trts, units, constrain, rng) returning one index into `trts` per row of `units`,
        in the row order of `units`
    """
    if name in RESERVED_NAMES:
        raise ReservedNameError(f"{name!r} is a built-in ordering", name=name)

    def wrapper(f: OrderingFunc) -> OrderingFunc:
        if name in _REGISTRY:
            logger.warning(f"Ordering {name!r} is registered again and replaced")
        _REGISTRY[name] = f
        return f

    if func is None:
        return wrapper
    return wrapper(func)


def canonical_name(name: str) -> str:
    return SYNONYMS.get(name, name)


def get_ordering(name: str) -> OrderingFunc:
    name = canonical_name(name)
    if name not in _REGISTRY:
        raise UnknownOrderingError(f"Unknown ordering {name!r}", name=name)
    return _REGISTRY[name]


def ordering_names() -> List[str]:
    return sorted(set(_REGISTRY) | set(SYNONYMS))
