import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from desgraph.dsl.ast_nodes import AllotDecl, Block, FactorDecl, OrderDecl, SeedDecl, SpecAst
from desgraph.levels import Count, LevelSpec, crossed_by, nested_in
from desgraph.menu.exceptions import InvalidParamsError
from desgraph.orderings import UnsupportedOrderError, bibd_parameters, difference_set, mols

# ranges of parameters drawn when not given, both ends included
RANDOM_N = (2, 50)
RANDOM_T = (2, 12)
RANDOM_R = (2, 6)
RANDOM_SEED = (1, 1000)
RANDOM_BIBD_T = (3, 7)
FACTORIAL_DESIGNS = ("crd", "rcbd")


@dataclass
class Plan:
    """
    Factors, allotments and orderings of a recipe before it is written out
    """

    units: List[Tuple[str, LevelSpec]]
    trts: List[Tuple[str, LevelSpec]]
    allot: List[str]
    order: Sequence[str]
    params: Dict[str, Any]

    def spec(self, title: str, seed: int) -> SpecAst:
        allotments = []
        for formula in self.allot:
            lhs, rhs = (part.strip() for part in formula.split("~"))
            allotments.append(AllotDecl(lhs=tuple(lhs.split(":")), rhs=rhs))
        return SpecAst(
            title=title,
            blocks=(
                Block("units", tuple(FactorDecl(name, spec) for name, spec in self.units)),
                Block("trts", tuple(FactorDecl(name, spec) for name, spec in self.trts)),
                Block("allot", tuple(allotments)),
                Block("assign", (OrderDecl("trts", tuple(self.order)), SeedDecl(seed))),
            ),
        )


def _draw(rng: np.random.Generator, bounds: Tuple[int, int]) -> int:
    low, high = bounds
    return int(rng.integers(low, high + 1))


def _integer(recipe: str, name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < minimum:
        raise InvalidParamsError(
            f"{recipe}: {name} must be an integer of at least {minimum}, got {value!r}",
            recipe=recipe,
        )
    return int(value)


def _param(
    recipe: str,
    name: str,
    value: Any,
    rng: np.random.Generator,
    bounds: Tuple[int, int],
    minimum: int = 1,
) -> int:
    if value is None:
        return _draw(rng, bounds)
    return _integer(recipe, name, value, minimum)


def _has_mols(t: int, k: int) -> bool:
    try:
        mols(t, k)
    except (UnsupportedOrderError, ValueError):
        return False
    return True


def _square_size(recipe: str, t: Any, k: int, rng: np.random.Generator) -> int:
    if t is None:
        supported = [size for size in range(max(RANDOM_T[0], 3), RANDOM_T[1] + 1) if _has_mols(size, k)]
        return int(rng.choice(supported))
    t = _integer(recipe, "t", t, 2)
    if not _has_mols(t, k):
        raise InvalidParamsError(
            f"{recipe}: there are no {k} orthogonal Latin squares of order {t}", recipe=recipe
        )
    return t


def crd(rng: np.random.Generator, t=None, n=None, r=None) -> Plan:
    t = _param("crd", "t", t, rng, RANDOM_T, minimum=2)
    params: Dict[str, Any] = {"t": t}
    if r is not None:
        r = _integer("crd", "r", r, 1)
        params["r"] = r
        if n is not None and n != t * r:
            raise InvalidParamsError(f"crd: n={n} is not t * r = {t * r}", recipe="crd")
        n = t * r
    n = _param("crd", "n", n, rng, RANDOM_N)
    params["n"] = n
    return Plan([("unit", Count(n))], [("trt", Count(t))], ["trt ~ unit"], ["random"], params)


def rcbd(rng: np.random.Generator, t=None, r=None) -> Plan:
    t = _param("rcbd", "t", t, rng, RANDOM_T, minimum=2)
    r = _param("rcbd", "r", r, rng, RANDOM_R)
    return Plan(
        [("block", Count(r)), ("unit", nested_in("block", t))],
        [("trt", Count(t))],
        ["trt ~ unit"],
        ["random"],
        {"t": t, "r": r},
    )


def _square(recipe: str, t: int, k: int, order: str) -> Plan:
    names = ["trt"] if k == 1 else [f"trt{i}" for i in range(1, k + 1)]
    return Plan(
        [("row", Count(t)), ("col", Count(t)), ("unit", crossed_by("row", "col"))],
        [(name, Count(t)) for name in names],
        [f"{':'.join(names)} ~ unit"],
        [order],
        {"t": t},
    )


def lsd(rng: np.random.Generator, t=None) -> Plan:
    return _square("lsd", _param("lsd", "t", t, rng, RANDOM_T, minimum=2), 1, "latin")


def graeco(rng: np.random.Generator, t=None) -> Plan:
    return _square("graeco", _square_size("graeco", t, 2, rng), 2, "graeco")


def hyper_graeco(rng: np.random.Generator, t=None) -> Plan:
    return _square("hyper_graeco", _square_size("hyper_graeco", t, 3, rng), 3, "hyper-graeco")


def factorial(rng: np.random.Generator, trt=None, r=None, design=None) -> Plan:
    """
    Crossed treatment factors with the given numbers of levels, on a completely
    randomised ("crd") or a randomised complete block ("rcbd") unit structure
    """
    if trt is None:
        trt = [_draw(rng, (2, 4)) for _ in range(_draw(rng, (2, 3)))]
    elif isinstance(trt, (int, np.integer)):
        trt = [trt]
    trt = [_integer("factorial", "trt", levels, 2) for levels in trt]
    r = _param("factorial", "r", r, rng, RANDOM_R)
    if design is None:
        design = str(rng.choice(FACTORIAL_DESIGNS))
    if design not in FACTORIAL_DESIGNS:
        raise InvalidParamsError(
            f"factorial: design must be one of {FACTORIAL_DESIGNS}, got {design!r}", recipe="factorial"
        )
    names = [f"trt{i}" for i in range(1, len(trt) + 1)]
    cells = math.prod(trt)
    if design == "crd":
        units = [("unit", Count(cells * r))]
    else:
        units = [("block", Count(r)), ("unit", nested_in("block", cells))]
    return Plan(
        units,
        [(name, Count(levels)) for name, levels in zip(names, trt)],
        [f"{':'.join(names)} ~ unit"],
        ["random"],
        {"trt": trt, "r": r, "design": design},
    )


def split(rng: np.random.Generator, t1=None, t2=None, r=None) -> Plan:
    t1 = _param("split", "t1", t1, rng, RANDOM_T, minimum=2)
    t2 = _param("split", "t2", t2, rng, RANDOM_T, minimum=2)
    r = _param("split", "r", r, rng, RANDOM_R)
    return Plan(
        [
            ("block", Count(r)),
            ("mainplot", nested_in("block", t1)),
            ("subplot", nested_in("mainplot", t2)),
        ],
        [("trt1", Count(t1)), ("trt2", Count(t2))],
        ["trt1 ~ mainplot", "trt2 ~ subplot"],
        ["random", "random"],
        {"t1": t1, "t2": t2, "r": r},
    )


def strip(rng: np.random.Generator, t1=None, t2=None, r=None) -> Plan:
    t1 = _param("strip", "t1", t1, rng, RANDOM_T, minimum=2)
    t2 = _param("strip", "t2", t2, rng, RANDOM_T, minimum=2)
    r = _param("strip", "r", r, rng, RANDOM_R)
    return Plan(
        [
            ("block", Count(r)),
            ("row", nested_in("block", t1)),
            ("col", nested_in("block", t2)),
            ("unit", nested_in("block", crossed_by("row", "col"))),
        ],
        [("trt1", Count(t1)), ("trt2", Count(t2))],
        ["trt1 ~ row", "trt2 ~ col"],
        ["random", "random"],
        {"t1": t1, "t2": t2, "r": r},
    )


def _smallest_replication(t: int, k: int) -> Optional[int]:
    for r in range(1, math.comb(t - 1, k - 1) + 1):
        try:
            bibd_parameters(t, k, r)
        except UnsupportedOrderError:
            continue
        return r
    return None


def bibd(rng: np.random.Generator, t=None, k=None, r=None) -> Plan:
    t = _param("bibd", "t", t, rng, RANDOM_BIBD_T, minimum=3)
    if k is None:
        k = _draw(rng, (2, t - 1))
    k = _integer("bibd", "k", k, 2)
    if r is None:
        r = _smallest_replication(t, k)
        if r is None:
            raise InvalidParamsError(f"bibd: no block design with t={t}, k={k}", recipe="bibd")
    r = _integer("bibd", "r", r, 1)
    try:
        b, _ = bibd_parameters(t, k, r)
    except UnsupportedOrderError as e:
        raise InvalidParamsError(f"bibd: {e.message}", recipe="bibd")
    return Plan(
        [("block", Count(b)), ("unit", nested_in("block", k))],
        [("trt", Count(t))],
        ["trt ~ unit"],
        ["bibd"],
        {"t": t, "k": k, "r": r},
    )


def _youden_sizes(t: Optional[int], nc: Optional[int]) -> List[Tuple[int, int]]:
    sizes = [t] if t is not None else range(3, RANDOM_T[1] + 1)
    out = []
    for size in sizes:
        columns = [nc] if nc is not None else range(2, size)
        out.extend((size, c) for c in columns if 2 <= c < size and difference_set(size, c) is not None)
    return out


def youden(rng: np.random.Generator, nc=None, t=None) -> Plan:
    if t is not None:
        t = _integer("youden", "t", t, 3)
    if nc is not None:
        nc = _integer("youden", "nc", nc, 2)
    sizes = _youden_sizes(t, nc)
    if not sizes:
        raise InvalidParamsError(
            f"youden: no Youden square with t={t} and nc={nc}", recipe="youden"
        )
    t, nc = sizes[int(rng.integers(len(sizes)))]
    return Plan(
        [("row", Count(t)), ("col", Count(nc)), ("unit", crossed_by("row", "col"))],
        [("trt", Count(t))],
        ["trt ~ unit"],
        ["youden"],
        {"nc": nc, "t": t},
    )


RECIPES: Dict[str, Callable[..., Plan]] = {
    "bibd": bibd,
    "crd": crd,
    "factorial": factorial,
    "graeco": graeco,
    "hyper_graeco": hyper_graeco,
    "lsd": lsd,
    "rcbd": rcbd,
    "split": split,
    "strip": strip,
    "youden": youden,
}


def draw_seed(rng: np.random.Generator) -> int:
    return _draw(rng, RANDOM_SEED)
