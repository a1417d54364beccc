from typing import Any, Optional

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.dsl.parser import parse_spec, unparse
from desgraph.dsl.runner import assign_spec, build_design
from desgraph.menu.catalogue import entries
from desgraph.menu.exceptions import InvalidParamsError, UnknownKindError
from desgraph.menu.models import MenuEntry, Recipe
from desgraph.menu.recipes import RECIPES, draw_seed
from desgraph.table import DesignTable

PACKAGE = "desgraph"


def _entry(kind: str) -> MenuEntry:
    name = kind.replace("-", "_")
    for entry in entries():
        if entry.name == name:
            return entry
    raise UnknownKindError(
        f"{kind!r} is not on the menu, choose from {[entry.name for entry in entries()]}",
        kind_name=kind,
    )


def menu(
    kind: str, seed: Optional[int] = None, rng: Optional[np.random.Generator] = None, **params: Any
) -> Recipe:
    """
    Write out a named design as spec text.

    menu("crd", n=10, t=2, seed=1)

    :param kind: recipe name as listed by scan_menu
    :param seed: seed of the assignment written into the recipe, drawn when missing
    :param rng: generator for parameters that are not given
    :param params: recipe parameters, see the args column of scan_menu
    :return: Recipe
    """
    entry = _entry(kind)
    unknown = sorted(set(params) - set(entry.args))
    if unknown:
        raise InvalidParamsError(
            f"{entry.name} takes {', '.join(entry.args)}, got unknown {unknown}", recipe=entry.name
        )
    rng = rng if rng is not None else np.random.default_rng()
    plan = RECIPES[entry.name](rng, **params)
    if seed is None:
        seed = draw_seed(rng)
    source = unparse(plan.spec(entry.name_full, seed))
    logger.debug(f"Recipe {entry.name} with {plan.params}, seed {seed}")
    return Recipe(kind=entry.name, name_full=entry.name_full, params=plan.params, seed=seed, source=source)


def takeout(recipe: Optional[Recipe] = None, rng: Optional[np.random.Generator] = None) -> DesignTable:
    """
    Run a recipe through parse, build, assign and serve; without a recipe a random
    one is picked from the menu
    """
    if recipe is None:
        rng = rng if rng is not None else np.random.default_rng()
        names = [entry.name for entry in entries()]
        recipe = menu(names[int(rng.integers(len(names)))], rng=rng)
    spec = parse_spec(recipe.source)
    design = assign_spec(build_design(spec), spec)
    return design.serve_table()


def scan_menu() -> pd.DataFrame:
    """
    The menu: one row per recipe with its arguments and full name
    """
    return pd.DataFrame(
        [
            {
                "package": PACKAGE,
                "name": entry.name,
                "args": ", ".join(entry.args),
                "name_full": entry.name_full,
            }
            for entry in entries()
        ],
        columns=["package", "name", "args", "name_full"],
    )
