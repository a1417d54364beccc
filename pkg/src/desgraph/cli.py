import argparse
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from desgraph.constants import DEFAULT_MAX_ROWS
from desgraph.display import GRAPHS
from desgraph.dsl import EXIT_DESIGN_ERROR, EXIT_OK, EXIT_PARSE_ERROR, RunFlags, parse_spec, run_spec
from desgraph.exceptions import DesignError, SpecError
from desgraph.menu import entries, menu, scan_menu, takeout
from desgraph.table import ingest_table


def _stderr(message: str):
    # looked up per message, sys.stderr may be swapped after setup
    sys.stderr.write(message)


def setup_logging(verbose: bool = False):
    logger.remove()
    logger.add(_stderr, level="DEBUG" if verbose else "WARNING")


def _names(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    return [name.strip() for name in value.split(",") if name.strip()]


def _value(text: str) -> Any:
    if "," in text:
        return [_value(part.strip()) for part in text.split(",")]
    try:
        return int(text)
    except ValueError:
        return text


def _params(pairs: Optional[List[str]]) -> Dict[str, Any]:
    params = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ValueError(f"--param takes name=value, got {pair!r}")
        params[name.strip()] = _value(value.strip())
    return params


def _fail(message: str, status: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return status


def cmd_build(args: argparse.Namespace) -> int:
    try:
        with open(args.spec, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        return _fail(str(e), EXIT_DESIGN_ERROR)
    try:
        spec = parse_spec(text)
    except SpecError as e:
        return _fail(f"{args.spec}: {e}", EXIT_PARSE_ERROR)
    flags = RunFlags(
        out=args.out,
        export=args.export,
        overwrite=args.overwrite,
        graph=tuple(args.graph) if args.graph else None,
        tree=args.tree,
        seed=args.seed,
        autofill=args.autofill,
    )
    result = run_spec(spec, flags)
    if not result.ok:
        return _fail(result.error, result.status)
    if result.tree is not None:
        print(result.tree)
        print()
    print(result.table.render(max_rows=args.max_rows))
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        data = pd.read_csv(args.csv)
        table = ingest_table(
            data,
            units=_names(args.units),
            trts=_names(args.trts),
            rcrds=_names(args.rcrds),
            title=args.title,
        )
    except DesignError as e:
        return _fail(f"{e.kind}: {e.message}", EXIT_DESIGN_ERROR)
    except (OSError, ValueError) as e:
        return _fail(str(e), EXIT_DESIGN_ERROR)
    print(table.render(max_rows=args.max_rows))
    return EXIT_OK


def cmd_menu(args: argparse.Namespace) -> int:
    try:
        recipe = menu(args.kind, seed=args.seed, **_params(args.param))
    except DesignError as e:
        return _fail(f"{e.kind}: {e.message}", EXIT_DESIGN_ERROR)
    except ValueError as e:
        return _fail(str(e), EXIT_DESIGN_ERROR)
    print(recipe.source, end="")
    return EXIT_OK


def cmd_takeout(args: argparse.Namespace) -> int:
    try:
        rng = np.random.default_rng()
        kind = args.kind or str(rng.choice([entry.name for entry in entries()]))
        recipe = menu(kind, seed=args.seed, rng=rng, **_params(args.param))
        table = takeout(recipe)
    except (DesignError, SpecError) as e:
        return _fail(str(e), EXIT_DESIGN_ERROR)
    except ValueError as e:
        return _fail(str(e), EXIT_DESIGN_ERROR)
    print(recipe.source)
    print(table.render(max_rows=args.max_rows))
    return EXIT_OK


def cmd_scan_menu(args: argparse.Namespace) -> int:
    print(scan_menu().to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="desgraph", description="Build, randomise and export experimental designs"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    build = commands.add_parser("build", help="run a design spec")
    build.add_argument("spec", help="design spec file")
    build.add_argument("--out", metavar="FILE", help="write the design table as CSV")
    build.add_argument("--export", metavar="DIR", help="write the design, data sheets and rules")
    build.add_argument("--overwrite", action="store_true", help="replace an existing export")
    build.add_argument(
        "--graph",
        nargs=2,
        metavar=("{" + ",".join(GRAPHS) + "}", "FILE"),
        help="write the factor or level graph, as JSON when FILE ends in .json and DOT otherwise",
    )
    build.add_argument("--tree", action="store_true", help="print the factor tree")
    build.add_argument("--seed", type=int, help="overrides the seed of the spec")
    build.add_argument("--autofill", action="store_true", help="fill records with valid values")
    build.set_defaults(handler=cmd_build)

    ingest = commands.add_parser("ingest", help="show a CSV file as a design table")
    ingest.add_argument("csv", help="CSV file with a header row")
    ingest.add_argument("--units", help="comma separated unit columns")
    ingest.add_argument("--trts", help="comma separated treatment columns")
    ingest.add_argument("--rcrds", help="comma separated record columns")
    ingest.add_argument("--title", help="table title")
    ingest.set_defaults(handler=cmd_ingest)

    for name, helps in (("menu", "print a recipe as spec text"), ("takeout", "run a recipe")):
        sub = commands.add_parser(name, help=helps)
        sub.add_argument("kind", nargs="?" if name == "takeout" else None, help="recipe name")
        sub.add_argument(
            "--param", action="append", metavar="NAME=VALUE", help="recipe parameter, repeatable"
        )
        sub.add_argument("--seed", type=int, help="seed written into the recipe")
        sub.set_defaults(handler=cmd_menu if name == "menu" else cmd_takeout)

    scan = commands.add_parser("scan-menu", help="list the recipes")
    scan.set_defaults(handler=cmd_scan_menu)

    for sub in (build, ingest, commands.choices["takeout"]):
        sub.add_argument("--max-rows", type=int, default=DEFAULT_MAX_ROWS, help="rows to print")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    return args.handler(args)
