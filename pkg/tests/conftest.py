from pathlib import Path

import pytest
from loguru import logger

from desgraph import crossed_by, design, nested_in
from desgraph.levels import conditioned_on

SPECS = Path(__file__).parent / "specs"

SITES = ["Narrabri", "Horsham", "Parkes", "Roseworthy"]


@pytest.fixture(autouse=True)
def cli_logging():
    yield
    # main() binds handlers to the stderr of the running test
    logger.remove()


@pytest.fixture
def specs_dir() -> Path:
    return SPECS


@pytest.fixture
def calf():
    return (
        design("Effective teaching")
        .set_units(pen=8, calf=nested_in("pen", 10))
        .set_rcrds(weight="calf")
        .set_trts(hay=2, antiscour=2)
        .allot_trts("hay ~ pen", "antiscour ~ calf")
        .assign_trts("random", seed=42)
    )


@pytest.fixture
def complex_units():
    return design("Complex structure").set_units(
        site=SITES,
        col=nested_in("site", 6),
        row=nested_in("site", 3),
        plot=nested_in("site", crossed_by("row", "col")),
    )


@pytest.fixture
def complexd():
    return design("Complex structure with different dimensions").set_units(
        site=SITES,
        col=nested_in("site", {("Narrabri", "Roseworthy"): 9, ".": 6}),
        row=nested_in("site", 3),
        plot=nested_in("site", crossed_by("row", "col")),
    )


@pytest.fixture
def factrt():
    return design("Factorial treatment").set_trts(
        variety=["a", "b"], fertilizer=["A", "B"], amount=[0.5, 1, 2]
    )


@pytest.fixture
def factrtc():
    return design("Factorial treatment with control").set_trts(
        variety=["a", "b"],
        fertilizer=["none", "A", "B"],
        amount=conditioned_on("fertilizer", {"none": 0, ".": [0.5, 1, 2]}),
    )


@pytest.fixture
def alloted1(complexd, factrtc):
    return (complexd + factrtc).allot_trts("fertilizer ~ row", "amount:variety ~ plot")


@pytest.fixture
def garden():
    return (
        design("Garden")
        .set_units(
            shelter=12,
            bed=nested_in("shelter", 2),
            block=nested_in("bed", 2),
            row=nested_in("bed", 8),
            col=nested_in("bed", 3),
            plot=nested_in("bed", crossed_by("row", "col")),
        )
        .allot_units("block ~ row")
        .assign_units("systematic-slowest")
        .set_trts(
            water=["R", "N", "I"],
            chamber=["W", "C"],
            species=["media", "coccinea", "baxteri", "quercifolia"],
            rainfall=["High", "Medium", "Low"],
            rep=[1, 2],
        )
    )


@pytest.fixture
def composition():
    return (
        design("Japanese composition")
        .set_units(
            background=["NT", "NNT", "NG"],
            rater=nested_in("background", {"NT": 10, "NNT": 8, "NG": 11}),
            order=list(range(1, 11)),
            assess=crossed_by("rater", "order"),
        )
        .set_trts(composition=[f"C{i}" for i in range(1, 11)])
        .set_rcrds_of(assess=["accuracy", "structure", "context", "richness", "overall"])
        .allot_trts("composition ~ assess")
        .assign_trts("williams", seed=2023)
    )
