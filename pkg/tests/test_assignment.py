import numpy as np
import pytest
from scipy import stats

from desgraph import design, nested_in, register_ordering
from desgraph.constants import SEED_ENV
from desgraph.exceptions import (
    ConstraintRefersToNonAncestorError,
    DuplicateAllotmentError,
    LengthMismatchError,
    NoAllotmentError,
    ReservedNameError,
    RoleMismatchError,
    SelfAllotmentError,
    UnassignedTreatmentsError,
    UnknownOrderingError,
)


def crd(n: int = 10, t: int = 3):
    return design().set_units(unit=n).set_trts(trt=t).allot_trts("trt ~ unit")


def test_calf_allotment(calf):
    table = calf.serve_table()
    assert table.shape == (80, 5)
    assert table.names() == ["pen", "calf", "weight", "hay", "antiscour"]
    data = table.data
    # hay is constant within a pen and splits the pens in half
    assert (data.groupby("pen")["hay"].nunique() == 1).all()
    assert data.drop_duplicates("pen")["hay"].value_counts().tolist() == [4, 4]
    # antiscour is balanced within each pen
    per_pen = data.groupby(["pen", "antiscour"]).size()
    assert (per_pen == 5).all()
    assert table.seed == 42


def test_same_seed_same_table(calf):
    again = (
        design("Effective teaching")
        .set_units(pen=8, calf=nested_in("pen", 10))
        .set_rcrds(weight="calf")
        .set_trts(hay=2, antiscour=2)
        .allot_trts("hay ~ pen", "antiscour ~ calf")
        .assign_trts("random", seed=42)
    )
    assert calf.serve_table().data.equals(again.serve_table().data)


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "7")
    first = crd().assign_trts()
    second = crd().assign_trts()
    assert first.seed == 7
    assert first.serve_table().data.equals(second.serve_table().data)


def test_bad_seed_in_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "seven")
    with pytest.raises(ValueError):
        crd().assign_trts()


def test_reassign_replaces_links():
    d = crd().assign_trts("systematic-fastest", seed=1)
    d.assign_trts("systematic-slowest", seed=1)
    assert d.serve_table().data["trt"].tolist()[:5] == ["trt1"] * 4 + ["trt2"]


def test_systematic_fastest():
    table = crd().assign_trts("systematic", seed=1).serve_table()
    assert table.data["trt"].tolist() == ["trt1", "trt2", "trt3"] * 3 + ["trt1"]


def test_systematic_slowest():
    table = crd().assign_trts("systematic-slowest", seed=1).serve_table()
    assert table.data["trt"].tolist() == ["trt1"] * 4 + ["trt2"] * 3 + ["trt3"] * 3


def test_systematic_random_keeps_pattern():
    table = crd(9, 3).assign_trts("systematic-random-slowest", seed=3).serve_table()
    values = table.data["trt"].tolist()
    assert values[0] == values[1] == values[2]
    assert len({values[0], values[3], values[6]}) == 3


def test_random_replication_is_balanced():
    for seed in range(20):
        counts = crd(10, 3).assign_trts("random", seed=seed).serve_table().data["trt"].value_counts()
        assert sorted(counts.tolist()) == [3, 3, 4]


def test_extra_replicate_is_uniform():
    extra = []
    for seed in range(300):
        counts = crd(10, 3).assign_trts("random", seed=seed).serve_table().data["trt"].value_counts()
        extra.append(counts.idxmax())
    observed = [extra.count(f"trt{i}") for i in (1, 2, 3)]
    assert stats.chisquare(observed).pvalue > 0.001


@pytest.mark.parametrize("order", ["systematic-random-fastest", "systematic-random-slowest"])
def test_shuffled_systematic_extra_replicate_is_uniform(order):
    extra = []
    for seed in range(300):
        counts = crd(10, 3).assign_trts(order, seed=seed).serve_table().data["trt"].value_counts()
        extra.append(counts.idxmax())
    observed = [extra.count(f"trt{i}") for i in (1, 2, 3)]
    assert stats.chisquare(observed).pvalue > 0.001


def test_explicit_constraint():
    d = (
        design()
        .set_units(block=2, plot=nested_in("block", 6))
        .set_trts(trt=3)
        .allot_trts("trt ~ plot")
        .assign_trts("random", seed=5, constrain={"plot": []})
    )
    counts = d.serve_table().data["trt"].value_counts()
    assert counts.tolist() == [4, 4, 4]


def test_constraint_must_name_an_ancestor():
    d = design().set_units(block=2, plot=nested_in("block", 6)).set_trts(trt=3).allot_trts("trt ~ plot")
    with pytest.raises(ConstraintRefersToNonAncestorError):
        d.assign_trts(constrain={"plot": "trt"})


def test_assignment_errors():
    with pytest.raises(NoAllotmentError):
        design().set_units(unit=4).set_trts(trt=2).assign_trts(seed=1)
    with pytest.raises(UnknownOrderingError):
        crd().assign_trts("shuffled", seed=1)
    with pytest.raises(LengthMismatchError):
        crd().assign_trts(["random", "random"], seed=1)
    with pytest.raises(DuplicateAllotmentError):
        crd().allot_trts("trt ~ unit")
    with pytest.raises(RoleMismatchError):
        crd().allot_trts("unit ~ unit")
    with pytest.raises(SelfAllotmentError):
        crd().allot_units("unit ~ unit")
    with pytest.raises(ValueError):
        crd().allot_trts("trt unit")


def test_unassigned_treatments():
    with pytest.raises(UnassignedTreatmentsError):
        crd().serve_table()


def test_conditioned_treatment_follows_parent(alloted1):
    table = alloted1.assign_trts("random", seed=11).serve_table()
    data = table.data
    assert table.shape == (90, 7)
    assert (data.groupby("row")["fertilizer"].nunique() == 1).all()
    # each site has one row per fertilizer
    assert (data.drop_duplicates("row").groupby("site")["fertilizer"].nunique() == 3).all()
    assert set(data.loc[data["fertilizer"] == "none", "amount"]) == {0}
    assert set(data.loc[data["fertilizer"] != "none", "amount"]) <= {0.5, 1, 2}


def test_garden(garden):
    table = garden.allot_table(
        "water ~ shelter",
        "chamber ~ bed",
        "species ~ row",
        "rainfall ~ col",
        "rep ~ block",
        seed=2023,
    )
    data = table.data
    assert table.shape == (576, 11)
    assert data.drop_duplicates("shelter")["water"].value_counts().tolist() == [4, 4, 4]
    assert (data.drop_duplicates("bed").groupby("shelter")["chamber"].nunique() == 2).all()
    # blocks take the first and the last four rows of each bed
    rows = data.drop_duplicates("row")
    assert (rows.groupby("block").size() == 4).all()
    assert (rows.groupby("block")["species"].nunique() == 4).all()
    assert (data.drop_duplicates("col").groupby("bed")["rainfall"].nunique() == 3).all()
    assert (data.drop_duplicates("block").groupby("bed")["rep"].nunique() == 2).all()
    assert (data.groupby("bed").size() == 24).all()


def test_custom_ordering():
    def reverse(trts, units, constrain, rng):
        return np.arange(len(units))[::-1] % len(trts)

    register_ordering("reverse-cycle", reverse)
    table = crd(4, 2).assign_trts("reverse-cycle", seed=1).serve_table()
    assert table.data["trt"].tolist() == ["trt2", "trt1", "trt2", "trt1"]


def test_custom_ordering_as_decorator():
    @register_ordering("first-only")
    def first(trts, units, constrain, rng):
        return np.zeros(len(units), dtype=int)

    table = crd(3, 2).assign_trts("first-only", seed=1).serve_table()
    assert table.data["trt"].tolist() == ["trt1"] * 3


def test_custom_ordering_length_is_checked():
    register_ordering("too-short", lambda trts, units, constrain, rng: [0])
    with pytest.raises(LengthMismatchError):
        crd(4, 2).assign_trts("too-short", seed=1)


def test_builtin_names_are_reserved():
    with pytest.raises(ReservedNameError):
        register_ordering("random", lambda trts, units, constrain, rng: [])
