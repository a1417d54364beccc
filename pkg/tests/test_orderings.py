import itertools
from collections import Counter

import numpy as np
import pytest

from desgraph import crossed_by, design, nested_in, williams_square
from desgraph.orderings import (
    BadConstraintArityError,
    RowCountMismatchError,
    UnsupportedOrderError,
    bibd_blocks,
    bibd_parameters,
    difference_set,
    mols,
    ordering_names,
    pair_counts,
    youden_square,
)


def is_latin(square: np.ndarray) -> bool:
    t = len(square)
    symbols = set(range(t))
    return all(set(row) == symbols for row in square) and all(set(col) == symbols for col in square.T)


def carryover(sequences) -> Counter:
    return Counter(pair for seq in sequences for pair in zip(seq[:-1], seq[1:]))


def square_design(t: int, trts: dict, formula: str):
    return (
        design()
        .set_units(row=t, col=t, unit=crossed_by("row", "col"))
        .set_trts(**trts)
        .allot_trts(formula)
    )


def test_registry_names():
    names = ordering_names()
    for name in (
        "random",
        "systematic",
        "systematic-fastest",
        "systematic-slowest",
        "systematic-random",
        "williams",
        "latin",
        "graeco",
        "hyper-graeco",
        "youden",
        "bibd",
    ):
        assert name in names


@pytest.mark.parametrize("t", [2, 4, 6, 8, 10])
def test_williams_even(t):
    square = williams_square(t)
    assert square.shape == (t, t)
    assert is_latin(square)
    counts = carryover(square.T.tolist())
    assert len(counts) == t * (t - 1)
    assert set(counts.values()) == {1}


def test_williams_odd():
    square = williams_square(3)
    assert square.shape == (3, 6)
    counts = carryover(square.T.tolist())
    assert len(counts) == 6
    assert set(counts.values()) == {2}


def test_williams_needs_two_treatments():
    with pytest.raises(ValueError):
        williams_square(1)


@pytest.mark.parametrize("t,k", [(5, 4), (7, 2), (8, 7), (9, 2), (6, 1)])
def test_mols_are_orthogonal(t, k):
    squares = mols(t, k)
    assert len(squares) == k
    for square in squares:
        assert is_latin(square)
    for a, b in itertools.combinations(squares, 2):
        assert len(set(zip(a.ravel(), b.ravel()))) == t * t


def test_mols_unsupported():
    with pytest.raises(UnsupportedOrderError):
        mols(6, 2)
    with pytest.raises(UnsupportedOrderError):
        mols(5, 5)


def test_difference_set():
    assert difference_set(7, 3) == (0, 1, 3)
    assert difference_set(6, 3) is None
    assert difference_set(7, 7) is None


def test_youden_square():
    square = youden_square(7, 3, np.random.default_rng(4))
    assert square.shape == (7, 3)
    for col in square.T:
        assert sorted(col) == list(range(7))
    counts = pair_counts(square, 7)
    assert (counts[~np.eye(7, dtype=bool)] == 1).all()


def test_bibd_parameters():
    assert bibd_parameters(7, 3, 3) == (7, 1)
    assert bibd_parameters(6, 3, 5) == (10, 2)
    with pytest.raises(UnsupportedOrderError):
        bibd_parameters(4, 3, 2)
    with pytest.raises(UnsupportedOrderError):
        bibd_parameters(4, 4, 3)


@pytest.mark.parametrize("t,k,r", [(4, 2, 3), (7, 3, 3), (6, 3, 5)])
def test_bibd_blocks(t, k, r):
    b, lam = bibd_parameters(t, k, r)
    blocks = bibd_blocks(t, k, r, np.random.default_rng(1))
    assert blocks.shape == (b, k)
    assert all(len(set(block)) == k for block in blocks)
    counts = pair_counts(blocks, t)
    assert (np.diag(counts) == r).all()
    assert (counts[~np.eye(t, dtype=bool)] == lam).all()


def test_latin_ordering():
    d = square_design(5, {"trt": 5}, "trt ~ unit").assign_trts("latin", seed=3)
    data = d.serve_table().data
    assert (data.groupby("row")["trt"].nunique() == 5).all()
    assert (data.groupby("col")["trt"].nunique() == 5).all()


def test_graeco_ordering():
    d = square_design(4, {"trt1": 4, "trt2": 4}, "trt1:trt2 ~ unit").assign_trts("graeco", seed=3)
    data = d.serve_table().data
    for name in ("trt1", "trt2"):
        assert (data.groupby("row")[name].nunique() == 4).all()
        assert (data.groupby("col")[name].nunique() == 4).all()
    assert not data.duplicated(["trt1", "trt2"]).any()


def test_hyper_graeco_ordering():
    trts = {"trt1": 5, "trt2": 5, "trt3": 5}
    d = square_design(5, trts, "trt1:trt2:trt3 ~ unit").assign_trts("hyper-graeco", seed=8)
    data = d.serve_table().data
    for a, b in itertools.combinations(trts, 2):
        assert not data.duplicated([a, b]).any()


def test_latin_needs_a_square():
    d = (
        design()
        .set_units(row=3, col=4, unit=crossed_by("row", "col"))
        .set_trts(trt=3)
        .allot_trts("trt ~ unit")
    )
    with pytest.raises(RowCountMismatchError):
        d.assign_trts("latin", seed=1)


def test_latin_needs_two_constraints():
    d = design().set_units(block=3, unit=nested_in("block", 3)).set_trts(trt=3).allot_trts("trt ~ unit")
    with pytest.raises(BadConstraintArityError):
        d.assign_trts("latin", seed=1)


def test_youden_ordering():
    d = (
        design()
        .set_units(row=7, col=3, unit=crossed_by("row", "col"))
        .set_trts(trt=7)
        .allot_trts("trt ~ unit")
        .assign_trts("youden", seed=12)
    )
    data = d.serve_table().data
    assert (data.groupby("col")["trt"].nunique() == 7).all()
    assert (data.groupby("row")["trt"].nunique() == 3).all()


def test_bibd_ordering():
    d = (
        design()
        .set_units(block=7, unit=nested_in("block", 3))
        .set_trts(trt=7)
        .allot_trts("trt ~ unit")
        .assign_trts("bibd", seed=2)
    )
    data = d.serve_table().data
    assert (data.groupby("block")["trt"].nunique() == 3).all()
    assert data["trt"].value_counts().tolist() == [3] * 7
    pairs = Counter(
        pair
        for _, group in data.groupby("block")
        for pair in itertools.combinations(sorted(group["trt"]), 2)
    )
    assert len(pairs) == 21
    assert set(pairs.values()) == {1}


def test_bibd_rejects_unequal_blocks():
    d = (
        design()
        .set_units(block=["a", "b"], unit=nested_in("block", {"a": 2, "b": 3}))
        .set_trts(trt=3)
        .allot_trts("trt ~ unit")
    )
    with pytest.raises(UnsupportedOrderError):
        d.assign_trts("bibd", seed=1)


def test_composition_williams(composition):
    table = composition.serve_table()
    data = table.data
    assert table.shape == (290, 10)
    assert (data.groupby("rater")["composition"].nunique() == 10).all()
    first_tile = [f"rater{i:02d}" for i in range(1, 11)]
    sequences = [
        data[data["rater"] == rater].sort_values("order")["composition"].tolist() for rater in first_tile
    ]
    counts = carryover(sequences)
    assert len(counts) == 90
    assert set(counts.values()) == {1}
    # every position holds each composition once within a tile
    tile = data[data["rater"].isin(first_tile)]
    assert (tile.groupby("order")["composition"].nunique() == 10).all()


def test_williams_needs_one_period_per_treatment():
    d = (
        design()
        .set_units(subject=4, period=3, assess=crossed_by("subject", "period"))
        .set_trts(trt=4)
        .allot_trts("trt ~ assess")
    )
    with pytest.raises(RowCountMismatchError):
        d.assign_trts("williams", seed=1)
