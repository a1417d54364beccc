import pytest

from desgraph import conditioned_on, crossed_by, design, lvls, nested_in
from desgraph.exceptions import (
    DuplicateFactorError,
    EmptySpecError,
    FewerThanTwoParentsError,
    IncompleteRulesError,
    InvalidRulesError,
    NoTreatmentsError,
    RoleMismatchError,
    TargetNotAUnitError,
    UnknownUnitError,
)
from desgraph.levels import Count, Values, rules
from desgraph.utils import index_labels, si_format


def test_index_labels_are_zero_padded():
    assert index_labels("pen", 3) == ["pen1", "pen2", "pen3"]
    assert index_labels("calf", 10)[:2] == ["calf01", "calf02"]
    assert index_labels("calf", 10)[-1] == "calf10"


def test_si_format():
    assert si_format(8) == "8"
    assert si_format(999) == "999"
    assert si_format(1000) == "1k"
    assert si_format(1800) == "~2k"
    assert si_format(2_000_000) == "2M"


def test_count_and_values():
    d = design().set_units(pen=3).set_trts(dose=[0.5, 1, 2], kind=["a", "b"])
    assert d.levels_of("pen") == ["pen1", "pen2", "pen3"]
    assert d.levels_of("dose") == [0.5, 1, 2]
    assert d.levels_of("kind") == ["a", "b"]


def test_lvls_keeps_numbers_as_values():
    d = design().set_trts(rate=lvls([10, 20]), single=lvls(5))
    assert d.levels_of("rate") == [10, 20]
    assert d.levels_of("single") == [5]


def test_nested_counts_per_parent(complexd):
    table = complexd.serve_table()
    assert table.shape == (90, 4)
    counts = table.data.groupby("site", sort=False)["plot"].count().to_dict()
    assert counts == {"Narrabri": 27, "Horsham": 18, "Parkes": 18, "Roseworthy": 27}
    assert len(complexd.levels_of("col")) == 30
    assert len(complexd.levels_of("row")) == 12


def test_nested_crossed_within_parent(complex_units):
    table = complex_units.serve_table()
    assert table.shape == (72, 4)
    per_site = table.data.groupby("site")[["row", "col"]].nunique()
    assert per_site["row"].tolist() == [3, 3, 3, 3]
    assert per_site["col"].tolist() == [6, 6, 6, 6]
    # every plot sits on one row and one column of its own site
    assert not table.data.duplicated(["site", "row", "col"]).any()


def test_label_nested_restarts_within_parent(complex_units):
    table = complex_units.serve_table(label_nested=["col"])
    assert sorted(table.data["col"].unique()) == [f"col{i}" for i in range(1, 7)]
    assert table.data["row"].nunique() == 12
    everything = complex_units.serve_table(label_nested=True)
    assert everything.data["row"].nunique() == 3


def test_nested_values_stay_distinct():
    d = design().set_units(site=["A", "B"], plot=nested_in("site", ["x", "y"]))
    assert d.serve_table().data["plot"].tolist() == ["A:x", "A:y", "B:x", "B:y"]
    assert d.serve_table(label_nested="plot").data["plot"].tolist() == ["x", "y", "x", "y"]


def test_incomplete_rules():
    with pytest.raises(IncompleteRulesError) as e:
        design().set_units(site=["A", "B", "C"], col=nested_in("site", {"A": 2}))
    assert e.value.missing == ["B", "C"]


def test_rules_reject_unknown_and_repeated_labels():
    with pytest.raises(InvalidRulesError):
        design().set_units(site=["A", "B"], col=nested_in("site", {"Z": 2, ".": 1}))
    with pytest.raises(InvalidRulesError):
        design().set_units(site=["A", "B"], col=nested_in("site", {"A": 2, ("A", "B"): 1}))
    with pytest.raises(InvalidRulesError):
        rules({".": 1, ("A", "."): 2})


def test_rule_numbers():
    (nest,) = rules({"A": 3})
    (cond,) = rules({"A": 3}, number_is_count=False)
    assert nest.spec == Count(3)
    assert cond.spec == Values((3,))


def test_empty_specs():
    with pytest.raises(EmptySpecError):
        design().set_units(plot=0)
    with pytest.raises(EmptySpecError):
        design().set_trts(trt=[])
    with pytest.raises(InvalidRulesError):
        design().set_trts(trt=["a", "a"])


def test_crossed_needs_two_factors():
    with pytest.raises(FewerThanTwoParentsError):
        crossed_by("row")


def test_duplicate_names():
    with pytest.raises(DuplicateFactorError):
        design().set_units(plot=4).set_trts(plot=2)


def test_roles_are_checked():
    d = design().set_units(plot=4).set_trts(trt=2)
    with pytest.raises(RoleMismatchError):
        d.set_units(sub=nested_in("trt", 2))
    with pytest.raises(RoleMismatchError):
        d.set_trts(other=nested_in("plot", 2))
    with pytest.raises(RoleMismatchError):
        d.set_units(cond=conditioned_on("trt", {".": [1, 2]}))


def test_records_need_a_unit():
    d = design().set_units(plot=4).set_trts(trt=2)
    with pytest.raises(UnknownUnitError):
        d.set_rcrds(yield_="field")
    with pytest.raises(TargetNotAUnitError):
        d.set_rcrds(yield_="trt")


def test_set_rcrds_of():
    d = design().set_units(plot=4).set_rcrds_of(plot=["height", "mass"])
    assert d.factor_names() == ["plot", "height", "mass"]
    table = d.serve_table()
    assert table.data["height"].tolist() == ["o"] * 4
    assert table.column("mass").role_tag == "<R(4)>"


def test_trts_table_crossed(factrt):
    table = factrt.trts_table()
    assert table.shape == (12, 3)
    assert table.iloc[0].tolist() == ["a", "A", 0.5]
    assert table.iloc[1].tolist() == ["b", "A", 0.5]
    assert not table.duplicated().any()


def test_trts_table_conditioned(factrtc):
    table = factrtc.trts_table()
    assert table.shape == (14, 3)
    assert [tuple(row) for row in table.itertuples(index=False)][:4] == [
        ("a", "none", 0),
        ("b", "none", 0),
        ("a", "A", 0.5),
        ("b", "A", 0.5),
    ]
    assert set(table.loc[table["fertilizer"] == "none", "amount"]) == {0}
    assert set(table.loc[table["fertilizer"] == "B", "amount"]) == {0.5, 1, 2}
    assert factrtc.levels_of("amount") == [0, 0.5, 1, 2]


def test_trts_table_without_treatments(complex_units):
    with pytest.raises(NoTreatmentsError):
        complex_units.trts_table()
