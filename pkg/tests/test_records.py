import json

import pandas as pd
import pytest

from desgraph import export_design, load_rules, rcrd
from desgraph.exceptions import (
    ContradictoryBoundsError,
    IoFailureError,
    TargetExistsError,
    UnknownRecordError,
)
from desgraph.models import LevelsRule, RangeRule
from desgraph.table import DesignTable


@pytest.fixture
def measured(complex_units):
    return complex_units.set_rcrds(soil="site", grain="plot").expect_rcrds(
        rcrd("grain") >= 0,
        rcrd("grain") < 100,
        rcrd("soil").isin(["clay", "loam", "sand"]),
    )


def test_range_rules_merge(measured):
    grain = [rule for rule in measured.rules if rule.record == "grain"]
    assert len(grain) == 1
    rule = grain[0].rule
    assert isinstance(rule, RangeRule)
    assert (rule.min, rule.min_inclusive, rule.max, rule.max_inclusive) == (0, True, 100, False)
    assert grain[0].unit == "plot"


def test_repeated_bound_replaces(measured):
    measured.expect_rcrds(rcrd("grain") <= 50)
    (rule,) = [rule.rule for rule in measured.rules if rule.record == "grain"]
    assert (rule.min, rule.max, rule.max_inclusive) == (0, 50, True)


def test_validate_values(measured):
    assert measured.validate_values("grain", [0, 99.5, 100, -1, None, "heavy"]) == [
        True,
        True,
        False,
        False,
        True,
        False,
    ]
    assert measured.validate_values("soil", ["clay", "peat", float("nan")]) == [True, False, True]


def test_contradictory_bounds(measured):
    with pytest.raises(ContradictoryBoundsError):
        measured.expect_rcrds(rcrd("grain") > 200)
    with pytest.raises(ContradictoryBoundsError):
        measured.set_rcrds(moisture="plot").expect_rcrds(rcrd("moisture") > 5, rcrd("moisture") < 5)


def test_rules_need_records(measured):
    with pytest.raises(UnknownRecordError):
        measured.expect_rcrds(rcrd("site") > 0)
    with pytest.raises(UnknownRecordError):
        measured.validate_values("plot", [1])


def test_valuetype_rule(measured):
    measured.set_rcrds(count="plot").expect_rcrds(rcrd("count").valuetype("integer"))
    assert measured.validate_values("count", [1, 2.0, 2.5, "3"]) == [True, True, False, False]


def test_export(measured, tmp_path):
    target = tmp_path / "trial"
    manifest = export_design(measured.serve_table(), target)
    assert manifest.files == [
        "design.csv",
        "sheet_site.csv",
        "sheet_plot.csv",
        "validation.json",
        "manifest.json",
    ]
    assert manifest.rows == {"design.csv": 72, "sheet_site.csv": 4, "sheet_plot.csv": 72}

    site = pd.read_csv(target / "sheet_site.csv")
    assert site.columns.tolist() == ["site", "soil"]
    assert site["site"].tolist() == ["Narrabri", "Horsham", "Parkes", "Roseworthy"]
    plot = pd.read_csv(target / "sheet_plot.csv")
    assert plot.columns.tolist() == ["site", "col", "row", "plot", "grain"]

    written = json.loads((target / "manifest.json").read_text(encoding="utf-8"))
    assert written["title"] == "Complex structure"
    assert written["rows"]["sheet_site.csv"] == 4


def test_rules_round_trip(measured, tmp_path):
    export_design(measured.serve_table(), tmp_path / "trial")
    loaded = load_rules(tmp_path / "trial" / "validation.json")
    assert loaded == measured.rules
    assert isinstance(loaded[1].rule, LevelsRule)
    assert loaded[1].rule.allowed == ["clay", "loam", "sand"]


def test_export_without_rules(calf, tmp_path):
    manifest = calf.export_design(tmp_path / "calf")
    assert "validation.json" not in manifest.files
    assert not (tmp_path / "calf" / "validation.json").exists()
    assert manifest.rows["sheet_calf.csv"] == 80


def test_export_target_exists(calf, tmp_path):
    target = tmp_path / "calf"
    calf.export_design(target)
    with pytest.raises(TargetExistsError):
        calf.export_design(target)
    calf.export_design(target, overwrite=True)
    assert (target / "design.csv").exists()


def test_failed_expectation_keeps_rules(calf, measured):
    with pytest.raises(ContradictoryBoundsError):
        calf.expect_rcrds(rcrd("weight") > 10, rcrd("weight") < 0)
    assert calf.rules == []

    before = [rule.model_copy(deep=True) for rule in measured.rules]
    with pytest.raises(ContradictoryBoundsError):
        measured.expect_rcrds(rcrd("grain") <= 50, rcrd("grain") > 200)
    assert measured.rules == before


def test_failed_export_leaves_nothing(calf, tmp_path, monkeypatch):
    def broken(self):
        raise OSError("disk full")

    target = tmp_path / "calf"
    calf.export_design(target)
    monkeypatch.setattr(DesignTable, "export_frame", broken)
    with pytest.raises(IoFailureError):
        calf.export_design(target, overwrite=True)
    with pytest.raises(IoFailureError):
        calf.export_design(tmp_path / "other")
    assert sorted(path.name for path in tmp_path.iterdir()) == ["calf"]
    assert (target / "manifest.json").exists()
