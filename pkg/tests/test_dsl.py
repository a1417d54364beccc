import json

import pytest

from desgraph.dsl import (
    EXIT_DESIGN_ERROR,
    EXIT_OK,
    AllotDecl,
    ConstrainDecl,
    ExpectDecl,
    FactorDecl,
    LabelNestedDecl,
    OrderDecl,
    RunFlags,
    SeedDecl,
    build_design,
    parse_spec,
    run_spec,
    unparse,
)
from desgraph.exceptions import SpecSemanticError, SpecSyntaxError
from desgraph.levels import Conditioned, Count, Crossed, Nested, SingleLevels, Values
from desgraph.models import RangeRule

TINY = """design "Tiny"
units: plot = 4
trts: trt = ["a", "b"]
allot: trt ~ plot
assign: order = systematic, seed = 1
"""


def read(specs_dir, name: str) -> str:
    return (specs_dir / name).read_text(encoding="utf-8")


def test_parse_items():
    spec = parse_spec(TINY)
    assert spec.title == "Tiny"
    assert [block.kind for block in spec.blocks] == ["units", "trts", "allot", "assign"]
    assert spec.units == (FactorDecl("plot", Count(4)),)
    assert spec.trts == (FactorDecl("trt", Values(("a", "b"))),)
    assert spec.allotments == (AllotDecl(("trt",), "plot"),)
    assert spec.items("assign") == (OrderDecl("trts", ("systematic",)), SeedDecl(1))
    assert spec.blocks[2].line == 4


def test_unparse_is_canonical():
    assert unparse(parse_spec(TINY)) == "\n".join(
        [
            'design "Tiny"',
            "",
            "units:",
            "  plot = 4",
            "",
            "trts:",
            '  trt = ["a", "b"]',
            "",
            "allot:",
            "  trt ~ plot",
            "",
            "assign:",
            "  order = systematic",
            "  seed = 1",
            "",
        ]
    )


@pytest.mark.parametrize("name", ["calf.dsg", "garden.dsg", "composition.dsg"])
def test_round_trip(specs_dir, name):
    spec = parse_spec(read(specs_dir, name))
    text = unparse(spec)
    assert parse_spec(text) == spec
    assert unparse(parse_spec(text)) == text


def test_level_specs():
    spec = parse_spec(
        """
design "Levels"
units:
  site = ["A", "B"]
  row = nested_in(site, 3)
  col = nested_in(site, "A" ~ 2, . ~ 4)
  plot = nested_in(site, crossed_by(row, col))
trts:
  dose = 1:3
  rate = lvls([0.5])
  fertilizer = ["none", "A"]
  amount = conditioned_on(fertilizer, "none" ~ 0, . ~ [0.5, 1])
"""
    )
    specs = {item.name: item.spec for item in spec.units + spec.trts}
    assert specs["row"] == Nested("site", Count(3))
    assert specs["col"].inner[0].spec == Count(2)
    assert specs["col"].inner[1].is_wildcard
    assert specs["plot"] == Nested("site", Crossed(("row", "col")))
    assert specs["dose"] == Values((1, 2, 3))
    assert specs["rate"] == SingleLevels((0.5,))
    amount = specs["amount"]
    assert isinstance(amount, Conditioned)
    assert amount.rules[0].spec == Values((0,))
    assert amount.rules[1].spec == Values((0.5, 1))


def test_expect_output_and_constrain():
    spec = parse_spec(
        """design "Checks"
units:
  block = 3
  plot = nested_in(block, 4)
trts: trt = 4
rcrds: mass of plot, grade of plot
expect:
  mass >= 0
  grade in ["low", "high"]
allot: trt ~ plot
assign:
  order = random
  constrain: plot = block
output: label_nested = all
"""
    )
    assert spec.items("expect") == (
        ExpectDecl("mass", ">=", 0),
        ExpectDecl("grade", "in", allowed=("low", "high")),
    )
    assert spec.items("assign")[1] == ConstrainDecl("plot", ("block",))
    assert spec.items("output") == (LabelNestedDecl(True),)
    d = build_design(spec)
    assert d.validate_values("mass", [-1, 3]) == [False, True]
    assert d.validate_values("grade", ["low", "mid"]) == [True, False]


def test_missing_design_line():
    with pytest.raises(SpecSyntaxError) as e:
        parse_spec("units: plot = 4\n")
    assert e.value.message == "expected 'design'"
    assert e.value.line == 1
    assert str(e.value).startswith("line 1")


def test_corrupted_line(specs_dir):
    lines = read(specs_dir, "calf.dsg").splitlines()
    assert lines[5] == "  calf = nested_in(pen, 10)"
    lines[5] = "  calf = nested_in(pen 10)"
    with pytest.raises(SpecSyntaxError) as e:
        parse_spec("\n".join(lines))
    assert e.value.line == 6
    assert "expected one of" in e.value.message


def test_unterminated_block():
    with pytest.raises(SpecSyntaxError):
        parse_spec('design "Cut"\nunits: plot = nested_in(')


@pytest.mark.parametrize(
    "body,message",
    [
        ("units: plot = nested_in(block, 3)", "unknown factor 'block'"),
        ("units: plot = 3, plot = 4", "'plot' is already declared"),
        ("units: plot = 3\ntrts: trt = 2\nallot: plot ~ trt", "'trt' is a treatment, expected a unit"),
        ("units: plot = 3\ntrts: trt = nested_in(plot, 2)", "treatments can not be nested_in or crossed_by"),
        ("units: plot = 3\nrcrds: mass of plot\nexpect: plot > 0", "'plot' is a unit, expected a record"),
        ("units: plot = 3\nallot: plot ~ plot", "'plot' can not be alloted to itself"),
    ],
)
def test_semantic_errors(body, message):
    with pytest.raises(SpecSemanticError) as e:
        parse_spec(f'design "Broken"\n{body}\n')
    assert message in e.value.message
    assert e.value.line is not None


def test_bad_values_carry_a_line():
    with pytest.raises(SpecSemanticError) as e:
        parse_spec('design "Broken"\nunits:\n  plot = 5:1\n')
    assert e.value.line == 3
    with pytest.raises(SpecSemanticError):
        parse_spec('design "Broken"\nassign: seed = 1.5\n')


def test_calf_spec_matches_builder(specs_dir, calf):
    result = run_spec(parse_spec(read(specs_dir, "calf.dsg")))
    assert result.ok
    assert result.table.shape == (80, 5)
    assert result.table.data.equals(calf.serve_table().data)
    assert [rule.rule for rule in result.table.rules] == [
        RangeRule(min=0, max=500, min_inclusive=False, max_inclusive=True)
    ]


def test_garden_spec_matches_builder(specs_dir, garden):
    result = run_spec(parse_spec(read(specs_dir, "garden.dsg")))
    expected = garden.allot_table(
        "water ~ shelter",
        "chamber ~ bed",
        "species ~ row",
        "rainfall ~ col",
        "rep ~ block",
        seed=2023,
    )
    assert result.ok
    assert result.table.shape == (576, 11)
    assert result.table.data.equals(expected.data)


def test_composition_spec(specs_dir, composition):
    result = run_spec(parse_spec(read(specs_dir, "composition.dsg")))
    assert result.ok
    data = result.table.data
    assert result.table.shape == (290, 10)
    assert sorted(data["rater"].unique())[-1] == "rater11"
    expected = composition.serve_table().data
    assert data.drop(columns="rater").equals(expected.drop(columns="rater"))


def test_seed_flag_overrides_spec(specs_dir):
    spec = parse_spec(read(specs_dir, "calf.dsg"))
    first = run_spec(spec, seed=1).table
    second = run_spec(spec, RunFlags(seed=1)).table
    assert first.seed == second.seed == 1
    assert first.data.equals(second.data)


def test_run_writes_artifacts(specs_dir, tmp_path):
    spec = parse_spec(read(specs_dir, "calf.dsg"))
    flags = RunFlags(
        out=str(tmp_path / "calf.csv"),
        export=str(tmp_path / "export"),
        graph=("factors", str(tmp_path / "factors.json")),
        tree=True,
    )
    result = run_spec(spec, flags)
    assert result.status == EXIT_OK
    assert result.tree.splitlines()[0] == "Effective teaching"
    assert (tmp_path / "calf.csv").exists()
    assert (tmp_path / "export" / "validation.json").exists()
    document = json.loads((tmp_path / "factors.json").read_text(encoding="utf-8"))
    assert len(document["nodes"]) == 5
    assert len(result.paths) == 3


def test_autofill_run(specs_dir):
    result = run_spec(parse_spec(read(specs_dir, "calf.dsg")), autofill=True)
    weights = result.table.data["weight"]
    assert ((weights > 0) & (weights <= 500)).all()


def test_autofill_run_keeps_nested_labels(specs_dir):
    spec = parse_spec(read(specs_dir, "composition.dsg"))
    served = run_spec(spec).table.data
    filled = run_spec(spec, autofill=True).table.data
    assert filled["rater"].equals(served["rater"])
    assert sorted(filled["rater"].unique())[-1] == "rater11"
    assert filled["composition"].equals(served["composition"])


def test_design_errors_end_the_run():
    spec = parse_spec(
        """design "Not square"
units:
  row = 3
  col = 4
  unit = crossed_by(row, col)
trts: trt = 3
allot: trt ~ unit
assign: order = latin, seed = 1
"""
    )
    result = run_spec(spec)
    assert result.status == EXIT_DESIGN_ERROR
    assert result.table is None
    assert result.error.startswith("RowCountMismatch: ")


def test_spec_without_assign_block():
    spec = parse_spec('design "Plain"\nunits: site = 2, plot = nested_in(site, 3)\n')
    result = run_spec(spec)
    assert result.ok
    assert result.table.shape == (6, 2)
