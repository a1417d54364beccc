from desgraph.dsl.ast_nodes import (
    AllotDecl,
    Block,
    ConstrainDecl,
    ExpectDecl,
    FactorDecl,
    LabelNestedDecl,
    OrderDecl,
    RecordDecl,
    SeedDecl,
    SpecAst,
)
from desgraph.dsl.parser import check_spec, parse_spec, spec_text, unparse
from desgraph.dsl.runner import (
    EXIT_DESIGN_ERROR,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    RunFlags,
    RunResult,
    assign_spec,
    build_design,
    run_spec,
)
