from desgraph.design import Design, combine, design
from desgraph.dsl import parse_spec, run_spec, unparse
from desgraph.levels import conditioned_on, crossed_by, lvls, nested_in
from desgraph.menu import menu, scan_menu, takeout
from desgraph.models import Role
from desgraph.orderings import register_ordering, williams_square
from desgraph.records import export_design, load_rules, rcrd
from desgraph.simulate import with_params
from desgraph.table import DesignTable, ingest_table, render_table, serve_table

__version__ = "0.1.0"
