from desgraph.orderings.core import (
    OrderingFunc,
    canonical_name,
    get_ordering,
    ordering_names,
    register_ordering,
)
from desgraph.orderings.exceptions import (
    BadConstraintArityError,
    RowCountMismatchError,
    UnsupportedOrderError,
)
from desgraph.orderings.builtin import balanced_draw, randomisation_groups
from desgraph.orderings.williams import ordering_williams, williams_square
from desgraph.orderings.latin import difference_set, mols, youden_square
from desgraph.orderings.bibd import bibd_blocks, bibd_feasible, bibd_parameters, pair_counts
