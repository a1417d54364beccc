DEFAULT_TITLE = "An edibble design"
RECORD_PLACEHOLDER = "o"
WILDCARD = "."

DEFAULT_MAX_ROWS = 6
DEFAULT_ORDER = "random"

SI_PREFIXES = ("", "k", "M", "G", "T")
CSV_LINE_TERMINATOR = "\r\n"

SEED_ENV = "DESGRAPH_SEED"
SEED_BITS = 32

# stream keys of the counter based generator
ASSIGNMENT_STREAM = 0
SIMULATION_STREAM = 1
AUTOFILL_STREAM = 2
