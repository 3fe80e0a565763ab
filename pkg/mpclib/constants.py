# Message and state budgets
DEFAULT_MESSAGE_WORDS = 2
DEFAULT_KAPPA = 8
DEFAULT_PRECISION_FACTOR = 2
MAX_PRECISION_BITS = 52

# Separable aggregation
SEPARABLE_TAGS = ("sum", "max", "min", "or", "and")

# Memory modes
UNRESTRICTED = "unrestricted"
INPUT_LINEAR = "input-linear"
MEMORY_MODES = (UNRESTRICTED, INPUT_LINEAR)

# Engines
ENGINE_CONGEST = "congest"
ENGINE_MPC_V1 = "mpc-v1"
ENGINE_MPC_V2 = "mpc-v2"
ENGINES = (ENGINE_CONGEST, ENGINE_MPC_V1, ENGINE_MPC_V2)
ENGINE_ALIASES = {
    "congest_ref": ENGINE_CONGEST,
    "compressed_v1": ENGINE_MPC_V1,
    "compressed_v2": ENGINE_MPC_V2,
}

# Algorithms selectable from the command line
ALGORITHMS = ("mis", "2rs", "brs", "sparsify", "shatter", "luby")

# Ruling set f-schedules
SCHEDULE_UNRESTRICTED = "i"
SCHEDULE_INPUT_LINEAR = "ii"
SCHEDULE_BOUNDED = "bounded"
SCHEDULES = (SCHEDULE_UNRESTRICTED, SCHEDULE_INPUT_LINEAR, SCHEDULE_BOUNDED)

# Graph models
GRAPH_MODELS = (
    "gnp",
    "random_regular",
    "path",
    "cycle",
    "clique",
    "star",
    "disjoint_cliques",
)

# Process exit codes
EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_AUDIT_FAILED = 3

SCHEMA_VERSION = "1.0"
