import os

# Constants that are shared throughout the package
DEFAULT_OUTPUT_DIR = os.path.join(os.getcwd(), "phstab-out")
DEFAULT_S3_DATA_DIR = "phstab"

RUN_LOG_FILE_NAME = "phstab-log.txt"
VALIDATION_REPORT_FILE_NAME = "validation.json"
TRAJECTORY_FILE_NAME = "trajectory.csv"
SIMULATION_SUMMARY_FILE_NAME = "simulation_summary.json"
CERTIFICATE_FILE_NAME = "certificate.json"
OBSERVABILITY_FILE_NAME = "observability.csv"
GROWTH_FILE_NAME = "growth.csv"
COUNTEREXAMPLE_FILE_NAME = "counterexample.json"
REPORT_FILE_NAME = "report.json"
CONFIG_SCHEMA_FILE_NAME = "config.schema.json"

REPORT_FILE_TYPE = "json"
SERIES_FILE_TYPE = "csv"

TRACE_ORDERS = ["ba", "ab"]
ENDPOINTS = ["b", "a"]
CLOSURES = ["one_sided", "summation_by_parts"]

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION_FAILED = 2
EXIT_BLOW_UP = 3
EXIT_CERTIFICATE_REFUSED = 4
EXIT_CONFIG_ERROR = 64

# Matrix kernel
MAX_MATRIX_DIMENSION = 64
HERMITIAN_TOLERANCE = 1e-12
JACOBI_OFF_DIAGONAL_TOLERANCE = 1e-13
JACOBI_MAX_SWEEPS = 100
PSD_TOLERANCE = 1e-9
RANK_TOLERANCE = 1e-10
MAX_CONDITION_NUMBER = 1e12

# Model validation
FIELD_HERMITIAN_TOLERANCE = 1e-9
DEFAULT_SAMPLE_GRID = (9, 17)
DEFAULT_T_HORIZON = 10.0
TIME_DIFFERENCE_STEP = 1e-5
ZETA_DIFFERENCE_STEP = 1e-5
SAMPLED_BOUND_INFLATION = 0.05
SAMPLED_MINIMUM_WARNING_FRACTION = 0.05
KAPPA_BISECTION_TOLERANCE = 1e-10
KAPPA_FEASIBILITY_TOLERANCE = 1e-12

# Certificates
DEFAULT_TAU_GRID_COUNT = 32
TAU_GRID_LOWER_FACTOR = 1.01
TAU_GRID_UPPER_FACTOR = 50.0

# Solver
MIN_CELLS = 16
DEFAULT_CELLS = 200
DEFAULT_CFL = 0.5
MAX_CFL = 0.9
BLOW_UP_FACTOR = 1e12
COMPATIBILITY_TOLERANCE = 1e-6

# Analysis
PDE_SLACK = 0.05
ALGEBRA_SLACK = 1e-3
CONTRACTION_SLACK_PER_TIME = 1e-3
LOG_ENERGY_GUARD = 1e-14
MIN_FIT_POINTS = 10
OBSERVABILITY_WINDOWS = 8
DATKO_TAIL_FRACTION = 1e-6

# Transport network
MAX_PERIODS = 200
GROWTH_SLOPE_THRESHOLD = 1e-3
RIEMANN_SAMPLES = 10000
RIEMANN_AGREEMENT = 1e-6
