import os

# Probability validation
PROBABILITY_TOLERANCE = 1e-12
RENORMALIZATION_TOLERANCE = 1e-9

# Geometry
MEMBERSHIP_TOLERANCE = 1e-9
DYKSTRA_MAX_SWEEPS = 10_000
DYKSTRA_TOLERANCE = 1e-10
MAX_VERTEX_DIMENSION = 12
HAUSDORFF_BOX_MARGIN = 0.0

# Solvers
TIE_TOLERANCE = 1e-12
ZERO_STEERING_THRESHOLD = 1e-12
SIMPLEX_PIVOT_TOLERANCE = 1e-9
SIMPLEX_OPTIMALITY_TOLERANCE = 1e-11
SIMPLEX_MAX_ITERATIONS = 10_000
SIMPLEX_FEASIBILITY_TOLERANCE = 1e-9
DUALITY_GAP_TOLERANCE = 1e-9
LP_CONDITION_FACTOR = 16.0
FRANK_WOLFE_MAX_ITERATIONS = 10_000
FRANK_WOLFE_TOLERANCE = 1e-6

# Condition checker
CHECK_GRID_GUARD = 10_000_000
CHECK_TOLERANCE = 1e-3
CHECK_FRANK_WOLFE_MAX_ITERATIONS = 2_000
CHECK_FRANK_WOLFE_TOLERANCE = 1e-4
CHECK_DEFAULT_RESOLUTIONS = ("0.5", "0.25")

# Estimation
ASSUMPTION1_GRID = (100, 400, 1600, 6400)
ASSUMPTION1_DEFAULT_REPS = 200
COVERAGE_DEFAULT_REPS = 500

# Engine / experiments
SMOKE_HORIZON = 2 ** 10
MAX_WORKERS = int(os.getenv("FAIRAPPROACH_WORKERS", "4"))
DEFAULT_OUTPUT_DIR = os.getenv("FAIRAPPROACH_OUTPUT_DIR", "results")
CSV_FLOAT_FORMAT = ".17g"
TRAJECTORY_COLUMNS = ("t", "d_t", "C_t", "Cgr_t", "D_t", "P_t", "R_t", "Rgr_t")

# Logging
LOG_FILE = os.getenv("FAIRAPPROACH_LOG_FILE")
LOG_LEVEL = os.getenv("FAIRAPPROACH_LOG_LEVEL", "INFO")
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# CLI exit codes
EXIT_OK = 0
EXIT_VALIDATION_ERROR = 2
EXIT_SOLVER_FAILURE = 3
EXIT_GRID_GUARD = 4
