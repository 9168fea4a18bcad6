"""
Application default settings and constants
"""

# =============================================================================
# Application Information
# =============================================================================
APP_NAME = "Random Leap Analyzer"
APP_VERSION = "1.0.0"
APP_DIR_NAME = "RandomLeapAnalyzer"

# =============================================================================
# Parameter Validation
# =============================================================================
PROBABILITY_SUM_TOL = 1e-12       # |sum(p)+sum(q)+hold - 1| allowed

# =============================================================================
# Root Finding
# =============================================================================
CLUSTER_REL_TOL = 1e-7            # Eigenvalues closer than this (times max(1,|z|)) merge
RESIDUAL_REL_TOL = 1e-9           # |chi(z)| bound relative to coefficient 1-norm
UNIT_CIRCLE_TOL = 1e-9            # ||z| - 1| below this counts as "on" the circle
EXTENDED_PRECISION_DPS = 32       # mpmath digits for the retry (about 2x double)
EXTENDED_PRECISION_MAXSTEPS = 200
EXTENDED_NEWTON_MAX_STEPS = 50    # Newton steps when refining roots in mpmath
TIE_REL_TOL = 1e-10               # Equal |y| for ordering purposes
UNIT_SNAP_TOL = 1e-6              # Root snapped to 1 under zero drift must lie this close

# =============================================================================
# Power Sums
# =============================================================================
DIRECT_SUM_MAX_TERMS = 64         # b - a at or below this is summed term by term
UNIT_ROOT_TOL = 1e-12             # |z - 1| below this uses integer Faulhaber sums

# =============================================================================
# Determinant Diagnostics
# =============================================================================
IMAG_RESIDUE_TOL = 1e-8
NEGATIVE_CLAMP_TOL = 1e-10        # Undershoot below 0 (or above 1) clamped with a warning
TIME_CLAMP_REL_TOL = 1e-8         # Negative v_i relative to max(v) clamped

# =============================================================================
# Drift
# =============================================================================
ZERO_DRIFT_TOL = 1e-14            # Float mu treated as zero below this
NEAR_CRITICAL_DRIFT = 1e-8        # Warn when 0 < |mu| <= this
NEAR_CRITICAL_TIMES_DRIFT = 1e-4  # Expected times evaluated in mpmath when 0 < |mu| <= this
NEAR_CRITICAL_BASE_DPS = 30       # Digits kept after the cancellation of the delta column
NEAR_CRITICAL_CHECK_DPS = 15      # Extra digits of the confirming evaluation
NEAR_CRITICAL_AGREEMENT = 1e-12   # Relative agreement required between the two evaluations
WALK_SERIES_MAX_ARG = 1.0         # |N log((1-p)/p)| at or below this sums walk times as a series
WALK_SERIES_MAX_TERMS = 80

# =============================================================================
# Stationary Distributions
# =============================================================================
DEFAULT_TAIL_TOL = 1e-10
TWO_SIDED_RESIDUAL_TOL = 1e-10
ONE_SIDED_RESIDUAL_TOL = 1e-8
STATIONARY_NEGATIVE_TOL = 1e-12
ONE_SIDED_MAX_STATES = 200_000
LIMIT_CONVERGED_TOL = 1e-9        # Uniform-limit deviations at or below this count as converged

# =============================================================================
# Oracle Settings
# =============================================================================
ORACLE_MAX_N = 20_000             # Dense solves refused above this
OCCUPATION_BATCH_CELLS = 1 << 22  # Paths x states held at once by occupation simulations
POWER_ITERATION_TOL = 1e-13
POWER_ITERATION_MAX_ITER = 10**7
ROW_SUM_TOL = 1e-12
HORIZON_FLOOR = 1000              # Minimum simulation horizon (steps)
DEFAULT_SEED = 20240601
DEFAULT_N_PATHS = 100_000
DEFAULT_WORKERS = 1
MC_SIGMA_LIMIT = 4.0              # Monte Carlo agreement in standard errors

# =============================================================================
# Memory Monitoring Settings
# =============================================================================
MEMORY_WARNING_THRESHOLD = 80.0   # Dense oracle refused above this share of available memory (%)

# =============================================================================
# Output
# =============================================================================
OUTPUT_DECIMALS = 4
OUTPUT_FORMATS = ("table", "csv", "json")
DEFAULT_OUTPUT_FORMAT = "table"
GOLDEN_TOL = 5e-5
GOLDEN_TABLES_PATH = "data/roulette_tables.json"
ROULETTE_N_LIST = (5, 10, 15, 20, 25)
VERIFY_U_TOL = 1e-8
VERIFY_V_REL_TOL = 1e-8
BENCH_MAX_K = 8
BENCH_PRECHECK_MAX_N = 2000

# =============================================================================
# Exit Codes
# =============================================================================
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_TOLERANCE = 3
EXIT_ILL_CONDITIONED = 4

# =============================================================================
# Settings File
# =============================================================================
SETTINGS_FILENAME = "settings.json"
