"""
Default constants for the factor-selection engine.
All tunable numbers are centralized here for easy modification.
"""

# Synthetic data
class SyntheticDefaults:
    N_ASSETS = 100
    N_PERIODS = 252
    N_RELEVANT = 10
    BETA_MAGNITUDE = 1.0
    CORRELATION = 0.0
    NOISE_SD = 1.0
    START_DATE = "2000-01-03"   # first business day of the synthetic calendar
    TARGET_COLUMN = "y"


# Rolling calibration windows
class WindowDefaults:
    LENGTH = 252   # about one trading year
    STEP = 21      # about one trading month
    DROP_INCOMPLETE = True


# Knockoff construction
class KnockoffConfig:
    SHRINKAGE_EPSILON = 1e-3    # lambda_min >= eps * trace / N after shrinkage
    PSD_TOLERANCE = -1e-10      # conditional covariance eigenvalue floor
    SYMMETRY_TOLERANCE = 1e-12


# LASSO path
class LassoConfig:
    GRID_SIZE = 100
    MIN_RATIO = 1e-3            # smallest lambda = MIN_RATIO * lambda_max
    KKT_TOLERANCE = 1e-8
    MAX_SWEEPS = 1000           # polishing sweeps per grid point
    SOLVER_TOLERANCE = 1e-12    # duality-gap tolerance of the compiled solver
    MAX_ITERATIONS = 100000
    ZERO_THRESHOLD = 1e-12


# Random forest
class ForestConfig:
    N_TREES = 100
    MAX_DEPTH = None            # no depth cap
    MIN_LEAF = 5
    MTRY_FRACTION = 1.0 / 3.0   # features per split = ceil(p / 3)


# Huber robust regression
class HuberConfig:
    TUNING = 1.345
    TOLERANCE = 1e-8
    MAX_ITERATIONS = 100
    RIDGE_JITTER = 1e-8


# Knockoff selection
class SelectionDefaults:
    METHOD = "lasso_path"
    Q = 0.2
    Q_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)
    N_RUNS = 100
    N_BOOTSTRAPS = 200
    SUBSET_SIZE = 500
    TRIALS = 200
    MIN_TRIALS = 50


# Networks
class NetworkDefaults:
    KIND = "explanatory"
    NULL_SAMPLES = 100
    SWAPS_PER_EDGE = 10
    PREDICTION_LAG = 1
    UNCLASSIFIED = "unclassified"


# Backtest
class BacktestDefaults:
    T_IN = 300
    HORIZON = 5
    Q = 0.2
    N_RUNS = 10
    METHOD = "forest_importance"
    REBALANCE = 1
    REFIT_EVERY = 1
    TARGET_RETURN = 0.005
    NET_LEVERAGE = 1.0
    COVARIANCE_FILTER = "diagonal_shrinkage"
    CONSTRAINT_TOLERANCE = 1e-8
    DEGENERACY_TOLERANCE = 1e-10   # relative size of AC - B^2 below which the return constraint is dropped
    CAVEAT = ("The performance reported cannot be considered as a proper back-test: "
              "closing prices are used both for computing returns and to open virtual "
              "positions, and transaction costs are not included.")


# Command line runs
class RunDefaults:
    SEED = 0
    WORKERS = 1
    OUT_DIR = "runs"
    MANIFEST = "manifest.json"


# Logging
class LogConfig:
    FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
    DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
