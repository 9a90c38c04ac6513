"""
heunsym configuration.
Reads from environment variables with defaults tuned for the reference
parameter sets used in the test suite.
"""
import os


# --- Parallelism ---
# Cap on worker threads used for independent sample-point evaluations
THREADS = int(os.getenv("HEUNSYM_THREADS", "4"))

# --- Integration ---
# Relative tolerance of the adaptive integrator (DOP853)
TOL = float(os.getenv("HEUNSYM_TOL", "1e-12"))

# Residual budget for identity checks. Integration error accumulates over
# multi-segment paths, so this sits well above TOL.
BUDGET = float(os.getenv("HEUNSYM_BUDGET", "1e-8"))

# Absolute tolerance for comparing CoverPoints
POINT_ATOL = float(os.getenv("HEUNSYM_POINT_ATOL", "1e-12"))

# --- Parameters ---
# Largest accepted ell; coefficients grow quickly beyond this
ELL_CAP = int(os.getenv("HEUNSYM_ELL_CAP", "64"))

# |Delta_pm| or |Lambda_+ - Lambda_-| below this counts as non-generic
GENERIC_TOL = float(os.getenv("HEUNSYM_GENERIC_TOL", "1e-10"))

# Denominators of the forward Josephson map below this are poles
POLE_TOL = float(os.getenv("HEUNSYM_POLE_TOL", "1e-13"))

# --- Laurent series ---
LAURENT_N_START = int(os.getenv("HEUNSYM_LAURENT_N_START", "32"))
LAURENT_N_CAP = int(os.getenv("HEUNSYM_LAURENT_N_CAP", "4096"))
# Scaled residual a null vector must reach
NULL_TOL = float(os.getenv("HEUNSYM_NULL_TOL", "1e-9"))
# |g_{+-N}| / max|g_k| required at the accepted truncation
TAIL_TOL = float(os.getenv("HEUNSYM_TAIL_TOL", "1e-14"))
# Derivative mismatch allowed when anchoring a series at z=1
ANCHOR_TOL = float(os.getenv("HEUNSYM_ANCHOR_TOL", "1e-7"))

# --- Reproducibility ---
# Seed for random sample points (CLI and report-style checks)
SEED = int(os.getenv("HEUNSYM_SEED", "0"))

# --- Logging ---
LOG_LEVEL = os.getenv("HEUNSYM_LOG_LEVEL", "WARNING")
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"
