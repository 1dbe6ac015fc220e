# config/config.py
from pathlib import Path
from dotenv import load_dotenv
import os

# Load environment variables
load_dotenv()

# Project structure
ROOT_DIR = Path(__file__).parent.parent.parent
DATA_DIR = ROOT_DIR / "data"
SCENARIO_DIR = DATA_DIR / "scenarios"
OUTPUT_DIR = Path(os.getenv("CSSTAT_OUTPUT_DIR", str(ROOT_DIR / "output")))

# Create directories if missing
for dir_path in [SCENARIO_DIR, OUTPUT_DIR]:
    dir_path.mkdir(parents=True, exist_ok=True)

# Observation window and support
DEFAULT_M = 2.0
DEFAULT_WINDOW = (0.1, 1.9)

# Bandwidth rule b_N = c * N^(-alpha)
DEFAULT_BANDWIDTH_CONSTANT = 2.0
DEFAULT_BANDWIDTH_EXPONENT = 0.2
RESAMPLING_BANDWIDTH_EXPONENT = 0.2

# Grid: step = min(b / 20, M / 2000)
GRID_STEP_BANDWIDTH_FRACTION = 1.0 / 20.0
GRID_MAX_POINTS_DIVISOR = 2000

# Numerical guards
DENSITY_FLOOR = 1e-8
LOG_CLIP = 1e-10
GAUSS_LEGENDRE_NODES = 64
QUAD_ABS_TOL = 1e-12

# Decision rules
NORMAL_CRITICAL_VALUE = 1.96
DEFAULT_LEVEL = 0.05
DEFAULT_BOOTSTRAP = 1000

# Simulation presets: (replications R, bootstrap resamples B)
PRESETS = {
    "desk": (500, 500),
    "full": (1000, 1000),
}
DEFAULT_PRESET = os.getenv("CSSTAT_PRESET", "desk")

# Reproducibility and parallelism
DEFAULT_SEED = int(os.getenv("CSSTAT_SEED", "20100501"))
DEFAULT_N_JOBS = int(os.getenv("CSSTAT_N_JOBS", "1"))
LOG_LEVEL = os.getenv("CSSTAT_LOG_LEVEL", "INFO")

# Jump-count diagnostic constants
FOUR_EZ_SQUARED = 1.05423856
JUMP_INTENSITY_CONSTANT = 2.1

# Diagnose sweep
DIAGNOSE_SAMPLE_SIZES = (200, 800, 3200)
DIAGNOSE_JUMP_SAMPLE_SIZE = 10_000

# Test names, in report order
SMOOTHED_LR = "SLR"
RAW_LR = "LR"
SUN_U = "U_N"
ANDERSEN_W = "W_N"
ALL_TESTS = (SMOOTHED_LR, RAW_LR, SUN_U, ANDERSEN_W)

# Input CSV layout for `cli test`
INPUT_COLUMNS = ("sample", "t", "delta")

# Output CSV layouts
REJECTION_COLUMNS = [
    "test",
    "lambda",
    "alpha1",
    "alpha2",
    "theta",
    "g1",
    "g2",
    "m",
    "n",
    "R",
    "B",
    "reject_rate",
    "se",
]

CURVE_COLUMNS = [
    "t",
    "F_true_1",
    "F_true_2",
    "F_true_pooled",
    "mle_1",
    "mle_2",
    "mle_pooled",
    "msle_1",
    "msle_2",
    "msle_pooled",
]
