"""
Configuration module for the pass rate optimization toolkit.
All environment-specific settings and reference tables are centralized here.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Project paths
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = Path(os.getenv("PASSRATE_DATA_DIR", PROJECT_ROOT / "data"))
REPORTS_DIR = Path(os.getenv("PASSRATE_REPORTS_DIR", PROJECT_ROOT / "reports"))
SAMPLE_DATASET = DATA_DIR / "sample_enrollments.csv"

# Logging
LOG_LEVEL = os.getenv("PASSRATE_LOG_LEVEL", "WARNING")

# Course catalogue: the eight service courses with enough enrollment for analysis
SERVICE_COURSES = ("DC", "IC", "VC", "VAG", "LA", "ODE", "BM", "NM")
EXTRA_COURSES = tuple(
    code.strip() for code in os.getenv("PASSRATE_EXTRA_COURSES", "").split(",") if code.strip()
)
KNOWN_COURSES = frozenset(SERVICE_COURSES + EXTRA_COURSES)

# Grading scale, stored internally in tenths
GRADE_MAX_TENTHS = 50
PASS_GRADE_TENTHS = 30

# GPA frequency grid {0.1, 0.2, ..., 5.0}
GPA_GRID_TENTHS = tuple(range(1, 51))

# Segmentation
SEGMENT_COUNT = 10
GPA_LOWER = 0.0
GPA_UPPER = 5.0

# Performance estimation
DEFAULT_MIN_OBS = int(os.getenv("PASSRATE_MIN_OBS", "30"))

# Solvers
COST_SCALE = int(float(os.getenv("PASSRATE_COST_SCALE", "1000000")))
# Re-solve scale when a scaled optimum falls below the expectation
FINE_COST_SCALE = 10**12
CERTIFY_TOLERANCE = 1e-7

# Statistics
CONFIDENCE_Z = 1.96

# Relative enhancement below this relative gap is reported as exactly zero
ZERO_ENHANCEMENT_TOLERANCE = 1e-9

# Cost blending between the APV and Age segmentations
DEFAULT_BLEND_WEIGHT = 0.8

# Monte Carlo configuration
DEFAULT_ITERATIONS = int(os.getenv("PASSRATE_ITERATIONS", "800"))
CONVERGENCE_WINDOW = int(os.getenv("PASSRATE_CONVERGENCE_WINDOW", "100"))
CONVERGENCE_TOL = float(os.getenv("PASSRATE_CONVERGENCE_TOL", "0.1"))
NORMALIZATION_GAP_TOL = 0.5

# Section capacity groups (K_left, K_right)
CAPACITY_INTERVALS = (
    (15, 30),
    (31, 45),
    (46, 60),
    (61, 75),
    (76, 90),
    (91, 105),
    (106, 120),
    (121, 135),
    (136, 150),
)

# Reference values for Differential Calculus. The institutional
# database behind them is private; the CLI prints them beside synthetic results.
REFERENCE_ENHANCEMENTS = {
    ("DC", "pass", "ia"): 1.3811,
    ("DC", "pass", "sa"): 7.0432,
    ("DC", "grade", "ia"): 0.5501,
    ("DC", "grade", "sa"): 2.1584,
}
REFERENCE_SIMULATIONS = {
    ("DC", "ia"): {"rho": 0.4448, "gamma": 0.4422},
    ("DC", "sa"): {"rho": 3.2261, "gamma": 3.2242},
}

# DC randomization tables
DC_TENURED_INTERVAL = (6, 8)
DC_ENROLLMENT_INTERVAL = (1337, 1554)
DC_SECTIONS_INTERVAL = (16, 20)
DC_CAPACITY_FREQUENCIES = (
    0.0202, 0.0030, 0.0403, 0.3802, 0.1155, 0.1034, 0.1640, 0.0629, 0.1104,
)
DC_GPA_FREQUENCY_LOWER = (
    0.0012, 0.0013, 0.0017, 0.0017, 0.0024, 0.0016, 0.0031, 0.0021, 0.0020, 0.0028,
    0.0026, 0.0025, 0.0032, 0.0028, 0.0031, 0.0038, 0.0033, 0.0049, 0.0058, 0.0056,
    0.0077, 0.0076, 0.0105, 0.0142, 0.0165, 0.0210, 0.0250, 0.0287, 0.0332, 0.0672,
    0.0506, 0.0489, 0.0565, 0.0594, 0.0558, 0.0549, 0.0526, 0.0440, 0.0404, 0.0357,
    0.0282, 0.0201, 0.0160, 0.0115, 0.0088, 0.0054, 0.0032, 0.0014, 0.0002, 0.0000,
)
DC_GPA_FREQUENCY_UPPER = (
    0.0021, 0.0027, 0.0031, 0.0031, 0.0035, 0.0031, 0.0044, 0.0040, 0.0047, 0.0046,
    0.0047, 0.0045, 0.0055, 0.0053, 0.0055, 0.0056, 0.0051, 0.0073, 0.0082, 0.0084,
    0.0114, 0.0119, 0.0147, 0.0191, 0.0208, 0.0277, 0.0328, 0.0348, 0.0420, 0.0858,
    0.0571, 0.0566, 0.0671, 0.0668, 0.0630, 0.0668, 0.0625, 0.0527, 0.0496, 0.0421,
    0.0373, 0.0255, 0.0209, 0.0161, 0.0136, 0.0081, 0.0055, 0.0029, 0.0011, 0.0002,
)

# CSV schema of the enrollment table
CSV_COLUMNS = (
    "student_id",
    "course",
    "year",
    "semester",
    "grade",
    "gpa",
    "pass",
    "age",
    "academic_age",
    "gender",
    "attempts",
    "cancellations",
    "cancelled",
    "section",
    "section_capacity",
    "enrolled_count",
    "instructor_id",
    "tenured",
)
