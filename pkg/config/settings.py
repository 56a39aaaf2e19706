"""
Application Configuration Settings
Flows over time under contraflow constraints
"""

import os
from pathlib import Path

# Base directory
BASE_DIR = Path(__file__).resolve().parent.parent

# Data root, relocatable for tests and batch runs
DATA_DIR = Path(os.environ.get("TEMPOFLOW_HOME", BASE_DIR))

# Database settings
DATABASE_PATH = Path(os.environ.get("TEMPOFLOW_DB", DATA_DIR / "database" / "runs.db"))

# Output paths
EXPORTS_DIR = DATA_DIR / "exports"
LOGS_DIR = DATA_DIR / "logs"

# Ensure directories exist
for directory in [EXPORTS_DIR, LOGS_DIR, DATABASE_PATH.parent]:
    directory.mkdir(parents=True, exist_ok=True)

# Flow-over-time oracle settings
SOLVER_SETTINGS = {
    "max_horizon": 4096,  # Quickest search gives up above this horizon
}

# Orientation engine settings
ORIENTATION_SETTINGS = {
    "tolerance": 1e-6,  # Fixed-point stop criterion on max |u - h(u)|
    "max_iter": 200,  # Fixed-point iteration cap
    "damping": 1,  # 1 = plain Picard iteration, (0, 1) = damped
}

# Brute-force guardrails
ORACLE_CAPS = {
    "max_m": 20,  # Largest edge count enumerated over 2^m orientations
    "max_T": 4096,  # Largest horizon the time expansion is built for
}

# Parallelism
DEFAULT_JOBS = os.environ.get("TEMPOFLOW_JOBS")  # None = serial

# Reporting settings
EXPORT_SETTINGS = {
    "float_digits": 6,  # Decimal digits shown next to exact values in tables
    "plot_dpi": 120,
    "sheet_name": "Results",
}

# Run history
DATABASE_CONFIG = {
    "record_runs": True,  # CLI records every run unless --no-record
    "recent_limit": 20,  # Rows shown by the history command
}

# Logging settings
LOGGING_CONFIG = {
    "level": "INFO",
    "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    "file": LOGS_DIR / "tempoflow.log",
}
