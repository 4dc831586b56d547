"""Constants for the application"""
import os
from dotenv import load_dotenv

load_dotenv()

VERSION = "0.3.0"

# Circle search budgets (FREELAB_BUDGET_SECS also overrides the CLI default)
FREELAB_BUDGET_SECS = float(os.getenv("FREELAB_BUDGET_SECS", "600"))
FREELAB_BUDGET_NODES = int(os.getenv("FREELAB_BUDGET_NODES", str(10**8)))

# Desk-scale guards
FREELAB_GRID_CAP = int(os.getenv("FREELAB_GRID_CAP", "4096"))
FREELAB_EXHAUSTIVE_CAP = int(os.getenv("FREELAB_EXHAUSTIVE_CAP", "20"))

FREELAB_THREADS = int(os.getenv("FREELAB_THREADS", "1"))
FREELAB_LOG_LEVEL = os.getenv("FREELAB_LOG_LEVEL", "WARNING")

# Comparison tolerance for Euclidean (float) spaces only
FREELAB_FLOAT_TOL = float(os.getenv("FREELAB_FLOAT_TOL", "1e-9"))

# Directory for JSON/CSV reports; empty means stdout only
FREELAB_OUT_DIR = os.getenv("FREELAB_OUT_DIR", "")
