# Configuration file for the EKR verification lab
# This file centralizes the computation budgets, default seeds and logging
# settings. Every value can be overridden from the environment or a local
# .env file; budgets are read once at import time.

import os

from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    """Read an integer setting, falling back to ``default`` when unset or blank."""
    raw = os.getenv(name, "").strip()
    return int(raw) if raw else default


# Parameter Math
# ==============
# Largest n accepted by the closed-form parameter pack (no enumeration happens there)
EKR_PARAMS_MAX_N = _int_env("EKR_PARAMS_MAX_N", 20)

# Explicit Graph Budgets
# ======================
# Vertex limits for materializing adjacency bit rows and for dense diagonalization.
# Gamma_7 has 5040 vertices, Gamma_8 already 40320.
EKR_ADJACENCY_BUDGET = _int_env("EKR_ADJACENCY_BUDGET", 20_000)
EKR_DENSE_BUDGET = _int_env("EKR_DENSE_BUDGET", 4_000)

# Implicit induced-edge counts refuse sets with more vertex pairs than this
EKR_PAIR_BUDGET = _int_env("EKR_PAIR_BUDGET", 20_000_000)

# Star Space Projection
# =====================
EKR_PROJECTION_BUDGET = _int_env("EKR_PROJECTION_BUDGET", 100_000)
EKR_PROJECTION_MAX_STARS = _int_env("EKR_PROJECTION_MAX_STARS", 1_000)

# Independent Set Solver
# ======================
EKR_MIS_BUDGET = _int_env("EKR_MIS_BUDGET", 5_000)
EKR_ENUMERATION_BUDGET = _int_env("EKR_ENUMERATION_BUDGET", 1_500)
EKR_ENUMERATION_CAP = _int_env("EKR_ENUMERATION_CAP", 1_000_000)

# Threshold Simulation
# ====================
# SCAN: limit on K*(V-N)*M coins looked at by one superstar scan.
# TRIAL: vertex limit for materializing a random subgraph and solving it exactly.
# FAUX: vertex limit for exhaustive faux-star counting per trial.
EKR_SCAN_BUDGET = _int_env("EKR_SCAN_BUDGET", 5_000_000)
EKR_TRIAL_BUDGET = _int_env("EKR_TRIAL_BUDGET", 200)
EKR_FAUX_BUDGET = _int_env("EKR_FAUX_BUDGET", 24)

# Runtime Defaults
# ================
EKR_THREADS = _int_env("EKR_THREADS", 1)
EKR_SEED = _int_env("EKR_SEED", 0)
EKR_LOG_LEVEL = os.getenv("EKR_LOG_LEVEL", "WARNING").upper()

# Report schema version, bumped whenever a column or key changes meaning
EKR_SCHEMA_VERSION = os.getenv("EKR_SCHEMA_VERSION", "1")
