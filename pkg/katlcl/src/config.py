"""Configuration, bounds and paths for katlcl."""

import os
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent.parent
PACKAGE_ROOT = Path(__file__).parent.parent

# Bundled worked examples
BUNDLES_DIR = PACKAGE_ROOT / "bundles"


def _env_int(name: str, default: int) -> int:
    """Read an integer override from the environment."""
    raw = os.environ.get(name)
    return int(raw) if raw else default


# Model bounds
MAX_CARRIER = _env_int("KATLCL_MAX_CARRIER", 64)
MAX_GS_PRIMITIVES = 16
MAX_TABLE_ELEMENTS = 10_000

# Largest concrete lattice swept exhaustively (global completeness, Galois laws)
MAX_ENUMERATION = _env_int("KATLCL_MAX_ENUMERATION", 2**20)

# Law suites: relational carriers up to EXHAUSTIVE_CARRIER enumerate every relation,
# larger ones (up to MAX_SAMPLED_CARRIER) are sampled
EXHAUSTIVE_CARRIER = 3
MAX_SAMPLED_CARRIER = 8
EXHAUSTIVE_BUDGET = 2**21
EXTENSIONALITY_CARRIER = 4

# Sampling
DEFAULT_SEED = _env_int("KATLCL_SEED", 1729)
DEFAULT_SAMPLES = _env_int("KATLCL_SAMPLES", 10_000)

LOG_LEVEL = os.environ.get("KATLCL_LOG_LEVEL", "WARNING").upper()

# CLI exit codes
EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_SYNTHESIS = 4
