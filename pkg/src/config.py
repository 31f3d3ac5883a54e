"""Application configuration and settings."""

import os
from pathlib import Path
from dotenv import load_dotenv
from exceptions import ConfigException

# Load environment variables
load_dotenv()


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigException(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ConfigException(f"{name} must be >= {minimum}, got {value}")
    return value


# ============================================================================
# PATHS
# ============================================================================
BASE_DIR = Path(__file__).parent.parent
LOGS_DIR = BASE_DIR / 'logs'
SCHEMA_DIR = BASE_DIR / 'schemas'

# ============================================================================
# ENVIRONMENT
# ============================================================================
DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
LOG_LEVEL = 'DEBUG' if DEBUG else 'INFO'

# ============================================================================
# DEPTH GUARDS
# ============================================================================
MAX_DEPTH = _int_env('PERRON_MAX_DEPTH', 4096)
MAX_DIGIT_BITS = _int_env('PERRON_MAX_DIGIT_BITS', 64)
PROBE_DEPTH = _int_env('PERRON_PROBE_DEPTH', 64)
MAX_PHI_EXPONENT = 4096

# ============================================================================
# EXACT ENUMERATION
# ============================================================================
MAX_COVER_STATES = 250_000
EXACT_LAW_MAX_STATES = 100_000

# ============================================================================
# SAMPLING CONFIGURATION
# ============================================================================
DEFAULT_SEED = 0
DEFAULT_BITS = 64
MIN_BITS = 32
MAX_SAMPLE_BITS = 1 << 16
WIDTH_MARGIN_BITS = 8
MAX_RESAMPLES = 1000

# ============================================================================
# DIGIT LAWS
# ============================================================================
LAW_MAX_DIGIT = 10
SIGMA_BAND = 4.0
MAX_POSITIONS = 64
GEOMETRIC_MEAN_TERMS = 10_000

# ============================================================================
# STATISTICS CONFIGURATION
# ============================================================================
STATS_MAX_DIGIT_BITS = 4096
LOG_PRECISION_BITS = 96
QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
RENYI_SCORE_BAND = 0.35
RENYI_GROWTH_BAND = (0.85, 1.15)

# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_MAX_BYTES = 10485760
LOG_BACKUP_COUNT = 5
