"""
Environment and config-file handling for the simulator
"""
import logging
import os
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

from models import ExperimentConfig, SystemConfig

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

# Runtime configuration
RUNTIME_CONFIG = {
    'results_dir': os.getenv('SWIPT_RESULTS_DIR', 'results'),
    'num_workers': os.getenv('SWIPT_NUM_WORKERS', '1'),
    'log_level': os.getenv('SWIPT_LOG_LEVEL', 'INFO'),
}

SYSTEM_KEYS = set(SystemConfig.model_fields)


def results_dir(override: Optional[str] = None) -> str:
    return override or os.getenv('SWIPT_RESULTS_DIR', RUNTIME_CONFIG['results_dir'])


def num_workers() -> int:
    """Worker processes for Monte Carlo super-frames (1 = in-process)."""
    raw = os.getenv('SWIPT_NUM_WORKERS', RUNTIME_CONFIG['num_workers'])
    try:
        workers = int(raw)
    except ValueError:
        logger.warning(f"⚠️ Ignoring SWIPT_NUM_WORKERS={raw!r}, using 1")
        return 1
    return max(1, workers)


def log_level() -> int:
    name = os.getenv('SWIPT_LOG_LEVEL', RUNTIME_CONFIG['log_level']).upper()
    return getattr(logging, name, logging.INFO)


def split_keys(values: Dict[str, object]) -> Dict[str, object]:
    """Nest SystemConfig keys under "system"; everything else stays top level."""
    system: Dict[str, object] = {}
    top: Dict[str, object] = {}
    for key, value in values.items():
        name = key.strip().lower()
        if name in SYSTEM_KEYS:
            system[name] = value
        else:
            top[name] = value
    if system:
        top['system'] = system
    return top


def load_config_file(path: str) -> ExperimentConfig:
    """Parse a flat key=value file into an ExperimentConfig; unknown keys raise ValidationError."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    try:
        config = ExperimentConfig.model_validate(split_keys(values))
    except Exception as e:
        logger.error(f"❌ Invalid config {path}: {e}")
        raise
    logger.info(f"✅ Loaded config {path} ({len(values)} keys)")
    return config
