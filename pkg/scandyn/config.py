"""
scandyn Configuration
=====================

Runtime settings for the dynamics library and benchmark CLI. Values come from the
environment (optionally a local .env file) and can be overridden by CLI flags.

Environment variables:
- SCANDYN_LOG_LEVEL: logging level name (default INFO)
- SCANDYN_WORKERS: default worker count, integer or "auto" (default 1)
- SCANDYN_REPEATS: randomized repeats per benchmark cell (default 1000)
- SCANDYN_WARMUP: discarded warm-up evaluations per cell (default 10)
- SCANDYN_SEED: base seed for model and input generation (default 0)
- SCANDYN_PARALLEL_GRAIN: combines per scan level before threads are used (default 32)
- SCANDYN_OUTPUT_DIR: directory for benchmark CSV files (default results)
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

DEFAULT_LOG_LEVEL = os.getenv('SCANDYN_LOG_LEVEL', 'INFO')
DEFAULT_WORKERS = os.getenv('SCANDYN_WORKERS', '1')
DEFAULT_REPEATS = int(os.getenv('SCANDYN_REPEATS', 1000))
DEFAULT_WARMUP = int(os.getenv('SCANDYN_WARMUP', 10))
DEFAULT_SEED = int(os.getenv('SCANDYN_SEED', 0))
PARALLEL_GRAIN = int(os.getenv('SCANDYN_PARALLEL_GRAIN', 32))
OUTPUT_DIR = os.getenv('SCANDYN_OUTPUT_DIR', 'results')

# Numerical guards
EPS_PIVOT = 1e-12
TAYLOR_THRESHOLD = 1e-6
ORTHONORMAL_TOL = 1e-10
SYMMETRY_TOL = 1e-12

PRNG_NAME = "numpy.random.PCG64 (SeedSequence spawn)"


def resolve_workers(value: Optional[str]) -> int:
    """
    Turn a worker setting into a positive integer.

    "auto" resolves to the CPU count; the caller is expected to log and record
    the resolved number.
    """
    if value is None:
        value = DEFAULT_WORKERS
    text = str(value).strip().lower()
    if text == 'auto':
        return os.cpu_count() or 1
    try:
        workers = int(text)
    except ValueError:
        raise ValueError(f"workers must be a positive integer or 'auto', got {value!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    return workers


@dataclass(frozen=True)
class Settings:
    log_level: str
    workers: int
    repeats: int
    warmup: int
    seed: int
    parallel_grain: int
    output_dir: str


def load_settings() -> Settings:
    """Snapshot the environment-derived settings."""
    return Settings(
        log_level=DEFAULT_LOG_LEVEL,
        workers=resolve_workers(DEFAULT_WORKERS),
        repeats=DEFAULT_REPEATS,
        warmup=DEFAULT_WARMUP,
        seed=DEFAULT_SEED,
        parallel_grain=PARALLEL_GRAIN,
        output_dir=OUTPUT_DIR,
    )


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging the same way for every entry point."""
    level_name = (level or DEFAULT_LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=LOG_FORMAT,
    )
