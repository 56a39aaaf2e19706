"""
Helper Utilities
Common functions used across the application
"""

import logging
import math
import os
import uuid
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Union
import sys

sys.path.append(str(Path(__file__).parent.parent))
from config.settings import LOGGING_CONFIG, DEFAULT_JOBS

# Configure logging
logging.basicConfig(
    level=getattr(logging, LOGGING_CONFIG['level']),
    format=LOGGING_CONFIG['format'],
    handlers=[
        logging.FileHandler(LOGGING_CONFIG['file']),
        logging.StreamHandler()
    ]
)

logger = logging.getLogger(__name__)

INF = math.inf

Number = Union[Fraction, float]


def setup_logging(module_name: str) -> logging.Logger:
    """Setup logging for a module"""
    return logging.getLogger(module_name)


def set_verbose(verbose: bool):
    """Switch the root logger between INFO and DEBUG"""
    level = logging.DEBUG if verbose else getattr(logging, LOGGING_CONFIG['level'])
    logging.getLogger().setLevel(level)


def is_infinite(value) -> bool:
    return isinstance(value, float) and math.isinf(value)


def parse_rational(value) -> Number:
    """Parse "p/q", "inf", int or Fraction into an exact value (math.inf for infinity)"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"Not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        raise ValueError(f"Floats are not exact, pass \"p/q\" instead: {value!r}")
    text = str(value).strip()
    if text.lower() in ("inf", "+inf", "infinity"):
        return INF
    return Fraction(text)


def format_rational(value) -> str:
    """Format an exact value as "p/q", "p" or "inf" """
    if is_infinite(value):
        return "inf"
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_to_float(value) -> float:
    if is_infinite(value):
        return INF
    return float(value)


def format_datetime(dt: datetime, format_str: str = "%Y-%m-%d %H:%M:%S") -> str:
    """Format datetime for display"""
    if dt is None:
        return "N/A"
    return dt.strftime(format_str)


def generate_run_id(prefix: str = "RUN") -> str:
    """Generate a unique run ID"""
    return f"{prefix}{datetime.now().strftime('%Y%m%d%H%M%S')}{uuid.uuid4().hex[:6]}"


def resolve_jobs(explicit: Optional[int] = None) -> int:
    """Parallelism degree: --jobs, then TEMPOFLOW_JOBS, then 1"""
    if explicit is not None:
        return max(1, int(explicit))
    env_value = os.environ.get("TEMPOFLOW_JOBS", DEFAULT_JOBS)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            logger.warning(f"Ignoring malformed TEMPOFLOW_JOBS={env_value!r}")
    return 1


def parallel_map(func: Callable, items: Iterable, jobs: int = 1) -> List:
    """Map func over items, in worker processes when jobs > 1; input order is kept"""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    chunksize = max(1, len(items) // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
