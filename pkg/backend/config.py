import logging
import os

from dotenv import load_dotenv

from errors import ContractViolation

load_dotenv()

DEFAULT_TOLERANCE = 1e-10
DEFAULT_THREADS = 1


def get_thread_count() -> int:
    """Worker pool size from SPINFORM_THREADS, clamped to at least one."""
    raw = os.getenv("SPINFORM_THREADS")
    if raw is None or raw.strip() == "":
        return DEFAULT_THREADS
    try:
        value = int(raw)
    except ValueError:
        raise ContractViolation(f"SPINFORM_THREADS must be an integer, got {raw!r}")
    return max(1, value)


def get_tolerance() -> float:
    raw = os.getenv("SPINFORM_TOL")
    if raw is None or raw.strip() == "":
        return DEFAULT_TOLERANCE
    try:
        value = float(raw)
    except ValueError:
        raise ContractViolation(f"SPINFORM_TOL must be a float, got {raw!r}")
    if value <= 0:
        raise ContractViolation(f"SPINFORM_TOL must be positive, got {value}")
    return value


def get_log_level() -> int:
    name = os.getenv("SPINFORM_LOG_LEVEL", "INFO").upper()
    return getattr(logging, name, logging.INFO)


def get_api_address():
    host = os.getenv("SPINFORM_API_HOST", "127.0.0.1")
    port = int(os.getenv("SPINFORM_API_PORT", "8000"))
    return host, port
