"""Various helper functions implemented by xygibbs."""
import functools
import logging
import math
import os
from typing import Callable, Optional, TypeVar


logger = logging.getLogger(__name__)

THREADS_ENV = "XYGIBBS_THREADS"


def setup_logger(level: int = logging.ERROR, log_filename: Optional[str] = None) -> None:
    """Create a configured instance of logger.

    :param int level:
        Describe the severity level of the logs to handle.
    :param str log_filename:
        (Optional) Also write the records to this file.
    """
    fmt = "[%(asctime)s] %(levelname)s in %(module)s: %(message)s"
    date_fmt = "%H:%M:%S"
    formatter = logging.Formatter(fmt, datefmt=date_fmt)

    logger = logging.getLogger("xygibbs")
    logger.setLevel(level)

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(formatter)
    logger.addHandler(stream_handler)

    if log_filename is not None:
        file_handler = logging.FileHandler(log_filename)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)


GenericType = TypeVar("GenericType")


def cache(func: Callable[..., GenericType]) -> GenericType:
    """ mypy compatible annotation wrapper for lru_cache"""
    return functools.lru_cache(maxsize=256)(func)  # type: ignore


def target_directory(output_path: Optional[str] = None) -> str:
    """
    Function for determining the directory a report is written to.
    Returns an absolute path (if relative one given) or the current
    path (if none given). Makes directory if it does not exist.

    :type output_path: str
        :rtype: str
    :returns:
        An absolute directory path as a string.
    """
    if output_path:
        if not os.path.isabs(output_path):
            output_path = os.path.join(os.getcwd(), output_path)
    else:
        output_path = os.getcwd()
    os.makedirs(output_path, exist_ok=True)
    return output_path


def format_number(value: float) -> str:
    """Render a float with 17 significant digits, which round-trips a double.

    Non-finite values are rendered as ``inf``, ``-inf`` and ``nan``.

    :param float value:
        The number to render.
    :rtype: str
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def thread_cap(default: int = 1) -> int:
    """Read the cap on internal parallelism from ``XYGIBBS_THREADS``.

    Invalid or non-positive values fall back to ``default``.

    :rtype: int
    """
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f"ignoring {THREADS_ENV}={raw!r}: not an integer")
        return default
    if threads < 1:
        logger.warning(f"ignoring {THREADS_ENV}={raw!r}: must be at least 1")
        return default
    return threads
