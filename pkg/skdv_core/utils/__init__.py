"""Common utilities module."""

from skdv_core.utils.helpers import compute_checksum, ensure_directory, parse_key_values
from skdv_core.utils.logging import get_logger, setup_logging

__all__ = [
    "compute_checksum",
    "ensure_directory",
    "parse_key_values",
    "get_logger",
    "setup_logging",
]
