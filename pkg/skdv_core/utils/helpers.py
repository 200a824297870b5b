"""
Common helper utilities.

Provides reusable functions for:
- Output directories and report files
- Digests of written reports
- ``key=value`` parameter flags
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Iterable

from skdv_core.exceptions import ConfigError
from skdv_core.utils.logging import get_logger

logger = get_logger(__name__)


def compute_checksum(file_path: Path) -> str:
    """
    Compute the SHA-256 digest of a file.

    Args:
        file_path: Path to the file

    Returns:
        Hex-encoded checksum
    """
    hash_func = hashlib.sha256()

    with open(file_path, "rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            hash_func.update(chunk)

    return hash_func.hexdigest()


def ensure_directory(path: Path) -> Path:
    """Ensure a directory exists, creating it if necessary."""
    path.mkdir(parents=True, exist_ok=True)
    return path


def dump_json(data: Any) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write_report(path: Path, text: str) -> str:
    """Write a report and return its SHA256 digest."""
    ensure_directory(path.parent)
    path.write_text(text, encoding="utf-8")
    digest = compute_checksum(path)
    logger.info("Wrote report", path=str(path), sha256=digest[:12])
    return digest


def parse_key_values(items: Iterable[str]) -> dict[str, str]:
    """
    Parse repeated ``--param k=v`` flags.

    Raises:
        ConfigError: an item without ``=`` or with an empty key
    """
    result: dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"Expected key=value, got {item!r}")
        result[key.strip()] = value.strip()
    return result
