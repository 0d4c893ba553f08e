"""
Utility Functions

This module provides logging setup and the CSV/JSON writers used by every
experiment. Each CSV starts with a comment line carrying the tool version and
a hash of the resolved configuration.
"""

import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
from loguru import logger

from toeplitz import __version__


def setup_logging(log_path=None, level="INFO", to_file=True):
    """
    Set up logging configuration.

    Args:
        log_path (str, optional): Path to log directory
        level (str): Minimum level for both sinks
        to_file (bool): Whether to add the rotating file sink
    """
    # Remove default logger
    logger.remove()

    if to_file:
        if not log_path:
            log_path = Path("logs")
        os.makedirs(log_path, exist_ok=True)

        logger.add(
            os.path.join(log_path, "toeplitz_{time:YYYY-MM-DD}.log"),
            rotation="00:00",
            retention="7 days",
            format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function} | {message}",
            level=level,
        )

    logger.add(
        sys.stderr,
        format="{time:HH:mm:ss} | {level: <8} | {message}",
        level=level,
    )

    logger.debug("Logging initialized")


def to_jsonable(value):
    """Convert numpy scalars/arrays and complex numbers into JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, Path):
        return str(value)
    return value


def config_hash(config):
    """SHA-256 of the canonical JSON form of a configuration mapping."""
    canonical = json.dumps(to_jsonable(config or {}), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _format_cell(value):
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if isinstance(value, (complex, np.complexfloating)):
        return "%.17g%+.17gj" % (value.real, value.imag)
    return str(value)


def write_csv(path, header, rows, config=None):
    """
    Write a CSV file with the version/config comment line and a header row.

    Args:
        path (str | Path): Output file
        header (list): Column names
        rows (iterable): Row sequences, one value per column
        config (dict, optional): Resolved configuration hashed into the comment

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# toeplitz-spectra {__version__} config={config_hash(config)}\n")
        writer = csv.writer(f)
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([_format_cell(v) for v in row])
            count += 1
    logger.info(f"Wrote {count} rows to {path}")
    return path


def write_json(path, payload):
    """Write a JSON document with sorted keys."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(to_jsonable(payload), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {path}")
    return path
