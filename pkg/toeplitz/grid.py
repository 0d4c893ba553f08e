"""
Grids and Workers

Rectangular windows in the complex plane and an order-preserving thread pool
for per-row grid scans.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from config import settings
from toeplitz.exceptions import ConfigError, DomainError


def resolve_threads(value=None):
    """
    Resolve the worker cap from an explicit value or TOEPLITZ_SPECTRA_THREADS.

    Returns:
        int: Number of worker threads (at least 1)
    """
    raw = settings.THREADS if value is None else value
    try:
        threads = int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"TOEPLITZ_SPECTRA_THREADS must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError(f"TOEPLITZ_SPECTRA_THREADS must be >= 1, got {threads}")
    return threads


def parallel_map(func, items, threads=None):
    """Apply func to every item concurrently, returning results in input order."""
    items = list(items)
    workers = min(resolve_threads(threads), max(1, len(items)))
    if workers == 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle [re_min, re_max] x [im_min, im_max] in the complex plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min <= self.re_max and self.im_min <= self.im_max):
            raise DomainError(f"Degenerate window {self}")

    @classmethod
    def parse(cls, text):
        """Parse 're_min,re_max,im_min,im_max'."""
        try:
            parts = [float(v) for v in str(text).split(",")]
        except ValueError:
            raise ConfigError(f"Window must be four numbers, got {text!r}")
        if len(parts) != 4:
            raise ConfigError(f"Window must be four numbers, got {text!r}")
        return cls(*parts)

    def axes(self, nx, ny):
        """Real and imaginary axis samples (inclusive endpoints)."""
        return np.linspace(self.re_min, self.re_max, nx), np.linspace(self.im_min, self.im_max, ny)

    def points(self, nx, ny):
        """ny x nx array of complex grid points; row iy has fixed imaginary part."""
        xs, ys = self.axes(nx, ny)
        return xs[None, :] + 1j * ys[:, None]

    def to_list(self):
        return [self.re_min, self.re_max, self.im_min, self.im_max]
