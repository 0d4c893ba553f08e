"""
Finite Matrices

This module assembles finite Toeplitz truncations T_n(f), wraps dense
(ingested) matrices, regularises dense matrices into Toeplitz form by
diagonal averaging, builds defect matrices and fits algebraic decay laws to
off-diagonals.

Entry (i, j) of a Toeplitz matrix holds a_{i-j}: positive offsets lie below
the main diagonal.
"""

from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy.linalg import toeplitz

from toeplitz.exceptions import DomainError, MatrixParseError
from toeplitz.symbol import ALGEBRAIC, DecayLaw, LaurentSymbol


@dataclass(frozen=True, eq=False)
class FiniteToeplitz:
    """
    n x n Toeplitz matrix given by its 2n-1 diagonals.

    Args:
        n (int): Matrix size
        diagonals (np.ndarray): diagonals[d + n - 1] is the value on offset d = i - j
        provenance (tuple): Processing steps that produced the matrix
    """

    n: int
    diagonals: np.ndarray = field(repr=False)
    provenance: tuple = ()

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise DomainError(f"Matrix size must be >= 1, got {n}")
        diagonals = np.array(self.diagonals, dtype=float).reshape(-1)
        if diagonals.size != 2 * n - 1:
            raise DomainError(f"Expected {2 * n - 1} diagonals for n={n}, got {diagonals.size}")
        if not np.all(np.isfinite(diagonals)):
            raise DomainError("Toeplitz diagonals must be finite")
        diagonals.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "diagonals", diagonals)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def diagonal(self, d):
        """Value on offset d, zero outside the matrix."""
        d = int(d)
        if abs(d) >= self.n:
            return 0.0
        return float(self.diagonals[d + self.n - 1])

    def entry(self, i, j):
        """Entry at 0-based (i, j)."""
        return self.diagonal(i - j)

    def bandwidth(self):
        nonzero = np.flatnonzero(self.diagonals)
        if nonzero.size == 0:
            return 0
        return int(np.max(np.abs(nonzero - (self.n - 1))))

    def dense(self):
        column = self.diagonals[self.n - 1:]
        row = self.diagonals[self.n - 1::-1]
        return toeplitz(column, row)

    def to_symbol(self, m=None):
        """Laurent symbol with the central 2m+1 diagonals (default: the bandwidth)."""
        m = self.bandwidth() if m is None else int(m)
        m = min(m, self.n - 1)
        return LaurentSymbol(m, self.diagonals[self.n - 1 - m:self.n + m].copy())

    def to_json(self):
        return {
            "n": self.n,
            "diagonals": {str(d): self.diagonal(d) for d in range(-(self.n - 1), self.n)},
        }

    @classmethod
    def from_json(cls, payload):
        try:
            n = int(payload["n"])
            mapping = {int(k): float(v) for k, v in payload["diagonals"].items()}
        except (KeyError, TypeError, ValueError) as e:
            raise MatrixParseError(f"Invalid Toeplitz JSON: {e}")
        diagonals = np.zeros(2 * n - 1)
        for d, value in mapping.items():
            if abs(d) >= n:
                raise MatrixParseError(f"Diagonal offset {d} outside a {n}x{n} matrix")
            diagonals[d + n - 1] = value
        return cls(n, diagonals, ("json",))


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """
    Square real matrix with a record of where it came from.

    Args:
        entries (np.ndarray): n x n values
        provenance (tuple): Processing steps, e.g. ("file:C.csv", "central_block:60")
    """

    entries: np.ndarray = field(repr=False)
    provenance: tuple = ()

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"Matrix must be square, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("Matrix entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def from_array(cls, array, *provenance):
        return cls(np.asarray(array, dtype=float), provenance)

    def to_json(self):
        return {"n": self.n, "entries": self.entries.reshape(-1).tolist()}


@dataclass(frozen=True)
class DefectSpec:
    """
    Single wave-speed defect: entry (site, site) of the defect matrix is 1 + eta.

    Args:
        site (int): 1-based defect index
        eta (float): Strength, greater than -1
    """

    site: int
    eta: float

    def __post_init__(self):
        if int(self.site) < 1:
            raise DomainError(f"Defect site is 1-based, got {self.site}")
        if not np.isfinite(self.eta) or self.eta <= -1:
            raise DomainError(f"Defect strength must be > -1, got {self.eta}")

    def validate(self, n):
        if self.site > n:
            raise DomainError(f"Defect site {self.site} outside a size-{n} matrix")
        return self

    @classmethod
    def parse(cls, text):
        """Parse 'site=K,eta=X'."""
        fields = dict(item.split("=", 1) for item in str(text).split(",") if "=" in item)
        try:
            return cls(int(fields["site"]), float(fields["eta"]))
        except (KeyError, ValueError) as e:
            raise DomainError(f"Defect must look like site=K,eta=X, got {text!r} ({e})")


@dataclass(frozen=True)
class RateFit:
    """Two-sided algebraic decay fit of a Toeplitz matrix's off-diagonals."""

    p: float
    c_plus: float
    q: float
    c_minus: float
    r_squared: tuple

    def to_law(self, a0=0.0):
        return DecayLaw(kind=ALGEBRAIC, p=self.p, q=self.q, c_plus=self.c_plus,
                        c_minus=self.c_minus, a0=a0)


def assemble(source, n, bandwidth=None):
    """
    Finite Toeplitz truncation T_n.

    Args:
        source (LaurentSymbol | DecayLaw): Coefficient source
        n (int): Matrix size
        bandwidth (int, optional): For a DecayLaw, keep offsets |d| <= bandwidth;
            by default every diagonal is populated (dense case)

    Returns:
        FiniteToeplitz: The truncation
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"Matrix size must be >= 1, got {n}")
    diagonals = np.zeros(2 * n - 1)
    if isinstance(source, LaurentSymbol):
        width = min(source.m, n - 1)
        diagonals[n - 1 - width:n + width] = source.coeffs[source.m - width:source.m + width + 1]
        origin = f"symbol:m={source.m}"
    else:
        width = n - 1 if bandwidth is None else min(int(bandwidth), n - 1)
        offsets = np.arange(-width, width + 1)
        diagonals[n - 1 - width:n + width] = source.coefficients(offsets)
        origin = f"law:{source.kind}:bandwidth={width}"
    return FiniteToeplitz(n, diagonals, (origin,))


def toeplitzify(M):
    """Replace every diagonal of a dense matrix by its arithmetic mean."""
    entries = M.entries if isinstance(M, DenseMatrix) else np.asarray(M, dtype=float)
    n = entries.shape[0]
    if entries.ndim != 2 or entries.shape[1] != n:
        raise DomainError(f"toeplitzify needs a square matrix, got shape {entries.shape}")
    diagonals = np.array([np.diagonal(entries, offset=-d).mean() for d in range(-(n - 1), n)])
    provenance = getattr(M, "provenance", ()) + ("toeplitzify",)
    return FiniteToeplitz(n, diagonals, provenance)


def central_block(M, n):
    """
    Central n x n block, offset floor((size - n) / 2).

    Args:
        M (DenseMatrix): Source matrix
        n (int): Block size

    Returns:
        DenseMatrix: The block with provenance extended
    """
    size = M.n
    n = int(n)
    if n < 1 or n > size:
        raise DomainError(f"Central block of size {n} does not fit a {size}x{size} matrix")
    offset = (size - n) // 2
    block = M.entries[offset:offset + n, offset:offset + n]
    return DenseMatrix(block.copy(), M.provenance + (f"central_block:{n}",))


def _power_fit(ds, values):
    """Fit |values| = c d^{-rate} in log-log space; returns (rate, c, r_squared)."""
    magnitudes = np.abs(values)
    usable = magnitudes > 0
    if np.count_nonzero(usable) < 5:
        raise DomainError(f"Need at least 5 nonzero diagonals to fit a decay rate, got {np.count_nonzero(usable)}")
    x = np.log(ds[usable])
    y = np.log(magnitudes[usable])
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    total = np.sum((y - y.mean()) ** 2)
    r_squared = 1.0 if total == 0 else 1.0 - float(np.sum(residual ** 2)) / float(total)
    sign = -1.0 if np.sum(values[usable]) < 0 else 1.0
    return float(-slope), float(sign * np.exp(intercept)), float(min(1.0, r_squared))


def fit_decay_rates(T, fit_range=None):
    """
    Fit |a_d| ~ c d^{-rate} separately below (p) and above (q) the diagonal.

    Args:
        T (FiniteToeplitz): Matrix to analyse
        fit_range (tuple, optional): Inclusive offset range (lo, hi);
            defaults to (2, n // 2)

    Returns:
        RateFit: Exponents, signed amplitudes and r^2 for both sides
    """
    n = T.n
    lo, hi = fit_range if fit_range is not None else (2, n // 2)
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi > n - 1 or hi - lo + 1 < 5:
        raise DomainError(f"Fit range [{lo}, {hi}] must lie in [1, {n - 1}] with length >= 5")
    ds = np.arange(lo, hi + 1, dtype=float)
    below = np.array([T.diagonal(d) for d in range(lo, hi + 1)])
    above = np.array([T.diagonal(-d) for d in range(lo, hi + 1)])
    p, c_plus, r2_plus = _power_fit(ds, below)
    q, c_minus, r2_minus = _power_fit(ds, above)
    logger.info(f"Decay fit on [{lo}, {hi}]: p={p:.6f} (r2={r2_plus:.4f}), q={q:.6f} (r2={r2_minus:.4f})")
    return RateFit(p, c_plus, q, c_minus, (r2_plus, r2_minus))


def defect_matrix(n, spec):
    """Identity with entry (site, site) replaced by 1 + eta."""
    spec.validate(n)
    diagonal = np.ones(int(n))
    diagonal[spec.site - 1] += spec.eta
    return DenseMatrix(np.diag(diagonal), (f"defect:site={spec.site},eta={spec.eta}",))
