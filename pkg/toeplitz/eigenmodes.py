"""
Bulk Eigenmodes and Decay Rates

This module builds (generalized) eigenvectors of banded Toeplitz operators
from the m+1 smallest roots of f_m(z) = lambda, predicts their decay rate
beta = -ln|z_{m+1}|, fits decay rates to computed vectors and maps beta over
bandwidths and over the complex lambda plane.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
from loguru import logger
from scipy.ndimage import maximum_filter1d

from config.settings import CONFLUENCE_TOL, TIE_TOL
from toeplitz.eigensolve import eig, fix_phase
from toeplitz.exceptions import DomainError
from toeplitz.grid import parallel_map
from toeplitz.matrices import assemble
from toeplitz.roots import band_points, band_roots, cluster_roots, sorted_moduli
from toeplitz.symbol import ALGEBRAIC, synthesize

# Relative singular value below which a direction counts as null
NULLSPACE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BulkMode:
    """
    Eigenvector of the semi-infinite operator restricted to its first N entries.

    Args:
        lam (complex): Eigenvalue
        length (int): N
        values (np.ndarray): v_0..v_{N-1}
        combo (np.ndarray): Coefficients over the root basis
        roots_used (np.ndarray): The m+1 smallest roots
        null_vectors (np.ndarray): All null vectors when the nullspace is larger than one
        degenerate (bool): Constant symbol with lambda = a_0, every vector is a mode
    """

    lam: complex
    length: int
    values: np.ndarray = field(repr=False)
    combo: np.ndarray = field(repr=False)
    roots_used: np.ndarray = field(repr=False)
    null_vectors: np.ndarray = field(default=None, repr=False)
    degenerate: bool = False


@dataclass(frozen=True)
class BetaSeries:
    bandwidths: tuple
    betas: tuple


class DecayFit(NamedTuple):
    beta: float
    r_squared: float


@dataclass(frozen=True, eq=False)
class ComplexBandMap:
    """beta(lambda) = -ln|z_{m+1}(lambda)| on a complex window, row-major (rows = Im)."""

    window: object
    re: np.ndarray
    im: np.ndarray
    betas: np.ndarray


@dataclass(frozen=True)
class TruncationMode:
    """Decay data for one eigenpair of a finite truncation T_n."""

    eigenvalue: complex
    predicted_beta: float
    fitted_beta: float
    r_squared: float
    separation: float
    period: float
    # False when the beat period exceeds half the fit span; the running-max
    # envelope cannot bridge the node of such a mode
    resolved: bool = True


def root_basis(roots, length, tol=CONFLUENCE_TOL):
    """
    Columns k^r z^k (k = 0..length-1) for each root cluster, r below its multiplicity.

    Returns:
        np.ndarray: length x len(roots) matrix; 0^0 is taken as 1
    """
    k = np.arange(length, dtype=float)
    columns = []
    for group in cluster_roots(roots, tol):
        center = complex(np.mean(np.asarray(roots)[list(group)]))
        if center == 0:
            # The derivative basis at the origin is a set of shifted unit vectors
            columns.extend((k == r).astype(complex) for r in range(len(group)))
            continue
        with np.errstate(over="ignore", invalid="ignore"):
            powers = center ** k
        for r in range(len(group)):
            columns.append(powers * (k ** r if r else 1.0))
    return np.column_stack(columns)


def condition_matrix(s, lam, basis):
    """
    Residuals of the first m rows of (T(f) - lambda) applied to each basis column.

    Row i uses sum_{k=-m}^{min(m, i)} a_k v_{i-k} - lambda v_i.
    """
    m = s.m
    rows = []
    for i in range(m):
        row = -lam * basis[i]
        for k in range(-m, min(m, i) + 1):
            row = row + s.coeffs[k + m] * basis[i - k]
        rows.append(row)
    return np.array(rows)


def bulk_eigenvector(s, lam, N):
    """
    Eigenvector built from the m+1 smallest roots of f_m(z) = lambda.

    The combination c solves the m boundary conditions of the first rows; it
    is the right singular vector of the m x (m+1) condition matrix for its
    smallest singular value, with the first significant entry real positive.

    Args:
        s (LaurentSymbol): Banded symbol
        lam (complex): Spectral parameter
        N (int): Number of entries to return

    Returns:
        BulkMode: The mode and the data it was built from
    """
    N = int(N)
    if N < 1:
        raise DomainError(f"Mode length must be >= 1, got {N}")
    m = s.m
    if m == 0:
        a0 = float(s.coeffs[0])
        if abs(lam - a0) > 1e-12 * max(1.0, abs(a0)):
            raise DomainError(f"Constant symbol {a0} has no eigenvector at lambda={lam}")
        logger.warning("Constant symbol with lambda = a_0: every vector is an eigenvector")
        values = np.zeros(N, dtype=complex)
        values[0] = 1.0
        return BulkMode(complex(lam), N, values, np.ones(1, dtype=complex),
                        np.zeros(0, dtype=complex), None, True)

    bp = band_roots(s, lam)
    used = bp.roots[:m + 1]
    if not np.all(np.isfinite(used)):
        raise DomainError(f"The {m + 1} smallest roots at lambda={lam} are not all finite")

    basis = root_basis(used, max(N, 2 * m))
    M = condition_matrix(s, lam, basis)
    _, sigma, vh = scipy.linalg.svd(M)
    combo = fix_phase(vh[-1].conj())

    null_vectors = None
    scale = max(float(sigma[0]) if sigma.size else 0.0, 1.0)
    rank = int(np.count_nonzero(sigma > NULLSPACE_TOL * scale))
    if rank < m:
        null_vectors = np.array([fix_phase(v.conj()) for v in vh[rank:]])
        logger.warning(f"Boundary conditions at lambda={lam} admit {m + 1 - rank} independent modes")

    values = basis[:N] @ combo
    return BulkMode(complex(lam), N, values, combo, used, null_vectors)


def cbs_decay_prediction(s, lam):
    """
    Predicted decay rate beta = -ln|z_{m+1}|.

    Positive beta means decay along increasing index. When |z_m| = |z_{m+1}|
    lambda sits on the limiting set and the mode oscillates; the value is
    still returned and the situation is logged.
    """
    moduli = band_roots(s, lam).moduli
    lower, upper = moduli[s.m - 1], moduli[s.m]
    if np.isfinite(upper) and upper - lower <= TIE_TOL * (1.0 + upper):
        logger.info(f"lambda={lam} is on the limiting set: oscillatory mode with |z_m| = |z_m+1|")
    with np.errstate(divide="ignore"):
        return float(-np.log(upper))


def fit_decay_rate(values, window=None, envelope=0):
    """
    Least-squares decay rate of |values[j]| against j.

    Args:
        values (array): Mode entries
        window (tuple, optional): Half-open index range (start, stop); defaults to all
        envelope (int): Running-maximum window applied to |values| before fitting,
            for modes whose magnitude oscillates

    Returns:
        DecayFit: Negated slope of ln|v_j| and the fit's r^2
    """
    magnitudes = np.abs(np.asarray(values))
    if envelope and envelope > 1:
        magnitudes = maximum_filter1d(magnitudes, size=int(envelope), mode="nearest")
    start, stop = window if window is not None else (0, len(magnitudes))
    start, stop = max(0, int(start)), min(len(magnitudes), int(stop))
    if stop - start < 8:
        raise DomainError(f"Fit window [{start}, {stop}) must hold at least 8 entries")
    index = np.arange(start, stop, dtype=float)
    segment = magnitudes[start:stop]
    usable = segment > 0
    if not np.any(usable):
        raise DomainError("All magnitudes in the fit window are zero")
    if np.count_nonzero(usable) < 2:
        raise DomainError("Fewer than two nonzero magnitudes in the fit window")
    x = index[usable]
    y = np.log(segment[usable])
    slope, intercept = np.polyfit(x, y, 1)
    total = float(np.sum((y - y.mean()) ** 2))
    if total <= 1e-28 * max(1.0, float(np.sum(y ** 2))):
        r_squared = 1.0
    else:
        r_squared = 1.0 - float(np.sum((y - (slope * x + intercept)) ** 2)) / total
    return DecayFit(float(-slope), float(r_squared))


def beta_of_bandwidth(law, lam, m_list, threads=None):
    """
    Predicted decay rate for each truncation bandwidth of an algebraic law.

    Returns:
        BetaSeries: beta(m) = -ln|z_{m+1}| for every m in m_list
    """
    if law.kind != ALGEBRAIC:
        raise DomainError("beta_of_bandwidth needs an algebraic decay law")
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise DomainError(f"Bandwidths must be strictly ascending, got {m_list}")
    betas = parallel_map(lambda m: cbs_decay_prediction(synthesize(law, m), lam), m_list, threads)
    return BetaSeries(tuple(m_list), tuple(betas))


def cbs_complex_map(s, window, resolution, threads=None):
    """beta(lambda) = -ln|z_{m+1}(lambda)| on a resolution x resolution grid."""
    if resolution < 16:
        raise DomainError(f"cbs_complex_map needs resolution >= 16, got {resolution}")
    xs, ys = window.axes(resolution, resolution)
    lambdas = window.points(resolution, resolution)
    moduli = sorted_moduli(s, lambdas.reshape(-1), threads)
    with np.errstate(divide="ignore"):
        betas = -np.log(moduli[:, s.m]).reshape(lambdas.shape)
    return ComplexBandMap(window, xs, ys, betas)


def band_structure_sweep(s, lambdas, threads=None):
    """
    Rows (lambda, alpha_1..alpha_2m, beta_1..beta_2m) over a lambda sweep.

    Returns:
        np.ndarray: len(lambdas) x (1 + 4m); lambda stored as its real part
    """
    points = band_points(s, lambdas, threads)
    return np.array([
        np.concatenate([[np.real(bp.lam)], bp.alphas, bp.betas]) for bp in points
    ])


def truncation_decay_rates(s, n, envelope=12, margin=None):
    """
    Compare eigenvector decay of the truncation T_n with the band-structure prediction.

    Args:
        s (LaurentSymbol): Banded symbol
        n (int): Truncation size
        envelope (int): Running-maximum window for the fits
        margin (int, optional): Indices dropped at each end (default 2m)

    Returns:
        list[TruncationMode]: One entry per eigenpair of T_n
    """
    m = s.m
    margin = 2 * m if margin is None else int(margin)
    window = (margin, n - margin)
    span = window[1] - window[0]
    modes = []
    for pair in eig(assemble(s, n)):
        roots = band_roots(s, pair.value).roots
        z_m, z_next = roots[m - 1], roots[m]
        z_after = roots[m + 1] if m > 1 else np.inf
        separation = abs(z_next) / abs(z_after) if np.isfinite(z_after) else 0.0
        theta = abs(np.angle(z_next / z_m)) if z_m != 0 else 0.0
        period = 2.0 * np.pi / theta if theta > 0 else np.inf
        fit = fit_decay_rate(pair.vector, window, envelope)
        with np.errstate(divide="ignore"):
            predicted = float(-np.log(abs(z_next)))
        resolved = not np.isfinite(period) or period <= span / 2
        modes.append(TruncationMode(pair.value, predicted, fit.beta, fit.r_squared, separation, period, resolved))
    return modes
