"""
Complex Band Structure Roots

This module solves f_m(z) = lambda through the companion matrix of the
degree-2m polynomial z^m (f_m(z) - lambda) and exposes the roots sorted by
modulus together with their branches z = exp(i(alpha + i beta)).
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.cluster.hierarchy import fcluster, linkage

from config.settings import CONFLUENCE_TOL, ROOT_RESIDUAL_TOL, TIE_TOL
from toeplitz.exceptions import DomainError
from toeplitz.grid import parallel_map

TWO_PI = 2.0 * np.pi
_BATCH_ELEMENTS = 4_000_000


@dataclass(frozen=True, eq=False)
class BandPoint:
    """
    Roots of f_m(z) = lambda sorted by ascending modulus.

    Roots lost to a vanishing leading coefficient are infinite sentinels at
    the end of the list (alpha 0, beta -inf); roots at z = 0 have beta +inf.

    Args:
        lam (complex): The spectral parameter
        roots (np.ndarray): 2m complex roots
        alphas (np.ndarray): Angles in [0, 2 pi)
        betas (np.ndarray): -ln|z_i|
    """

    lam: complex
    roots: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray

    @property
    def m(self):
        return len(self.roots) // 2

    @property
    def moduli(self):
        return np.abs(self.roots)

    def finite_roots(self):
        return self.roots[np.isfinite(self.roots)]

    def to_json(self):
        return {
            "lambda": self.lam,
            "roots": self.roots,
            "alphas": self.alphas,
            "betas": self.betas,
        }


@dataclass(frozen=True)
class RootCluster:
    """Group of (nearly) coincident roots."""

    center: complex
    multiplicity: int
    indices: tuple


def _shifted_polynomial(s, lam):
    poly = np.asarray(s.coeffs, dtype=complex).copy()
    poly[s.m] -= lam
    return poly


def companion(poly):
    """Frobenius companion matrix of a highest-first coefficient list."""
    degree = len(poly) - 1
    matrix = np.zeros((degree, degree), dtype=complex)
    if degree > 1:
        matrix[np.arange(1, degree), np.arange(degree - 1)] = 1.0
    matrix[0, :] = -np.asarray(poly[1:], dtype=complex) / poly[0]
    return matrix


def _strip(poly):
    """Split off leading zeros (roots at infinity) and trailing zeros (roots at 0)."""
    nonzero = np.flatnonzero(poly)
    lead = int(nonzero[0])
    trail = int(len(poly) - 1 - nonzero[-1])
    return poly[lead:len(poly) - trail], lead, trail


def _polish(poly, roots):
    """One Newton step per root, kept only when the residual decreases."""
    if len(poly) < 2:
        return roots
    dpoly = np.polyder(poly)
    values = np.polyval(poly, roots)
    slopes = np.polyval(dpoly, roots)
    ok = slopes != 0
    candidates = roots.copy()
    candidates[ok] = roots[ok] - values[ok] / slopes[ok]
    better = np.abs(np.polyval(poly, candidates)) < np.abs(values)
    return np.where(better, candidates, roots)


def _sort_order(roots):
    """Ascending modulus, ties (1e-10 relative) broken by ascending angle in [0, 2 pi)."""
    moduli = np.abs(roots)
    angles = np.mod(np.angle(roots), TWO_PI)
    order = np.argsort(moduli, kind="stable")
    result = []
    i = 0
    while i < len(order):
        j = i + 1
        while (j < len(order) and np.isfinite(moduli[order[j]])
               and moduli[order[j]] - moduli[order[j - 1]] <= TIE_TOL * (1.0 + moduli[order[j - 1]])):
            j += 1
        group = order[i:j]
        result.extend(group[np.argsort(angles[group], kind="stable")])
        i = j
    return np.array(result, dtype=int)


def _make_band_point(lam, roots):
    order = _sort_order(roots)
    roots = roots[order]
    moduli = np.abs(roots)
    finite = np.isfinite(roots)
    alphas = np.where(finite, np.mod(np.angle(np.where(finite, roots, 1.0)), TWO_PI), 0.0)
    alphas = np.where(alphas >= TWO_PI, 0.0, alphas)
    with np.errstate(divide="ignore"):
        betas = -np.log(moduli)
    return BandPoint(complex(lam), roots, alphas, betas)


def band_roots(s, lam):
    """
    All 2m roots of z^m (f_m(z) - lambda), sorted by modulus.

    Args:
        s (LaurentSymbol): Banded symbol, m >= 1
        lam (complex): Spectral parameter

    Returns:
        BandPoint: Sorted roots with their (alpha, beta) branches
    """
    if s.m < 1:
        raise DomainError("band_roots needs a symbol with m >= 1")
    if not np.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam}")
    if not np.any(s.coeffs):
        raise DomainError("All symbol coefficients are zero")

    poly = _shifted_polynomial(s, lam)
    if not np.any(poly):
        raise DomainError(f"f - lambda vanishes identically at lambda={lam}")
    core, lead, trail = _strip(poly)

    if len(core) > 1:
        finite = np.linalg.eigvals(companion(core))
        finite = _polish(core, finite)
    else:
        finite = np.zeros(0, dtype=complex)

    roots = np.concatenate([
        np.zeros(trail, dtype=complex),
        finite.astype(complex),
        np.full(lead, complex(np.inf, 0.0)),
    ])

    scale = max(1.0, abs(lam), s.scale())
    nonzero = finite[finite != 0]
    if nonzero.size:
        with np.errstate(over="ignore", invalid="ignore"):
            residual = np.abs(np.polyval(poly, nonzero)) / np.abs(nonzero) ** s.m
        worst = float(np.nanmax(residual)) if np.any(np.isfinite(residual)) else 0.0
        if worst > ROOT_RESIDUAL_TOL * scale:
            logger.warning(f"Root residual {worst:.2e} exceeds tolerance at lambda={lam} (m={s.m})")

    return _make_band_point(lam, roots)


def band_points(s, lambdas, threads=None):
    """band_roots over many lambda values, in input order."""
    return parallel_map(lambda lam: band_roots(s, lam), list(lambdas), threads)


def subdominant_root(s, lam):
    """The (m+1)-th smallest root z_{m+1}, which governs bulk eigenvector decay."""
    return complex(band_roots(s, lam).roots[s.m])


def cluster_roots(roots, tol):
    """
    Group roots whose pairwise (single-linkage) distance is at most tol.

    Returns:
        list[tuple[int, ...]]: Index groups ordered by their first index
    """
    roots = np.asarray(roots, dtype=complex)
    finite_idx = np.flatnonzero(np.isfinite(roots))
    infinite_idx = np.flatnonzero(~np.isfinite(roots))
    groups = []
    if len(finite_idx) == 1:
        groups.append((int(finite_idx[0]),))
    elif len(finite_idx) > 1:
        points = np.column_stack([roots[finite_idx].real, roots[finite_idx].imag])
        labels = fcluster(linkage(points, method="single"), t=tol, criterion="distance")
        for label in np.unique(labels):
            groups.append(tuple(int(i) for i in finite_idx[labels == label]))
    if len(infinite_idx):
        groups.append(tuple(int(i) for i in infinite_idx))
    return sorted(groups, key=lambda g: g[0])


def confluence_report(bp, tol=CONFLUENCE_TOL):
    """
    Clusters of confluent roots in a BandPoint.

    Args:
        bp (BandPoint): Sorted roots
        tol (float): Distance below which roots are treated as one

    Returns:
        list[RootCluster]: One entry per cluster with its multiplicity
    """
    clusters = []
    for group in cluster_roots(bp.roots, tol):
        members = bp.roots[list(group)]
        center = complex(members.mean()) if np.all(np.isfinite(members)) else complex(np.inf, 0.0)
        clusters.append(RootCluster(center, len(group), group))
    return clusters


def _moduli_loop(s, lambdas):
    return np.array([band_roots(s, lam).moduli for lam in lambdas])


def sorted_moduli(s, lambdas, threads=None):
    """
    Ascending root moduli for many lambda values at once.

    Companion matrices that differ only in the lambda entry are stacked and
    passed to a batched eigenvalue call. No Newton polishing is applied.

    Returns:
        np.ndarray: Shape (len(lambdas), 2m)
    """
    lambdas = np.asarray(lambdas, dtype=complex).reshape(-1)
    m = s.m
    if m < 1:
        raise DomainError("sorted_moduli needs a symbol with m >= 1")
    if not np.any(s.coeffs):
        raise DomainError("All symbol coefficients are zero")
    if lambdas.size == 0:
        return np.zeros((0, 2 * m))

    coeffs = np.asarray(s.coeffs, dtype=complex)
    core, lead, trail = _strip(coeffs)
    # lambda would become a leading or trailing coefficient
    if lead >= m or trail >= m:
        return _moduli_loop(s, lambdas)

    degree = len(core) - 1
    base = companion(core)
    column = m - lead - 1
    chunk = max(1, min(256, _BATCH_ELEMENTS // max(1, degree * degree)))

    def solve_chunk(start):
        lams = lambdas[start:start + chunk]
        stack = np.broadcast_to(base, (len(lams), degree, degree)).copy()
        stack[:, 0, column] = -(core[column + 1] - lams) / core[0]
        return np.sort(np.abs(np.linalg.eigvals(stack)), axis=1)

    parts = parallel_map(solve_chunk, range(0, lambdas.size, chunk), threads)
    moduli = np.concatenate(parts, axis=0)
    pieces = [np.zeros((lambdas.size, trail)), moduli, np.full((lambdas.size, lead), np.inf)]
    return np.concatenate(pieces, axis=1)


def root_count_inside(bp, radius=1.0):
    """Number of roots with |z| < radius (zero roots included)."""
    return int(np.count_nonzero(bp.moduli < radius))
