"""
Spectral Classification

This module classifies points of the complex plane against the spectrum of a
banded Toeplitz operator: winding numbers, Fredholm index, the limiting set of
finite truncations (where |z_m| = |z_{m+1}|) and the Hermitian special cases.

Winding is defined by the root count R - m, where R counts the roots of
z^m (f_m(z) - lambda) strictly inside the unit disc. The accumulated argument
along the curve sampled at z = exp(-i alpha), alpha increasing, traverses the
circle clockwise and therefore equals -(R - m); both are computed and must
agree.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from config.settings import CURVE_SAMPLES, LIMIT_SET_THRESHOLD, ON_CURVE_TOL
from toeplitz.exceptions import DomainError, OnCurveError, WindingMismatchError
from toeplitz.grid import parallel_map
from toeplitz.roots import band_roots, root_count_inside, sorted_moduli
from toeplitz.symbol import curve_values, evaluate

ON_CURVE = "on_curve"
WIND_POSITIVE = "wind_positive"
WIND_NEGATIVE = "wind_negative"
OUTSIDE = "outside"

_BISECT_STEPS = 40
_BISECT_TOL = 1e-8
_MAX_CURVE_SAMPLES = 1 << 20


@dataclass(frozen=True)
class RegionLabel:
    """Position of lambda relative to the symbol curve."""

    kind: str
    winding: int

    @property
    def in_spectrum(self):
        return self.kind != OUTSIDE


@dataclass(frozen=True)
class LimitSetSample:
    """Indicator |z_{m+1}| - |z_m|; zero on the limiting set."""

    lam: complex
    indicator: float


@dataclass(frozen=True, eq=False)
class LevelSet:
    """Zero level set as line segments, each ((alpha0, beta0), (alpha1, beta1))."""

    segments: np.ndarray

    @property
    def points(self):
        if len(self.segments) == 0:
            return np.zeros((0, 2))
        return np.unique(self.segments.reshape(-1, 2), axis=0)

    def __len__(self):
        return len(self.segments)


def _segment_distance(points, lam):
    """Distance from each lambda to the closed polyline through points."""
    a = points
    b = np.roll(points, -1)
    ab = b - a
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    best = np.full(lam.shape, np.inf)
    length2 = np.abs(ab) ** 2
    safe = np.where(length2 > 0, length2, 1.0)
    for start in range(0, len(a), 1024):
        sl = slice(start, start + 1024)
        rel = lam[:, None] - a[None, sl]
        t = np.clip((rel * np.conj(ab[None, sl])).real / safe[None, sl], 0.0, 1.0)
        t = np.where(length2[None, sl] > 0, t, 0.0)
        dist = np.abs(rel - t * ab[None, sl])
        best = np.minimum(best, dist.min(axis=1))
    return best


def curve_distance(s, lam, n_samples=CURVE_SAMPLES):
    """Distance from lambda to the piecewise-linear symbol curve."""
    _, values = curve_values(s, n_samples)
    result = _segment_distance(values, lam)
    return float(result[0]) if np.isscalar(lam) else result


def _on_curve_tolerance(s):
    return ON_CURVE_TOL * (1.0 + s.scale())


def curve_winding(s, lam):
    """
    Winding of the curve alpha -> f(exp(-i alpha)) around lambda.

    The sampling is refined until consecutive argument steps stay below pi/2.
    """
    n = max(CURVE_SAMPLES, 64 * s.m)
    while True:
        _, values = curve_values(s, n)
        shifted = values - lam
        steps = np.angle(np.roll(shifted, -1) / shifted)
        if np.max(np.abs(steps)) < np.pi / 2 or n >= _MAX_CURVE_SAMPLES:
            return int(np.rint(steps.sum() / (2.0 * np.pi)))
        n *= 4


def winding_number(s, lam):
    """
    Winding number R - m of the symbol curve about lambda.

    Args:
        s (LaurentSymbol): Banded symbol
        lam (complex): Point off the curve

    Returns:
        int: The winding number
    """
    distance = curve_distance(s, lam)
    if distance <= _on_curve_tolerance(s):
        raise OnCurveError(lam, distance)
    winding = root_count_inside(band_roots(s, lam)) - s.m
    by_curve = curve_winding(s, lam)
    if winding != -by_curve:
        raise WindingMismatchError(lam, winding, -by_curve)
    return winding


def classify_region(s, lam):
    """Label lambda as on_curve, wind_positive, wind_negative or outside."""
    try:
        winding = winding_number(s, lam)
    except OnCurveError:
        return RegionLabel(ON_CURVE, 0)
    if winding > 0:
        return RegionLabel(WIND_POSITIVE, winding)
    if winding < 0:
        return RegionLabel(WIND_NEGATIVE, winding)
    return RegionLabel(OUTSIDE, 0)


def fredholm_index(s, lam):
    """Index of T(f) - lambda, equal to minus the winding number."""
    return -winding_number(s, lam)


def winding_grid(s, window, nx, ny, threads=None):
    """
    Region labels on a grid, row-major with rows of fixed imaginary part.

    Returns:
        list[list[RegionLabel]]: ny rows of nx labels
    """
    points = window.points(nx, ny)
    return parallel_map(lambda row: [classify_region(s, lam) for lam in row], list(points), threads)


def schmidt_spitzer_indicator(s, lam):
    """Limiting-set indicator |z_{m+1}| - |z_m| at lambda."""
    if s.m < 1:
        raise DomainError("schmidt_spitzer_indicator needs m >= 1")
    moduli = band_roots(s, lam).moduli
    return LimitSetSample(complex(lam), float(moduli[s.m] - moduli[s.m - 1]))


def normalized_indicator(s, lambdas, threads=None):
    """
    (|z_{m+1}| - |z_m|) / (|z_{m+1}| + |z_m|) for each lambda.

    Zero when both moduli vanish and one when an infinite root is involved.
    """
    m = s.m
    moduli = sorted_moduli(s, lambdas, threads)
    lower = moduli[:, m - 1]
    upper = moduli[:, m]
    total = upper + lower
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = (upper - lower) / total
    ratio = np.where(total == 0, 0.0, ratio)
    ratio = np.where(np.isinf(upper), 1.0, ratio)
    return np.clip(ratio, 0.0, 1.0)


def _scalar_indicator(s):
    return lambda lam: float(normalized_indicator(s, [lam], threads=1)[0])


def _line_minimum(g, point, lo, hi):
    """Minimum of the indicator along the segment point(t), t in [lo, hi]."""
    result = minimize_scalar(lambda t: g(point(t)), bounds=(lo, hi), method="bounded",
                             options={"xatol": 1e-10})
    return float(result.fun), float(result.x)


def _scan_lines(g, grid, along, across, transpose, threshold):
    """Refine discrete local minima along each line of the grid."""
    found = []
    hits = np.zeros(len(across), dtype=bool)
    values = grid.T if transpose else grid
    step = along[1] - along[0]
    for k, c in enumerate(across):
        line = values[k]
        if np.any(line < threshold):
            hits[k] = True
        inner = line[1:-1]
        minima = (inner <= line[:-2]) & (inner <= line[2:]) & (inner < 0.5)
        for i in np.flatnonzero(minima) + 1:
            if transpose:
                point = lambda t, c=c: c + 1j * t
            else:
                point = lambda t, c=c: t + 1j * c
            value, t = _line_minimum(g, point, along[i] - step, along[i] + step)
            if value < threshold:
                found.append((k, point(t)))
                hits[k] = True
    return found, hits


def _bisect_edge(g, inside, outside, width, coordinate, threshold):
    """Bisect between a hit line position and a miss line position."""
    def line_min(x):
        return _line_minimum(g, lambda t: coordinate(x, t), -width, width)

    best = None
    lo, hi = inside, outside
    for _ in range(_BISECT_STEPS):
        if abs(hi - lo) <= _BISECT_TOL:
            break
        mid = 0.5 * (lo + hi)
        value, t = line_min(mid)
        if value < threshold:
            lo, best = mid, coordinate(mid, t)
        else:
            hi = mid
    return best


def schmidt_spitzer_set(s, window, resolution, threshold=LIMIT_SET_THRESHOLD, threads=None):
    """
    Points of the limiting set of finite truncations inside a window.

    The normalized indicator is scanned on a resolution x resolution grid.
    Grid points below the threshold are kept, local minima along every grid
    line are refined by bounded 1-D minimisation, and the boundary of the set
    is located by bisection between hit and miss lines.

    Args:
        s (LaurentSymbol): Banded symbol, m >= 1
        window (Window): Search rectangle
        resolution (int): Grid points per axis, at least 16
        threshold (float): Cutoff on the normalized indicator

    Returns:
        list[complex]: Points sorted by real then imaginary part (may be empty)
    """
    if resolution < 16:
        raise DomainError(f"schmidt_spitzer_set needs resolution >= 16, got {resolution}")
    xs, ys = window.axes(resolution, resolution)
    lambdas = window.points(resolution, resolution)
    grid = normalized_indicator(s, lambdas.reshape(-1), threads).reshape(lambdas.shape)
    g = _scalar_indicator(s)

    points = [complex(lam) for lam in lambdas[grid < threshold]]
    dx = xs[1] - xs[0]
    dy = ys[1] - ys[0]

    if dy > 0:
        # Vertical lines: fixed real part, minima along the imaginary axis
        col_found, col_hits = _scan_lines(g, grid, ys, xs, True, threshold)
        points.extend(p for _, p in col_found)
        for k in range(len(xs) - 1):
            if col_hits[k] == col_hits[k + 1]:
                continue
            inside, outside = (k, k + 1) if col_hits[k] else (k + 1, k)
            anchors = [p.imag for j, p in col_found if j == inside]
            anchors += list(ys[grid[:, inside] < threshold])
            for y0 in anchors[:4]:
                edge = _bisect_edge(g, xs[inside], xs[outside], 2 * dy,
                                    lambda x, t, y0=y0: x + 1j * (y0 + t), threshold)
                if edge is not None:
                    points.append(edge)

    if dx > 0:
        # Horizontal lines: fixed imaginary part, minima along the real axis
        row_found, row_hits = _scan_lines(g, grid, xs, ys, False, threshold)
        points.extend(p for _, p in row_found)
        for k in range(len(ys) - 1):
            if row_hits[k] == row_hits[k + 1]:
                continue
            inside, outside = (k, k + 1) if row_hits[k] else (k + 1, k)
            anchors = [p.real for j, p in row_found if j == inside]
            anchors += list(xs[grid[inside] < threshold])
            for x0 in anchors[:4]:
                edge = _bisect_edge(g, ys[inside], ys[outside], 2 * dx,
                                    lambda y, t, x0=x0: (x0 + t) + 1j * y, threshold)
                if edge is not None:
                    points.append(edge)

    unique = sorted(set(points), key=lambda z: (z.real, z.imag))
    logger.debug(f"Limit-set scan found {len(unique)} points at resolution {resolution}")
    return unique


def _require_hermitian(s):
    asymmetry = np.abs(s.coeffs - s.coeffs[::-1]).max() if s.m else 0.0
    if asymmetry > 1e-12 * max(s.scale(), 1e-300):
        raise DomainError(f"Symbol is not Hermitian (max |a_k - a_-k| = {asymmetry:.3e})")


def _real_symbol(s):
    ks = np.arange(1, s.m + 1)
    a = s.coeffs[s.m + ks]
    return lambda alpha: s.coeffs[s.m] + 2.0 * np.sum(a * np.cos(ks * alpha))


def hermitian_spectrum_interval(s, n_samples=CURVE_SAMPLES):
    """
    Spectrum [r, R] of a Hermitian Toeplitz operator.

    Args:
        s (LaurentSymbol): Symbol with a_k = a_{-k}

    Returns:
        tuple[float, float]: Minimum and maximum of f on the unit circle
    """
    _require_hermitian(s)
    if s.m == 0:
        c = float(s.coeffs[0])
        return c, c
    f = _real_symbol(s)
    alphas = 2.0 * np.pi * np.arange(n_samples) / n_samples
    values = evaluate(s, np.exp(-1j * alphas)).real
    step = alphas[1] - alphas[0]

    def refine(index, sign):
        result = minimize_scalar(lambda a: sign * f(a), method="bounded",
                                 bounds=(alphas[index] - step, alphas[index] + step),
                                 options={"xatol": 1e-12})
        return min(sign * values[index], float(result.fun)) * sign

    r = refine(int(np.argmin(values)), 1.0)
    R = refine(int(np.argmax(values)), -1.0)
    return float(r), float(R)


def _marching_squares(values, xs, ys):
    """
    Zero level segments of values[iy, ix] with linear edge interpolation.

    Corners are classified by values >= 0; saddle cells are resolved by the
    sign of the cell-center average.
    """
    v00 = values[:-1, :-1]
    v10 = values[:-1, 1:]
    v11 = values[1:, 1:]
    v01 = values[1:, :-1]
    x0 = xs[:-1][None, :]
    x1 = xs[1:][None, :]
    y0 = ys[:-1][:, None]
    y1 = ys[1:][:, None]
    shape = v00.shape

    def crossing(va, vb, pa, pb):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = va / (va - vb)
        return pa + t * (pb - pa)

    # Edges: bottom (00-10), right (10-11), top (01-11), left (00-01)
    bottom = np.stack(np.broadcast_arrays(crossing(v00, v10, x0, x1), y0), axis=-1)
    right = np.stack(np.broadcast_arrays(x1, crossing(v10, v11, y0, y1)), axis=-1)
    top = np.stack(np.broadcast_arrays(crossing(v01, v11, x0, x1), y1), axis=-1)
    left = np.stack(np.broadcast_arrays(x0, crossing(v00, v01, y0, y1)), axis=-1)
    edges = np.stack([bottom, right, top, left], axis=2)

    s00, s10, s11, s01 = (v >= 0 for v in (v00, v10, v11, v01))
    cut = np.stack([s00 != s10, s10 != s11, s01 != s11, s00 != s01], axis=2)
    count = cut.sum(axis=2)

    segments = []
    two = count == 2
    if np.any(two):
        idx = np.argwhere(two)
        cut_edges = np.argwhere(cut[two])[:, 1].reshape(-1, 2)
        pts = edges[idx[:, 0], idx[:, 1]]
        rows = np.arange(len(idx))
        segments.append(np.stack([pts[rows, cut_edges[:, 0]], pts[rows, cut_edges[:, 1]]], axis=1))

    four = count == 4
    if np.any(four):
        idx = np.argwhere(four)
        pts = edges[idx[:, 0], idx[:, 1]]
        center = 0.25 * (v00 + v10 + v11 + v01)[four] >= 0
        same = center == s00[four]
        # Center matching corner 00 joins bottom-right and top-left; otherwise bottom-left and right-top
        first = np.where(same[:, None, None], pts[:, [0, 1]], pts[:, [0, 3]])
        second = np.where(same[:, None, None], pts[:, [2, 3]], pts[:, [1, 2]])
        segments.extend([first, second])

    if not segments:
        return np.zeros((0, 2, 2))
    return np.concatenate(segments, axis=0)


def admissible_quasiperiodicities(s, alpha_range, beta_range, resolution):
    """
    Zero level set of (alpha, beta) -> Im f(exp(i(alpha + i beta))).

    Args:
        s (LaurentSymbol): Hermitian symbol
        alpha_range (tuple): (alpha_min, alpha_max)
        beta_range (tuple): (beta_min, beta_max)
        resolution (int | tuple): Grid points per axis, or (n_alpha, n_beta)

    Returns:
        LevelSet: Marching-squares segments in (alpha, beta) coordinates
    """
    _require_hermitian(s)
    if np.isscalar(resolution):
        n_alpha = n_beta = int(resolution)
    else:
        n_alpha, n_beta = (int(r) for r in resolution)
    if n_alpha < 2 or n_beta < 2:
        raise DomainError("admissible_quasiperiodicities needs at least 2 points per axis")
    alphas = np.linspace(alpha_range[0], alpha_range[1], n_alpha)
    betas = np.linspace(beta_range[0], beta_range[1], n_beta)
    z = np.exp(1j * (alphas[None, :] + 1j * betas[:, None]))
    values = evaluate(s, z).imag
    segments = _marching_squares(values, alphas, betas)
    logger.debug(f"Quasiperiodicity level set has {len(segments)} segments")
    return LevelSet(segments)
