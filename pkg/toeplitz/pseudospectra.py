"""
Pseudospectra

This module evaluates epsilon-pseudospectra of finite matrices through the
smallest singular value of A - lambda I on a grid, and builds pseudo-
eigenvectors of dense Toeplitz matrices from truncated eigenvectors of their
N-banded approximations, together with the algebraic residual bound.
"""

from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy.special import zeta

from config.settings import LIMIT_SET_THRESHOLD
from toeplitz.eigenmodes import bulk_eigenvector
from toeplitz.eigensolve import as_array, singular_values
from toeplitz.exceptions import DomainError
from toeplitz.grid import parallel_map
from toeplitz.matrices import assemble
from toeplitz.roots import sorted_moduli
from toeplitz.spectra import normalized_indicator
from toeplitz.symbol import ALGEBRAIC, DecayLaw, LaurentSymbol, curve_values, synthesize

NORMS = {"one": 1, "two": 2}


@dataclass(frozen=True, eq=False)
class PseudospectrumGrid:
    """sigma_min(A - lambda I) on a window; values[iy, ix] with rows of fixed Im lambda."""

    window: object
    resolution: tuple
    re: np.ndarray = field(repr=False)
    im: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def sublevel(self, epsilon):
        """Boolean mask of the grid points inside the epsilon-pseudospectrum."""
        return self.values <= epsilon


@dataclass(frozen=True, eq=False)
class PseudoPair:
    """
    Pseudo-eigenpair of a dense N x N Toeplitz matrix.

    Args:
        lambda_n (complex): Eigenvalue of the N-banded operator used
        v_n (np.ndarray): Truncated eigenvector, unit norm in `norm`
        epsilon_n (float): ||(T_N - lambda_n I) v_n|| in `norm`
        bound_n (float): Algebraic bound for epsilon_n (nan for banded sources)
        n (int): Size and bandwidth N
        p (float): Decay exponent below the diagonal
        q (float): Decay exponent above the diagonal
        norm (str): "one" or "two"
        orientation (str): "direct", or "adjoint" when the transposed operator was used
    """

    lambda_n: complex
    v_n: np.ndarray = field(repr=False)
    epsilon_n: float = 0.0
    bound_n: float = float("nan")
    n: int = 0
    p: float = float("nan")
    q: float = float("nan")
    norm: str = "one"
    orientation: str = "direct"

    def summary(self):
        return {
            "N": self.n, "p": self.p, "q": self.q, "lambda": self.lambda_n,
            "epsilon": self.epsilon_n, "bound": self.bound_n,
            "norm": "l1" if self.norm == "one" else "l2", "orientation": self.orientation,
        }


def _resolution(resolution):
    if np.isscalar(resolution):
        nx = ny = int(resolution)
    else:
        nx, ny = (int(r) for r in resolution)
    if nx < 2 or ny < 2:
        raise DomainError(f"Pseudospectrum grid needs at least 2 points per axis, got {(nx, ny)}")
    return nx, ny


def pseudospectrum_grid(A, window, resolution, threads=None):
    """
    Smallest singular value of A - lambda I over a window.

    Args:
        A (DenseMatrix | FiniteToeplitz | np.ndarray): Square matrix
        window (Window): Region of the complex plane
        resolution (int | tuple): Points per axis, or (nx, ny)

    Returns:
        PseudospectrumGrid: Row-major sigma_min values
    """
    a = as_array(A)
    nx, ny = _resolution(resolution)
    xs, ys = window.axes(nx, ny)
    identity = np.eye(a.shape[0])

    def row(y):
        return [float(singular_values(a - (x + 1j * y) * identity)[-1]) for x in xs]

    values = np.array(parallel_map(row, ys, threads))
    logger.debug(f"Pseudospectrum grid {nx}x{ny}: min sigma_min={values.min():.3e}")
    return PseudospectrumGrid(window, (nx, ny), xs, ys, values)


def residual_norm(A, lam, v, norm_kind="one"):
    """
    ||(A - lambda I) v|| in the 1- or 2-norm.

    v must have unit norm in the requested norm.
    """
    order = NORMS.get(norm_kind)
    if order is None:
        raise DomainError(f"norm_kind must be 'one' or 'two', got {norm_kind!r}")
    v = np.asarray(v)
    size = np.linalg.norm(v, order)
    if size == 0:
        raise DomainError("residual_norm needs a nonzero vector")
    if abs(size - 1.0) > 1e-8:
        raise DomainError(f"Vector must have unit {norm_kind}-norm, got {size:.3e}")
    a = as_array(A)
    return float(np.linalg.norm(a @ v - lam * v, order))


def epsilon_bound(N, p):
    """
    Residual bound zeta(p) N^{1-2p} (N^p - 1) / (N^{p/N} - 1).

    Args:
        N (int): Size, at least 2
        p (float): Decay exponent, greater than 1
    """
    if p <= 1:
        raise DomainError(f"epsilon_bound needs p > 1, got {p}")
    if N < 2:
        raise DomainError(f"epsilon_bound needs N >= 2, got {N}")
    N = float(N)
    return float(zeta(p)) * N ** (1.0 - 2.0 * p) * (N ** p - 1.0) / np.expm1(p / N * np.log(N))


def select_lambda(s, scan=128, threads=None):
    """
    Real lambda on the limiting set with the largest |beta|.

    The real range of the symbol curve is scanned; points whose normalized
    indicator is below the limit-set threshold are candidates. Without
    candidates the point of smallest indicator is used.

    Returns:
        tuple[float, float]: lambda and beta = -ln|z_{m+1}(lambda)|
    """
    _, values = curve_values(s, 4096)
    lo, hi = float(values.real.min()), float(values.real.max())
    lambdas = np.linspace(lo, hi, scan + 2)[1:-1]
    indicator = normalized_indicator(s, lambdas, threads)
    moduli = sorted_moduli(s, lambdas, threads)
    with np.errstate(divide="ignore"):
        betas = -np.log(moduli[:, s.m])
    candidates = np.flatnonzero((indicator < LIMIT_SET_THRESHOLD) & np.isfinite(betas))
    if candidates.size:
        best = candidates[np.argmax(np.abs(betas[candidates]))]
    else:
        best = int(np.argmin(indicator))
        logger.warning(f"No real limit-set point found on [{lo:.4g}, {hi:.4g}]; using indicator minimum {indicator[best]:.3e}")
    return float(lambdas[best]), float(betas[best])


def pseudo_pair(source, N, lam=None, norm="one", scan=128, threads=None):
    """
    Pseudo-eigenpair of the dense N x N Toeplitz matrix of a decay law.

    The law is truncated to bandwidth N, an eigenvector of the banded
    semi-infinite operator is built at lambda and truncated to N entries.
    Applied to the dense matrix it satisfies the first rows exactly and
    leaves a residual from the discarded tail. When the chosen lambda gives
    growing modes, the transposed operator is used instead.

    Args:
        source (DecayLaw | LaurentSymbol): Algebraic law, or a banded symbol
        N (int): Size and truncation bandwidth, at least 8
        lam (float, optional): Explicit lambda; selected by scan otherwise
        norm (str): Norm for normalization and residual, "one" or "two"

    Returns:
        PseudoPair: The pair with its residual and bound
    """
    N = int(N)
    if N < 8:
        raise DomainError(f"pseudo_pair needs N >= 8, got {N}")
    if norm not in NORMS:
        raise DomainError(f"norm must be 'one' or 'two', got {norm!r}")

    if isinstance(source, DecayLaw):
        if source.kind != ALGEBRAIC:
            raise DomainError("pseudo_pair needs an algebraic decay law")
        symbol = synthesize(source, N)
    elif isinstance(source, LaurentSymbol):
        symbol = source
    else:
        raise DomainError(f"Unsupported pseudo-pair source: {type(source).__name__}")

    if lam is None:
        lam, beta = select_lambda(symbol, scan, threads)
    else:
        with np.errstate(divide="ignore"):
            beta = float(-np.log(sorted_moduli(symbol, [lam], threads)[0, symbol.m]))

    orientation = "direct"
    if beta < 0:
        orientation = "adjoint"
        source = source.adjoint() if isinstance(source, DecayLaw) else source.conjugate_transpose()
        symbol = symbol.conjugate_transpose()
        logger.info(f"beta={beta:.4g} < 0 at lambda={lam}; using the transposed operator")

    mode = bulk_eigenvector(symbol, lam, N)
    v = mode.values / np.linalg.norm(mode.values, NORMS[norm])
    matrix = assemble(source, N).dense()
    epsilon = float(np.linalg.norm(matrix @ v - lam * v, NORMS[norm]))

    if isinstance(source, DecayLaw):
        p, q = source.p, source.q
        bound = epsilon_bound(N, min(p, q))
    else:
        p = q = float("nan")
        bound = float("nan")
    logger.info(f"Pseudo-pair N={N}: lambda={lam:.6g}, epsilon={epsilon:.3e}, bound={bound:.3e}")
    return PseudoPair(complex(lam), v, epsilon, bound, N, p, q, norm, orientation)


def pseudo_pair_series(source, N_list, norm="one", threads=None):
    """pseudo_pair for each N in N_list."""
    return [pseudo_pair(source, N, norm=norm, threads=threads) for N in N_list]
