"""
Defect Modes and Decay Bounds

This module solves the defect eigenproblem B T u = lambda u, where B is the
identity with 1 + eta at one site, and compares the decay of the resulting
mode (a discrete Green's function column) with three envelopes:

    - Demko: exponential, rate set by the condition number of T - lambda I
    - Jaffard: algebraic, (1 + d)^(-alpha)
    - CBS: exponential, rates from the roots of f_m(z) = lambda

Near the defect the algebraic bound is the tighter one; the crossover is the
distance beyond which the exponential CBS envelope stays below it.
"""

from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from toeplitz.eigensolve import EigenPair, as_array, condition_number, eig, eigenvalues, solve, singular_values
from toeplitz.exceptions import DomainError, NearSingularError
from toeplitz.matrices import defect_matrix
from toeplitz.roots import band_roots

# Relative distance to sigma(T) beyond which an eigenvalue is a defect eigenvalue
DEFECT_LABEL_TOL = 1e-6
# sigma_min(T - lambda I) below this fraction of ||T||_F is treated as singular
RESOLVENT_TOL = 1e-10

BULK = "bulk"
DEFECT = "defect"


@dataclass(frozen=True, eq=False)
class DecayProfile:
    """
    Green's mode magnitudes with the three bound curves on the same index set.

    Args:
        mode (np.ndarray): |u_j| for j = 1..n
        site (int): 1-based defect site
        cbs_bound (np.ndarray): Exponential envelope from the band-structure roots
        demko_bound (np.ndarray): Condition-number envelope (nan when not computed)
        jaffard_bound (np.ndarray): Algebraic envelope
        crossover (int | None): Distance from the site after which cbs < jaffard persists
        crossover_side (str | None): "left" or "right"
        beta (float): -ln|z_{m+1}|
        kappa (float): Condition number of T - lambda I
        alpha (float): Jaffard exponent
    """

    mode: np.ndarray = field(repr=False)
    site: int
    cbs_bound: np.ndarray = field(repr=False)
    demko_bound: np.ndarray = field(repr=False)
    jaffard_bound: np.ndarray = field(repr=False)
    crossover: int = None
    crossover_side: str = None
    beta: float = float("nan")
    kappa: float = float("nan")
    alpha: float = float("nan")

    @property
    def crossover_index(self):
        if self.crossover is None:
            return None
        sign = 1 if self.crossover_side == "right" else -1
        return self.site + sign * self.crossover

    def summary(self):
        return {
            "site": self.site,
            "crossover": self.crossover,
            "crossover_side": self.crossover_side,
            "crossover_index": self.crossover_index,
            "beta": self.beta,
            "kappa": self.kappa,
            "alpha": self.alpha,
        }


def _shifted(T, lam):
    a = as_array(T)
    return a - lam * np.eye(a.shape[0])


def greens_mode(T, lam, site):
    """
    Resolvent column u = (T - lambda I)^{-1} e_site, unnormalized.

    Args:
        T (FiniteToeplitz | DenseMatrix): Matrix
        lam (complex): Point off the spectrum of T
        site (int): 1-based column

    Returns:
        np.ndarray: The column
    """
    a = _shifted(T, lam)
    n = a.shape[0]
    if not 1 <= int(site) <= n:
        raise DomainError(f"Site {site} outside 1..{n}")
    sigma_min = float(singular_values(a)[-1])
    if sigma_min <= RESOLVENT_TOL * np.linalg.norm(as_array(T), "fro"):
        raise NearSingularError(f"lambda={lam} lies in the spectrum of T (sigma_min={sigma_min:.3e})")
    rhs = np.zeros(n, dtype=complex if np.iscomplexobj(a) else float)
    rhs[int(site) - 1] = 1.0
    return solve(a, rhs)


def defect_eigenpairs(T, spec):
    """
    Eigenpairs of B T with B the defect matrix, labelled bulk or defect.

    An eigenvalue is a defect eigenvalue when its distance to the spectrum of
    T exceeds 1e-6 times the spectral radius of T.
    """
    a = as_array(T)
    product = defect_matrix(a.shape[0], spec).entries @ a
    reference = eigenvalues(a)
    radius = float(np.max(np.abs(reference))) if reference.size else 0.0
    tolerance = DEFECT_LABEL_TOL * max(radius, np.finfo(float).tiny)
    labelled = []
    for pair in eig(product):
        distance = float(np.min(np.abs(reference - pair.value)))
        label = DEFECT if distance > tolerance else BULK
        labelled.append(EigenPair(pair.value, pair.vector, label))
    defects = sum(1 for p in labelled if p.label == DEFECT)
    logger.info(f"Defect at site {spec.site} (eta={spec.eta}): {defects} eigenvalues moved off sigma(T)")
    return labelled


def demko_constant(A):
    """
    Constant of the Demko bound for a Hermitian positive definite A:
    max(||A^{-1}||, (1 + sqrt(kappa))^2 / (2 ||A||)).
    """
    sigma = singular_values(A)
    if sigma[-1] == 0:
        raise NearSingularError("Demko constant needs an invertible matrix")
    kappa = sigma[0] / sigma[-1]
    return float(max(1.0 / sigma[-1], (1.0 + np.sqrt(kappa)) ** 2 / (2.0 * sigma[0])))


def demko_rate(T, lam):
    """(kappa, q) for T - lambda I with q = (sqrt(kappa) - 1) / (sqrt(kappa) + 1)."""
    kappa = condition_number(_shifted(T, lam))
    if not np.isfinite(kappa):
        raise NearSingularError(f"T - lambda I is singular at lambda={lam}")
    root = np.sqrt(kappa)
    return kappa, float((root - 1.0) / (root + 1.0))


def _distances(n, site):
    return np.abs(np.arange(1, n + 1) - int(site)).astype(float)


def demko_envelope(T, lam, C, site, band=None):
    """
    Demko envelope C q^{|j - site| / band} for j = 1..n.

    band is the half-bandwidth of T (offsets |i - j| <= band are nonzero);
    by default it is read from T. Demko's theorem counts the full bandwidth
    m = 2 band and writes the rate as q^{2|i - j| / m}; the two forms are the
    same number.

    Returns:
        np.ndarray: Per-index bound
    """
    n = as_array(T).shape[0]
    band = T.bandwidth() if band is None else int(band)
    _, q = demko_rate(T, lam)
    d = _distances(n, site)
    if q == 0 or band == 0:
        return np.where(d == 0, float(C), 0.0)
    return float(C) * np.exp(np.log(q) / band * d)


def jaffard_envelope(alpha, C, site, n):
    """Jaffard envelope C (1 + |j - site|)^{-alpha} for j = 1..n."""
    if alpha <= 1:
        raise DomainError(f"Jaffard exponent must exceed 1, got {alpha}")
    return float(C) * (1.0 + _distances(n, site)) ** (-float(alpha))


def cbs_envelope(s, lam, C, site, n):
    """
    Two-sided exponential envelope from the roots of f_m(z) = lambda.

    To the right of the site the envelope decays like |z_m|^d, to the left
    like |z_{m+1}|^{-d}.

    Returns:
        tuple[np.ndarray, float]: Per-index bound and beta = -ln|z_{m+1}|
    """
    moduli = band_roots(s, lam).moduli
    lower, upper = moduli[s.m - 1], moduli[s.m]
    offsets = np.arange(1, n + 1) - int(site)
    with np.errstate(divide="ignore", over="ignore"):
        right = offsets * np.log(lower) if lower > 0 else np.where(offsets > 0, -np.inf, 0.0)
        left = offsets * np.log(upper) if np.isfinite(upper) else np.where(offsets < 0, -np.inf, 0.0)
        exponent = np.where(offsets > 0, right, np.where(offsets < 0, left, 0.0))
        bound = float(C) * np.exp(exponent)
        beta = float(-np.log(upper))
    return bound, beta


def _side_crossover(cbs, jaffard):
    """Smallest distance after which cbs < jaffard holds for every larger distance."""
    if cbs.size == 0:
        return None
    below = cbs < jaffard
    if not below[-1]:
        return None
    failures = np.flatnonzero(~below)
    return int(failures[-1] + 2) if failures.size else 1


def decay_transition(mode, site, cbs_bound, jaffard_bound, demko_bound=None, **metadata):
    """
    Locate the algebraic-to-exponential crossover of a Green's mode.

    The crossover is taken on the slower-decaying side of the site, the side
    whose CBS envelope is larger one step away from the defect.

    Returns:
        DecayProfile: Envelopes and the crossover distance (None when absent)
    """
    mode = np.abs(np.asarray(mode))
    cbs_bound = np.asarray(cbs_bound, dtype=float)
    jaffard_bound = np.asarray(jaffard_bound, dtype=float)
    n = mode.size
    index = int(site) - 1
    sides = {
        "right": slice(index + 1, n),
        "left": slice(index - 1, None, -1) if index > 0 else slice(0, 0),
    }
    best_side, best_value = None, -np.inf
    for name, sl in sides.items():
        values = cbs_bound[sl]
        if values.size and values[0] > best_value:
            best_side, best_value = name, float(values[0])

    crossover = None
    if best_side is not None:
        sl = sides[best_side]
        crossover = _side_crossover(cbs_bound[sl], jaffard_bound[sl])
    if demko_bound is None:
        demko_bound = np.full(n, np.nan)
    return DecayProfile(
        mode=mode, site=int(site), cbs_bound=cbs_bound, demko_bound=np.asarray(demko_bound, dtype=float),
        jaffard_bound=jaffard_bound, crossover=crossover,
        crossover_side=best_side if crossover is not None else None, **metadata,
    )


def decay_profile(T, lam, site, alpha, band=None):
    """
    Green's mode at lambda with all three envelopes calibrated to |u_site|.

    Args:
        T (FiniteToeplitz): Matrix
        lam (complex): Point outside the winding region
        site (int): 1-based defect site
        alpha (float): Jaffard exponent, typically min(p, q)
        band (int, optional): Bandwidth used for the band-structure roots and
            the Demko rate; defaults to the bandwidth of T

    Returns:
        DecayProfile: Mode, envelopes and crossover
    """
    band = T.bandwidth() if band is None else int(band)
    if band < 1:
        raise DomainError("decay_profile needs a matrix with at least one off-diagonal")
    u = greens_mode(T, lam, site)
    C = abs(u[int(site) - 1])
    n = T.n
    cbs, beta = cbs_envelope(T.to_symbol(band), lam, C, site, n)
    kappa, _ = demko_rate(T, lam)
    demko = demko_envelope(T, lam, C, site, band)
    jaffard = jaffard_envelope(alpha, C, site, n)
    profile = decay_transition(np.abs(u), site, cbs, jaffard, demko,
                               beta=beta, kappa=kappa, alpha=float(alpha))
    logger.info(f"Decay profile at lambda={lam}, band={band}: crossover={profile.crossover} ({profile.crossover_side})")
    return profile
