"""
Dense Linear Algebra

This module wraps the LAPACK-backed SciPy routines used by the defect and
pseudospectrum code: eigen-decomposition with a deterministic ordering,
smallest singular values, condition numbers and guarded linear solves.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from loguru import logger

from toeplitz.exceptions import EigensolverError, SingularMatrixError
from toeplitz.matrices import DenseMatrix, FiniteToeplitz

# Relative magnitude below which a component is not used to fix the phase
PHASE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenPair:
    """Eigenvalue with a unit 2-norm eigenvector whose first significant entry is real positive."""

    value: complex
    vector: np.ndarray = field(repr=False)
    label: str = ""


def as_array(A):
    """Dense ndarray view of a DenseMatrix, FiniteToeplitz or array."""
    if isinstance(A, DenseMatrix):
        return A.entries
    if isinstance(A, FiniteToeplitz):
        return A.dense()
    return np.asarray(A)


def fix_phase(vector, tol=PHASE_TOL):
    """Scale a vector to unit 2-norm with its first significant component real positive."""
    vector = np.asarray(vector, dtype=complex)
    norm = np.linalg.norm(vector)
    if norm == 0:
        return vector
    vector = vector / norm
    magnitudes = np.abs(vector)
    index = int(np.argmax(magnitudes > tol * magnitudes.max()))
    return vector * (np.conj(vector[index]) / magnitudes[index])


def eig(A):
    """
    All eigenpairs, sorted by real part then imaginary part.

    Args:
        A (DenseMatrix | FiniteToeplitz | np.ndarray): Square matrix

    Returns:
        list[EigenPair]: n eigenpairs
    """
    a = as_array(A)
    try:
        values, vectors = scipy.linalg.eig(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"Eigen-decomposition failed for a {a.shape} matrix: {e}")
    # Exact zeros keep the (Re, Im) sort stable against -0.0
    values = values + 0.0
    order = np.lexsort((values.imag, values.real))
    return [EigenPair(complex(values[i]), fix_phase(vectors[:, i])) for i in order]


def eigenvalues(A):
    """Eigenvalues only, in the same order as eig."""
    a = as_array(A)
    try:
        values = scipy.linalg.eigvals(a) + 0.0
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"Eigenvalue computation failed for a {a.shape} matrix: {e}")
    return values[np.lexsort((values.imag, values.real))]


def singular_values(A):
    a = as_array(A)
    try:
        return scipy.linalg.svdvals(a)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"SVD failed for a {a.shape} matrix: {e}")


def smallest_singular_value(A):
    """sigma_min(A)."""
    return float(singular_values(A)[-1])


def condition_number(A):
    """sigma_max / sigma_min in the 2-norm; inf for a singular matrix."""
    sigma = singular_values(A)
    if sigma[-1] == 0:
        return float("inf")
    return float(sigma[0] / sigma[-1])


def solve(A, b):
    """
    Solve A x = b.

    Raises:
        SingularMatrixError: When cond(A) exceeds 1 / machine epsilon
    """
    a = as_array(A)
    kappa = condition_number(a)
    if not np.isfinite(kappa) or kappa > 1.0 / np.finfo(float).eps:
        raise SingularMatrixError(f"Matrix is singular to working precision (cond={kappa:.3e})")
    if kappa > 1e10:
        logger.warning(f"Solving an ill-conditioned system (cond={kappa:.3e})")
    try:
        return scipy.linalg.solve(a, np.asarray(b), check_finite=True)
    except scipy.linalg.LinAlgError as e:
        raise SingularMatrixError(f"Linear solve failed: {e}")
