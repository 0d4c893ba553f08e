import math

import numpy as np
import pytest

from toeplitz.eigensolve import eigenvalues
from toeplitz.exceptions import DomainError
from toeplitz.grid import Window
from toeplitz.matrices import DenseMatrix, assemble
from toeplitz.pseudospectra import (
    epsilon_bound, pseudo_pair, pseudo_pair_series, pseudospectrum_grid, residual_norm,
)
from toeplitz.symbol import EXPONENTIAL, DecayLaw, LaurentSymbol


def test_grid_of_diagonal_matrix():
    A = DenseMatrix.from_array(np.diag([1.0, 2.0]))
    grid = pseudospectrum_grid(A, Window(0.0, 3.0, -1.0, 1.0), (4, 3))
    assert grid.values.shape == (3, 4)
    lam = grid.re[None, :] + 1j * grid.im[:, None]
    expected = np.minimum(np.abs(lam - 1.0), np.abs(lam - 2.0))
    assert grid.values == pytest.approx(expected, abs=1e-12)
    assert grid.sublevel(0.5).sum() == 2
    with pytest.raises(DomainError):
        pseudospectrum_grid(A, Window(0.0, 3.0, -1.0, 1.0), 1)


def test_normal_matrix_grid_is_distance_to_spectrum():
    T = assemble(LaurentSymbol.tridiagonal(1.0, 0.0, 1.0), 60)
    grid = pseudospectrum_grid(T, Window(-3.0, 3.0, -1.0, 1.0), 64, threads=2)
    spectrum = eigenvalues(T)
    lam = grid.re[None, :] + 1j * grid.im[:, None]
    distance = np.min(np.abs(lam[..., None] - spectrum[None, None, :]), axis=-1)
    assert np.max(np.abs(grid.values - distance)) <= 1e-8


def test_sublevel_sets_are_nested(hatano_nelson):
    grid = pseudospectrum_grid(assemble(hatano_nelson, 40), Window(-3.0, 3.0, -2.0, 2.0), 32)
    epsilons = [1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0]
    masks = [grid.sublevel(eps) for eps in epsilons]
    for inner, outer in zip(masks, masks[1:]):
        assert np.all(outer[inner])
    counts = [int(mask.sum()) for mask in masks]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]
    assert grid.sublevel(float(grid.values.max())).all()


def test_residual_norm():
    A = np.diag([1.0, 3.0])
    assert residual_norm(A, 1.0, [1.0, 0.0]) == 0.0
    assert residual_norm(A, 1.0, [0.5, 0.5]) == pytest.approx(1.0)
    assert residual_norm(A, 1.0, [0.6, 0.8], "two") == pytest.approx(1.6)
    with pytest.raises(DomainError):
        residual_norm(A, 1.0, [0.5, 0.5], "two")
    with pytest.raises(DomainError):
        residual_norm(A, 1.0, [1.0, 0.0], "max")
    with pytest.raises(DomainError):
        residual_norm(A, 1.0, [0.0, 0.0])


def test_epsilon_bound():
    expected = math.pi ** 2 / 6 * 1e-3 * 99 / (10 ** 0.2 - 1)
    assert epsilon_bound(10, 2.0) == pytest.approx(expected)
    assert epsilon_bound(10, 2.0) == pytest.approx(0.27843, abs=1e-5)
    with pytest.raises(DomainError):
        epsilon_bound(10, 1.0)
    with pytest.raises(DomainError):
        epsilon_bound(1, 2.0)


def test_pseudo_pair_of_banded_symbol(hatano_nelson):
    pair = pseudo_pair(hatano_nelson, 30, lam=0.0)
    assert pair.orientation == "direct"
    assert np.linalg.norm(pair.v_n, 1) == pytest.approx(1.0)
    # Only the last row misses a neighbour: 0.5 * 4^-14 / (4/3)
    assert pair.epsilon_n == pytest.approx(0.375 * 4.0 ** -14, rel=1e-4)
    assert math.isnan(pair.bound_n)
    assert pair.summary()["norm"] == "l1"


def test_pseudo_pair_uses_adjoint_for_growing_modes(hatano_nelson):
    pair = pseudo_pair(hatano_nelson.conjugate_transpose(), 30, lam=0.0, norm="two")
    assert pair.orientation == "adjoint"
    assert np.linalg.norm(pair.v_n) == pytest.approx(1.0)
    assert pair.epsilon_n < 1e-8


def test_pseudo_pair_errors(hatano_nelson):
    with pytest.raises(DomainError):
        pseudo_pair(hatano_nelson, 7, lam=0.0)
    with pytest.raises(DomainError):
        pseudo_pair(DecayLaw(kind=EXPONENTIAL), 20)
    with pytest.raises(DomainError):
        pseudo_pair(hatano_nelson, 20, lam=0.0, norm="three")
    with pytest.raises(DomainError):
        pseudo_pair(np.eye(20), 20)


def test_pseudo_pair_of_algebraic_law():
    law = DecayLaw(p=2.0, q=3.5, c_plus=1.0, c_minus=0.5)
    pair = pseudo_pair(law, 20, scan=32)
    assert pair.v_n.shape == (20,)
    assert {pair.p, pair.q} == {2.0, 3.5}
    assert pair.bound_n == pytest.approx(epsilon_bound(20, 2.0))
    assert np.isfinite(pair.epsilon_n)
    assert pair.lambda_n.imag == 0.0


@pytest.mark.slow
def test_pseudo_residual_shrinks_with_size():
    law = DecayLaw(p=2.0, q=3.5, c_plus=1.0, c_minus=0.5)
    series = pseudo_pair_series(law, [20, 40, 80, 160])
    epsilons = [pair.epsilon_n for pair in series]
    assert all(b < a for a, b in zip(epsilons, epsilons[1:]))


@pytest.mark.slow
def test_pseudo_residual_respects_bound():
    law = DecayLaw(p=5.0, q=5.0, c_plus=1.0, c_minus=0.5)
    for pair in pseudo_pair_series(law, [20, 40, 80]):
        assert pair.epsilon_n <= 2.0 * pair.bound_n
