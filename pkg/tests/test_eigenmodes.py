import math

import numpy as np
import pytest

from toeplitz.eigenmodes import (
    band_structure_sweep, beta_of_bandwidth, bulk_eigenvector, cbs_complex_map, cbs_decay_prediction,
    fit_decay_rate, root_basis, truncation_decay_rates,
)
from toeplitz.exceptions import DomainError
from toeplitz.grid import Window
from toeplitz.matrices import assemble
from toeplitz.spectra import winding_number
from toeplitz.symbol import EXPONENTIAL, DecayLaw, LaurentSymbol, synthesize


def test_hatano_nelson_bulk_mode(hatano_nelson):
    mode = bulk_eigenvector(hatano_nelson, 0.0, 40)
    v = mode.values
    assert len(v) == 40
    assert v[0].real > 0 and abs(v[0].imag) < 1e-14
    # The first row forces every odd entry to vanish
    assert np.all(np.abs(v[1::2]) < 1e-12 * abs(v[0]))
    ratios = np.abs(v[2:20:2] / v[0:18:2])
    assert ratios == pytest.approx(np.full(9, 0.25), rel=1e-10)
    assert mode.null_vectors is None


@pytest.mark.parametrize("lam", [0.4 + 0.1j, -0.3, 1.2j])
def test_bulk_mode_satisfies_the_rows(lam):
    s = LaurentSymbol.from_coeffs({-2: 0.3, -1: 1.0, 0: 0.0, 1: 0.6, 2: 0.2})
    N = 20
    v = bulk_eigenvector(s, lam, N).values
    A = assemble(s, N).dense()
    residual = A @ v - lam * v
    # Only the last m rows see entries beyond N
    scale = np.max(np.abs(v)) * (1.0 + s.scale())
    assert np.all(np.abs(residual[:N - s.m]) <= 1e-8 * scale)


def test_constant_symbol_mode():
    s = LaurentSymbol(0, [2.0])
    mode = bulk_eigenvector(s, 2.0, 5)
    assert mode.degenerate
    assert mode.values[0] == 1.0
    with pytest.raises(DomainError):
        bulk_eigenvector(s, 1.0, 5)


def test_root_basis_handles_confluent_roots():
    basis = root_basis(np.array([0.5, 0.5, 0.0]), 6)
    k = np.arange(6)
    assert basis.shape == (6, 3)
    assert basis[:, 0] == pytest.approx(0.5 ** k)
    assert basis[:, 1] == pytest.approx(k * 0.5 ** k)
    assert basis[:, 2] == pytest.approx((k == 0).astype(float))


def test_decay_prediction(hatano_nelson):
    assert cbs_decay_prediction(hatano_nelson, 0.0) == pytest.approx(math.log(2), abs=1e-10)
    assert cbs_decay_prediction(hatano_nelson.conjugate_transpose(), 0.0) == pytest.approx(-math.log(2), abs=1e-10)


@pytest.mark.parametrize("g,h", [(0.5, 2.0), (1.0, 3.0), (0.2, 0.1)])
def test_decay_prediction_closed_form(g, h):
    # |z_1| = |z_2| = sqrt(g / h) at lambda = 0
    s = LaurentSymbol.from_coeffs({1: g, -1: h})
    assert cbs_decay_prediction(s, 0.0) == pytest.approx(-0.5 * math.log(g / h), abs=1e-10)


def test_fit_decay_rate():
    values = 0.5 ** np.arange(40)
    fit = fit_decay_rate(values)
    assert fit.beta == pytest.approx(math.log(2))
    assert fit.r_squared == pytest.approx(1.0)
    oscillating = values * np.cos(2 * np.pi * np.arange(40) / 6)
    fit = fit_decay_rate(oscillating, window=(5, 35), envelope=8)
    assert fit.beta == pytest.approx(math.log(2), rel=0.05)
    with pytest.raises(DomainError):
        fit_decay_rate(values, window=(0, 5))
    with pytest.raises(DomainError):
        fit_decay_rate(np.zeros(20))


def test_band_structure_sweep_shape(algebraic_law):
    s = synthesize(algebraic_law, 4)
    table = band_structure_sweep(s, np.linspace(-3, 3, 25), threads=2)
    assert table.shape == (25, 17)
    assert table[:, 0] == pytest.approx(np.linspace(-3, 3, 25))
    assert np.all(np.diff(table[:, 9:], axis=1) <= 1e-12)


def test_complex_map_matches_pointwise_prediction(hatano_nelson):
    window = Window(-1.0, 1.0, -1.0, 1.0)
    cmap = cbs_complex_map(hatano_nelson, window, 16)
    assert cmap.betas.shape == (16, 16)
    lam = cmap.re[3] + 1j * cmap.im[11]
    assert cmap.betas[11, 3] == pytest.approx(cbs_decay_prediction(hatano_nelson, lam), rel=1e-8)
    with pytest.raises(DomainError):
        cbs_complex_map(hatano_nelson, window, 8)


def test_beta_of_bandwidth_validation(algebraic_law):
    series = beta_of_bandwidth(algebraic_law, 0.0, [2, 4, 8])
    assert series.bandwidths == (2, 4, 8)
    assert len(series.betas) == 3
    with pytest.raises(DomainError):
        beta_of_bandwidth(algebraic_law, 0.0, [4, 2])
    with pytest.raises(DomainError):
        beta_of_bandwidth(DecayLaw(kind=EXPONENTIAL), 0.0, [2, 4])


@pytest.mark.slow
@pytest.mark.parametrize("p", [1.1, 1.6])
def test_beta_asymptotics(p):
    law = DecayLaw(p=p, q=p, c_plus=0.5, c_minus=1.0)
    ms = [20, 50, 100, 200]
    series = beta_of_bandwidth(law, 0.0, ms)
    for m, beta in zip(ms, series.betas):
        assert 0.2 <= beta * m / (p * math.log(m)) <= 5.0
    assert series.betas[-1] < series.betas[0]


@pytest.mark.slow
@pytest.mark.parametrize("m", [4, 6])
def test_truncation_decay_matches_band_structure(m):
    law = DecayLaw(p=1.8, q=1.8, c_plus=0.6, c_minus=1.0)
    modes = truncation_decay_rates(synthesize(law, m), 100, envelope=12)
    assert len(modes) == 100
    qualifying = [mode for mode in modes if mode.separation <= 0.9]
    resolved = [mode for mode in qualifying if mode.resolved]
    assert len(resolved) >= 0.75 * len(qualifying)
    span = 100 - 4 * m
    assert all(mode.period > span / 2 for mode in qualifying if not mode.resolved)
    for mode in resolved:
        error = abs(mode.fitted_beta - mode.predicted_beta) / abs(mode.predicted_beta)
        assert error <= 0.05, f"lambda={mode.eigenvalue:.4f} period={mode.period:.1f} error={error:.3f}"


def test_truncation_modes_flag_long_beat_periods(tridiagonal):
    # Eigenvalues 4 + 2cos(pi k / 41); the beat period is 41/k or 41/(41 - k)
    modes = truncation_decay_rates(tridiagonal, 40, envelope=4)
    span = 40 - 4
    unresolved = [mode for mode in modes if not mode.resolved]
    assert len(unresolved) == 4
    assert all(mode.period > span / 2 for mode in unresolved)
    assert all(mode.period <= span / 2 for mode in modes if mode.resolved)


@pytest.mark.parametrize("lam", [3.0, -3.0, 2.8j, 2.0 + 2.0j])
def test_winding_zero_modes_do_not_decay(hatano_nelson, lam):
    pentadiagonal = LaurentSymbol.from_coeffs({-2: 0.3, -1: 1.0, 0: 0.0, 1: 0.6, 2: 0.2})
    for s in (hatano_nelson, pentadiagonal):
        assert winding_number(s, lam) == 0
        N = 60
        mode = bulk_eigenvector(s, lam, N)
        fit = fit_decay_rate(mode.values, (2 * s.m, N - 2 * s.m), envelope=4)
        assert fit.beta <= 1e-3
