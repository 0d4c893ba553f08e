import math

import numpy as np
import pytest

from toeplitz.exceptions import DomainError, OnCurveError
from toeplitz.grid import Window
from toeplitz.roots import band_roots, root_count_inside
from toeplitz.spectra import (
    ON_CURVE, OUTSIDE, WIND_NEGATIVE, WIND_POSITIVE, admissible_quasiperiodicities, classify_region,
    curve_distance, curve_winding, fredholm_index, hermitian_spectrum_interval, normalized_indicator,
    schmidt_spitzer_indicator, schmidt_spitzer_set, winding_grid, winding_number,
)
from toeplitz.symbol import LaurentSymbol


def test_winding_orientation(hatano_nelson):
    # Root count and curve traversal agree up to the clockwise orientation
    assert curve_winding(hatano_nelson, 0.0) == -1
    assert winding_number(hatano_nelson, 0.0) == 1
    assert fredholm_index(hatano_nelson, 0.0) == -1
    assert classify_region(hatano_nelson, 0.0).kind == WIND_POSITIVE


def test_winding_of_transposed_symbol(hatano_nelson):
    reversed_symbol = hatano_nelson.conjugate_transpose()
    assert winding_number(reversed_symbol, 0.0) == -1
    assert classify_region(reversed_symbol, 0.0).kind == WIND_NEGATIVE


def test_outside_and_on_curve(hatano_nelson):
    label = classify_region(hatano_nelson, 10.0)
    assert label.kind == OUTSIDE
    assert not label.in_spectrum
    assert curve_distance(hatano_nelson, 2.5) == pytest.approx(0.0, abs=1e-9)
    assert curve_distance(hatano_nelson, 3.0) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(OnCurveError):
        winding_number(hatano_nelson, 2.5)
    label = classify_region(hatano_nelson, 2.5)
    assert label.kind == ON_CURVE
    assert label.in_spectrum


def test_winding_consistency_on_random_symbols():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 200:
        m = int(rng.integers(1, 7))
        s = LaurentSymbol(m, rng.normal(size=2 * m + 1))
        lam = complex(rng.normal(scale=2.0), rng.normal(scale=2.0))
        if curve_distance(s, lam) <= 1e-3:
            continue
        winding = winding_number(s, lam)
        assert winding == -curve_winding(s, lam)
        inside = root_count_inside(band_roots(s, lam))
        assert (winding > 0) == (inside >= m + 1)
        checked += 1


def test_winding_grid_shape(hatano_nelson):
    labels = winding_grid(hatano_nelson, Window(-1.0, 1.0, -0.5, 0.5), 5, 3, threads=2)
    assert len(labels) == 3
    assert all(len(row) == 5 for row in labels)
    assert all(label.winding == 1 for row in labels for label in row)


def test_limit_set_indicator(hatano_nelson):
    assert schmidt_spitzer_indicator(hatano_nelson, 0.0).indicator == pytest.approx(0.0, abs=1e-12)
    # lambda = i: moduli (sqrt(5) + 1) / 4 and (sqrt(5) - 1) / 4
    values = normalized_indicator(hatano_nelson, [0.0, 1j, 0.5])
    assert values[0] == pytest.approx(0.0, abs=1e-12)
    assert values[1] == pytest.approx(1 / math.sqrt(5))
    assert values[2] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        schmidt_spitzer_indicator(LaurentSymbol(0, [1.0]), 0.0)


def test_limit_set_of_hatano_nelson(hatano_nelson):
    points = np.array(schmidt_spitzer_set(hatano_nelson, Window(-3.0, 3.0, -1.0, 1.0), 32))
    assert points.size
    assert np.all(np.abs(points.imag) < 1e-3)
    assert np.all(np.abs(points.real) <= 2.0 + 1e-3)
    assert np.any(np.abs(points.real) < 0.5)


@pytest.mark.slow
def test_limit_set_endpoints_at_high_resolution():
    g, h = 0.5, 2.0
    s = LaurentSymbol.from_coeffs({1: g, -1: h})
    points = np.array(schmidt_spitzer_set(s, Window(-3.0, 3.0, -1.0, 1.0), 512))
    edge = 2 * math.sqrt(g * h)
    assert points.real.min() == pytest.approx(-edge, abs=1e-3)
    assert points.real.max() == pytest.approx(edge, abs=1e-3)


def test_limit_set_of_hermitian_symbol_lies_in_its_spectrum():
    s = LaurentSymbol.from_coeffs({-2: 1.0, -1: 1.0, 0: 0.0, 1: 1.0, 2: 1.0})
    r, R = hermitian_spectrum_interval(s)
    assert r == pytest.approx(-2.25, abs=1e-6)
    assert R == pytest.approx(4.0, abs=1e-6)
    points = np.array(schmidt_spitzer_set(s, Window(-3.0, 5.0, -1.0, 1.0), 64))
    assert points.size
    assert np.all(points.real >= r - 1e-3)
    assert np.all(points.real <= R + 1e-3)


def test_hermitian_interval_requires_symmetry(hatano_nelson):
    assert hermitian_spectrum_interval(LaurentSymbol.tridiagonal(1.0, 0.0, 1.0)) == pytest.approx((-2.0, 2.0))
    assert hermitian_spectrum_interval(LaurentSymbol(0, [3.0])) == (3.0, 3.0)
    with pytest.raises(DomainError):
        hermitian_spectrum_interval(hatano_nelson)


def test_admissible_quasiperiodicities():
    # Im f(exp(i(alpha + i beta))) = -2 sin(alpha) sinh(beta): zero on beta = 0 and alpha = 0
    s = LaurentSymbol.tridiagonal(1.0, 0.0, 1.0)
    level = admissible_quasiperiodicities(s, (-3.0, 3.0), (-1.0, 1.0), 40)
    assert len(level) > 0
    points = level.points
    assert np.all(np.minimum(np.abs(points[:, 0]), np.abs(points[:, 1])) < 1e-2)
    on_real_line = points[np.abs(points[:, 1]) < 1e-2]
    assert on_real_line[:, 0].min() < -2.5
    assert on_real_line[:, 0].max() > 2.5
    with pytest.raises(DomainError):
        admissible_quasiperiodicities(LaurentSymbol.from_coeffs({1: 0.5, -1: 2.0}), (-1, 1), (-1, 1), 10)
