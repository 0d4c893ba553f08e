import math

import numpy as np
import pytest

from toeplitz.exceptions import ConfigError, DomainError
from toeplitz.symbol import (
    EXPONENTIAL, DecayLaw, LaurentSymbol, evaluate, law_from_json, law_to_json, parse_law,
    symbol_curve, symbol_from_json, symbol_to_json, synthesize, truncate, truncation_tail_bound,
)


def test_evaluate_hatano_nelson(hatano_nelson):
    # f(z) = 0.5 / z + 2 z
    assert evaluate(hatano_nelson, 1.0) == pytest.approx(2.5)
    assert evaluate(hatano_nelson, 1j) == pytest.approx(1.5j)
    assert evaluate(hatano_nelson, 2.0) == pytest.approx(4.25)


def test_evaluate_keeps_shape(hatano_nelson):
    z = np.exp(1j * np.linspace(0, 1, 12)).reshape(3, 4)
    values = evaluate(hatano_nelson, z)
    assert values.shape == (3, 4)
    assert values[1, 2] == pytest.approx(0.5 / z[1, 2] + 2 * z[1, 2])


def test_evaluate_rejects_origin(hatano_nelson):
    with pytest.raises(DomainError):
        evaluate(hatano_nelson, 0.0)


def test_symbol_curve_is_an_ellipse(hatano_nelson):
    samples = symbol_curve(hatano_nelson, 64)
    assert len(samples) == 64
    for sample in samples:
        expected = 2.5 * math.cos(sample.alpha) - 1.5j * math.sin(sample.alpha)
        assert sample.value == pytest.approx(expected)
    with pytest.raises(DomainError):
        symbol_curve(hatano_nelson, 4)


def test_symbol_validation():
    with pytest.raises(DomainError):
        LaurentSymbol(1, [1.0, 2.0])
    with pytest.raises(DomainError):
        LaurentSymbol(1, [1.0, 1j, 1.0])
    with pytest.raises(DomainError):
        LaurentSymbol(1, [1.0, np.nan, 1.0])
    assert LaurentSymbol(0, [3.0]).degenerate


def test_from_coeffs_fills_gaps():
    s = LaurentSymbol.from_coeffs({-2: 1.0, 1: 0.5})
    assert s.m == 2
    assert s.coefficient(-2) == 1.0
    assert s.coefficient(0) == 0.0
    assert s.coefficient(1) == 0.5
    assert s.coefficient(5) == 0.0


def test_conjugate_transpose_swaps_sides(hatano_nelson):
    t = hatano_nelson.conjugate_transpose()
    assert t.coefficient(1) == 2.0
    assert t.coefficient(-1) == 0.5
    assert not hatano_nelson.is_hermitian()
    assert LaurentSymbol.tridiagonal(1.0, 4.0, 1.0).is_hermitian()


def test_synthesize_and_truncate():
    law = DecayLaw(p=2.0, q=3.0, c_plus=1.0, c_minus=0.5, a0=1.5)
    s = synthesize(law, 4)
    assert s.coefficient(0) == 1.5
    assert s.coefficient(2) == pytest.approx(0.25)
    assert s.coefficient(-2) == pytest.approx(0.5 / 8)
    t = truncate(s, 2)
    assert t.m == 2
    assert t.as_dict() == {k: s.coefficient(k) for k in range(-2, 3)}
    with pytest.raises(DomainError):
        truncate(t, 3)
    with pytest.raises(DomainError):
        synthesize(law, 0)


def test_decay_law_validation_and_adjoint():
    with pytest.raises(DomainError):
        DecayLaw(p=1.0, q=2.0)
    with pytest.raises(DomainError):
        DecayLaw(kind="geometric")
    with pytest.raises(DomainError):
        DecayLaw(kind=EXPONENTIAL, rate=0.0)
    law = DecayLaw(p=1.5, q=2.5, c_plus=0.2, c_minus=0.7)
    adjoint = law.adjoint()
    assert (adjoint.p, adjoint.q, adjoint.c_plus, adjoint.c_minus) == (2.5, 1.5, 0.7, 0.2)
    assert law.scaled(2.0).coefficient(3) == pytest.approx(2 * law.coefficient(3))


def test_tail_bound_on_unit_circle_uses_hurwitz_zeta():
    law = DecayLaw(p=2.0, q=2.0)
    assert truncation_tail_bound(law, 1.0, 10) == pytest.approx(0.190333, abs=1e-6)


def test_tail_bound_inside_convergence_region():
    # sum_{j>=1} j^-2 2^-j = pi^2 / 12 - ln(2)^2 / 2
    law = DecayLaw(p=2.0, q=2.0, c_plus=1.0, c_minus=0.0)
    expected = math.pi ** 2 / 12 - math.log(2) ** 2 / 2
    assert truncation_tail_bound(law, 2.0, 0) == pytest.approx(expected, rel=1e-10)


def test_tail_bound_diverges_off_circle():
    law = DecayLaw(p=2.0, q=2.0)
    assert math.isinf(truncation_tail_bound(law, 2.0, 5))
    assert math.isinf(truncation_tail_bound(law, 0.5, 5))


def test_tail_bound_exponential():
    law = DecayLaw(kind=EXPONENTIAL, rate=1.0)
    rho = math.exp(-1.0)
    expected = 2 * rho ** 3 / (1 - rho)
    assert truncation_tail_bound(law, 1.0, 2) == pytest.approx(expected)


@pytest.mark.parametrize("m", [4, 16])
def test_truncation_error_respects_tail_bound(rng, m):
    law = DecayLaw(p=1.8, q=2.5, c_plus=0.6, c_minus=1.0, a0=0.3)
    wide = synthesize(law, 2000)
    narrow = synthesize(law, m)
    for theta in rng.uniform(0.0, 2.0 * math.pi, size=20):
        z = complex(math.cos(theta), math.sin(theta))
        error = abs(evaluate(wide, z) - evaluate(narrow, z))
        assert error <= truncation_tail_bound(law, z, m) * (1 + 1e-12) + 1e-12


def test_tail_bound_of_banded_symbol(hatano_nelson):
    assert truncation_tail_bound(hatano_nelson, 1.0, 1) == 0.0
    s = LaurentSymbol.from_coeffs({-2: 1.0, 2: 3.0})
    # |a_2| |z|^-2 + |a_-2| |z|^2 at |z| = 2
    assert truncation_tail_bound(s, 2.0, 1) == pytest.approx(3.0 / 4 + 4.0)
    with pytest.raises(DomainError):
        truncation_tail_bound(s, 0.0, 1)


def test_parse_law():
    law = parse_law("algebraic:p=1.8")
    assert (law.p, law.q) == (1.8, 1.8)
    law = parse_law("algebraic:p=2,q=3.5,c_minus=0.5")
    assert (law.p, law.q, law.c_minus) == (2.0, 3.5, 0.5)
    assert parse_law("exponential:rate=0.7").kind == EXPONENTIAL


@pytest.mark.parametrize("text", ["algebraic:p", "algebraic:p=x", "algebraic:s=2", "algebraic:p=0.5", "cubic:p=2"])
def test_parse_law_errors(text):
    with pytest.raises(ConfigError):
        parse_law(text)


def test_json_forms(hatano_nelson):
    assert symbol_from_json(symbol_to_json(hatano_nelson)) == hatano_nelson
    law = DecayLaw(p=1.5, q=2.0, c_minus=0.3)
    assert law_from_json(law_to_json(law)) == law
    with pytest.raises(ConfigError):
        symbol_from_json({"m": 1, "coeffs": {"0": 1.0}})
    with pytest.raises(ConfigError):
        law_from_json({"kind": "algebraic", "exponent": 2})
