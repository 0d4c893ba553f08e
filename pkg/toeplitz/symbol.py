"""
Laurent Symbols

This module represents the symbol f(z) = sum_k a_k z^{-k} of a Toeplitz
operator, either as a finite banded LaurentSymbol or through a DecayLaw that
generates coefficients for any bandwidth. It also provides evaluation on and
off the unit circle, truncation, and bounds for the discarded tail.

The unit circle is parametrized as z = exp(-i alpha) with alpha increasing.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy.special import zeta

from toeplitz.exceptions import ConfigError, DomainError

ALGEBRAIC = "algebraic"
EXPONENTIAL = "exponential"

# Relative size below which tail terms stop contributing
TAIL_REL_CUTOFF = 1e-16
_TAIL_CHUNK = 4096
_TAIL_MAX_TERMS = 50_000_000


@dataclass(frozen=True, eq=False)
class LaurentSymbol:
    """
    Finite Laurent polynomial of bandwidth m.

    Coefficients are stored densely: coeffs[k + m] = a_k for k in [-m, m],
    which is also the highest-first coefficient list of z^m f(z).

    Args:
        m (int): Bandwidth
        coeffs (np.ndarray): 2m+1 real coefficients a_{-m}..a_m
    """

    m: int
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = int(self.m)
        if m < 0:
            raise DomainError(f"Bandwidth must be nonnegative, got {m}")
        if np.iscomplexobj(self.coeffs):
            raise DomainError("Symbol coefficients must be real")
        coeffs = np.array(self.coeffs, dtype=float).reshape(-1)
        if coeffs.size != 2 * m + 1:
            raise DomainError(f"Expected {2 * m + 1} coefficients for m={m}, got {coeffs.size}")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("Symbol coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "coeffs", coeffs)
        if m == 0:
            logger.debug("Constant symbol (m=0) is degenerate")

    @classmethod
    def from_coeffs(cls, mapping):
        """Build from a {k: a_k} mapping; missing k inside the band are zero."""
        mapping = {int(k): float(v) for k, v in mapping.items()}
        m = max((abs(k) for k in mapping), default=0)
        coeffs = np.zeros(2 * m + 1)
        for k, v in mapping.items():
            coeffs[k + m] = v
        return cls(m, coeffs)

    @classmethod
    def tridiagonal(cls, sub, diag, sup):
        """Symbol with a_1 = sub (below the diagonal), a_0 = diag, a_{-1} = sup."""
        return cls(1, np.array([sup, diag, sub], dtype=float))

    @property
    def degenerate(self):
        return self.m == 0

    def coefficient(self, k):
        """a_k, zero outside the band."""
        k = int(k)
        if abs(k) > self.m:
            return 0.0
        return float(self.coeffs[k + self.m])

    def scale(self):
        """Sum of |a_k|, a bound for |f| on the unit circle."""
        return float(np.abs(self.coeffs).sum())

    def is_hermitian(self, tol=1e-12):
        return bool(np.all(np.abs(self.coeffs - self.coeffs[::-1]) <= tol * max(self.scale(), 1.0)))

    def conjugate_transpose(self):
        """Symbol of the transposed operator, a_k -> a_{-k}."""
        return LaurentSymbol(self.m, self.coeffs[::-1].copy())

    def as_dict(self):
        return {k: float(self.coeffs[k + self.m]) for k in range(-self.m, self.m + 1)}

    def __eq__(self, other):
        if not isinstance(other, LaurentSymbol):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.m, self.coeffs.tobytes()))


@dataclass(frozen=True)
class DecayLaw:
    """
    Generator of off-diagonal coefficients.

    Algebraic kind: a_k = c_plus k^{-p} (k > 0), a_k = c_minus |k|^{-q} (k < 0).
    Exponential kind: a_k = c_plus e^{-rate k} (k > 0), c_minus e^{-rate |k|} (k < 0).
    a_0 is given directly in both cases.
    """

    kind: str = ALGEBRAIC
    p: float = 2.0
    q: float = 2.0
    c_plus: float = 1.0
    c_minus: float = 1.0
    a0: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in (ALGEBRAIC, EXPONENTIAL):
            raise DomainError(f"Unknown decay law kind: {self.kind}")
        values = (self.p, self.q, self.c_plus, self.c_minus, self.a0, self.rate)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("Decay law parameters must be finite")
        if self.kind == ALGEBRAIC:
            if self.p <= 1 or self.q <= 1:
                raise DomainError(f"Algebraic decay needs p, q > 1, got p={self.p}, q={self.q}")
            if self.p > self.q:
                logger.warning(f"Decay law has p={self.p} > q={self.q}; the usual convention is p <= q")
        elif self.rate <= 0:
            raise DomainError(f"Exponential decay needs rate > 0, got {self.rate}")

    def coefficients(self, ks):
        """Vectorized a_k for an integer array ks."""
        ks = np.asarray(ks, dtype=float)
        out = np.full(ks.shape, float(self.a0))
        pos = ks > 0
        neg = ks < 0
        if self.kind == ALGEBRAIC:
            out[pos] = self.c_plus * ks[pos] ** (-self.p)
            out[neg] = self.c_minus * (-ks[neg]) ** (-self.q)
        else:
            out[pos] = self.c_plus * np.exp(-self.rate * ks[pos])
            out[neg] = self.c_minus * np.exp(self.rate * ks[neg])
        return out

    def coefficient(self, k):
        return float(self.coefficients(np.array([k]))[0])

    def adjoint(self):
        """Law of the transposed operator (sides exchanged)."""
        return DecayLaw(
            kind=self.kind, p=self.q, q=self.p, c_plus=self.c_minus,
            c_minus=self.c_plus, a0=self.a0, rate=self.rate,
        )

    def scaled(self, factor):
        """Law with every coefficient multiplied by factor."""
        return DecayLaw(
            kind=self.kind, p=self.p, q=self.q, c_plus=self.c_plus * factor,
            c_minus=self.c_minus * factor, a0=self.a0 * factor, rate=self.rate,
        )


@dataclass(frozen=True)
class UnitCircleSample:
    """Symbol value at z = exp(-i alpha)."""

    alpha: float
    value: complex


def evaluate(s, z):
    """
    Evaluate f(z) = sum_{k=-m}^{m} a_k z^{-k}.

    Args:
        s (LaurentSymbol): The symbol
        z (complex | array): Evaluation point(s), nonzero

    Returns:
        complex | np.ndarray: f(z) with the shape of z
    """
    scalar = np.isscalar(z)
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise DomainError(f"Symbol has a pole of order {s.m} at z = 0")
    m = s.m
    # Horner in 1/z for k >= 0 and in z for k < 0 avoids overflow of z^m
    with np.errstate(over="ignore", invalid="ignore"):
        result = np.polyval(s.coeffs[m:][::-1], 1.0 / z)
        if m:
            result = result + np.polyval(np.append(s.coeffs[:m], 0.0), z)
    return complex(result) if scalar else result


def synthesize(law, m):
    """Banded symbol of bandwidth m with coefficients generated by law."""
    if int(m) < 1:
        raise DomainError(f"synthesize needs m >= 1, got {m}")
    m = int(m)
    return LaurentSymbol(m, law.coefficients(np.arange(-m, m + 1)))


def truncate(s, m_new):
    """Drop coefficients outside [-m_new, m_new]; kept values are unchanged."""
    m_new = int(m_new)
    if m_new < 1:
        raise DomainError(f"Truncation bandwidth must be >= 1, got {m_new}")
    if m_new > s.m:
        raise DomainError(f"Cannot extend a bandwidth-{s.m} symbol to {m_new}")
    offset = s.m - m_new
    return LaurentSymbol(m_new, s.coeffs[offset:offset + 2 * m_new + 1].copy())


def curve_values(s, n_samples):
    """Arrays (alphas, values) of the symbol curve with z = exp(-i alpha)."""
    alphas = 2.0 * np.pi * np.arange(n_samples) / n_samples
    return alphas, evaluate(s, np.exp(-1j * alphas))


def symbol_curve(s, n_samples):
    """
    Sample the symbol curve f(T) at alpha_j = 2 pi j / n_samples.

    Returns:
        list[UnitCircleSample]: Samples ordered by increasing alpha
    """
    if n_samples < 8:
        raise DomainError(f"symbol_curve needs at least 8 samples, got {n_samples}")
    alphas, values = curve_values(s, n_samples)
    return [UnitCircleSample(float(a), complex(v)) for a, v in zip(alphas, values)]


def _algebraic_side_tail(amp, exponent, r, m):
    """sum_{j>m} |amp| j^{-exponent} r^j."""
    if r > 1.0 + 1e-12:
        return math.inf
    if abs(r - 1.0) <= 1e-12:
        return abs(amp) * float(zeta(exponent, m + 1))
    total = 0.0
    start = m + 1
    log_r = math.log(r)
    while start - m <= _TAIL_MAX_TERMS:
        js = np.arange(start, start + _TAIL_CHUNK, dtype=float)
        terms = np.exp(-exponent * np.log(js) + js * log_r)
        total += float(terms.sum())
        if terms[-1] < TAIL_REL_CUTOFF * total or total == 0.0:
            break
        start += _TAIL_CHUNK
    last = start + _TAIL_CHUNK - 1
    # Geometric remainder past the last summed index
    remainder = math.exp(-exponent * math.log(last) + (last + 1) * log_r) / (1.0 - r)
    return abs(amp) * (total + remainder)


def _exponential_side_tail(amp, rate, r, m):
    rho = r * math.exp(-rate)
    if rho >= 1.0:
        return math.inf
    return abs(amp) * rho ** (m + 1) / (1.0 - rho)


def truncation_tail_bound(law, z, m):
    """
    Upper bound for |sum_{j>m} (a_j z^{-j} + a_{-j} z^j)|.

    Args:
        law (DecayLaw | LaurentSymbol): Coefficient source; a banded symbol has
            a finite tail
        z (complex): Nonzero evaluation point
        m (int): Truncation bandwidth

    Returns:
        float: The bound, or math.inf when the tail diverges at |z|
    """
    if z == 0:
        raise DomainError("truncation_tail_bound needs z != 0")
    m = int(m)
    modulus = abs(z)
    if isinstance(law, LaurentSymbol):
        if m >= law.m:
            return 0.0
        ks = np.arange(m + 1, law.m + 1)
        pos = np.abs(law.coeffs[law.m + ks]) * modulus ** (-ks.astype(float))
        neg = np.abs(law.coeffs[law.m - ks]) * modulus ** ks.astype(float)
        return float(pos.sum() + neg.sum())

    sides = ((law.c_plus, law.p, 1.0 / modulus), (law.c_minus, law.q, modulus))
    total = 0.0
    for amp, exponent, r in sides:
        if amp == 0:
            continue
        if law.kind == ALGEBRAIC:
            total += _algebraic_side_tail(amp, exponent, r, m)
        else:
            total += _exponential_side_tail(amp, law.rate, r, m)
    return total


def symbol_to_json(s):
    return {"m": s.m, "coeffs": {str(k): v for k, v in s.as_dict().items()}}


def symbol_from_json(payload):
    if isinstance(payload, str):
        payload = json.loads(payload)
    try:
        m = int(payload["m"])
        mapping = {int(k): float(v) for k, v in payload["coeffs"].items()}
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Invalid symbol JSON: {e}")
    if any(abs(k) > m for k in mapping) or len(mapping) != 2 * m + 1:
        raise ConfigError(f"Symbol JSON must define coefficients exactly on [-{m}, {m}]")
    coeffs = np.array([mapping[k] for k in range(-m, m + 1)])
    return LaurentSymbol(m, coeffs)


def law_to_json(law):
    payload = {
        "kind": law.kind, "p": law.p, "q": law.q,
        "c_plus": law.c_plus, "c_minus": law.c_minus, "a0": law.a0,
    }
    if law.kind == EXPONENTIAL:
        payload["rate"] = law.rate
    return payload


def law_from_json(payload):
    if isinstance(payload, str):
        payload = json.loads(payload)
    try:
        return DecayLaw(**{k: (v if k == "kind" else float(v)) for k, v in payload.items()})
    except TypeError as e:
        raise ConfigError(f"Invalid decay law JSON: {e}")


def parse_law(text):
    """
    Parse the compact law form used on the command line.

    Examples: "algebraic:p=1.8", "algebraic:p=2,q=3.5,c_minus=0.5",
    "exponential:rate=0.7,c_plus=1". q defaults to p.
    """
    kind, _, rest = str(text).partition(":")
    kind = kind.strip() or ALGEBRAIC
    params = {}
    for item in filter(None, (part.strip() for part in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"Malformed law parameter {item!r} in {text!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"Law parameter {key!r} is not a number: {value!r}")
    unknown = set(params) - {"p", "q", "c_plus", "c_minus", "a0", "rate"}
    if unknown:
        raise ConfigError(f"Unknown law parameters: {sorted(unknown)}")
    if "p" in params and "q" not in params:
        params["q"] = params["p"]
    try:
        return DecayLaw(kind=kind, **params)
    except DomainError as e:
        raise ConfigError(str(e))
