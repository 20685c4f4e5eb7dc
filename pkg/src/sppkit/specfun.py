"""Scalar special functions used throughout sppkit.

Everything here is a pure function of its arguments.  Gamma and its
reciprocal are backed by the C library (``math.gamma`` / ``math.lgamma``);
the Laguerre recurrence, the Bessel series, the sinc-phase coefficients and
the Laguerre coupling kernel are implemented directly.

Two small helpers, :func:`gamma_lead` and :func:`falling_lead`, return the
leading Laurent term ``(coefficient, order)`` of Gamma and of a falling
product whose argument is shifted by ``slope * eps``.  The ladder-operator
engine multiplies these to cancel Gamma poles against vanishing binomials
exactly instead of producing ``0 * inf``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import GammaOverflowError, GammaPoleError, InvalidParameterError

POLE_TOL = 1e-12


def is_pole(x: float) -> bool:
    """True when ``x`` is a non-positive integer to within ``POLE_TOL``."""
    return x <= POLE_TOL and abs(x - round(x)) < POLE_TOL


def gamma(x: float) -> float:
    """Gamma function on the real line.

    Raises
    ------
    GammaPoleError
        At ``x`` in {0, -1, -2, ...}.
    GammaOverflowError
        When the result is too large for a double.
    """
    if is_pole(x):
        raise GammaPoleError(f"Gamma has a pole at {x!r}")
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise GammaOverflowError(f"Gamma({x!r}) overflows") from exc


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x), entire: exactly 0 at the poles of Gamma."""
    if is_pole(x):
        return 0.0
    if x > 0.0:
        if x < 170.0:
            return 1.0 / math.gamma(x)
        return math.exp(-math.lgamma(x))
    # reflection: 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi, with sin(pi x)
    # taken from the exact offset to the nearest integer
    n = round(x)
    s = math.sin(math.pi * (x - n)) / math.pi
    if n % 2:
        s = -s
    if 1.0 - x < 170.0:
        return math.gamma(1.0 - x) * s
    return math.copysign(math.exp(math.lgamma(1.0 - x) + math.log(abs(s))), s)


def pochhammer_falling(r: float, h: int) -> float:
    """Falling product r (r-1) ... (r-h+1) as an explicit product."""
    if h < 0:
        raise InvalidParameterError("falling product needs h >= 0")
    out = 1.0
    for j in range(h):
        out *= r - j
    return out


def pochhammer_rising(a: float, n: int) -> float:
    out = 1.0
    for j in range(n):
        out *= a + j
    return out


def gen_binomial(r: float, h: int) -> float:
    """Generalised binomial coefficient binom(r, h) for real ``r``."""
    if h < 0:
        raise InvalidParameterError("binomial needs h >= 0")
    out = 1.0
    for j in range(h):
        out *= (r - j) / (j + 1)
    return out


def sinc_phase(q: float, k: int) -> complex:
    """Azimuthal Fourier coefficient of e^{i q phi} on [0, 2 pi) at harmonic k.

    Equals e^{i(q-k)pi} sin((q-k)pi) / ((q-k)pi), with the removable
    singularity filled in: 1 at q == k and exactly 0 at any other integer
    offset.
    """
    d = q - k
    if d == 0.0:
        return 1.0 + 0.0j
    if d == round(d):
        return 0.0j
    return complex(np.exp(1j * math.pi * d)) * (math.sin(math.pi * d) / (math.pi * d))


def laguerre(p: int, alpha: float, x):
    """Associated Laguerre polynomial L_p^(alpha)(x) by upward recurrence.

    ``x`` may be a scalar or an array.
    """
    if p < 0:
        raise InvalidParameterError("Laguerre degree must be >= 0")
    x = np.asarray(x, dtype=float) if not np.isscalar(x) else float(x)
    prev = np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    if p == 0:
        return prev
    cur = 1.0 + alpha - x
    for n in range(1, p):
        prev, cur = cur, ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
    return cur


def bessel_i(l: int, x, rtol: float = 1e-15):
    """Modified Bessel function I_l(x) of integer order by its power series.

    Summation stops once every new term is below ``rtol`` times the partial
    sum.  I_{-l} = I_l.
    """
    n = abs(int(l))
    half = 0.5 * np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        # leading term (x/2)^n / n!, in logs so large n does not overflow
        scaled = np.sign(half) ** n * np.exp(n * np.log(np.abs(half)) - math.lgamma(n + 1))
    term = np.where(half == 0.0, 1.0 if n == 0 else 0.0, scaled)
    total = np.array(term, dtype=float)
    quarter = half * half
    m = 0
    while True:
        m += 1
        term = term * quarter / (m * (m + n))
        total = total + term
        if np.all(np.abs(term) <= rtol * np.abs(total)) or m > 10_000:
            break
    return float(total) if total.ndim == 0 else total


def appell_f2_unit(a: float, p: int, h: int, c1: float, c2: float) -> float:
    """Terminating Appell F2(a; -p, -h; c1, c2; 1, 1).

    The double sum is evaluated in exact rational arithmetic on the binary
    values of the arguments, so no cancellation is lost even though the
    terms alternate and grow quickly with p and h.
    """
    if p < 0 or h < 0:
        raise InvalidParameterError("p and h must be non-negative")
    for c, top in ((c1, p), (c2, h)):
        if top > 0 and c <= 0 and c == round(c) and -c < top:
            raise InvalidParameterError(f"lower parameter {c} hits zero inside the sum")
    fa, fc1, fc2 = Fraction(a), Fraction(c1), Fraction(c2)

    # row[r] = (-p)_r / ((c1)_r r!)
    row = [Fraction(1)]
    for r in range(p):
        row.append(row[-1] * (r - p) / ((fc1 + r) * (r + 1)))
    col = [Fraction(1)]
    for s in range(h):
        col.append(col[-1] * (s - h) / ((fc2 + s) * (s + 1)))
    rising = [Fraction(1)]
    for n in range(p + h):
        rising.append(rising[-1] * (fa + n))

    total = Fraction(0)
    for r in range(p + 1):
        for s in range(h + 1):
            total += rising[r + s] * row[r] * col[s]
    return float(total)


def coupling_kernel(p: int, h: int, l: int, k: int, form: str = "binomial") -> float:
    """Laguerre coupling integral.

    I = int_0^inf e^{-x} x^{(|l|+|k|)/2} L_p^{(|l|)}(x) L_h^{(|k|)}(x) dx

    ``form="binomial"`` uses the single finite sum

        (-1)^{p+h} Gamma(s+1) sum_r binom(d, p-r) binom(-d, h-r) binom(s+r, r)

    with s = (|l|+|k|)/2, d = (|k|-|l|)/2, whose terms share a sign for all
    but a few leading r.  ``form="appell"`` goes through
    Gamma(s+1) (|l|+1)_p (|k|+1)_h / (p! h!) F2(s+1; -p, -h; |l|+1, |k|+1; 1, 1).
    """
    a, b = abs(l), abs(k)
    s = 0.5 * (a + b)
    if form == "appell":
        pref = gamma(s + 1.0) * pochhammer_rising(a + 1, p) * pochhammer_rising(b + 1, h)
        pref /= math.factorial(p) * math.factorial(h)
        return pref * appell_f2_unit(s + 1.0, p, h, a + 1.0, b + 1.0)
    if form != "binomial":
        raise InvalidParameterError(f"unknown kernel form {form!r}")
    d = 0.5 * (b - a)
    terms = [
        gen_binomial(d, p - r) * gen_binomial(-d, h - r) * gen_binomial(s + r, r)
        for r in range(min(p, h) + 1)
    ]
    sign = -1.0 if (p + h) % 2 else 1.0
    return sign * gamma(s + 1.0) * math.fsum(terms)


def gamma_lead(x: float, slope: float = 1.0) -> tuple[float, int]:
    """Leading Laurent term of Gamma(x + slope*eps) as eps -> 0.

    Returns ``(c, 0)`` with c = Gamma(x) away from poles, and at x = -N
    the residue form ``((-1)^N / (N! slope), -1)``.
    """
    if is_pole(x):
        n = -int(round(x))
        return (-1.0) ** n / (math.factorial(n) * slope), -1
    return math.gamma(x), 0


def falling_lead(r: float, h: int, slope: float = 1.0) -> tuple[float, int]:
    """Leading Laurent term of the falling product (r + slope*eps)_h."""
    c, order = 1.0, 0
    for j in range(h):
        f = r - j
        if abs(f) < POLE_TOL:
            c *= slope
            order += 1
        else:
            c *= f
    return c, order


def binomial_lead(r: float, h: int, slope: float = 1.0) -> tuple[float, int]:
    c, order = falling_lead(r, h, slope)
    return c / math.factorial(h), order
