"""Special functions backing the analytic solution machinery.

Whittaker W on two rays of the complex plane, Kummer's M series, the
prefactor-free imaginary error function, physicists' Hermite polynomials
and the principal-branch log-Gamma.

Everything here is a pure function of its arguments.  Whittaker values are
computed in mpmath working precision sized to the argument, because the
connection formula cancels like e^z on the positive ray, then rounded to a
Python complex on return.  The rotated ray (argument e^{i pi} * z) is kept
symbolic through the `Ray` enum so that fractional powers never see a
floating-point branch ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath as mp

from .errors import (
    ConvergenceError,
    DomainError,
    OverflowRangeError,
    PoleError,
    ValidationError,
)

__all__ = [
    "Ray",
    "RayArgument",
    "WhittakerIndex",
    "ln_gamma",
    "kummer_m",
    "whittaker_w",
    "whittaker_asymptotic",
    "erfi",
    "hermite_poly",
]

SERIES_CUTOFF = 1e-17       # relative term cutoff of the public Kummer series
SERIES_CAP = 10_000         # hard term cap before declaring non-convergence
SERIES_MAX_ABS_Z = 50.0     # series regime boundary for the public kummer_m
ASYM_CROSSOVER = 30.0       # |z| above which whittaker_w goes asymptotic
ASYM_MIN_Z = 10.0           # validity floor of the leading-order form
ERFI_MAX_ARG = 20.0         # erfi exceeds double range beyond this
HERMITE_MAX_DEGREE = 50


class Ray(Enum):
    """Ray of the complex plane carrying a Whittaker argument."""

    POSITIVE = "positive"
    ROTATED = "rotated"     # e^{i pi} times the magnitude


@dataclass(frozen=True)
class RayArgument:
    """Nonnegative magnitude plus the ray it sits on."""

    magnitude: float
    ray: Ray = Ray.POSITIVE

    def __post_init__(self):
        if not self.magnitude >= 0.0:
            raise ValidationError(f"magnitude must be >= 0, got {self.magnitude}")

    @classmethod
    def positive(cls, magnitude):
        return cls(float(magnitude), Ray.POSITIVE)

    @classmethod
    def rotated(cls, magnitude):
        return cls(float(magnitude), Ray.ROTATED)


@dataclass(frozen=True)
class WhittakerIndex:
    """Index pair (kappa, mu); 2*mu must not be an integer."""

    kappa: float
    mu: float = 0.25

    def __post_init__(self):
        two_mu = 2.0 * self.mu
        if abs(two_mu - round(two_mu)) < 1e-12:
            raise ValidationError(
                f"2*mu = {two_mu} is an integer; the connection-formula path needs 2*mu non-integral"
            )


def _is_nonpositive_integer(z: complex) -> bool:
    z = complex(z)
    return (
        abs(z.imag) < 1e-12
        and z.real < 0.5
        and abs(z.real - round(z.real)) < 1e-12
    )


def ln_gamma(z: complex) -> complex:
    """Principal-branch log-Gamma.

    Raises PoleError at the poles (nonpositive integers).
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log-Gamma pole at z = {z}")
    with mp.workdps(25):
        return complex(mp.loggamma(z))


def _kummer_series(a, b, z, cutoff):
    """Sum M(a, b, z) by the term recurrence at the current precision.

    Terms are compared against the running partial sum only once n exceeds
    |z|, so an early near-zero partial sum cannot stop the loop.
    """
    total = mp.mpc(1)
    term = mp.mpc(1)
    abs_z = abs(z)
    for n in range(SERIES_CAP):
        term = term * (a + n) / (b + n) * z / (n + 1)
        total += term
        if term == 0 or (n + 1 > abs_z and abs(term) < cutoff * abs(total)):
            return total
    raise ConvergenceError(
        f"Kummer series failed to converge within {SERIES_CAP} terms (a={a}, b={b}, z={z})"
    )


def _series_dps(abs_z: float) -> int:
    # alternating series and the W connection formula both cancel like e^|z|
    return max(25, 18 + int(0.6 * abs_z))


def kummer_m(a: complex, b: complex, z: complex) -> complex:
    """Confluent hypergeometric M(a, b, z) by direct series summation.

    Summed until a term falls below 1e-17 of the partial sum, with a hard
    cap of 10 000 terms.  Only the series regime |z| <= 50 is supported.
    """
    if _is_nonpositive_integer(b):
        raise PoleError(f"M(a, b, z) has poles at nonpositive integer b; got b = {b}")
    if abs(z) > SERIES_MAX_ABS_Z:
        raise DomainError(f"|z| = {abs(z)} outside the series regime |z| <= {SERIES_MAX_ABS_Z}")
    with mp.workdps(_series_dps(abs(z))):
        value = _kummer_series(mp.mpmathify(a), mp.mpmathify(b), mp.mpmathify(z), mp.mpf(SERIES_CUTOFF))
    return complex(value)


def _whittaker_series_mp(kappa, mu, magnitude, ray):
    """Connection-formula evaluation of W_{kappa,mu}; returns an mpc.

    W = Gamma(-2 mu)/Gamma(1/2 - mu - kappa) * M_{kappa,mu}
      + Gamma(2 mu)/Gamma(1/2 + mu - kappa) * M_{kappa,-mu},
    with M_{kappa,mu}(z) = e^{-z/2} z^{1/2+mu} M(1/2+mu-kappa, 1+2mu, z),
    valid because 2 mu is non-integral.  On the rotated ray the power
    z^{1/2+mu} carries the phase e^{i pi (1/2+mu)} and the series argument
    is -magnitude.  The internal series cutoff tracks working precision:
    the two branches cancel like e^z, so a fixed 1e-17 cutoff would leak
    into the result.
    """
    dps = max(30, 20 + int(0.6 * magnitude))
    with mp.workdps(dps):
        cutoff = mp.mpf(10) ** (-(dps - 3))
        kap = mp.mpf(kappa)
        muu = mp.mpf(mu)
        mag = mp.mpf(magnitude)
        z = -mag if ray is Ray.ROTATED else mag
        half = mp.mpf("0.5")
        out = mp.mpc(0)
        for m_sign in (+1, -1):
            ms = m_sign * muu
            coef = mp.gamma(-2 * ms) * mp.rgamma(half - ms - kap)
            if coef == 0:
                continue
            power = mag ** (half + ms)
            if ray is Ray.ROTATED:
                power *= mp.exp(1j * mp.pi * (half + ms))
            series = _kummer_series(half + ms - kap, 1 + 2 * ms, z, cutoff)
            out += coef * mp.exp(-z / 2) * power * series
        return out


def _whittaker_asym_mp(kappa, mu, magnitude, ray, min_terms=3, max_terms=60):
    """Large-argument expansion e^{-z/2} z^kappa (1 + sum_s a_s / z^s).

    Adds at least the first three corrections, then keeps going until the
    terms stop shrinking (optimal truncation) or become negligible.
    """
    with mp.workdps(35):
        kap = mp.mpf(kappa)
        muu = mp.mpf(mu)
        mag = mp.mpf(magnitude)
        z = mp.mpc(-mag) if ray is Ray.ROTATED else mp.mpc(mag)
        power = mag ** kap
        if ray is Ray.ROTATED:
            power *= mp.exp(1j * mp.pi * kap)
        total = mp.mpc(1)
        term = mp.mpc(1)
        prev = None
        for s in range(1, max_terms + 1):
            term = term * (muu**2 - (kap - s + mp.mpf("0.5")) ** 2) / (s * z)
            if s > min_terms and prev is not None and abs(term) > prev:
                break
            total += term
            prev = abs(term)
            if abs(term) < mp.mpf("1e-25") * abs(total):
                break
        return mp.exp(-z / 2) * power * total


def _as_finite_complex(value) -> complex:
    out = complex(value)
    if not (math.isfinite(out.real) and math.isfinite(out.imag)):
        raise OverflowRangeError("Whittaker value exceeds double range")
    return out


def whittaker_w(idx: WhittakerIndex, z: RayArgument) -> complex:
    """Whittaker W_{kappa,mu} at magnitude * e^{0 or i pi}.

    Uses the M-series connection formula up to magnitude 30 and the
    corrected asymptotic expansion beyond.  magnitude = 0 is rejected;
    callers handle the small-argument limit themselves.
    """
    if z.magnitude <= 0.0:
        raise DomainError("whittaker_w needs magnitude > 0 (use the small-t limit path)")
    if z.magnitude > ASYM_CROSSOVER:
        value = _whittaker_asym_mp(idx.kappa, idx.mu, z.magnitude, z.ray)
    else:
        value = _whittaker_series_mp(idx.kappa, idx.mu, z.magnitude, z.ray)
    return _as_finite_complex(value)


def whittaker_asymptotic(idx: WhittakerIndex, z: RayArgument) -> complex:
    """Leading-order large-argument form e^{-z/2} z^kappa, branch per ray."""
    if z.magnitude < ASYM_MIN_Z:
        raise DomainError(f"asymptotic form needs magnitude >= {ASYM_MIN_Z}, got {z.magnitude}")
    mag = z.magnitude
    log_modulus = (0.5 * mag if z.ray is Ray.ROTATED else -0.5 * mag) + idx.kappa * math.log(mag)
    if log_modulus > 709.0:
        raise OverflowRangeError("asymptotic Whittaker value exceeds double range")
    modulus = math.exp(log_modulus)
    if z.ray is Ray.ROTATED:
        phase = math.pi * idx.kappa
        return complex(modulus * math.cos(phase), modulus * math.sin(phase))
    return complex(modulus, 0.0)


def _erfi_series_float(x: float) -> float:
    # integral_0^x e^{s^2} ds = sum_n x^(2n+1) / (n! (2n+1)); all terms positive
    xx = x * x
    power = x          # x^(2n+1) / n!
    total = x
    n = 1
    while True:
        power *= xx / n
        term = power / (2 * n + 1)
        total += term
        if term <= 1e-17 * total:
            return total
        n += 1


def _erfi_series_mp(x):
    """Same series in mpmath arithmetic at the caller's precision."""
    xx = x * x
    power = x
    total = x
    eps = mp.mpf(10) ** (-(mp.mp.dps + 2))
    n = 1
    while True:
        power *= xx / n
        term = power / (2 * n + 1)
        total += term
        if term <= eps * total:
            return total
        n += 1


def erfi(x: float) -> float:
    """Imaginary error function without the 2/sqrt(pi) prefactor.

    erfi(x) = integral_0^x exp(s^2) ds; odd in x.  |x| <= 20, beyond which
    the value exceeds double range.
    """
    x = float(x)
    if abs(x) > ERFI_MAX_ARG:
        raise OverflowRangeError(f"erfi({x}) exceeds double range (|x| <= {ERFI_MAX_ARG})")
    if x == 0.0:
        return 0.0
    value = _erfi_series_float(abs(x))
    return value if x > 0 else -value


def hermite_poly(n: int, x: float) -> float:
    """Physicists' Hermite polynomial H_n(x) by the three-term recurrence."""
    if n < 0 or n != int(n):
        raise DomainError(f"degree must be a nonnegative integer, got {n}")
    if n > HERMITE_MAX_DEGREE:
        raise DomainError(f"degree {n} above supported maximum {HERMITE_MAX_DEGREE}")
    h_prev = 1.0
    if n == 0:
        return h_prev
    h_cur = 2.0 * x
    for k in range(1, n):
        h_prev, h_cur = h_cur, 2.0 * x * h_cur - 2.0 * k * h_prev
    return h_cur
