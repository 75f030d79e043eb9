"""Gamma utilities and the two-parameter Mittag-Leffler function.

``E_{a,b}(z) = sum_k z**k / Gamma(a*k + b)`` is evaluated by one of two routes:

* the Taylor series, summed in double precision with Kahan compensation while
  cancellation is mild and re-summed with mpmath at raised precision otherwise;
* the algebraic asymptotic expansion ``-sum_k z**-k / Gamma(b - a*k)``, valid for
  large ``|z|`` in the sector ``3*pi*a/4 <= |arg z| <= pi``.

Only the sector and parameter ranges needed by the rough Heston model are covered.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .errors import AccuracyError, DegenerateError, DomainError, SectorError

SWITCH_RADIUS = 40.0
Z_MAX = 1e8

# Taylor termination: this many consecutive negligible terms.
_TAIL_RUN = 30
_TAYLOR_MAX_TERMS = 20000
# Largest tolerated ratio (peak term / |sum|) before the double sum is abandoned.
_MAX_DOUBLE_LOSS = 1e3
_ASYMPTOTIC_MAX_TERMS = 80


@dataclass(frozen=True)
class MittagLefflerParams:
    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha={self.alpha} must lie in (0, 1]")
        if not self.beta > 0.0:
            raise DomainError(f"beta={self.beta} must be positive")


def reciprocal_gamma(x: float) -> float:
    """Return ``1/Gamma(x)``, exactly 0 at the poles ``x = 0, -1, -2, ...``."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        return 0.0
    if x < 0.5:
        # reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi, with the sine
        # reduced around the nearest integer to keep it accurate near poles
        n = round(x)
        s = math.sin(math.pi * (x - n)) * (-1.0 if n % 2 else 1.0)
        try:
            return s * math.gamma(1.0 - x) / math.pi
        except OverflowError:
            return math.copysign(math.inf, s)
    if x > 171.0:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def gamma_ratio(num: float, den: float) -> float:
    """``Gamma(num) / Gamma(den)`` computed as ``rgamma(den) / rgamma(num)``.

    Raises ``DegenerateError`` when ``num`` sits on a pole of Gamma.
    """
    rn = reciprocal_gamma(num)
    if rn == 0.0:
        raise DegenerateError(f"Gamma({num}) is infinite")
    return reciprocal_gamma(den) / rn


def switch_radius(alpha: float) -> float:
    """Series/asymptotic switch radius for order ``alpha``.

    Below 40 when alpha < 1: at ``|z| = 46**alpha`` the exponentially small
    remainder ``exp(cos(3pi/4) |z|**(1/alpha))`` is already below 1e-14, and a
    smaller radius keeps the extended-precision Taylor sum cheap.
    """
    return min(SWITCH_RADIUS, 46.0**alpha)


def in_sector(alpha: float, z: complex) -> bool:
    return abs(cmath.phase(z)) >= 0.75 * math.pi * alpha - 1e-12


def _log_peak(alpha: float, beta: float, r: float) -> float:
    """log of max_k r**k / Gamma(alpha k + beta), located by a coarse search."""
    if r <= 1.0:
        return -math.lgamma(beta) if beta < 3 else 0.0
    kpeak = r ** (1.0 / alpha) / alpha
    ks = np.unique(np.clip(np.round(np.linspace(0.0, 2.0 * kpeak + 2.0, 400)), 0, None))
    vals = [k * math.log(r) - math.lgamma(alpha * k + beta) for k in ks]
    return max(vals)


def _taylor_double(alpha: float, beta: float, z: complex) -> tuple[complex, float]:
    s = 0j
    c = 0j
    zk = 1 + 0j
    peak = 0.0
    run = 0
    for k in range(_TAYLOR_MAX_TERMS):
        term = zk * reciprocal_gamma(alpha * k + beta)
        peak = max(peak, abs(term))
        y = term - c
        t = s + y
        c = (t - s) - y
        s = t
        if abs(term) < 1e-16 * abs(s):
            run += 1
            if run >= _TAIL_RUN:
                break
        else:
            run = 0
        zk *= z
    return s, peak


@lru_cache(maxsize=64)
def _mp_rgamma_table(alpha: float, beta: float, n: int, dps: int) -> tuple:
    with mpmath.workdps(dps):
        a = mpmath.mpf(alpha)
        b = mpmath.mpf(beta)
        return tuple(mpmath.rgamma(a * k + b) for k in range(n))


def _taylor_mp(alpha: float, beta: float, z: complex, dps: int, log_peak: float) -> complex:
    # number of terms: past the peak until terms drop 10**-dps below it
    r = abs(z)
    target = log_peak - dps * math.log(10.0)
    n = 1
    while n < _TAYLOR_MAX_TERMS:
        if n * math.log(r) - math.lgamma(alpha * n + beta) < target and n > r ** (1.0 / alpha) / alpha:
            break
        n = int(n * 1.25) + 1
    n += _TAIL_RUN
    table = _mp_rgamma_table(alpha, beta, n, dps)
    with mpmath.workdps(dps):
        zz = mpmath.mpc(z.real, z.imag)
        s = mpmath.mpc(0)
        for c in reversed(table):
            s = s * zz + c
        return complex(s)


def ml_series(p: MittagLefflerParams, z: complex, rtol: float = 1e-12) -> complex:
    """Taylor-series evaluation of ``E_{alpha,beta}(z)`` for any ``z``.

    Cost grows like ``exp(|z|**(1/alpha))`` in digits for the extended-precision
    branch, so this is meant for moderate ``|z|``.
    """
    alpha, beta = p.alpha, p.beta
    z = complex(z)
    if z == 0:
        return complex(reciprocal_gamma(beta))
    lp = _log_peak(alpha, beta, abs(z))
    if lp < math.log(_MAX_DOUBLE_LOSS):
        val, peak = _taylor_double(alpha, beta, z)
        if abs(val) > 0 and peak / abs(val) <= _MAX_DOUBLE_LOSS:
            return val
    # digits lost to cancellation: log10(peak/|result|); guess |result| >= 1e-20
    digits = int(lp / math.log(10.0)) + 40
    for _ in range(6):
        val = _taylor_mp(alpha, beta, z, digits, lp)
        loss = lp / math.log(10.0) - math.log10(max(abs(val), 1e-300))
        if loss + (-math.log10(rtol)) + 5 <= digits:
            return val
        digits = int(loss - math.log10(rtol)) + 20
    raise AccuracyError(f"Taylor series for E_{alpha},{beta}({z}) did not stabilise")


def ml_asymptotic(
    p: MittagLefflerParams, z: complex, p_terms: int, tol: float | None = None
) -> complex:
    """Truncated algebraic expansion ``-sum_{k=1}^{p_terms} z**-k / Gamma(beta - alpha k)``.

    ``tol``, when given, is checked against the truncation estimate
    ``|z|**(-1-p_terms)``; ``AccuracyError`` if it is not met.
    """
    z = complex(z)
    if p_terms < 1:
        raise DomainError("p_terms must be a positive integer")
    if z == 0 or not in_sector(p.alpha, z):
        raise SectorError(
            f"|arg z| = {abs(cmath.phase(z)):.6f} outside [3*pi*alpha/4, pi] for alpha={p.alpha}"
        )
    if tol is not None:
        nxt = abs(reciprocal_gamma(p.beta - (p_terms + 1) * p.alpha))
        est = abs(z) ** (-1 - p_terms) * max(nxt, 1.0)
        if est >= tol:
            raise AccuracyError(f"|z|={abs(z):.4g} too small for tol={tol:g} with {p_terms} terms")
    w = 1.0 / z
    wk = 1 + 0j
    s = 0j
    for k in range(1, p_terms + 1):
        wk *= w
        s -= wk * reciprocal_gamma(p.beta - k * p.alpha)
    return s


def _asymptotic_optimal(p: MittagLefflerParams, z: complex) -> complex:
    # Truncate where the envelope |Gamma(1 - beta + alpha k)| / |z|**k is smallest;
    # the actual terms carry a sin(pi (beta - alpha k)) factor and dip irregularly.
    w = 1.0 / z
    logr = math.log(abs(z))
    wk = 1 + 0j
    s = 0j
    prev = math.inf
    for k in range(1, _ASYMPTOTIC_MAX_TERMS + 1):
        wk *= w
        x = 1.0 - p.beta + p.alpha * k
        env = (math.lgamma(x) if x > 0 else 0.0) - k * logr
        if env > prev:
            break
        prev = env
        s -= wk * reciprocal_gamma(p.beta - k * p.alpha)
        if env < math.log(1e-18) + math.log(max(abs(s), 1e-300)):
            break
    return s


def mittag_leffler(p: MittagLefflerParams, z: complex) -> complex:
    """Evaluate ``E_{alpha,beta}(z)``."""
    z = complex(z)
    if p.alpha == 1.0 and p.beta == 1.0:
        return cmath.exp(z)
    r = abs(z)
    if r > Z_MAX:
        return ml_asymptotic(p, z, 5) if in_sector(p.alpha, z) else _asymptotic_unchecked(p, z, 5)
    if r <= switch_radius(p.alpha):
        return ml_series(p, z)
    if not in_sector(p.alpha, z):
        raise DomainError(
            f"no accurate method for |z|={r:.4g} with |arg z|={abs(cmath.phase(z)):.4f} "
            f"below 3*pi*alpha/4"
        )
    return _asymptotic_optimal(p, z)


def _asymptotic_unchecked(p: MittagLefflerParams, z: complex, p_terms: int) -> complex:
    w = 1.0 / z
    return -sum(w**k * reciprocal_gamma(p.beta - k * p.alpha) for k in range(1, p_terms + 1))


def mittag_leffler_array(p: MittagLefflerParams, z) -> np.ndarray:
    """Elementwise ``mittag_leffler`` over an array-like of complex arguments."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    for idx, zi in np.ndenumerate(z):
        out[idx] = mittag_leffler(p, zi)
    return out
