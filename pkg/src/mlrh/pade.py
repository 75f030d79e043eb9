"""Diagonal two-point rational approximants ``h^(n,n)`` in ``y = nu t^alpha``.

``h ~ P(y) / Q(y)`` with ``P = sum_{i=1}^n p_i y^i`` and ``Q = sum_{j=0}^n q_j y^j``,
``q_0 = 1``. The ``2n`` unknowns are fixed by matching ``n`` small-time
coefficients at ``y = 0`` and ``n`` large-time coefficients at ``y = inf``:

* ``beta_j = b_j / nu^j``  (``h = sum beta_j y^j``),
* ``gamma_k = g_k nu^k``   (``h = sum gamma_k y^-k``).

The coefficients are obtained by solving the linear conditions numerically
rather than from closed-form expressions, so any order up to ``MAX_PADE_ORDER``
is available.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import mpmath
import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .errors import PoleError, SingularSystemError
from .model_core import ModelParams, check_fourier_arg
from .series_expansions import large_time_coeffs, small_time_coeffs

log = logging.getLogger(__name__)

MAX_PADE_ORDER = 8
MATCH_TOL = 1e-9
PIVOT_TOL = 1e-12
SCAN_POINTS = 10_000
ZERO_TOL = 1e-8
# H = 0 is built as the limit H -> 0+: the large-time recursion has a Gamma pole
# at alpha = 1/2 exactly, but the approximant converges as H decreases.
BOUNDARY_H = 1e-9
# working precision of the fallback solve used when double precision cannot
# certify the match (a large root of Q amplifies rounding in the w-expansion)
HP_DPS = 40


@dataclass(frozen=True)
class RationalApproximant:
    n: int
    p: tuple  # p_0..p_n, p_0 = 0
    q: tuple  # q_0..q_n, q_0 = 1
    alpha: float
    nu: float
    beta: tuple = ()
    gamma: tuple = ()
    # (p, q) as mpmath numbers when the extended-precision solve was needed
    hp: tuple | None = field(default=None, compare=False, repr=False)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.p)

    def numerator(self) -> np.ndarray:
        return np.array(self.p, dtype=complex)

    def denominator(self) -> np.ndarray:
        return np.array(self.q, dtype=complex)


@dataclass(frozen=True)
class MatchReport:
    small_mismatch: float
    large_mismatch: float

    @property
    def mismatch(self) -> float:
        return max(self.small_mismatch, self.large_mismatch)

    @property
    def passed(self) -> bool:
        return self.mismatch < MATCH_TOL


def pade_system(beta, gamma) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the ``2n x 2n`` system; unknowns ordered ``p_1..p_n, q_1..q_n``."""
    beta = np.asarray(beta, dtype=complex)
    gamma = np.asarray(gamma, dtype=complex)
    n = len(beta)
    M = np.zeros((2 * n, 2 * n), dtype=complex)
    rhs = np.zeros(2 * n, dtype=complex)
    # y^m, m = 1..n:  p_m - sum_{j=1}^{m-1} q_j beta_{m-j} = beta_m
    for m in range(1, n + 1):
        M[m - 1, m - 1] = 1.0
        for j in range(1, m):
            M[m - 1, n + j - 1] = -beta[m - j - 1]
        rhs[m - 1] = beta[m - 1]
    # w^m, m = 0..n-1:  p_{n-m} - sum_{k=0}^{m} gamma_k q_{n-m+k} = 0
    for m in range(n):
        row = n + m
        M[row, n - m - 1] = 1.0
        for k in range(m + 1):
            M[row, n + (n - m + k) - 1] -= gamma[k]
    return M, rhs


def _lu_solve(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with warnings.catch_warnings():
        # an exactly singular factor is reported below as SingularSystemError
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.max() == 0.0 or d.min() < PIVOT_TOL * d.max():
        raise SingularSystemError(f"pivot ratio {d.min() / max(d.max(), 1e-300):.3g} below {PIVOT_TOL:g}")
    return scipy.linalg.lu_solve((lu, piv), rhs)


def _from_solution(x, n, alpha, nu, beta, gamma) -> RationalApproximant:
    p = (0j,) + tuple(complex(v) for v in x[:n])
    q = (1 + 0j,) + tuple(complex(v) for v in x[n:])
    return RationalApproximant(n, p, q, alpha, nu, tuple(beta), tuple(gamma))


def _equilibrations(M: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row and column scalings to try in turn: none, rows, columns, both.

    The unknowns ``p_i, q_j`` can span many decades when ``|a|`` is large,
    which makes the unscaled pivots look rank deficient.
    """
    one = np.ones(M.shape[0])

    def inv_max(x):
        x = np.abs(x).max(axis=0)
        return np.where(x > 0, 1.0 / np.where(x > 0, x, 1.0), 1.0)

    rows = inv_max(M.T)
    cols = inv_max(M)
    both_cols = inv_max(M * rows[:, None])
    return [(one, one), (rows, one), (one, cols), (rows, both_cols)]


def _hp_solve(beta, gamma, alpha, nu) -> RationalApproximant:
    n = len(beta)
    M, rhs = pade_system(beta, gamma)
    with mpmath.workdps(HP_DPS):
        x = mpmath.lu_solve(mpmath.matrix(M.tolist()), mpmath.matrix(rhs.tolist()))
        xs = [x[i] for i in range(2 * n)]
        p_hp = (mpmath.mpc(0),) + tuple(xs[:n])
        q_hp = (mpmath.mpc(1),) + tuple(xs[n:])
    r = _from_solution([complex(v) for v in xs], n, alpha, nu, beta, gamma)
    return replace(r, hp=(p_hp, q_hp))


def pade_from_series(beta, gamma, alpha: float, nu: float) -> RationalApproximant:
    """Solve for the approximant given ``beta_1..beta_n`` and ``gamma_0..gamma_{n-1}``."""
    beta = [complex(b) for b in beta]
    gamma = [complex(g) for g in gamma]
    n = len(beta)
    if len(gamma) != n:
        raise ValueError("need as many large-time as small-time coefficients")
    if all(b == 0 for b in beta) and all(g == 0 for g in gamma):
        return RationalApproximant(n, (0j,) * (n + 1), (1 + 0j,) + (0j,) * n, alpha, nu, tuple(beta), tuple(gamma))
    M, rhs = pade_system(beta, gamma)
    best, best_mis, singular = None, np.inf, 0
    attempts = _equilibrations(M)
    for R, C in attempts:
        try:
            y = _lu_solve(M * R[:, None] * C[None, :], rhs * R)
        except SingularSystemError:
            singular += 1
            continue
        r = _from_solution(C * y, n, alpha, nu, beta, gamma)
        mis = series_match_check(r, beta, gamma).mismatch
        if mis < MATCH_TOL:
            return r
        if mis < best_mis:
            best, best_mis = r, mis
    # when every double pivot test fails the extended solve decides rank
    log.debug("double-precision match %.3g (%d singular); re-solving at %d digits", best_mis, singular, HP_DPS)
    try:
        return _hp_solve(beta, gamma, alpha, nu)
    except ZeroDivisionError:
        if best is None:
            raise SingularSystemError("two-point system is rank deficient") from None
        return best


def scaled_coefficients(m: ModelParams, a: complex, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``beta_1..beta_n`` and ``gamma_0..gamma_{n-1}`` for ``y = nu t^alpha``."""
    b = small_time_coeffs(m, a, n).as_array()
    g = large_time_coeffs(m, a, n - 1).as_array()
    beta = b / m.nu ** np.arange(1, n + 1)
    gamma = g * m.nu ** np.arange(n)
    return beta, gamma


def build_pade(m: ModelParams, a: complex, n: int) -> RationalApproximant:
    """Build ``h^(n,n)`` for parameters ``m`` at Fourier argument ``a``."""
    if not 1 <= n <= MAX_PADE_ORDER:
        raise ValueError(f"order n={n} must lie in [1, {MAX_PADE_ORDER}]")
    a = check_fourier_arg(a)
    mm = replace(m, H=BOUNDARY_H) if m.is_boundary else m
    beta, gamma = scaled_coefficients(mm, a, n)
    r = pade_from_series(beta, gamma, mm.alpha, m.nu)
    return replace(r, alpha=m.alpha)


@lru_cache(maxsize=1 << 16)
def build_pade_cached(m: ModelParams, a: complex, n: int) -> RationalApproximant:
    return build_pade(m, a, n)


def _horner(coeffs, y):
    acc = np.zeros_like(y, dtype=complex)
    for c in coeffs[::-1]:
        acc = acc * y + c
    return acc


def eval_pade_y(r: RationalApproximant, y):
    y = np.asarray(y, dtype=float)
    num = _horner(r.numerator(), y)
    den = _horner(r.denominator(), y)
    if np.any(np.abs(den) < 1e-300 * np.abs(num)):
        raise PoleError("denominator vanishes on the evaluation grid")
    out = num / den
    out = np.where(y == 0.0, 0j, out)
    return out if out.ndim else complex(out)


def eval_pade(r: RationalApproximant, t):
    """``h^(n,n)(t)``; ``t`` may be an array, ``t = 0`` gives exactly 0."""
    t = np.asarray(t, dtype=float)
    return eval_pade_y(r, r.nu * t**r.alpha)


def _series_at_zero(p, q, n):
    c = [0 * q[0]] * (n + 1)
    for k in range(1, n + 1):
        c[k] = (p[k] - sum(q[j] * c[k - j] for j in range(1, k + 1))) / q[0]
    return c[1:]


def _series_at_infinity(p, q, n):
    # in w = 1/y: P~_k = p_{n-k}, Q~_k = q_{n-k}
    P = p[::-1]
    Q = q[::-1]
    d = [0 * Q[0]] * n
    for k in range(n):
        d[k] = (P[k] - sum(Q[j] * d[k - j] for j in range(1, k + 1))) / Q[0]
    return d


def _rel(a, b) -> float:
    if not len(b):
        return 0.0
    scale = max(abs(complex(x)) for x in b)
    diff = float(max(abs(x - y) for x, y in zip(a, b)))
    return diff / scale if scale > 0 else diff


def series_match_check(r: RationalApproximant, beta=None, gamma=None) -> MatchReport:
    """Re-expand ``P/Q`` at both ends and compare with the input coefficients.

    Approximants carrying extended-precision coefficients are re-expanded in
    that precision.
    """
    beta = [complex(b) for b in (r.beta if beta is None else beta)]
    gamma = [complex(g) for g in (r.gamma if gamma is None else gamma)]
    if r.hp is not None:
        with mpmath.workdps(HP_DPS):
            return _match(list(r.hp[0]), list(r.hp[1]), r.n, beta, gamma)
    return _match(list(r.numerator()), list(r.denominator()), r.n, beta, gamma)


def _match(p, q, n, beta, gamma) -> MatchReport:
    small = _rel(_series_at_zero(p, q, n), beta)
    qmax = max(abs(c) for c in q)
    if abs(q[n]) > 1e-14 * qmax:
        large = _rel(_series_at_infinity(p, q, n), gamma)
    else:
        # degenerate leading coefficient: compare the residual P~ - Q~ * gamma
        P = p[::-1]
        Q = q[::-1]
        res = [P[k] - sum(Q[j] * gamma[k - j] for j in range(k + 1)) for k in range(n)]
        scale = max(max(abs(g) for g in gamma), max(abs(c) for c in p), 1e-300)
        large = float(max(abs(x) for x in res) / scale)
    return MatchReport(float(small), float(large))


def pole_scan(r: RationalApproximant, y_max: float | None = None) -> list[float]:
    """Positive real ``y`` in ``(0, y_max]`` where ``Q`` nearly vanishes.

    Default ``y_max`` covers 100 years, ``nu * 100**alpha``. A refined minimum
    counts as a zero when ``|Q(y)| < 1e-8 * sum_j |q_j| y^j``: the scale is the
    size of the terms at that ``y``, not the global maximum of ``|Q|``, which
    grows like ``y^n`` and would flag ordinary dips near the origin.
    """
    if y_max is None:
        y_max = r.nu * 100.0**r.alpha
    q = r.denominator()
    qabs = np.abs(q)
    y = np.linspace(y_max / SCAN_POINTS, y_max, SCAN_POINTS)
    vals = _horner(q, y)
    qa = np.abs(vals)
    # candidates: interior local minima of |Q|, plus sign changes of Re Q or Im Q
    cand = set(np.flatnonzero((qa[1:-1] <= qa[:-2]) & (qa[1:-1] <= qa[2:])) + 1)
    for part in (vals.real, vals.imag):
        cand |= set(np.flatnonzero(np.sign(part[:-1]) * np.sign(part[1:]) < 0))
    found: list[float] = []
    for i in sorted(cand):
        lo = y[max(i - 1, 0)]
        hi = y[min(i + 1, SCAN_POINTS - 1)]
        res = minimize_scalar(
            lambda s: abs(_horner(q, np.array(s))), bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}
        )
        scale = float(np.polyval(qabs[::-1], res.x))
        if res.fun < ZERO_TOL * scale and not any(abs(res.x - f) < 1e-9 * y_max for f in found):
            found.append(float(res.x))
    return sorted(found)
