"""CGF assembly, Lewis-formula call prices and Black-Scholes inversion.

Zero rates and dividends throughout. The characteristic exponent is

    phi(a) = log E[exp(i a X_T)] = int_0^T xi(s) g(T - s; a) ds,
    g = -a(a+i)/2 + i rho nu a h + nu^2 h^2 / 2,

and calls are priced with

    C = S - sqrt(S K) / pi * int_0^inf Re[exp(-i u k) exp(phi(u - i/2))] / (u^2 + 1/4) du

where ``k = log(K / S)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .adams import adams_solve
from .errors import DomainError, IntegrationError, NoSolutionError
from .model_core import ModelParams, check_fourier_arg, classical_h
from .pade import build_pade_cached, eval_pade, pole_scan

log = logging.getLogger(__name__)

GL_NODES = 64
LEWIS_RTOL = 1e-8
LEWIS_U_MAX = 500.0
TAIL_TOL = 1e-10  # relative to spot
VOL_LO, VOL_HI = 1e-6, 5.0
PRICE_TOL = 1e-10


# --------------------------------------------------------------------------
# forward variance


@dataclass(frozen=True)
class ForwardVarianceCurve:
    """Piecewise-constant, right-continuous forward variance.

    ``values[i]`` applies on ``[times[i], times[i+1])``; the first value also
    covers ``[0, times[0])`` and the last one is extended flat.
    """

    times: tuple
    values: tuple

    def __post_init__(self) -> None:
        if len(self.times) != len(self.values) or not self.times:
            raise DomainError("times and values must be nonempty and of equal length")
        if any(v <= 0 for v in self.values):
            raise DomainError("forward variances must be positive")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if self.times[0] < 0:
            raise DomainError("breakpoints must be nonnegative")

    @classmethod
    def flat(cls, v: float) -> "ForwardVarianceCurve":
        return cls((0.0,), (float(v),))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.searchsorted(np.asarray(self.times), s, side="right") - 1
        out = np.asarray(self.values)[np.clip(idx, 0, len(self.values) - 1)]
        return out if out.ndim else float(out)

    def integral(self, T: float) -> float:
        edges = self._edges(T)
        return float(sum((b - a) * self(a) for a, b in zip(edges, edges[1:])))

    def _edges(self, T: float) -> list[float]:
        inner = [b for b in self.times if 0.0 < b < T]
        return [0.0, *inner, T]


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def cgf_nodes(T: float, xi: ForwardVarianceCurve, n_nodes: int = GL_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes ``tau`` and weights (``xi`` folded in) for ``int_0^T xi(T - tau) g(tau) dtau``.

    One Gauss-Legendre rule per curve segment. On the segment touching
    ``tau = 0`` the substitution ``tau = tau_1 v^2`` smooths the ``tau^alpha``
    behaviour of ``g``.
    """
    x, w = _gauss_legendre(n_nodes)
    s_edges = xi._edges(T)
    taus, weights = [], []
    for s0, s1 in zip(s_edges, s_edges[1:]):
        level = xi(0.5 * (s0 + s1))
        t0, t1 = T - s1, T - s0
        if t0 == 0.0:
            v = 0.5 * (x + 1.0)
            taus.append(t1 * v * v)
            weights.append(level * w * 0.5 * 2.0 * t1 * v)
        else:
            taus.append(t0 + 0.5 * (t1 - t0) * (x + 1.0))
            weights.append(level * 0.5 * (t1 - t0) * w)
    return np.concatenate(taus), np.concatenate(weights)


# --------------------------------------------------------------------------
# h providers


@dataclass(frozen=True)
class Pade:
    """Rational approximant of order ``n``; nodes whose denominator vanishes on
    ``(0, nu T^alpha]`` are re-solved with an Adams scheme of ``fallback_steps``."""

    n: int = 5
    fallback_steps: int = 1000
    scan_poles: bool = True

    @property
    def name(self) -> str:
        return f"pade{self.n}"

    def h_batch(self, m: ModelParams, a: np.ndarray, T: float, taus: np.ndarray) -> np.ndarray:
        out = np.empty((a.size, taus.size), dtype=complex)
        bad = []
        for i, ai in enumerate(a):
            r = build_pade_cached(m, complex(ai), self.n)
            if self.scan_poles and not r.is_zero and pole_scan(r, m.nu * T**m.alpha):
                bad.append(i)
                continue
            out[i] = eval_pade(r, taus)
        if bad:
            log.warning("pade%d: denominator zero for %d node(s); using Adams(%d)", self.n, len(bad), self.fallback_steps)
            out[bad] = Adams(self.fallback_steps).h_batch(m, a[bad], T, taus)
        return out


@dataclass(frozen=True)
class Adams:
    N: int = 1000

    @property
    def name(self) -> str:
        return f"adams:{self.N}"

    def h_batch(self, m: ModelParams, a: np.ndarray, T: float, taus: np.ndarray) -> np.ndarray:
        grid = adams_solve(m, np.asarray(a, dtype=complex), T, self.N)
        return np.atleast_2d(grid.interpolator()(taus))


@dataclass(frozen=True)
class Classical:
    """Closed-form ``h`` (requires ``H = 1/2``)."""

    @property
    def name(self) -> str:
        return "classical"

    def h_batch(self, m: ModelParams, a: np.ndarray, T: float, taus: np.ndarray) -> np.ndarray:
        return np.array([classical_h(m, complex(ai), taus) for ai in a])


@dataclass(frozen=True)
class Deterministic:
    """Zero vol-of-vol: ``g = -a(a+i)/2`` exactly, ``m`` is ignored."""

    @property
    def name(self) -> str:
        return "deterministic"

    def h_batch(self, m, a, T, taus):
        return np.zeros((np.size(a), np.size(taus)), dtype=complex)


HMethod = Pade | Adams | Classical | Deterministic


def parse_method(spec: str) -> HMethod:
    """``pade5``, ``adams:1000``, ``classical`` or ``deterministic``."""
    s = spec.strip().lower()
    if s.startswith("pade"):
        return Pade(int(s[4:] or 5))
    if s.startswith("adams"):
        _, _, n = s.partition(":")
        return Adams(int(n) if n else 1000)
    if s == "classical":
        return Classical()
    if s == "deterministic":
        return Deterministic()
    raise ValueError(f"unknown method {spec!r}")


# --------------------------------------------------------------------------
# CGF


def g_from_h(m: ModelParams, a: complex, h):
    return -0.5 * a * (a + 1j) + 1j * m.rho * m.nu * a * h + 0.5 * m.nu**2 * h * h


def cgf(
    m: ModelParams,
    a: complex,
    T: float,
    xi: ForwardVarianceCurve,
    h_provider: Callable[[np.ndarray], np.ndarray],
    n_nodes: int = GL_NODES,
) -> complex:
    """``int_0^T xi(s) g(T - s; a) ds`` with ``h`` supplied as a function of time."""
    a = check_fourier_arg(a)
    taus, w = cgf_nodes(T, xi, n_nodes)
    g = g_from_h(m, a, np.asarray(h_provider(taus)))
    return complex(np.dot(w, g))


def cgf_batch(
    m: ModelParams | None,
    a: np.ndarray,
    T: float,
    xi: ForwardVarianceCurve,
    method: HMethod,
    n_nodes: int = GL_NODES,
) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if isinstance(method, Deterministic):
        return -0.5 * a * (a + 1j) * xi.integral(T)
    taus, w = cgf_nodes(T, xi, n_nodes)
    h = method.h_batch(m, a, T, taus)
    g = g_from_h(m, a[:, None], h)
    return g @ w


# --------------------------------------------------------------------------
# Lewis


@dataclass
class LewisResult:
    calls: np.ndarray
    integral: np.ndarray
    error_estimate: float
    u_end: float
    panels: list = field(default_factory=list)


def lewis_integral(
    m: ModelParams | None,
    xi: ForwardVarianceCurve,
    S: float,
    strikes: Sequence[float],
    T: float,
    method: HMethod,
    rtol: float = LEWIS_RTOL,
    u_max: float = LEWIS_U_MAX,
) -> LewisResult:
    """Adaptive panel quadrature of the Lewis integral for several strikes at once.

    Each panel is integrated with 16- and 32-point Gauss-Legendre rules; a panel
    whose estimates disagree by more than ``rtol/10`` of the running total is
    bisected. Integration stops once the remaining tail is bounded by
    ``1e-10 * S``.
    """
    if not (S > 0 and T > 0):
        raise DomainError("S and T must be positive")
    K = np.atleast_1d(np.asarray(strikes, dtype=float))
    if np.any(K <= 0):
        raise DomainError("strikes must be positive")
    k = np.log(K / S)
    pref = np.sqrt(S * K) / np.pi
    x16, w16 = _gauss_legendre(16)
    x32, w32 = _gauss_legendre(32)

    def panel(u0: float, u1: float):
        half, mid = 0.5 * (u1 - u0), 0.5 * (u1 + u0)
        u = np.concatenate([mid + half * x16, mid + half * x32])
        phi = cgf_batch(m, u - 0.5j, T, xi, method)
        cf = np.exp(phi)
        f = np.real(np.exp(-1j * np.outer(u, k)) * cf[:, None]) / (u * u + 0.25)[:, None]
        i16 = half * (w16 @ f[:16])
        i32 = half * (w32 @ f[16:])
        return i32, np.abs(i32 - i16), float(np.max(np.abs(cf)))

    total = np.zeros_like(k)
    err_total = 0.0
    u0, width = 0.0, 1.0
    panels = []
    while True:
        if u0 >= u_max:
            raise IntegrationError(f"Lewis integral tail not below {TAIL_TOL:g}*S by u_max={u_max:g}")
        u1 = min(u0 + width, u_max)
        stack = [(u0, u1, 0)]
        cf_max = 0.0
        while stack:
            a0, a1, depth = stack.pop()
            val, err, cmax = panel(a0, a1)
            scale = np.maximum(np.abs(total + val), 1e-3)
            if np.all(err <= 0.1 * rtol * scale) or depth >= 12:
                if depth >= 12 and np.any(err > 0.1 * rtol * scale):
                    raise IntegrationError(f"panel [{a0:g}, {a1:g}] failed to converge")
                total = total + val
                err_total = max(err_total, float(np.max(err / scale)))
                cf_max = max(cf_max, cmax)
                panels.append((a0, a1))
            else:
                mid = 0.5 * (a0 + a1)
                stack.append((mid, a1, depth + 1))
                stack.append((a0, mid, depth + 1))
        # |cf| decays monotonically in u; bound the panel and the remaining tail
        span = np.arctan(2.0 * u1) - np.arctan(2.0 * u0)
        tail = np.pi / 2 - np.arctan(2.0 * u1)
        bound = float(np.max(pref)) * 2.0 * cf_max * max(span, tail)
        u0 = u1
        width = min(2.0 * width, 16.0)
        if bound < TAIL_TOL * S:
            break
    calls = S - pref * total
    calls = np.clip(calls, np.maximum(S - K, 0.0), S)
    return LewisResult(calls, total, err_total, u0, panels)


def lewis_call(m, xi, S, K, T, method: HMethod, **kw) -> float:
    return float(lewis_integral(m, xi, S, [K], T, method, **kw).calls[0])


def lewis_put(m, xi, S, K, T, method: HMethod, **kw) -> float:
    """``K - sqrt(SK)/pi * integral``: the same integral under the put transform."""
    res = lewis_integral(m, xi, S, [K], T, method, **kw)
    return float(K - math.sqrt(S * K) / math.pi * res.integral[0])


# --------------------------------------------------------------------------
# Black-Scholes


def _ncdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_price(S: float, K: float, T: float, vol: float) -> float:
    """Zero-rate Black-Scholes call."""
    if vol <= 0 or T <= 0:
        return max(S - K, 0.0)
    sd = vol * math.sqrt(T)
    d1 = math.log(S / K) / sd + 0.5 * sd
    return S * _ncdf(d1) - K * _ncdf(d1 - sd)


def bs_vega(S: float, K: float, T: float, vol: float) -> float:
    sd = vol * math.sqrt(T)
    d1 = math.log(S / K) / sd + 0.5 * sd
    return S * math.sqrt(T) * math.exp(-0.5 * d1 * d1) / math.sqrt(2.0 * math.pi)


def implied_vol(S: float, K: float, T: float, price: float) -> float:
    """Invert ``bs_price`` by Newton steps kept inside a shrinking bracket.

    Returns 0.0 when ``price`` equals intrinsic value.
    """
    lower = max(S - K, 0.0)
    if price < lower - PRICE_TOL or price >= S:
        raise NoSolutionError(f"price {price:.6g} outside ({lower:.6g}, {S:.6g})")
    if price <= lower + PRICE_TOL * 1e-2:
        return 0.0
    lo, hi = VOL_LO, VOL_HI
    if bs_price(S, K, T, hi) < price:
        raise NoSolutionError(f"implied vol above {VOL_HI}")
    if bs_price(S, K, T, lo) > price:
        return lo
    vol = min(max(math.sqrt(2.0 * abs(math.log(S / K)) / T + 1e-4) if K != S else 0.2, 0.05), 1.0)
    for _ in range(200):
        diff = bs_price(S, K, T, vol) - price
        if abs(diff) < PRICE_TOL:
            return vol
        if diff > 0:
            hi = vol
        else:
            lo = vol
        vega = bs_vega(S, K, T, vol)
        step = vol - diff / vega if vega > 0 else -1.0
        vol = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo < 1e-15:
            return vol
    return vol


# --------------------------------------------------------------------------
# smiles


def smile(
    m: ModelParams | None,
    xi: ForwardVarianceCurve,
    S: float,
    strikes: Sequence[float],
    maturities: Sequence[float],
    method: HMethod,
) -> list[dict]:
    """Implied-vol table, rows ordered by maturity then strike.

    Failures are recorded per cell in the ``error`` field.
    """
    if not len(strikes) or not len(maturities):
        raise DomainError("strike and maturity grids must be nonempty")
    Ks = sorted(float(k) for k in strikes)
    rows = []
    for T in sorted(float(t) for t in maturities):
        try:
            calls = lewis_integral(m, xi, S, Ks, T, method).calls
            errs = [""] * len(Ks)
        except Exception as exc:  # recorded per cell
            calls = [math.nan] * len(Ks)
            errs = [f"{type(exc).__name__}: {exc}"] * len(Ks)
        for K, c, e in zip(Ks, calls, errs):
            iv = math.nan
            if not e:
                try:
                    iv = implied_vol(S, K, T, float(c))
                    if iv == 0.0:
                        e = "price at intrinsic"
                except Exception as exc:
                    e = f"{type(exc).__name__}: {exc}"
            rows.append(
                {"maturity": T, "strike": K, "price": float(c), "implied_vol": iv, "method": method.name, "error": e}
            )
    return rows
