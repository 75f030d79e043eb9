"""Small-time and large-time expansions of the Riccati solution ``h(t; a)``.

Small time:  ``h = sum_{j>=1} b_j t^(j alpha)``.
Large time:  ``h = sum_{k>=0} g_k t^(-k alpha)`` with ``g_0 = r_- / nu``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError
from .model_core import ModelParams, check_fourier_arg, riccati_roots
from .special_fn import MittagLefflerParams, mittag_leffler, reciprocal_gamma

MAX_ORDER = 24


class SeriesKind(enum.Enum):
    SMALL_TIME = "small"
    LARGE_TIME = "large"


@dataclass(frozen=True)
class ComplexSeries:
    """Truncated expansion in powers of ``t**alpha``.

    ``coeffs[j]`` multiplies ``t**((j+1) alpha)`` for ``SMALL_TIME`` and
    ``t**(-j alpha)`` for ``LARGE_TIME``.
    """

    kind: SeriesKind
    coeffs: tuple
    alpha: float

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)


def _check_order(n: int, lo: int) -> None:
    if not lo <= n <= MAX_ORDER:
        raise ValueError(f"order n={n} must lie in [{lo}, {MAX_ORDER}]")


def small_time_coeffs(m: ModelParams, a: complex, n: int) -> ComplexSeries:
    """Coefficients ``b_1..b_n`` from the Cauchy-product recursion."""
    _check_order(n, 1)
    a = check_fourier_arg(a)
    al = m.alpha
    lam_t = m.lam_prime - 1j * m.rho * a
    b = [-0.5 * a * (a + 1j) * reciprocal_gamma(1.0 + al)]
    for k in range(2, n + 1):
        conv = sum(b[i - 1] * b[k - 2 - i] for i in range(1, k - 1))
        ratio = reciprocal_gamma(1.0 + k * al) / reciprocal_gamma(1.0 + (k - 1) * al)
        b.append(ratio * (-lam_t * m.nu * b[k - 2] + 0.5 * m.nu**2 * conv))
    return ComplexSeries(SeriesKind.SMALL_TIME, tuple(complex(x) for x in b), al)


def large_time_coeffs(m: ModelParams, a: complex, n: int) -> ComplexSeries:
    """Coefficients ``g_0..g_n``.

    One recursion serves every ``k >= 1``; at ``k = 1`` the quadratic sum is
    empty and at ``k = 2`` it reduces to ``g_1**2``.
    """
    _check_order(n, 0)
    roots = riccati_roots(m, a)
    al = m.alpha
    A, nu = roots.A, m.nu
    g = [roots.r_minus / nu]
    for k in range(1, n + 1):
        conv = sum(g[i] * g[k - i] for i in range(1, k))
        prev = g[k - 1]
        if prev == 0:
            lin = 0.0
        else:
            rg_num = reciprocal_gamma(1.0 - (k - 1) * al)
            if rg_num == 0.0:
                raise DegenerateError(
                    f"Gamma(1 - {k - 1}*alpha) is infinite at alpha={al}; "
                    "the power-law ansatz breaks down at this order"
                )
            lin = reciprocal_gamma(1.0 - k * al) / rg_num * prev
        g.append(-(lin - 0.5 * nu**2 * conv) / (A * nu))
    return ComplexSeries(SeriesKind.LARGE_TIME, tuple(complex(x) for x in g), al)


def eval_series(s: ComplexSeries, t):
    t = np.asarray(t, dtype=float)
    x = t**s.alpha
    c = s.as_array()
    if s.kind is SeriesKind.SMALL_TIME:
        # Horner in x, then one extra factor of x
        acc = np.zeros_like(x, dtype=complex)
        for coef in c[::-1]:
            acc = acc * x + coef
        out = acc * x
    else:
        w = np.divide(1.0, x, out=np.zeros_like(x), where=x > 0)
        acc = np.zeros_like(x, dtype=complex)
        for coef in c[::-1]:
            acc = acc * w + coef
        out = np.where(np.isinf(w), np.nan, acc)
    return out if out.ndim else complex(out)


def dalpha_series(s: ComplexSeries, t):
    """Term-wise fractional derivative of a truncated series.

    ``D^alpha t^(j alpha) = Gamma(1 + j alpha) / Gamma(1 + (j-1) alpha) t^((j-1) alpha)``
    for both expansions (``j`` negative for the large-time one).
    """
    t = np.asarray(t, dtype=float)
    al = s.alpha
    x = t**al
    out = np.zeros_like(x, dtype=complex)
    if s.kind is SeriesKind.SMALL_TIME:
        for j, c in enumerate(s.coeffs, start=1):
            fac = reciprocal_gamma(1.0 + (j - 1) * al) / reciprocal_gamma(1.0 + j * al)
            out = out + c * fac * x ** (j - 1)
    else:
        for k, c in enumerate(s.coeffs):
            if c == 0:
                continue
            rg = reciprocal_gamma(1.0 - k * al)
            if rg == 0.0:
                raise DegenerateError(f"Gamma(1 - {k}*alpha) is infinite at alpha={al}")
            fac = reciprocal_gamma(1.0 - (k + 1) * al) / rg
            out = out + c * fac * x ** (-(k + 1))
    return out if out.ndim else complex(out)


def h_infinity(m: ModelParams, a: complex, t):
    """``r_- (1 - E_alpha(-A nu t^alpha)) / nu``; ``t`` may be an array."""
    roots = riccati_roots(m, a)
    p = MittagLefflerParams(m.alpha, 1.0)
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape, dtype=complex)
    for idx, ti in np.ndenumerate(t):
        e = mittag_leffler(p, -roots.A * m.nu * ti**m.alpha)
        out[idx] = roots.r_minus * (1.0 - e) / m.nu
    return out if out.ndim else complex(out)
