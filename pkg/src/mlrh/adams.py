"""Fractional Adams-Bashforth-Moulton predictor-corrector for the Riccati equation.

Uniform grid ``t_k = k T / N``, ``h_0 = 0``.  With ``F = riccati_rhs``:

    predictor  h^P_{k+1} = dt^a / Gamma(a+1) sum_{j<=k} [(k+1-j)^a - (k-j)^a] F_j
    corrector  h_{k+1}   = dt^a / Gamma(a+2) [F(h^P_{k+1}) + sum_{j<=k} a_{j,k+1} F_j]

with ``a_{0,k+1} = k^(a+1) - (k-a)(k+1)^a`` and
``a_{j,k+1} = (k-j+2)^(a+1) + (k-j)^(a+1) - 2 (k-j+1)^(a+1)``.

The history sums are computed afresh at every step, so a solve is ``O(N^2)``.
Several Fourier arguments can be advanced together: ``a`` may be an array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, SolverOverflowError
from .model_core import ModelParams, check_fourier_arg

BLOWUP = 1e10


@dataclass(frozen=True)
class HGrid:
    t: np.ndarray
    h: np.ndarray  # shape (N+1,) for scalar a, (len(a), N+1) for a batch
    params: ModelParams
    a: complex | tuple

    def interpolator(self):
        """Cubic spline of ``h`` in the variable ``t**alpha``; returns ``f(t)``."""
        al = self.params.alpha
        x = self.t**al
        spline = CubicSpline(x, self.h, axis=-1)

        def f(t):
            return spline(np.asarray(t, dtype=float) ** al)

        return f


def adams_weights(alpha: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(N + 1, dtype=float)
    pred = (m + 1.0) ** alpha - m**alpha
    corr = (m + 2.0) ** (alpha + 1.0) + m ** (alpha + 1.0) - 2.0 * (m + 1.0) ** (alpha + 1.0)
    return pred, corr


def adams_solve(m: ModelParams, a, T: float, N: int) -> HGrid:
    """Solve ``D^alpha h = F(h)`` on ``[0, T]`` with ``N`` steps."""
    if N < 2:
        raise DomainError("N must be at least 2")
    if not T > 0:
        raise DomainError("T must be positive")
    scalar = np.ndim(a) == 0
    av = np.atleast_1d(np.asarray(a, dtype=complex))
    for ai in av:
        check_fourier_arg(ai)
    al = m.alpha
    dt = T / N
    c0 = -0.5 * av * (av + 1j)
    c1 = 1j * m.rho * m.nu * av - m.lam
    c2 = 0.5 * m.nu**2

    def F(h):
        return c0 + (c1 + c2 * h) * h

    pred_w, corr_w = adams_weights(al, N)
    k_pred = dt**al / math.gamma(al + 1.0)
    k_corr = dt**al / math.gamma(al + 2.0)

    h = np.zeros((av.size, N + 1), dtype=complex)
    Fh = np.zeros((av.size, N + 1), dtype=complex)
    Fh[:, 0] = F(h[:, 0])
    for k in range(N):
        hist = Fh[:, : k + 1]
        hp = k_pred * (hist @ pred_w[k::-1])
        a0 = k ** (al + 1.0) - (k - al) * (k + 1.0) ** al
        s = a0 * Fh[:, 0]
        if k > 0:
            s = s + Fh[:, 1 : k + 1] @ corr_w[k - 1 :: -1]
        hk = k_corr * (F(hp) + s)
        if not np.all(np.abs(hk) < BLOWUP):
            raise SolverOverflowError(f"|h| exceeded {BLOWUP:g} at t={(k + 1) * dt:g}")
        h[:, k + 1] = hk
        Fh[:, k + 1] = F(hk)

    t = np.linspace(0.0, T, N + 1)
    if scalar:
        return HGrid(t, h[0], m, complex(av[0]))
    return HGrid(t, h, m, tuple(complex(x) for x in av))


def adams_at(m: ModelParams, a: complex, t: float, N: int) -> complex:
    """Value at ``t`` of an ``N``-step solve over ``[0, t]``."""
    return complex(adams_solve(m, a, t, N).h[-1])
