"""Tables behind the h-curve and convergence studies."""

from __future__ import annotations

import numpy as np

from .adams import adams_solve
from .model_core import ModelParams, classical_h, riccati_rhs
from .pade import build_pade, eval_pade
from .series_expansions import eval_series, h_infinity, large_time_coeffs, small_time_coeffs


def log_grid(t_min: float, t_max: float, n: int) -> np.ndarray:
    return np.logspace(np.log10(t_min), np.log10(t_max), n)


def h_curve(m: ModelParams, a: complex, method: str, t: np.ndarray) -> np.ndarray:
    """``h`` on ``t`` by one named method.

    Methods: ``padeN``, ``adams:N``, ``hinf``, ``series_small:n``,
    ``series_large:n``, ``classical``.
    """
    name, _, arg = method.strip().lower().partition(":")
    t = np.asarray(t, dtype=float)
    if name.startswith("pade"):
        return eval_pade(build_pade(m, a, int(name[4:] or 5)), t)
    if name == "adams":
        grid = adams_solve(m, a, float(t.max()), int(arg or 1000))
        return grid.interpolator()(t)
    if name == "hinf":
        return h_infinity(m, a, t)
    if name == "series_small":
        return eval_series(small_time_coeffs(m, a, int(arg or 20)), t)
    if name == "series_large":
        return eval_series(large_time_coeffs(m, a, int(arg or 5)), t)
    if name == "classical":
        return classical_h(m, a, t)
    raise ValueError(f"unknown h method {method!r}")


def benchmark_name(m: ModelParams, adams_steps: int = 1000) -> str:
    return "classical" if m.is_classical else f"adams:{adams_steps}"


def log_slope(orders, errors) -> float:
    """Least-squares slope of ``log10(error)`` against order."""
    e = np.asarray(errors, dtype=float)
    return float(np.polyfit(np.asarray(orders, dtype=float), np.log10(e), 1)[0])


def convergence_table(
    m: ModelParams, a: complex, orders, t: np.ndarray, benchmark: str | None = None, adams_steps: int = 1000
) -> list[dict]:
    """Max-abs errors of ``h^(n,n)`` against a benchmark over ``t``.

    ``max_abs_err_re`` / ``max_abs_err_im`` are for ``D^alpha h`` (evaluated as the
    Riccati right-hand side), ``max_abs_err_h`` for ``h`` itself.
    """
    bench = benchmark or benchmark_name(m, adams_steps)
    ref = h_curve(m, a, bench, t)
    dref = riccati_rhs(m, a, ref)
    rows = []
    for n in orders:
        h = h_curve(m, a, f"pade{n}", t)
        d = riccati_rhs(m, a, h) - dref
        rows.append(
            {
                "H": m.H,
                "n": int(n),
                "benchmark": bench,
                "max_abs_err_re": float(np.max(np.abs(d.real))),
                "max_abs_err_im": float(np.max(np.abs(d.imag))),
                "max_abs_err_h": float(np.max(np.abs(h - ref))),
            }
        )
    if len(rows) >= 2:
        ns = [r["n"] for r in rows]
        s_re = log_slope(ns, [r["max_abs_err_re"] for r in rows])
        s_im = log_slope(ns, [r["max_abs_err_im"] for r in rows])
        s_h = log_slope(ns, [r["max_abs_err_h"] for r in rows])
    else:
        s_re = s_im = s_h = float("nan")
    for r in rows:
        r.update(slope_re=s_re, slope_im=s_im, slope_h=s_h)
    return rows
