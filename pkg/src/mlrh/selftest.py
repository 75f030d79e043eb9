"""Invariant suite behind ``mlrh selftest``.

Report lines go to stdout and are deterministic; timings go to stderr.
"""

from __future__ import annotations

import cmath
import math
import sys
import time

import numpy as np

from . import special_fn
from .adams import adams_solve
from .model_core import REFERENCE_A, REFERENCE_PARAMS, ModelParams, classical_h, riccati_rhs, riccati_roots, sector_angle
from .pade import build_pade, series_match_check
from .pricer import Adams, ForwardVarianceCurve, Pade, bs_price, cgf_batch, implied_vol
from .series_expansions import dalpha_series, small_time_coeffs


def _random_params(rng, n):
    out = []
    while len(out) < n:
        m = ModelParams(
            H=float(rng.uniform(0.0, 0.5)),
            nu=float(rng.uniform(0.1, 2.0)),
            rho=float(rng.uniform(-0.9, 0.9)),
            lam=float(rng.uniform(0.0, 5.0)),
        )
        a = complex(rng.uniform(0.0, 20.0), -rng.uniform(0.0, 1.0))
        out.append((m, a))
    return out


def check_reciprocal_gamma():
    worst = max(abs(special_fn.reciprocal_gamma(x) * math.gamma(x) - 1.0) for x in np.arange(0.1, 5.01, 0.1))
    return worst < 1e-13, f"max |rgamma*gamma - 1| = {worst:.2e}"


def check_exp_limit():
    p = special_fn.MittagLefflerParams(1.0, 1.0)
    worst = 0.0
    for r in np.linspace(0.0, 3.0, 7):
        for th in np.linspace(-math.pi, math.pi, 13):
            z = r * cmath.exp(1j * th)
            worst = max(worst, abs(special_fn.ml_series(p, z) - cmath.exp(z)))
    return worst < 1e-12, f"max |E_1(z) - exp z| = {worst:.2e}"


def check_handoff():
    worst = 0.0
    for al in (0.55, 0.7, 0.9, 1.0):
        p = special_fn.MittagLefflerParams(al, 1.0)
        R = special_fn.switch_radius(al)
        for f in (0.95, 1.05):
            for th in (0.75 * math.pi * al, math.pi):
                z = R * f * cmath.exp(1j * th)
                worst = max(worst, abs(special_fn.ml_series(p, z) - special_fn.ml_asymptotic(p, z, 60)))
    return worst < 1e-8, f"max series/asymptotic gap = {worst:.2e}"


def check_sector():
    worst = math.pi
    for m, a in _random_params(np.random.default_rng(1), 200):
        for x in (10.0, 100.0, 1000.0):
            worst = min(worst, sector_angle(m, a, x))
    return worst >= 0.75 * math.pi - 1e-12, f"min |arg(-A x^alpha)| = {worst:.6f}"


def check_roots():
    worst = 0.0
    for m, a in _random_params(np.random.default_rng(2), 500):
        r = riccati_roots(m, a)
        prod = -a * (a + 1j)
        s = 2 * (m.lam_prime - 1j * m.rho * a)
        worst = max(
            worst,
            abs(r.r_minus * r.r_plus - prod) / max(abs(prod), 1.0),
            abs(r.r_minus + r.r_plus - s) / max(abs(s), abs(r.r_minus), abs(r.r_plus)),
        )
        if abs(cmath.phase(r.A)) > math.pi / 4 + 1e-12:
            return False, f"arg A = {cmath.phase(r.A):.6f} outside [-pi/4, pi/4]"
    return worst < 1e-12, f"max root identity error = {worst:.2e}"


def check_factorization():
    rng = np.random.default_rng(3)
    worst = 0.0
    for m, a in _random_params(rng, 500):
        h = complex(rng.normal(), rng.normal()) * 3
        r = riccati_roots(m, a)
        f = riccati_rhs(m, a, h)
        g = 0.5 * (m.nu * h - r.r_minus) * (m.nu * h - r.r_plus)
        worst = max(worst, abs(f - g) / (max(abs(f), 1.0) * (1 + abs(h) ** 2)))
    return worst < 1e-12, f"max factorization gap = {worst:.2e}"


def check_classical_residual():
    m = ModelParams(0.5, 0.4, -0.65, 1.0)
    t = np.linspace(0.01, 10.0, 400)
    d = 1e-5
    deriv = (classical_h(m, REFERENCE_A, t + d) - classical_h(m, REFERENCE_A, t - d)) / (2 * d)
    rhs = riccati_rhs(m, REFERENCE_A, classical_h(m, REFERENCE_A, t))
    worst = float(np.max(np.abs(deriv - rhs)) / np.max(np.abs(rhs)))
    return worst < 1e-6, f"relative ODE residual = {worst:.2e}"


def check_small_time_slope():
    m, a, n = REFERENCE_PARAMS, REFERENCE_A, 3
    s = small_time_coeffs(m, a, n)
    from .series_expansions import eval_series

    t = np.logspace(-4, -2, 20)
    res = np.abs(dalpha_series(s, t) - riccati_rhs(m, a, eval_series(s, t)))
    slope = np.polyfit(np.log(t), np.log(res), 1)[0]
    return abs(slope - n * m.alpha) < 0.2, f"slope {slope:.3f} vs {n * m.alpha:.3f}"


def check_pade_match():
    worst = 0.0
    for m, a in _random_params(np.random.default_rng(4), 100):
        for n in (2, 3, 4, 5):
            worst = max(worst, series_match_check(build_pade(m, a, n)).mismatch)
    return worst < 1e-9, f"max coefficient mismatch = {worst:.2e}"


def check_adams_classical():
    m = ModelParams(0.5, 0.4, -0.65, 0.0)
    g = adams_solve(m, REFERENCE_A, 10.0, 400)
    err = float(np.max(np.abs(g.h - classical_h(m, REFERENCE_A, g.t))))
    return err < 1e-3, f"Adams(400) vs closed form = {err:.2e}"


def check_martingale():
    xi = ForwardVarianceCurve.flat(0.04)
    worst = 0.0
    for m, _ in _random_params(np.random.default_rng(5), 10):
        for meth in (Pade(5), Adams(200)):
            worst = max(worst, abs(cgf_batch(m, np.array([-1j]), 1.0, xi, meth)[0]))
    return worst < 1e-8, f"max |cgf(-i)| = {worst:.2e}"


def check_bs_roundtrip():
    err = abs(implied_vol(1.0, 1.0, 1.0, bs_price(1.0, 1.0, 1.0, 0.2)) - 0.2)
    return err < 1e-9, f"round trip error = {err:.2e}"


CHECKS = [
    ("special_fn.reciprocal_gamma_identity", check_reciprocal_gamma),
    ("special_fn.exp_limit", check_exp_limit),
    ("special_fn.handoff_continuity", check_handoff),
    ("model_core.sector", check_sector),
    ("model_core.root_identities", check_roots),
    ("model_core.factorization", check_factorization),
    ("model_core.classical_residual", check_classical_residual),
    ("series.small_time_residual_order", check_small_time_slope),
    ("pade.two_point_match", check_pade_match),
    ("adams.classical_reduction", check_adams_classical),
    ("pricer.martingale", check_martingale),
    ("pricer.bs_roundtrip", check_bs_roundtrip),
]


def run_selftest(out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    failures = 0
    for name, check in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        failures += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}", file=out)
        print(f"{name}: {dt:.3f}s", file=err)
    print(f"{len(CHECKS) - failures}/{len(CHECKS)} passed", file=out)
    return 1 if failures else 0
