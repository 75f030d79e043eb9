import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn
from scipy.stats import norm

from mlrh.adams import adams_solve
from mlrh.errors import DomainError, NoSolutionError
from mlrh.model_core import REFERENCE_A, REFERENCE_PARAMS, ModelParams
from mlrh.pade import build_pade, eval_pade
from mlrh.pricer import (
    Adams,
    Classical,
    Deterministic,
    ForwardVarianceCurve,
    Pade,
    bs_price,
    cgf,
    cgf_batch,
    g_from_h,
    implied_vol,
    lewis_call,
    lewis_integral,
    lewis_put,
    parse_method,
    smile,
)

from conftest import draw_params

FLAT = ForwardVarianceCurve.flat(0.04)
BS_LIMIT = ModelParams(H=0.05, nu=1e-4, rho=0.0, lam=0.0)


def bs_oracle(S, K, T, vol):
    sd = vol * math.sqrt(T)
    d1 = math.log(S / K) / sd + 0.5 * sd
    return S * norm.cdf(d1) - K * norm.cdf(d1 - sd)


def l1_derivative(h, dt, alpha):
    """L1 Caputo derivative of grid values ``h`` (with ``h[0] = 0``)."""
    n = len(h) - 1
    j = np.arange(n)
    b = (j + 1) ** (1 - alpha) - j ** (1 - alpha)
    dh = np.diff(h)
    out = np.zeros(n + 1, dtype=complex)
    for k in range(1, n + 1):
        out[k] = np.dot(b[:k], dh[k - 1 :: -1])
    return out * dt**-alpha / gamma_fn(2 - alpha)


# ---------------------------------------------------------------- curve


def test_curve_validation():
    with pytest.raises(DomainError):
        ForwardVarianceCurve((0.0, 1.0), (0.04,))
    with pytest.raises(DomainError):
        ForwardVarianceCurve((0.0,), (-0.01,))
    with pytest.raises(DomainError):
        ForwardVarianceCurve((0.0, 1.0, 1.0), (0.04, 0.05, 0.06))
    with pytest.raises(DomainError):
        ForwardVarianceCurve((), ())


def test_curve_piecewise_values_and_integral():
    xi = ForwardVarianceCurve((0.0, 0.5, 2.0), (0.04, 0.09, 0.01))
    assert xi(0.25) == 0.04 and xi(0.5) == 0.09 and xi(5.0) == 0.01
    assert xi.integral(1.0) == pytest.approx(0.5 * 0.04 + 0.5 * 0.09, abs=1e-15)
    assert xi.integral(3.0) == pytest.approx(0.02 + 1.5 * 0.09 + 0.01, abs=1e-15)


def test_piecewise_curve_cgf_against_adaptive_quadrature():
    xi = ForwardVarianceCurve((0.0, 0.3, 0.7), (0.04, 0.09, 0.02))
    m, a, T = REFERENCE_PARAMS, REFERENCE_A, 1.0
    r = build_pade(m, a, 5)

    def f(tau, part):
        v = xi(T - tau) * g_from_h(m, a, eval_pade(r, tau))
        return getattr(v, part)

    pts = [T - 0.7, T - 0.3]
    ref = complex(quad(f, 0, T, args=("real",), points=pts, epsabs=1e-13, limit=200)[0],
                  quad(f, 0, T, args=("imag",), points=pts, epsabs=1e-13, limit=200)[0])
    got = cgf_batch(m, np.array([a]), T, xi, Pade(5))[0]
    assert abs(got - ref) < 1e-10 * abs(ref)
    zero_h = cgf(m, a, T, xi, lambda t: np.zeros_like(t, dtype=complex))
    assert zero_h == pytest.approx(-0.5 * a * (a + 1j) * xi.integral(T), rel=1e-13)


# ---------------------------------------------------------------- g and cgf


def test_g_from_h_examples():
    assert g_from_h(REFERENCE_PARAMS, 0j, 0j) == 0
    a = 2 - 0.3j
    assert g_from_h(REFERENCE_PARAMS, a, 0j) == -0.5 * a * (a + 1j)


def test_cgf_zero_argument():
    for meth in (Pade(5), Adams(200)):
        assert abs(cgf_batch(REFERENCE_PARAMS, np.array([0j]), 1.0, FLAT, meth)[0]) == 0.0


def test_martingale_over_draws(rng):
    worst = 0.0
    for m, _ in draw_params(rng, 100):
        for meth in (Pade(5), Adams(200)):
            worst = max(worst, abs(cgf_batch(m, np.array([-1j]), 1.0, FLAT, meth)[0]))
    assert worst < 1e-8


def test_cgf_pade_versus_adams_gap_is_pade_limited():
    a = np.array([REFERENCE_A])
    p = cgf_batch(REFERENCE_PARAMS, a, 1.0, FLAT, Pade(5))[0]
    a1 = cgf_batch(REFERENCE_PARAMS, a, 1.0, FLAT, Adams(1000))[0]
    a4 = cgf_batch(REFERENCE_PARAMS, a, 1.0, FLAT, Adams(4000))[0]
    # the Adams benchmark has converged well below the gap to order 5
    assert abs(a1 - a4) / abs(a4) < 2e-6
    assert abs(p - a1) / abs(a1) < 5e-5


@pytest.mark.xfail(strict=True, reason="order-5 approximant error is 2.5e-5 relative here; see decisions ledger")
def test_cgf_pade_versus_adams_within_1e5():
    a = np.array([REFERENCE_A])
    p = cgf_batch(REFERENCE_PARAMS, a, 1.0, FLAT, Pade(5))[0]
    b = cgf_batch(REFERENCE_PARAMS, a, 1.0, FLAT, Adams(1000))[0]
    assert abs(p - b) / abs(b) < 1e-5


def _l1_gap(N):
    m, a, T = REFERENCE_PARAMS, REFERENCE_A, 1.0
    g = adams_solve(m, a, T, N)
    lhs = g_from_h(m, a, g.h)
    rhs = l1_derivative(g.h, T / N, m.alpha) + m.lam * g.h
    return g.t, np.abs(lhs - rhs)


def test_g_consistency_with_l1_derivative():
    # the L1 scheme loses accuracy next to t = 0 on the t^alpha start of h;
    # away from it the gap is below 1e-4 and shrinks with N
    t, gap = _l1_gap(1000)
    assert np.max(gap[t >= 0.5]) < 1e-4
    t2, gap2 = _l1_gap(2000)
    assert np.max(gap2[t2 >= 0.1]) < 0.5 * np.max(gap[t >= 0.1])


@pytest.mark.xfail(strict=True, reason="L1 start-up error on t^alpha reaches O(1) at the first step; see decisions ledger")
def test_g_consistency_with_l1_derivative_whole_grid():
    t, gap = _l1_gap(1000)
    assert np.max(gap[1:]) < 1e-4


# ---------------------------------------------------------------- Black-Scholes


def test_bs_price_oracle():
    assert bs_price(1, 1, 1, 0.2) == pytest.approx(0.0796556745, abs=1e-10)
    for K, T, v in [(0.8, 0.5, 0.3), (1.3, 2.0, 0.15), (1.0, 0.1, 0.6)]:
        assert bs_price(1, K, T, v) == pytest.approx(bs_oracle(1, K, T, v), abs=1e-14)


def test_implied_vol_round_trip():
    assert abs(implied_vol(1, 1, 1, bs_price(1, 1, 1, 0.2)) - 0.2) < 1e-9
    for K in (0.5, 0.8, 1.0, 1.2, 2.0):
        for T in (0.1, 1.0, 5.0):
            for v in (0.05, 0.2, 0.8):
                c = bs_price(1, K, T, v)
                if c - max(1 - K, 0) > 1e-9:
                    assert abs(bs_price(1, K, T, implied_vol(1, K, T, c)) - c) < 1e-10


def test_implied_vol_bounds():
    assert implied_vol(1, 0.9, 1, 0.1) == 0.0
    with pytest.raises(NoSolutionError):
        implied_vol(1, 0.9, 1, 0.05)
    with pytest.raises(NoSolutionError):
        implied_vol(1, 1.0, 1, 1.0)


# ---------------------------------------------------------------- Lewis


def test_deterministic_path_is_black_scholes():
    for K in (0.8, 1.0, 1.2):
        c = lewis_call(None, FLAT, 1, K, 1.0, Deterministic())
        assert c == pytest.approx(bs_price(1, K, 1.0, 0.2), abs=1e-9)


def test_bs_limit_price():
    c = lewis_call(BS_LIMIT, FLAT, 1, 1, 1.0, Pade(5))
    assert abs(c - bs_price(1, 1, 1, 0.2)) < 1e-4


def test_bs_limit_flat_smile():
    rows = smile(BS_LIMIT, FLAT, 1.0, [0.8, 0.9, 1.0, 1.1, 1.2], [0.25, 1.0], Pade(5))
    assert all(abs(r["implied_vol"] - 0.2) < 1e-3 for r in rows)


def test_deep_in_the_money_limit():
    assert lewis_call(REFERENCE_PARAMS, FLAT, 1, 1e-6, 1.0, Pade(5)) == pytest.approx(1.0, abs=1e-5)


def test_put_call_parity():
    for K in (0.8, 1.0, 1.25):
        c = lewis_call(REFERENCE_PARAMS, FLAT, 1, K, 1.0, Pade(5))
        p = lewis_put(REFERENCE_PARAMS, FLAT, 1, K, 1.0, Pade(5))
        assert abs(c - p - (1 - K)) < 1e-8


def test_lewis_meets_tolerance_before_cutoff():
    res = lewis_integral(REFERENCE_PARAMS, FLAT, 1, [1.0], 1.0, Pade(5))
    assert res.error_estimate < 1e-8
    assert res.u_end <= 500


def test_lewis_argument_checks():
    with pytest.raises(DomainError):
        lewis_call(REFERENCE_PARAMS, FLAT, 1, -1, 1.0, Pade(5))
    with pytest.raises(DomainError):
        lewis_call(REFERENCE_PARAMS, FLAT, 1, 1, 0.0, Pade(5))


def test_classical_case_adams_matches_closed_form():
    m = ModelParams(H=0.5, nu=0.4, rho=-0.65, lam=1.0)
    c_ref = lewis_call(m, FLAT, 1, 1, 1.0, Classical())
    assert abs(lewis_call(m, FLAT, 1, 1, 1.0, Adams(1000)) - c_ref) < 1e-7


def test_method_coherence_decreases_with_order():
    ref = lewis_call(REFERENCE_PARAMS, FLAT, 1, 1, 1.0, Adams(1000))
    gaps = [abs(lewis_call(REFERENCE_PARAMS, FLAT, 1, 1, 1.0, Pade(n)) - ref) for n in (2, 3, 4, 5)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5


def test_price_monotone_in_strike():
    Ks = np.linspace(0.6, 1.6, 21)
    calls = lewis_integral(REFERENCE_PARAMS, FLAT, 1, Ks, 0.5, Pade(5)).calls
    assert np.all(np.diff(calls) <= 1e-12)
    assert np.all(calls >= np.maximum(1 - Ks, 0)) and np.all(calls <= 1)


# ---------------------------------------------------------------- smiles


@pytest.fixture(scope="module")
def reference_smiles():
    Ks, Ts = [0.8, 1.0, 1.2], [0.1, 1.0]
    out = {}
    for meth in (Pade(5), Adams(1000)):
        out[meth.name] = {(r["maturity"], r["strike"]): r for r in smile(REFERENCE_PARAMS, FLAT, 1.0, Ks, Ts, meth)}
    return out


def test_smile_rows_ordered_and_clean(reference_smiles):
    keys = list(reference_smiles["pade5"])
    assert keys == sorted(keys)
    for rows in reference_smiles.values():
        assert all(r["error"] == "" and 0 < r["implied_vol"] < 5 for r in rows.values())


def test_negative_skew_at_short_maturity():
    rows = smile(REFERENCE_PARAMS, FLAT, 1.0, [0.95, 1.0], [0.1], Pade(5))
    dk = math.log(1.0) - math.log(0.95)
    assert (rows[1]["implied_vol"] - rows[0]["implied_vol"]) / dk < 0


def test_smile_gap_pade_versus_adams(reference_smiles):
    # every cell but the far out-of-the-money short-dated one is within 1e-4
    gaps = {k: abs(reference_smiles["pade5"][k]["implied_vol"] - reference_smiles["adams:1000"][k]["implied_vol"]) for k in reference_smiles["pade5"]}
    assert max(v for k, v in gaps.items() if k != (0.1, 1.2)) < 1e-4
    assert abs(reference_smiles["pade5"][(0.1, 1.2)]["price"] - reference_smiles["adams:1000"][(0.1, 1.2)]["price"]) < 5e-6


@pytest.mark.xfail(strict=True, reason="order-5 error at K=1.2, T=0.1 moves the implied vol by 2.7e-3; see decisions ledger")
def test_smile_gap_within_1e3(reference_smiles):
    gaps = [abs(reference_smiles["pade5"][k]["implied_vol"] - reference_smiles["adams:1000"][k]["implied_vol"]) for k in reference_smiles["pade5"]]
    assert max(gaps) < 1e-3


def test_smile_records_cell_errors():
    rows = smile(REFERENCE_PARAMS, FLAT, 1.0, [1.0], [0.5], parse_method("classical"))
    assert rows[0]["error"].startswith("DomainError")
    assert math.isnan(rows[0]["implied_vol"])


def test_parse_method():
    assert parse_method("pade3") == Pade(3)
    assert parse_method("adams:250") == Adams(250)
    assert parse_method("adams") == Adams(1000)
    assert isinstance(parse_method("deterministic"), Deterministic)
    with pytest.raises(ValueError):
        parse_method("euler")
