import numpy as np
import pytest

from mlrh.errors import DegenerateError, DomainError, PoleError, SingularSystemError
from mlrh.experiments import h_curve, log_grid
from mlrh.model_core import REFERENCE_A, REFERENCE_PARAMS, ModelParams
from mlrh.pade import (
    MATCH_TOL,
    RationalApproximant,
    build_pade,
    eval_pade,
    eval_pade_y,
    pade_from_series,
    pade_system,
    pole_scan,
    scaled_coefficients,
    series_match_check,
)
from mlrh.series_expansions import large_time_coeffs, small_time_coeffs

from conftest import draw_params


def _approximant(q, p=None, alpha=1.0, nu=1.0):
    q = tuple(complex(c) for c in q)
    p = tuple(complex(c) for c in (p or [0] * len(q)))
    return RationalApproximant(len(q) - 1, p, q, alpha, nu)


# ---------------------------------------------------------------- construction


def test_n1_hand_solution():
    beta, gamma = [0.3 - 0.2j], [1.5 + 0.5j]
    r = pade_from_series(beta, gamma, 0.6, 0.4)
    assert r.p[1] == pytest.approx(beta[0], rel=1e-15)
    assert r.q[1] == pytest.approx(beta[0] / gamma[0], rel=1e-15)
    assert series_match_check(r).mismatch < 1e-14


def test_n1_evaluation_example():
    r = pade_from_series([1.0], [2.0], 1.0, 1.0)
    assert eval_pade_y(r, 2.0) == pytest.approx(1.0, rel=1e-15)


def test_zero_argument_gives_zero_approximant():
    r = build_pade(REFERENCE_PARAMS, 0, 5)
    assert r.is_zero
    assert series_match_check(r).mismatch == 0
    assert np.all(eval_pade(r, np.array([0.0, 0.5, 30.0])) == 0)


def test_reference_point_match():
    r = build_pade(REFERENCE_PARAMS, REFERENCE_A, 5)
    assert series_match_check(r).mismatch < MATCH_TOL


def test_system_layout_n2():
    beta, gamma = [1.0, 2.0], [3.0, 4.0]
    M, rhs = pade_system(beta, gamma)
    # unknowns p1 p2 q1 q2
    np.testing.assert_array_equal(M[0], [1, 0, 0, 0])
    np.testing.assert_array_equal(M[1], [0, 1, -1, 0])
    np.testing.assert_array_equal(M[2], [0, 1, 0, -3])
    np.testing.assert_array_equal(M[3], [1, 0, -3, -4])
    np.testing.assert_array_equal(rhs, [1, 2, 0, 0])


def test_uses_the_right_series():
    m, a, n = ModelParams(0.2, 0.7, -0.3, 2.0), 4 - 0.5j, 4
    beta, gamma = scaled_coefficients(m, a, n)
    b = np.array(small_time_coeffs(m, a, n).coeffs)
    g = np.array(large_time_coeffs(m, a, n - 1).coeffs)
    np.testing.assert_allclose(beta, b / m.nu ** np.arange(1, n + 1), rtol=1e-15)
    np.testing.assert_allclose(gamma, g * m.nu ** np.arange(n), rtol=1e-15)


def test_singular_system():
    with pytest.raises(SingularSystemError):
        pade_from_series([1.0, 0.0], [0.0, 0.0], 0.6, 1.0)


def test_order_and_domain_checks():
    with pytest.raises(ValueError):
        build_pade(REFERENCE_PARAMS, REFERENCE_A, 9)
    with pytest.raises(DomainError):
        build_pade(REFERENCE_PARAMS, 1 + 1j, 3)
    with pytest.raises(DegenerateError):
        build_pade(ModelParams(0.2, 1.0, 0.0, 0.0), -1j, 3)


def test_boundary_h_zero_is_buildable():
    m = ModelParams(0.0, 0.4, -0.65, 1.0)
    r = build_pade(m, REFERENCE_A, 5)
    assert r.alpha == 0.5
    assert series_match_check(r).passed
    t = log_grid(0.01, 10, 50)
    ref = h_curve(m, REFERENCE_A, "adams:2000", t)
    assert np.max(np.abs(eval_pade(r, t) - ref)) < 1e-2


def test_match_certificate_500_draws():
    fails = []
    for m, a in draw_params(np.random.default_rng(5), 500):
        for n in (2, 3, 4, 5):
            rep = series_match_check(build_pade(m, a, n))
            if not rep.passed:
                fails.append((m, a, n, rep.mismatch))
    assert fails == []


def test_extended_precision_fallback():
    # q_5 is tiny here, so the expansion at infinity amplifies rounding in q by
    # roughly |q_4/q_5|^k; double-precision coefficients cannot certify it
    m = ModelParams(H=0.048345576349148434, nu=1.7986914680932446, rho=0.7240092000037225, lam=1.805919205821258)
    a = 0.06756914664938884 - 0.4590302742422119j
    r = build_pade(m, a, 5)
    assert r.hp is not None
    assert series_match_check(r).mismatch < 1e-12
    plain = RationalApproximant(r.n, r.p, r.q, r.alpha, r.nu, r.beta, r.gamma)
    assert series_match_check(plain).mismatch > MATCH_TOL
    # the double-precision coefficients used for evaluation still give the function
    t = np.array([0.01, 1.0, 10.0])
    np.testing.assert_allclose(eval_pade(r, t), eval_pade(plain, t), rtol=0, atol=1e-14)


# ---------------------------------------------------------------- evaluation


def test_eval_at_zero_is_exact():
    r = build_pade(REFERENCE_PARAMS, REFERENCE_A, 4)
    assert eval_pade(r, 0.0) == 0
    assert eval_pade(r, np.array([0.0, 1.0]))[0] == 0


def test_pole_error():
    r = _approximant([1, -1], [0, 1])
    with pytest.raises(PoleError):
        eval_pade_y(r, 1.0)


def test_asymptote_at_large_t():
    # at t = 1e6 the gap to g_0 is the next term gamma_1 / y, which can exceed
    # 1e-4 when nu is small and alpha is near 1/2; remove it and check the rest
    worst_second, worst_far, over = 0.0, 0.0, 0
    for m, a in draw_params(np.random.default_rng(7), 500):
        for n in (2, 3, 4, 5):
            r = build_pade(m, a, n)
            if r.q[-1] == 0:
                continue
            g0 = r.gamma[0]
            y = m.nu * 1e6**m.alpha
            dev = abs(eval_pade(r, 1e6) - g0) / (1 + abs(g0))
            over += dev >= 1e-4
            worst_second = max(worst_second, abs(eval_pade(r, 1e6) - g0 - r.gamma[1] / y) / (1 + abs(g0)))
            worst_far = max(worst_far, abs(eval_pade(r, 1e8) - g0) / (1 + abs(g0)))
    assert worst_second < 1e-6
    assert worst_far < 1e-4
    assert over < 0.05 * 2000


def test_scale_covariance_bitwise():
    beta, gamma = [0.1 - 0.3j, 0.02j, -0.01], [-2 + 0.5j, 0.4, 0.1j]
    r1 = pade_from_series(beta, gamma, 0.6, 0.4)
    r2 = pade_from_series(beta, gamma, 0.8, 1.7)
    for y in (0.0, 0.3, 2.0, 50.0):
        t1 = (y / 0.4) ** (1 / 0.6)
        assert eval_pade_y(r1, y) == eval_pade_y(r2, y)
        assert abs(eval_pade(r1, t1) - eval_pade_y(r1, y)) < 1e-14 * (1 + abs(eval_pade_y(r1, y)))


def test_order_monotonicity_at_reference_point():
    t = log_grid(0.01, 10, 200)
    m, a = REFERENCE_PARAMS, REFERENCE_A
    errs = {}
    for N in (1000, 4000):
        ref = h_curve(m, a, f"adams:{N}", t)
        errs[N] = [np.max(np.abs(h_curve(m, a, f"pade{n}", t) - ref)) for n in (2, 3, 4, 5)]
    # against Adams(4000) the order ranking is resolved strictly
    assert all(x > y for x, y in zip(errs[4000], errs[4000][1:]))
    # n = 4 and 5 both sit at Adams(1000)'s own error floor (~3.4e-3); equal within 1e-6
    assert all(y <= x + 1e-6 for x, y in zip(errs[1000], errs[1000][1:]))


@pytest.mark.xfail(strict=True, reason="the gamma_1 / y term alone exceeds 1e-4 at t=1e6 for some draws; see decisions ledger")
def test_asymptote_within_1e4_at_one_million():
    for m, a in draw_params(np.random.default_rng(7), 500):
        for n in (2, 3, 4, 5):
            r = build_pade(m, a, n)
            if r.q[-1] != 0:
                g0 = r.gamma[0]
                assert abs(eval_pade(r, 1e6) - g0) < 1e-4 * (1 + abs(g0))


@pytest.mark.xfail(strict=True, reason="orders 4 and 5 both sit at the Adams(1000) floor, order 5 higher by 5.7e-8; see decisions ledger")
def test_order_monotonicity_against_adams_1000_exact():
    t = log_grid(0.01, 10, 200)
    ref = h_curve(REFERENCE_PARAMS, REFERENCE_A, "adams:1000", t)
    errs = [np.max(np.abs(h_curve(REFERENCE_PARAMS, REFERENCE_A, f"pade{n}", t) - ref)) for n in (2, 3, 4, 5)]
    assert all(y <= x for x, y in zip(errs, errs[1:]))


# ---------------------------------------------------------------- pole scan


def test_pole_scan_examples():
    assert pole_scan(_approximant([1, 1]), 5.0) == []
    assert pole_scan(_approximant([1, -1]), 5.0) == [pytest.approx(1.0, abs=1e-8)]
    found = pole_scan(_approximant([1, -3, 2]), 5.0)
    assert found == [pytest.approx(0.5, abs=1e-7), pytest.approx(1.0, abs=1e-7)]


def test_pole_scan_ignores_complex_roots():
    # roots at 1 +- 0.1i: |Q| dips but never vanishes on the real axis
    assert pole_scan(_approximant([1.01, -2, 1]), 5.0) == []


def test_pole_scan_sweep_reference_params():
    bad = []
    for u in np.linspace(0, 100, 201):
        found = pole_scan(build_pade(REFERENCE_PARAMS, u - 0.5j, 5))
        if found:
            bad.append((u, found))
    assert bad == []
