import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate

from lcl_lab import DomainError, ToleranceError, make_group
from lcl_lab.profiles import ExpPower, PowerLaw, cutoff_power_tail, indicator, product
from lcl_lab.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureSpec,
    gk_integrate,
    integrate,
    log_mean_inner,
    log_mean_numeric,
    log_tail_integrals,
    outer_integral,
)

NUMERIC = QuadratureSpec(closed_forms="none")


def test_gauss_nodes_match_legendre():
    x, w = np.polynomial.legendre.leggauss(7)
    assert np.allclose(np.sort(NODES[1::2]), np.sort(x), atol=1e-15)
    assert np.allclose(GAUSS_WEIGHTS, w[np.argsort(x)], atol=1e-15)
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_exact_to_degree_22(deg):
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert KRONROD_WEIGHTS @ NODES ** deg == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("deg", range(0, 14))
def test_gauss_exact_to_degree_13(deg):
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert GAUSS_WEIGHTS @ NODES[1::2] ** deg == pytest.approx(exact, abs=1e-14)


def test_gauss_not_exact_at_degree_14():
    assert abs(GAUSS_WEIGHTS @ NODES[1::2] ** 14 - 2 / 15) > 1e-6


@pytest.mark.parametrize("fn,lo,hi", [
    (np.sin, 0.0, 10.0),
    (lambda x: np.exp(-x * x), -5.0, 5.0),
    (lambda x: 1.0 / (1.0 + 25 * x * x), -1.0, 1.0),
    (np.sqrt, 0.0, 2.0),
])
def test_integrate_agrees_with_scipy(fn, lo, hi):
    ours, err = integrate(fn, lo, hi, rel_tol=1e-12)
    ref, _ = sp_integrate.quad(fn, lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert ours == pytest.approx(ref, rel=1e-10, abs=1e-13)
    assert err < 1e-9


def test_panel_budget_raises_tolerance_error():
    with pytest.raises(ToleranceError) as info:
        gk_integrate(lambda x: np.sin(1.0 / np.maximum(x, 1e-12)), [1e-6, 1.0],
                     rel_tol=1e-14, max_panels=20)
    assert math.isfinite(info.value.estimate)


def test_breaks_must_increase():
    with pytest.raises(DomainError):
        gk_integrate(np.sin, [1.0, 0.0], rel_tol=1e-8)


def test_results_are_deterministic():
    h = product(PowerLaw(-2.5), ExpPower(-0.3, 0.7))
    G = make_group("euclidean", 1)
    first = outer_integral(h, G, 0.5, NUMERIC)
    for _ in range(3):
        assert outer_integral(h, G, 0.5, NUMERIC) == first


@pytest.mark.parametrize("closed", ["all", "none"])
def test_outer_integral_examples(closed):
    spec = QuadratureSpec(closed_forms=closed)
    assert outer_integral(indicator(0.0, 1.0), 3.0, 0.0, spec).value == pytest.approx(1 / 3, rel=1e-9)
    assert outer_integral(PowerLaw(-5.0), 2.0, 1.0, spec).value == pytest.approx(1 / 3, rel=1e-9)
    res = outer_integral(PowerLaw(-1.0), 1.0, 0.0, spec)
    assert not res.finite and math.isinf(res.value)


def test_outer_integral_divergence_endpoints():
    assert outer_integral(PowerLaw(-3.0), 2.0, 0.0, NUMERIC).divergence == "0"
    assert outer_integral(PowerLaw(-1.0), 2.0, 1.0, NUMERIC).divergence == "inf"
    assert outer_integral(ExpPower(0.1, 1.0), 1.0, 1.0, NUMERIC).divergence == "inf"
    assert outer_integral(ExpPower(-1.0, 1.0), 1.0, 0.0, NUMERIC).finite


def test_outer_integral_of_gaussian_against_mpmath():
    for Q in (0.5, 1.0, 2.0, 7.3):
        res = outer_integral(ExpPower(-1.0, 2.0), Q, 0.0, NUMERIC)
        ref = float(mpmath.gamma(Q / 2) / 2)
        assert res.value == pytest.approx(ref, rel=1e-9)


def test_outer_integral_handles_huge_magnitudes():
    # int_0^inf r^{Q-1} e^{-r} dr = Gamma(Q) overflows doubles for Q = 200
    res = outer_integral(ExpPower(-1.0, 1.0), 200.0, 0.0, NUMERIC)
    assert res.log_value == pytest.approx(math.lgamma(200.0), rel=1e-10)
    assert math.isinf(res.value)


def test_truncation_policy_moves_tail_into_error():
    h = PowerLaw(-3.0)
    full = outer_integral(h, 1.0, 1.0, NUMERIC)
    cut = outer_integral(h, 1.0, 1.0, NUMERIC.with_(tail_policy="truncate_with_bound", r_max_hint=1e3))
    assert cut.value < full.value
    assert full.value - cut.value <= cut.error * (1 + 1e-6)


@settings(max_examples=40, deadline=None)
@given(Q=st.floats(0.3, 6), c=st.floats(0.2, 6), R=st.floats(0.05, 20))
def test_power_tail_matches_closed_form(Q, c, R):
    # int_R^inf r^{-Q-c} r^{Q-1} dr = R^{-c}/c
    res = outer_integral(PowerLaw(-Q - c), Q, R, NUMERIC)
    assert res.value == pytest.approx(R ** -c / c, rel=1e-8)


@pytest.mark.parametrize("closed", ["all", "none"])
def test_log_tail_integrals(closed):
    spec = QuadratureSpec(closed_forms=closed)
    h = cutoff_power_tail(2.0, 1.0, 4.0)  # 1 on (0,2], r^-4 after
    radii = np.geomspace(0.1, 50.0, 40)
    got = np.exp(log_tail_integrals(h, 2.0, radii, spec))
    # head (4 - R^2)/2 below the knot, tail int_R^inf r^-3 dr = 1/(2 R^2) above it
    ref = np.where(radii < 2, (4 - radii ** 2) / 2 + 0.125, 0.5 / radii ** 2)
    assert np.allclose(got, ref, rtol=1e-8, atol=0)


def test_log_tail_integrals_divergent_and_validation():
    assert np.all(np.isinf(log_tail_integrals(PowerLaw(-1.0), 1.0, [1.0, 2.0], NUMERIC)))
    with pytest.raises(DomainError):
        log_tail_integrals(PowerLaw(-3.0), 1.0, [2.0, 1.0])


def test_log_mean_numeric_against_scipy():
    f = product(PowerLaw(0.7), ExpPower(0.4, 1.3))
    for r in (0.01, 1.0, 30.0):
        for m in (0.5, 1.0, 3.0):
            ours = log_mean_numeric(f, r, m, NUMERIC)
            # t^(m-1) ln f(rt) = t^(m-1) (0.7 ln r + 0.7 ln t + 0.4 (rt)^1.3)
            ref = m * sp_integrate.quad(
                lambda t: t ** (m - 1) * (0.7 * math.log(r * t) + 0.4 * (r * t) ** 1.3),
                0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
            assert ours == pytest.approx(ref, rel=1e-9, abs=1e-11)


def test_log_mean_inner_closed_and_numeric_agree():
    f = cutoff_power_tail(1.5, 2.0, 3.0)
    for r in (0.3, 1.5, 4.0):
        a = log_mean_inner(f, r, 2.0, QuadratureSpec())
        b = log_mean_inner(f, r, 2.0, NUMERIC)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_log_mean_rejects_bad_arguments():
    with pytest.raises(DomainError):
        log_mean_numeric(PowerLaw(1.0), 0.0, 1.0)
    with pytest.raises(DomainError):
        log_mean_inner(PowerLaw(1.0), 1.0, -1.0)


def test_spec_validation():
    for bad in (dict(rel_tol=0), dict(max_subdivisions=0), dict(r_min_hint=10, r_max_hint=1),
                dict(tail_policy="guess"), dict(closed_forms="some")):
        with pytest.raises(DomainError):
            QuadratureSpec(**bad)


@pytest.mark.parametrize("spec", [QuadratureSpec(), NUMERIC], ids=["closed", "numeric"])
def test_log_mean_inner_examples(spec):
    assert log_mean_inner(PowerLaw(0.0), 3.0, 2.0, spec) == pytest.approx(0.0, abs=1e-12)
    assert log_mean_inner(PowerLaw(2.0), 1.0, 1.0, spec) == pytest.approx(-2.0, rel=1e-10)
    f = cutoff_power_tail(1.0, 1.0, 3.0)
    assert log_mean_inner(f, 2.0, 2.0, spec) == pytest.approx(-3 * (2 * math.log(2) - 0.75), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-3, 3), gamma=st.floats(-2, 3), m=st.floats(0.3, 6), r=st.floats(0.05, 30))
def test_adaptive_matches_closed_log_mean(c, gamma, m, r):
    f = product(PowerLaw(c), cutoff_power_tail(1.1, 2.0, gamma))
    closed = log_mean_inner(f, r, m, QuadratureSpec())
    numeric = log_mean_inner(f, r, m, NUMERIC)
    assert numeric == pytest.approx(closed, rel=1e-8, abs=1e-11 * max(1.0, r ** m))


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0.01, 100), m=st.floats(0.3, 6), r=st.floats(0.05, 30))
def test_log_mean_inner_scaling(lam, m, r):
    f = product(PowerLaw(0.8), ExpPower(0.3, 0.5))
    base = log_mean_inner(f, r, m, NUMERIC)
    scaled = log_mean_inner(product(f, PowerLaw(0.0, math.log(lam))), r, m, NUMERIC)
    assert scaled == pytest.approx(base + math.log(lam) * r ** m / m, rel=1e-10, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(-3, 3), lam=st.floats(0.1, 10), m=st.floats(0.3, 5), r=st.floats(0.1, 10))
def test_log_mean_inner_dilation(c, lam, m, r):
    f = PowerLaw(c)
    lhs = log_mean_inner(f, lam * r, m, NUMERIC)
    rhs = lam ** m * (log_mean_inner(f, r, m, NUMERIC) + c * math.log(lam) * r ** m / m)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.01, 5), width=st.floats(0.1, 50), Q=st.floats(0.5, 4))
def test_outer_integral_additive(a, width, Q):
    b = a + width
    h = product(PowerLaw(-Q - 1.5), ExpPower(-0.2, 0.5))
    whole = outer_integral(h, Q, a, NUMERIC).value
    tail = outer_integral(h, Q, b, NUMERIC).value
    head, _ = integrate(lambda r: h(r) * r ** (Q - 1), a, b, rel_tol=1e-12)
    assert whole == pytest.approx(head + tail, rel=1e-8)
