"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` to see the summary lines.
"""

import json
import math

import numpy as np

from lcl_lab import (
    BallPowerWeight,
    CustomWeight,
    ExpPower,
    ExpPowerWeight,
    InequalityParams,
    PowerLaw,
    QuadratureSpec,
    A_alpha,
    A_alpha_power_closed,
    check_beta_reduction,
    check_duality,
    constant_bounds,
    criterion_curve,
    cutoff_power_tail,
    evaluate_inequality,
    forward_mean,
    make_group,
    matched_weight,
    product,
    sharpness_probe_dual,
    sharpness_probe_power,
    verify_matched,
    verify_multinomial,
)
from lcl_lab.cli import main
from lcl_lab.criterion import power_infimum_closed, power_infimum_numeric
from lcl_lab.verifier import (
    default_gamma_sequence,
    extremal_norms_closed,
    matched_probe_profile,
    multinomial_probe_profile,
)

SHARP_TRIPLES = [(0.5, 2.0, 4.0), (1.0, 1.0, 1.0), (-0.5, 0.7, 3.0)]


def report(n, ok, detail=""):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, f"criterion {n} failed: {detail}"


def rel(x, y):
    return abs(x - y) / abs(y)


def custom(Q):
    return make_group("custom", Q, 2.0)


def test_criterion_01_normalization():
    worst = 0.0
    for beta in (0.5, 1.0, 2.0, 5.0):
        for Q in (1.0, 2.0, 4.0, 7.3):
            G = custom(Q)
            for alpha in (0.1, 1.0, Q, 10.0):
                val = math.exp(alpha / (beta * Q)) * forward_mean(PowerLaw(alpha), 1.0, beta, G)
                worst = max(worst, abs(val - 1.0))
    report(1, worst <= 1e-10, f"max deviation {worst:.2e} over 64 cases")


def test_criterion_02_polya_knopp(tmp_path):
    cfg = tmp_path / "polya.toml"
    cfg.write_text('group = "euclidean:1"\n[params]\np = 1\nq = 1\nbeta = 1\n'
                   '[weights]\nu = "ball_power:0"\nv = "ball_power:0"\n')
    code = main(["bounds", "--config", str(cfg), "--out", str(tmp_path / "out")])
    doc = json.loads(next((tmp_path / "out").glob("bounds-*.json")).read_text())
    err_c = rel(doc["upper"], math.e)
    err_a = abs(doc["alpha_star_upper"] - 1.0)
    report(2, code == 0 and err_c <= 1e-9 and err_a <= 1e-6,
           f"upper rel err {err_c:.2e}, alpha* err {err_a:.2e}")


def test_criterion_03_sharp_constant():
    ok, notes = True, []
    for a, beta, Q in SHARP_TRIPLES:
        G = custom(Q)
        limit = math.exp((a + 1) / beta)
        B = BallPowerWeight(a)
        bounds = constant_bounds(B, B, InequalityParams(1, 1, beta), G)
        probe = sharpness_probe_power(a, beta, G, bounds=bounds)
        err_up = rel(bounds.upper, limit)
        err_cf = max(rel(r.ratio_numeric, r.ratio_closed_form) for r in probe.rows)
        final = probe.rows[-1].ratio_numeric / limit
        ok &= err_up <= 1e-9 and final >= 1 - 5e-3 and err_cf <= 1e-6
        notes.append(f"a={a}: upper {err_up:.1e}, final/limit {final:.5f}, closed {err_cf:.1e}")
    report(3, ok, "; ".join(notes))


def test_criterion_04_dual_sharp_constant():
    ok, notes = True, []
    for a, beta, Q in SHARP_TRIPLES:
        G = custom(Q)
        limit = math.exp(-(a + 1) / beta)
        B = BallPowerWeight(a)
        bounds = constant_bounds(B, B, InequalityParams(1, 1, beta), G, side="dual")
        probe = sharpness_probe_dual(a, beta, G, bounds=bounds)
        err_up = rel(bounds.upper, limit)
        final = probe.rows[-1].ratio_numeric / limit
        ok &= err_up <= 1e-9 and final >= 1 - 5e-3 and final <= 1 + 1e-6
        notes.append(f"a={a}: upper {err_up:.1e}, final/limit {final:.5f}")
    report(4, ok, "; ".join(notes))


def test_criterion_05_power_weight_criterion():
    rng = np.random.default_rng(5)
    G = custom(3.0)
    worst_A = worst_T = 0.0
    for _ in range(20):
        p = rng.uniform(0.5, 3.0)
        q = p * rng.choice([1.0, rng.uniform(1.0, 3.0)])
        beta = rng.uniform(0.5, 3.0)
        a = rng.uniform(-0.5, 2.0)
        b = p * (1 + a) / q - 1
        params = InequalityParams(p, q, beta)
        alpha = G.Q * (max(0.0, 1 - beta) + rng.uniform(0.3, 2.0))
        num = A_alpha(BallPowerWeight(a), BallPowerWeight(b), params, G, alpha=alpha)
        closed = A_alpha_power_closed(a, b, params, G, alpha=alpha)
        worst_A = max(worst_A, rel(num.A_value, closed))
        T = criterion_curve(BallPowerWeight(a), BallPowerWeight(b), params, G,
                            np.geomspace(1e-6, 1e6, 121), alpha=alpha)
        worst_T = max(worst_T, T.max() / T.min() - 1)
    unbalanced = [(1.0, 1.0, 1.0, 2.0), (0.0, 0.5, 1.0, 1.0), (2.0, 0.0, 1.0, 1.5),
                  (-0.5, 0.0, 1.0, 1.0), (0.3, 0.3, 1.0, 2.0)]
    flagged = 0
    for a, b, p, q in unbalanced:
        res = A_alpha(BallPowerWeight(a), BallPowerWeight(b), InequalityParams(p, q, 1.0), G, alpha=G.Q)
        flagged += (not res.finite) and math.isinf(res.A_value)
    report(5, worst_A <= 1e-8 and worst_T <= 1e-7 and flagged == len(unbalanced),
           f"A rel err {worst_A:.1e}, T spread {worst_T:.1e}, unbalanced flagged {flagged}/{len(unbalanced)}")


def test_criterion_06_infimum():
    rng = np.random.default_rng(6)
    G = custom(2.0)
    worst, n = 0.0, 0
    while n < 10:
        p = rng.uniform(0.5, 3.0)
        q = p * rng.uniform(1.05, 3.0)
        beta = rng.uniform(0.4, 4.0)
        if not p / q > 1 - 1 / beta:
            continue
        params = InequalityParams(p, q, beta)
        val, _ = power_infimum_numeric(params, G)
        worst = max(worst, rel(val, power_infimum_closed(params)))
        n += 1
    report(6, worst <= 1e-6, f"max rel err {worst:.1e} over 10 samples")


def test_criterion_07_generic_norms():
    worst = 0.0
    for a, beta, Q in SHARP_TRIPLES:
        G = custom(Q)
        probe = sharpness_probe_power(a, beta, G, generic_upto=5)
        for j, gen in enumerate(probe.generic_check):
            lhs, rhs = extremal_norms_closed(a, beta, G, default_gamma_sequence(a)[j] * Q)
            worst = max(worst, rel(gen["lhs"], lhs), rel(gen["rhs"], rhs))
    report(7, worst <= 1e-7, f"max rel err {worst:.1e}")


def two_sided_weight():
    return CustomWeight(product(ExpPower(-1.0, 1.0), ExpPower(-1.0, -1.0)), "two-sided")


def test_criterion_08_equivalences():
    rng = np.random.default_rng(8)
    G = custom(3.0)
    u = two_sided_weight()
    dual_ok = red_ok = 0
    worst_d = worst_r = 0.0
    for _ in range(50):
        beta = rng.uniform(0.4, 3.0)
        p = rng.uniform(1.0, 3.0)
        q = p * rng.uniform(1.0, 2.0)
        f = product(PowerLaw(rng.uniform(-3, 3)), cutoff_power_tail(rng.uniform(0.5, 3), 2.0, rng.uniform(-2, 4)))
        res = check_duality(f, u, u, InequalityParams(p, q, beta), G)
        dual_ok += res.agreement is True
        worst_d = max(worst_d, res.rel_diff)
    for _ in range(50):
        beta = rng.uniform(0.4, 3.0)
        p = rng.uniform(1.0, 3.0)
        q = p * rng.uniform(1.0, 2.0)
        f = product(PowerLaw(rng.uniform(-3, 3)), cutoff_power_tail(rng.uniform(0.5, 3), 2.0, rng.uniform(-2, 4)))
        res = check_beta_reduction(u, u, f, beta, G, p=p, q=q)
        red_ok += res.agreement is True
        worst_r = max(worst_r, res.rel_diff)
    report(8, dual_ok == 50 and red_ok == 50 and worst_d <= 1e-7 and worst_r <= 1e-7,
           f"duality {dual_ok}/50 (max {worst_d:.1e}), beta-reduction {red_ok}/50 (max {worst_r:.1e})")


def test_criterion_09_matched_weight():
    G = custom(3.0)
    r = np.geomspace(0.05, 20.0, 20)
    generic = QuadratureSpec(closed_forms="none", rel_tol=1e-12)
    worst = 0.0
    for eta, gam, beta in [(0.8, 1.5, 0.6), (-1.2, 0.5, 2.0), (0.3, 2.0, 1.0)]:
        target = np.exp(eta * r ** gam / (1 + gam / (beta * G.Q)))
        for spec in (None, generic):
            u = matched_weight(ExpPowerWeight(eta, gam), beta, G, spec)
            worst = max(worst, float(np.max(np.abs(np.asarray(u(r)) / target - 1))))
    beta = 1.5
    C = math.exp(1 / beta)
    v = ExpPowerWeight(0.5, 1.0)
    ratios = [verify_matched(v, beta, G, matched_probe_profile(v, beta, G, gap)).ratio
              for gap in (1.0, 0.1, 1e-2, 1e-3)]
    below = all(x <= C * (1 + 1e-6) for x in ratios)
    close = ratios[-1] >= C * (1 - 5e-3)
    report(9, worst <= 1e-10 and below and close,
           f"pointwise {worst:.1e}, final ratio/C {ratios[-1] / C:.5f}")


def test_criterion_10_multinomial():
    G = custom(2.0)
    e7, e3 = math.exp(7), math.exp(3)
    ratios = []
    for gap in (1.0, 0.1, 1e-2, 1e-3):
        f = multinomial_probe_profile([1.0, 2.0], 2, 1.0, G, gap)
        ratios.append(verify_multinomial([1.0, 2.0], 2, 1.0, G, f).ratio)
    rng = np.random.default_rng(10)
    for _ in range(6):
        f = cutoff_power_tail(rng.uniform(0.5, 3.0), rng.uniform(0.5, 2.0), G.Q * (5 + rng.uniform(0.1, 3)),
                              rng.uniform(0.2, 3.0))
        ratios.append(verify_multinomial([1.0, 2.0], 2, 1.0, G, f).ratio)
    below = all(x <= e7 * (1 + 1e-6) for x in ratios)
    best = max(ratios)
    report(10, below and best >= e3 * (1 - 5e-3),
           f"max ratio/e^7 {best / e7:.4f}, best/e^3 {best / e3:.4f}, {len(ratios)} evaluations")


def test_criterion_11_property_suite():
    rng = np.random.default_rng(11)
    violations = evaluated = 0
    worst = 0.0
    for _ in range(20):
        G = custom(rng.uniform(1.0, 5.0))
        p = rng.uniform(0.7, 3.0)
        q = p * rng.choice([1.0, rng.uniform(1.0, 2.5)])
        beta = rng.uniform(0.5, 3.0)
        a = rng.uniform(-0.8, 2.0)
        b = p * (1 + a) / q - 1
        u, v = BallPowerWeight(a), BallPowerWeight(b)
        params = InequalityParams(p, q, beta)
        bounds = constant_bounds(u, v, params, G)
        scale = G.Q * (1 + b) / p  # integrability threshold of f^p v
        for _ in range(10):
            c = rng.uniform(-0.5, 0.5) * scale
            gamma = c + scale * rng.uniform(1.05, 2.5)
            f = product(PowerLaw(c), cutoff_power_tail(rng.uniform(0.3, 3.0), rng.uniform(0.5, 2.0),
                                                       gamma, rng.uniform(0.1, 3.0)))
            rep = evaluate_inequality(f, u, v, params, G, bounds=bounds)
            evaluated += 1
            if not (math.isfinite(rep.ratio) and rep.ratio <= bounds.upper * (1 + 1e-6)):
                violations += 1
            worst = max(worst, rep.ratio / bounds.upper)
    report(11, violations == 0 and evaluated == 200,
           f"{violations} violations in {evaluated} configurations, max ratio/upper {worst:.4f}")
