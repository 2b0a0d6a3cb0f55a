"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import io
import itertools
import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from _sweep import draws, sweep
from pastentropy.characterization import (
    Regime,
    Verdict,
    mismatch_integral,
    reconstruct_cdf,
    theorem_check,
    uniqueness_probe,
)
from pastentropy.cli import run
from pastentropy.distributions import Exponential, PowerFunction, Uniform, Weibull
from pastentropy.estimation import Sample, past_entropy_estimate
from pastentropy.measures import (
    measure_curve,
    past_entropy_condexp,
    past_entropy_direct,
    past_entropy_pit,
    residual_entropy,
    reversed_hazard,
    shannon_entropy,
)
from pastentropy.numerics import central_diff

# twin of Power(0.5, 1) at t0 = 0.5, see test_characterization
TWIN_SHAPE = 2.460776817283753
TWIN_SCALE = 0.5756196988711474


def quad_past(pdf, F, t):
    """Past entropy by scipy quadrature, independent of the package."""
    def integrand(x):
        p = pdf(x) / F
        return -p * math.log(p) if p > 0 else 0.0

    value, _ = sp_integrate.quad(integrand, 0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


def test_c01_three_routes_agree(report):
    worst = 0.0
    for dist, times in sweep():
        for t in times:
            v = [past_entropy_direct(dist, t), past_entropy_pit(dist, t), past_entropy_condexp(dist, t)]
            worst = max(worst, max(v) - min(v))
    assert report(1, worst <= 1e-6, f"three-route agreement, 4 families x 20 draws x 25 t: max |diff| = {worst:.2e}")


def test_c02_closed_forms(report):
    worst_u = worst_p = worst_q = 0.0
    for b, t in itertools.product([0.5, 1.0, 3.0], [0.05, 0.3, 0.5, 0.9]):
        t = t * b
        worst_u = max(worst_u, abs(past_entropy_direct(Uniform(b), t) - math.log(t)))
        worst_q = max(worst_q, abs(quad_past(lambda x: 1.0 / b, t / b, t) - math.log(t)))
    for c, t in itertools.product([0.3, 0.5, 1.0, 2.0, 3.7], [0.05, 0.3, 0.5, 0.9, 1.0]):
        exact = math.log(t) - math.log(c) + 1.0 - 1.0 / c
        worst_p = max(worst_p, abs(past_entropy_direct(PowerFunction(c, 1.0), t) - exact))
        # the oracle itself, re-derived by quadrature
        worst_q = max(worst_q, abs(quad_past(lambda x: c * x ** (c - 1), t ** c, t) - exact))
    passed = worst_u <= 1e-9 and worst_p <= 1e-8 and worst_q <= 1e-8
    assert report(2, passed, f"closed forms: uniform {worst_u:.1e}, power {worst_p:.1e}, "
                             f"oracles by quadrature {worst_q:.1e}")


def test_c03_limits(report):
    dists = [Uniform(2.0), Exponential(0.7), Weibull(0.6, 1.0), Weibull(3.0, 2.0),
             PowerFunction(0.4, 2.0), PowerFunction(2.5, 1.0)]
    right = lower = 0.0
    for d in dists:
        t = d.support.upper if d.support.bounded else float(d.quantile(1 - 1e-9))
        right = max(right, abs(past_entropy_direct(d, t) - shannon_entropy(d)))
        lower = max(lower, abs(residual_entropy(d, d.support.lower) - shannon_entropy(d)))
    spread = value = 0.0
    for lam in (0.5, 1.0, 3.0):
        r = [residual_entropy(Exponential(lam), t) for t in (0.5, 1.0, 2.0)]
        spread = max(spread, float(np.std(r)))
        value = max(value, max(abs(x - (1 - math.log(lam))) for x in r))
    passed = right <= 1e-3 and lower <= 1e-8 and spread <= 1e-6 and value <= 1e-6
    assert report(3, passed, f"limits: right end {right:.1e}, residual at lower end {lower:.1e}, "
                             f"exponential residual std {spread:.1e}, vs 1 - ln rate {value:.1e}")


def test_c04_ode_identity(report):
    worst = 0.0
    for dist, times in sweep():
        for t in times:
            h = 1e-4 * max(1.0, t)
            slope = central_diff(lambda s: past_entropy_direct(dist, s), t, h)
            hb, phi = past_entropy_direct(dist, t), reversed_hazard(dist, t)
            worst = max(worst, abs(slope - phi * (1 - hb - math.log(phi))))
    assert report(4, worst <= 1e-4, f"ODE identity on the criterion-1 sweep: max residual = {worst:.2e}")


def test_c05_reconstruction(report):
    details, passed = [], True
    for d in (Uniform(1.0), PowerFunction(2.0, 1.0)):
        curve = measure_curve(d, "past_direct", 0.1, 0.99, 200)
        res = reconstruct_cdf(curve, (0.99, float(d.cdf(0.99))))
        err = float(np.max(np.abs(res.cdf - d.cdf(res.grid))))
        no_root = sum(r is Regime.NO_ROOT for r in res.regimes)
        passed &= err <= 1e-3 and no_root == 0 and res.max_selfcheck_residual <= 1e-3
        details.append(f"{d.spec}: sup err {err:.1e}, no_root {no_root}, selfcheck {res.max_selfcheck_residual:.1e}")
    assert report(5, passed, "reconstruction; " + "; ".join(details))


def test_c06_identical_pairs(report):
    pairs = [(Uniform(1.0), 0.5), (Uniform(3.0), 2.0), (Exponential(1.0), 1.0), (Exponential(0.4), 3.0),
             (Weibull(0.6, 1.0), 0.8), (Weibull(2.0, 1.5), 1.0), (Weibull(3.5, 0.8), 0.5),
             (PowerFunction(0.5, 1.0), 0.5), (PowerFunction(2.0, 2.0), 1.5), (PowerFunction(3.0, 1.0), 1.0)]
    gap = mis = 0.0
    for d, t0 in pairs:
        v = theorem_check(d, d, t0)
        gap = max(gap, v.entropy_gap)
        mis = max(mis, abs(mismatch_integral(d, d, float(d.cdf(t0)))))
    passed = gap <= 1e-10 and mis <= 1e-10
    assert report(6, passed, f"identical pairs (10): entropy gap {gap:.1e}, mismatch {mis:.1e}")


def _grid(lo, hi, extra):
    return np.unique(np.append(np.linspace(lo, hi, 19), extra))


def test_c07_probe(report):
    c, b, t0 = _grid(0.3, 3.0, 0.5), _grid(0.3, 3.0, 1.0), _grid(0.2, 1.0, 0.5)
    power = uniqueness_probe("power", "power", {"c": c, "b": b}, t0, shape_grid=np.geomspace(0.3, 3.0, 8))
    match = [
        cand for cand in power
        if cand.dist_x == PowerFunction(0.5, 1.0) and cand.verdict.t0 == 0.5
        and abs(cand.dist_y.c - TWIN_SHAPE) <= 1e-6 and abs(cand.dist_y.b - TWIN_SCALE) <= 1e-6
        and cand.verdict.cdf_gap <= 1e-6 and cand.verdict.entropy_gap <= 1e-6
        and cand.verdict.conclusion_distance > 0.01
    ]
    rates = np.linspace(0.5, 2.0, 20)
    exp = uniqueness_probe("exp", "exp", {"rate": rates}, rates)
    passed = power.cells >= 20 ** 3 and len(match) >= 1 and len(exp) == 0
    distance = match[0].verdict.conclusion_distance if match else math.nan
    assert report(7, passed, f"probe: power x power {power.cells} cells, {len(power)} candidates, "
                             f"construction found {bool(match)} (distance {distance:.3f}); "
                             f"exp x exp {exp.cells} cells, {len(exp)} candidates")
    assert all(cand.verdict.verdict is Verdict.COUNTEREXAMPLE_CANDIDATE for cand in power)


def test_c08_scale_covariance(report):
    worst = 0.0
    laws = draws(Uniform, 10) + draws(PowerFunction, 10)
    for d, a, q in itertools.product(laws, (0.5, 2.0, 5.0), (0.1, 0.5, 0.9)):
        t = q * d.support.upper
        worst = max(worst, abs(past_entropy_direct(d.scaled(a), a * t) - past_entropy_direct(d, t) - math.log(a)))
    assert report(8, worst <= 1e-6, f"scale covariance, a in (0.5, 2, 5): max |diff| = {worst:.1e}")


def test_c09_estimator(report):
    errors = []
    for n in (1_000, 10_000, 100_000):
        s = Sample(Uniform(1.0).sample(n, seed=42))
        errors.append(abs(past_entropy_estimate(s, 0.5) - math.log(0.5)))
    passed = errors[-1] <= 0.05 and errors[0] >= errors[1] >= errors[2]
    assert report(9, passed, "estimator errors at n = 1e3, 1e4, 1e5: " + ", ".join(f"{e:.4f}" for e in errors))


CLI_EXAMPLES = [
    (["eval", "--dist", "uniform:b=1", "--measure", "past_direct", "--t", "0.5"], 0),
    (["eval", "--dist", "uniform:b=1", "--measure", "past_direct", "--t", "0"], 2),
    (["compare", "--dist-x", "exp:rate=1", "--dist-y", "exp:rate=1", "--t0", "1"], 0),
]


def test_c10_cli_contract(report):
    passed, codes = True, []
    for argv, expected in CLI_EXAMPLES:
        outs = []
        for _ in range(2):
            out, err = io.StringIO(), io.StringIO()
            code = run(argv, out, err)
            outs.append(out.getvalue().encode())
            passed &= code == expected
            codes.append(code)
        passed &= outs[0] == outs[1]
    assert report(10, passed, f"CLI examples byte-identical across runs, exit codes {codes[::2]}")
