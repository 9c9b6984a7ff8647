"""Acceptance criteria 1-9, each at its stated tolerance and time budget.

Every test prints one PASS/FAIL line; the lines are also collected into the
pytest terminal summary.
"""

import functools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from finslerkit import (
    Ball,
    BeltramiKlein,
    ExperimentConfig,
    GraphConfig,
    HalfSpace,
    KobayashiHilbert,
    Polyline,
    QuasiHyperbolic,
    SUITES,
    path_length,
    run_suite,
)
from finslerkit.metrics import ball_bracket, half_space_qk_closed_form


def record(number, title, ok, detail):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@functools.cache
def suite_json(name):
    return run_suite(ExperimentConfig(name)).to_json()


@functools.cache
def suite_report(name):
    from finslerkit import VerificationReport

    start = time.perf_counter()
    text = suite_json(name)
    return VerificationReport.from_json(text), time.perf_counter() - start


def ball_samples(rng, n, d, r=1.0):
    U = rng.normal(size=(n, d))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    depth = r * np.exp(rng.uniform(math.log(1e-6), math.log(0.999), n))
    return (r - depth)[:, None] * U, rng.normal(size=(n, d))


def test_criterion_1_half_space_exactness():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst, total = 0.0, 0
    for d in (3, 4):
        for k in range(1, d):
            X = rng.uniform(-5, 5, (1000, d))
            X[:, 0] = np.exp(rng.uniform(math.log(1e-3), math.log(10), 1000))
            V = rng.normal(size=X.shape)
            got = QuasiHyperbolic(HalfSpace.standard(d), k, method="numeric")._eval(X, V)
            want = np.array([half_space_qk_closed_form(x, v, k) for x, v in zip(X, V)])
            worst = max(worst, float(np.max(np.abs(got - want) / want)))
            total += len(X)
    elapsed = time.perf_counter() - start
    record(1, "half-space exactness", worst <= 1e-6 and elapsed < 30,
           f"max rel err {worst:.2e} (tol 1e-6) over {total} samples, {elapsed:.1f}s (budget 30s)")


def test_criterion_2_ball_equality():
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    X, V = ball_samples(rng, 500, 3)
    q2 = QuasiHyperbolic(Ball.unit(3), 2, method="numeric")._eval(X, V)
    q1 = QuasiHyperbolic(Ball.unit(3), 1, method="numeric")._eval(X, V)
    worst = float(np.max(np.abs(q2 - q1) / q1))
    elapsed = time.perf_counter() - start
    record(2, "ball equality", worst <= 1e-5 and elapsed < 60,
           f"max rel err {worst:.2e} (tol 1e-5) over 500 samples, {elapsed:.1f}s (budget 60s)")


def test_criterion_3_ball_bracket():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = -math.inf
    for r in (0.5, 1.0, 2.0):
        X, V = ball_samples(rng, 10_000, 3, r)
        lo, val, up = ball_bracket(Ball(np.zeros(3), r), X, V)
        worst = max(worst, float(np.max(np.maximum(lo - val, val - up) / val)))
    elapsed = time.perf_counter() - start
    viol = max(worst, 0.0)
    record(3, "ball metric bracket", viol <= 1e-10 and elapsed < 5,
           f"max relative violation {viol:.2e} (tol 1e-10), margin {worst:.2e}, {elapsed:.2f}s (budget 5s)")


def test_criterion_4_funk_hilbert():
    from finslerkit import graph_distance

    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for d in (2, 3):
        ball = Ball(rng.normal(size=d), 1.7)
        X, V = ball_samples(rng, 500, d, 1.7)
        X = X + ball.center
        kh = KobayashiHilbert(ball)._eval(X, V)
        bk = BeltramiKlein(ball)._eval(X, V)
        worst = max(worst, float(np.max(np.abs(kh - bk) / bk)))
    oracle = 0.5 * math.log(3)
    value = graph_distance(KobayashiHilbert(Ball.unit(2)), [0, 0], [0.5, 0], GraphConfig(nodes=4000)).value
    gap = value / oracle - 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and 0 <= gap + 1e-9 / oracle and gap <= 0.02 and elapsed < 60
    record(4, "Funk/Hilbert consistency", ok,
           f"KH vs BK max rel err {worst:.2e} (tol 1e-9) over 1000 samples; graph {value:.6f} vs "
           f"{oracle:.6f} gap {100 * gap:.3f}% (tol 2%), {elapsed:.1f}s (budget 60s)")


def test_criterion_5_quasidistance():
    rep, elapsed = suite_report("quasidistance")
    tri = [rep.check(f"triangle inequality c={c}") for c in (1, 2)]
    mono = rep.check("monotonicity chain")
    ok = all(c.passed and c.max_violation <= 1e-12 and c.samples >= 10_000 for c in tri + [mono])
    record(5, "quasi-distance properties", ok and elapsed < 5,
           f"triangle c=1,2 max violation {max(c.max_violation for c in tri):.1e}, monotone "
           f"{mono.max_violation:.1e} (tol 1e-12) on {tri[0].samples} triples, {elapsed:.2f}s (budget 5s)")


def test_criterion_6_sandwich():
    rep, elapsed = suite_report("sandwich")
    c = rep.check("sandwich feasibility")
    fit = c.fitted
    ok = c.passed and c.samples >= 2000 and fit["c2"] is not None and 0 < fit["c2"] <= 1 <= fit["C2"]
    record(6, "sandwich feasibility", ok and elapsed < 120,
           f"c2={fit['c2']:.4f}, C2={fit['C2']:.4f} over {c.samples} collar pairs, {elapsed:.1f}s (budget 120s)")


def test_criterion_7_rigidity():
    rep, elapsed = suite_report("rigidity")
    eq = [rep.check(f"equality on {n}") for n in ("ball", "half-space", "slab")]
    wit = [rep.check(f"witness on {n}") for n in ("ellipsoid", "cube")]
    eq_ok = all(c.passed and c.max_violation <= 1e-4 for c in eq)
    wit_ok = all(c.passed and c.fitted["gap"] >= 0.05 for c in wit)
    record(7, "rigidity", eq_ok and wit_ok and elapsed < 120,
           f"equality max rel gap {max(c.max_violation for c in eq):.1e} (tol 1e-4); witness gaps "
           f"ellipsoid {wit[0].fitted['gap']:.3f}, cube {wit[1].fitted['gap']:.3f} (need 0.05), {elapsed:.1f}s (budget 120s)")


def test_criterion_8_vertical_length():
    start = time.perf_counter()
    H = HalfSpace.standard(3)
    P = Polyline([[0.01, 0.0, 0.0], [1.0, 0.0, 0.0]])
    errs = [abs(path_length(QuasiHyperbolic(H, k), P) - 0.5 * math.log(100)) for k in (1, 2)]
    elapsed = time.perf_counter() - start
    record(8, "vertical-length closed form", max(errs) <= 1e-6 and elapsed < 1,
           f"max abs err {max(errs):.1e} vs 2.302585 (tol 1e-6), {elapsed:.3f}s (budget 1s)")


@pytest.mark.parametrize("suite", list(SUITES))
def test_criterion_9_determinism(suite):
    first = suite_json(suite)
    second = run_suite(ExperimentConfig(suite)).to_json()
    record(9, f"determinism [{suite}]", first == second, f"{len(first)} bytes, identical={first == second}")
