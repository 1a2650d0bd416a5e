"""Acceptance criteria for the toolkit, one test per criterion.

Each test prints a PASS/FAIL line (run with ``pytest -s`` to see them all)
and asserts both the numeric tolerance and the runtime budget.  The golden
verification suite is computed once and shared by criteria 7-9.
"""

import math
import time

import numpy as np
import pytest

from fingap.domain import DomainSpec, build_domain
from fingap.eigensolver import dense_oracle, minimize_rayleigh
from fingap.harness import golden_cases, run_case
from fingap.model1d import (
    ModelProblem,
    lambda1_interval,
    lambda1_model,
    myers_length,
    sturm_liouville_oracle,
)
from fingap.norms import (
    dual_norm_eval,
    dual_norm_numeric,
    euclidean_norm,
    legendre,
    legendre_inverse,
    norm_eval,
    quadratic_norm,
    randers_norm,
    two_slope_norm,
)

INF = math.inf
PI2 = math.pi**2


def _crit(name, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" | {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def goldens():
    t0 = time.time()
    results = {c["id"]: (c, run_case(c)) for c in golden_cases()}
    return results, time.time() - t0


def test_criterion_1_sharp_flat_values():
    t0 = time.time()
    worst = 0.0
    for N in (2.0, 3.0, 10.0, INF):
        for d in (0.5, 1.0, 2.0):
            lam = lambda1_model(0.0, N, d)
            worst = max(worst, abs(lam - PI2 / d**2) / (PI2 / d**2))
    elapsed = time.time() - t0
    _crit("criterion 1: lambda1(0,N,d) = pi^2/d^2 (12 cases)",
          worst <= 1e-8 and elapsed < 1.0,
          f"worst rel err {worst:.2e}, {elapsed:.2f}s (budget 1s)")


def test_criterion_2_lichnerowicz():
    t0 = time.time()
    endpoint = lambda1_model(1.0, 2.0, math.pi)
    endpoint_ok = abs(endpoint - 2.0) <= 1e-6
    worst = INF
    for K in (0.25, 0.5, 1.0, 2.0, 4.0):
        for N in (1.5, 2.0, 3.0, 5.0, 10.0):
            L = myers_length(K, N)
            for frac in (0.3, 0.5, 0.7, 0.9, 1.0):
                lam = lambda1_model(K, N, frac * L)
                worst = min(worst, lam - N * K / (N - 1.0))
    elapsed = time.time() - t0
    _crit("criterion 2: Lichnerowicz endpoint and 5x5x5 grid",
          endpoint_ok and worst >= -1e-8 and elapsed < 10.0,
          f"endpoint {endpoint:.9f}, worst slack {worst:+.2e}, "
          f"{elapsed:.2f}s (budget 10s)")


def test_criterion_3_shooting_vs_dense_oracle():
    cases = [
        (ModelProblem(1.0, 2.0, "tan"), -1.0, 1.0),
        (ModelProblem(1.0, 5.0, "tan"), -2.0, 1.5),
        (ModelProblem(0.5, 3.0, "tan"), -1.5, 2.0),
        (ModelProblem(2.0, 2.5, "tan"), -0.8, 0.6),
        (ModelProblem(-1.0, 2.0, "tanh"), -1.0, 1.0),
        (ModelProblem(-0.5, 4.0, "tanh"), -0.7, 2.1),
        (ModelProblem(-2.0, 3.0, "tanh"), 0.2, 1.8),
        (ModelProblem(-1.0, 6.0, "tanh"), -2.5, -0.5),
        (ModelProblem(-1.0, 3.0, "coth"), 0.5, 2.5),
        (ModelProblem(-0.5, 2.0, "coth"), 1.0, 3.0),
        (ModelProblem(-2.0, 5.0, "coth"), 0.3, 1.4),
        (ModelProblem(0.0, 2.0, "power"), 1.0, 2.0),
        (ModelProblem(0.0, 3.0, "power"), 0.3, 1.7),
        (ModelProblem(0.0, 5.5, "power"), 0.8, 2.9),
        (ModelProblem(0.0, 2.0, "flat"), -0.5, 0.5),
        (ModelProblem(0.0, 4.0, "flat"), -1.3, 0.9),
        (ModelProblem(0.0, 3.0, "flat"), 0.0, 2.4),
        (ModelProblem(1.0, INF, "linear"), -2.0, 2.0),
        (ModelProblem(2.0, INF, "linear"), 0.5, 3.0),
        (ModelProblem(-1.5, INF, "linear"), -1.2, 0.9),
    ]
    assert len(cases) == 20
    assert {p.chart for p, _, _ in cases} == {
        "tan", "tanh", "coth", "power", "flat", "linear"
    }
    t0 = time.time()
    worst = 0.0
    for p, a, b in cases:
        lam = lambda1_interval(p, a, b)
        oracle = sturm_liouville_oracle(p, a, b)[1]
        worst = max(worst, abs(lam - oracle) / oracle)
    elapsed = time.time() - t0
    _crit("criterion 3: shooting vs 4000-node Sturm-Liouville oracle (20 cases)",
          worst <= 1e-6 and elapsed < 30.0,
          f"worst rel mismatch {worst:.2e}, {elapsed:.2f}s (budget 30s)")


def test_criterion_4_monotonicity_and_offcenter():
    t0 = time.time()
    mono_ok = True
    for K, N, dmax in [(1.0, 3.0, 0.95 * myers_length(1.0, 3.0)),
                       (-1.0, 2.5, 6.0), (0.0, 4.0, 3.0),
                       (2.0, INF, 5.0), (0.0, INF, 3.0)]:
        ds = np.linspace(0.3, dmax, 7)
        lams = [lambda1_model(K, N, d) for d in ds]
        mono_ok &= all(l1 > l2 for l1, l2 in zip(lams, lams[1:]))

    rng = np.random.default_rng(20240501)
    worst = INF
    count = 0
    for chart in ("tan", "tanh", "coth", "power", "linear"):
        for _ in range(50):
            if chart == "tan":
                K = rng.uniform(0.3, 2.0)
                N = rng.uniform(1.5, 6.0)
                L = myers_length(K, N)
                a = rng.uniform(-0.45, 0.2) * L
                b = a + rng.uniform(0.25, 0.9) * (L / 2 - a)
                p = ModelProblem(K, N, "tan")
            elif chart == "tanh":
                K, N = -rng.uniform(0.3, 2.0), rng.uniform(1.5, 6.0)
                s = math.sqrt((N - 1) / -K)
                a = rng.uniform(-2.0, 1.0) * s
                b = a + rng.uniform(0.4, 2.5) * s
                p = ModelProblem(K, N, "tanh")
            elif chart == "coth":
                K, N = -rng.uniform(0.3, 2.0), rng.uniform(1.5, 6.0)
                s = math.sqrt((N - 1) / -K)
                a = rng.uniform(0.05, 2.0) * s
                b = a + rng.uniform(0.4, 2.5) * s
                p = ModelProblem(K, N, "coth")
            elif chart == "power":
                K, N = 0.0, rng.uniform(1.5, 6.0)
                a = rng.uniform(0.05, 2.0)
                b = a + rng.uniform(0.3, 2.5)
                p = ModelProblem(K, N, "power")
            else:
                K, N = float(rng.choice([-1, 1])) * rng.uniform(0.3, 2.0), INF
                s = 1 / math.sqrt(abs(K))
                a = rng.uniform(-2.0, 1.0) * s
                b = a + rng.uniform(0.4, 2.5) * s
                p = ModelProblem(K, N, "linear")
            slack = lambda1_interval(p, a, b) - lambda1_model(K, N, b - a)
            worst = min(worst, slack)
            count += 1
    elapsed = time.time() - t0
    _crit("criterion 4: monotone in d; off-center >= centered (50/chart)",
          mono_ok and worst >= -1e-8 and count == 250 and elapsed < 60.0,
          f"worst off-center slack {worst:+.2e}, {elapsed:.1f}s (budget 60s)")


def test_criterion_5_eigensolver_oracle():
    t0 = time.time()
    checks = []
    spec = DomainSpec(shape="interval", norm=euclidean_norm(1), lengths=(1.0,),
                      resolution=200)
    dom = build_domain(spec)
    res = minimize_rayleigh(dom, spec.norm, seed=0)
    orc = dense_oracle(dom, spec.norm)
    checks.append(("interval euclid", res.lam, orc[1], PI2))

    spec = DomainSpec(shape="box", norm=euclidean_norm(2), lengths=(1.0, 1.0),
                      resolution=60)
    dom = build_domain(spec)
    res = minimize_rayleigh(dom, spec.norm, seed=0)
    orc = dense_oracle(dom, spec.norm)
    checks.append(("box euclid", res.lam, orc[1], PI2))

    norm = quadratic_norm(np.diag([1.0, 4.0]))
    spec = DomainSpec(shape="box", norm=norm, lengths=(1.0, 1.0), resolution=60)
    dom = build_domain(spec)
    res = minimize_rayleigh(dom, norm, seed=0)
    orc = dense_oracle(dom, norm)
    checks.append(("box quadratic", res.lam, orc[1], PI2 / 4.0))

    worst_oracle = max(abs(l - o) / o for _, l, o, _ in checks)
    worst_analytic = max(abs(l - a) / a for _, l, _, a in checks)
    elapsed = time.time() - t0
    _crit("criterion 5: minimize_rayleigh vs dense oracle and analytic values",
          worst_oracle <= 1e-6 and worst_analytic <= 0.01 and elapsed < 120.0,
          f"oracle mismatch {worst_oracle:.2e}, analytic err {worst_analytic:.2e}, "
          f"{elapsed:.1f}s (budget 120s)")


def test_criterion_6_weighted_cross_validation():
    t0 = time.time()
    spec = DomainSpec(shape="interval", norm=euclidean_norm(1), lengths=(4.0,),
                      weight="gaussian", kappa=1.0, resolution=50)
    dom = build_domain(spec)
    res = minimize_rayleigh(dom, spec.norm, seed=0)
    model = lambda1_interval(ModelProblem(1.0, INF, "linear"), -2.0, 2.0)
    rel = abs(res.lam - model) / model
    elapsed = time.time() - t0
    _crit("criterion 6: Gaussian interval vs N=inf model (independent paths)",
          rel <= 0.01 and elapsed < 30.0,
          f"solver {res.lam:.6f} vs model {model:.6f}, rel {rel:.2e}, "
          f"{elapsed:.1f}s (budget 30s)")


def test_criterion_7_bound_suite(goldens):
    results, elapsed = goldens
    ok = len(results) >= 8
    details = []
    for cid, (case, r) in results.items():
        rep = r.report
        verdict_ok = rep.verdict in ("holds", "holds_within_tol")
        ok &= verdict_ok
        if case.get("sharp"):
            sharp_ok = abs(rep.margin) <= 2.0 * rep.discretization_tolerance
            ok &= sharp_ok
            details.append(f"{cid}: |margin|={abs(rep.margin):.1e} "
                           f"<= 2*tol={2*rep.discretization_tolerance:.1e}")
    _crit("criterion 7: bound verification suite (all verdicts hold; sharp cases tight)",
          ok and elapsed < 600.0,
          f"{len(results)} cases, {elapsed:.1f}s (budget 600s); " + "; ".join(details))


def test_criterion_8_gradient_comparison(goldens):
    results, _ = goldens
    ok = True
    details = []
    flat_ids = {"sharp-1d-twoslope-sym", "sharp-1d-twoslope-asym",
                "box-euclid", "box-quadratic"}
    for cid, (case, r) in results.items():
        gc = r.gradient_comparison
        ok &= not gc.inconclusive
        ok &= gc.fraction >= 0.99
        if cid in flat_ids:
            h = r.domain.h
            bound = 30.0 * r.eigen.lam * h**2
            ok &= gc.max_gap_core <= bound
            details.append(f"{cid}: core gap {gc.max_gap_core:.2e} <= {bound:.2e}")
    _crit("criterion 8: F*(Du) <= v'(v^{-1}(u)) + C h on >= 99% interior nodes",
          ok, "; ".join(details))


def test_criterion_9_maxima_comparison(goldens):
    results, _ = goldens
    ok = True
    checked = 0
    for cid, (case, r) in results.items():
        mx = r.maxima
        if mx.inconclusive:
            continue  # hypothesis not met (e.g. N = inf certificates)
        checked += 1
        ok &= mx.fraction == 1.0 and mx.worst_violation <= 1e-3
    _crit("criterion 9: max u >= m_{K,N} - 1e-3 where the hypothesis holds",
          ok and checked >= 5, f"{checked} cases checked")


def test_criterion_10_property_suites():
    t0 = time.time()
    rng = np.random.default_rng(77)
    norms = [euclidean_norm(2), quadratic_norm(np.array([[2.0, 0.5], [0.5, 1.0]])),
             randers_norm(np.eye(2), [0.4, -0.1]), two_slope_norm(2.0, 0.5)]
    ok = True
    for n in norms:
        v = rng.standard_normal((100, n.dim))
        t = rng.uniform(1e-3, 10.0, size=100)
        ok &= bool(np.all(np.abs(norm_eval(n, t[:, None] * v) - t * norm_eval(n, v))
                          <= 1e-12 * (1 + norm_eval(n, t[:, None] * v))))
        ok &= bool(np.max(np.abs(dual_norm_eval(n, legendre(n, v))
                                 - norm_eval(n, v))) <= 1e-8)
        back = legendre_inverse(n, legendre(n, v))
        ok &= bool(np.max(np.linalg.norm(back - v, axis=-1))
                   <= 1e-8 * np.max(np.linalg.norm(v, axis=-1)))
        xi = rng.standard_normal((100, n.dim))
        pair = np.einsum("ni,ni->n", xi, v)
        ok &= bool(np.all(pair <= norm_eval(n, v) * dual_norm_eval(n, xi)
                          * (1 + 1e-10) + 1e-300))
    for n in (norms[1], norms[2]):  # oracle agreement on the nontrivial duals
        for _ in range(100):
            xi = rng.standard_normal(n.dim)
            closed = float(dual_norm_eval(n, xi))
            ok &= abs(closed - dual_norm_numeric(n, xi)) <= 1e-8 * max(1.0, closed)

    # domain properties: directed triangle inequality and measure convergence
    from scipy.sparse.csgraph import dijkstra
    from scipy.special import erf

    norm = randers_norm(np.eye(2), [0.4, -0.2])
    spec = DomainSpec(shape="box", norm=norm, lengths=(1.0, 1.0), resolution=6)
    dom = build_domain(spec)
    full = dijkstra(dom.edge_graph(norm), directed=True)
    trip = rng.integers(0, dom.n_nodes, size=(1000, 3))
    x, y, z = trip[:, 0], trip[:, 1], trip[:, 2]
    ok &= bool(np.all(full[x, z] <= full[x, y] + full[y, z] + 1e-12))

    kappa = 1.0
    exact = (math.sqrt(2 * math.pi / kappa) * erf(0.5 * math.sqrt(kappa / 2))) ** 2
    totals = [build_domain(DomainSpec(shape="box", norm=euclidean_norm(2),
                                      lengths=(1.0, 1.0), weight="gaussian",
                                      kappa=kappa, resolution=r)).total_measure
              for r in (8, 16)]
    ok &= abs(totals[-1] - exact) <= 0.01 * exact

    elapsed = time.time() - t0
    _crit("criterion 10: norm and domain property suites",
          ok and elapsed < 60.0, f"{elapsed:.1f}s (budget 60s)")
