"""1-D model operators: drift identities, shooting goldens, eigenvalues, fits."""

import math

import numpy as np
import pytest
from scipy.special import j0, jn_zeros

from fingap.model1d import (
    ModelProblem,
    centered_model,
    coeff_T,
    fit_model_solution,
    invariant_density,
    lambda1_interval,
    lambda1_model,
    model_solution,
    myers_length,
    shoot,
    sturm_liouville_oracle,
)

INF = math.inf


def finite_charts():
    return [
        ModelProblem(1.0, 2.0, "tan"),
        ModelProblem(0.5, 4.0, "tan"),
        ModelProblem(-1.0, 2.0, "tanh"),
        ModelProblem(-0.7, 3.5, "tanh"),
        ModelProblem(-1.0, 3.0, "coth"),
        ModelProblem(0.0, 2.5, "power"),
        ModelProblem(0.0, 5.0, "flat"),
    ]


class TestDrift:
    def test_flat_zero(self):
        assert coeff_T(ModelProblem(0.0, 5.0, "flat"), 0.3) == 0.0

    def test_tan_value(self):
        # sqrt(K(N-1)) = 1, sqrt(K/(N-1)) = 1 for K=1, N=2
        assert coeff_T(ModelProblem(1.0, 2.0, "tan"), 0.5) == pytest.approx(
            math.tan(0.5)
        )

    def test_linear_value(self):
        assert coeff_T(ModelProblem(2.0, INF, "linear"), 0.3) == pytest.approx(0.6)

    def test_tanh_value(self):
        assert coeff_T(ModelProblem(-1.0, 2.0, "tanh"), 1.0) == pytest.approx(
            -math.tanh(1.0)
        )

    def test_tan_domain_error(self):
        p = ModelProblem(1.0, 2.0, "tan")
        with pytest.raises(ValueError):
            coeff_T(p, math.pi / 2)

    def test_power_pole(self):
        with pytest.raises(ValueError):
            coeff_T(ModelProblem(0.0, 3.0, "power"), 0.0)

    def test_chart_compatibility(self):
        with pytest.raises(ValueError):
            ModelProblem(-1.0, 2.0, "tan")
        with pytest.raises(ValueError):
            ModelProblem(1.0, INF, "flat")
        with pytest.raises(ValueError):
            ModelProblem(1.0, 0.5, "tan")

    def test_riccati_identity_100_points(self):
        # T' = K + T^2/(N-1) by central differences on every finite-N chart
        rng = np.random.default_rng(0)
        for p in finite_charts():
            if p.chart == "tan":
                ts = rng.uniform(-0.9, 0.9, 100) * p.half_width
            elif p.chart in ("coth", "power"):
                ts = rng.uniform(0.2, 3.0, 100)
            else:
                ts = rng.uniform(-3.0, 3.0, 100)
            h = 1e-6
            for t in ts:
                Tp = (coeff_T(p, t + h) - coeff_T(p, t - h)) / (2 * h)
                rhs = p.K + coeff_T(p, t) ** 2 / (p.N - 1.0)
                assert Tp == pytest.approx(rhs, rel=1e-6, abs=1e-6)


class TestInvariantDensity:
    def test_tan_cos_power(self):
        p = ModelProblem(1.0, 2.0, "tan")
        assert invariant_density(p, 0.0) == pytest.approx(1.0)
        assert invariant_density(p, 0.5) == pytest.approx(math.cos(0.5))

    def test_flat_one(self):
        p = ModelProblem(0.0, 5.0, "flat")
        assert np.all(invariant_density(p, np.linspace(-3, 3, 7)) == 1.0)

    def test_gaussian_density_matches_quadrature(self):
        # exp(-int_0^t T) for the linear chart, checked by numerical quadrature
        p = ModelProblem(1.0, INF, "linear")
        for t in (0.5, 1.0, 2.0):
            s = np.linspace(0.0, t, 20001)
            integral = np.trapezoid([coeff_T(p, x) for x in s], s)
            assert invariant_density(p, t) == pytest.approx(
                math.exp(-integral), rel=1e-8
            )
        assert invariant_density(p, 1.3) == pytest.approx(math.exp(-1.3**2 / 2))

    def test_density_matches_exp_integral_all_charts(self):
        for p in finite_charts():
            if p.chart == "tan":
                t0, t1 = 0.1 * p.half_width, 0.7 * p.half_width
            elif p.chart in ("coth", "power"):
                t0, t1 = 0.4, 1.9
            else:
                t0, t1 = -0.8, 1.7
            s = np.linspace(t0, t1, 20001)
            integral = np.trapezoid([coeff_T(p, x) for x in s], s)
            ratio = invariant_density(p, t1) / invariant_density(p, t0)
            assert ratio == pytest.approx(math.exp(-integral), rel=1e-7)


class TestShoot:
    def test_tan_sine(self):
        p = ModelProblem(1.0, 2.0, "tan")
        sol = shoot(p, 2.0, -math.pi / 2, math.pi / 2)
        assert np.max(np.abs(sol.vs - np.sin(sol.ts))) <= 1e-6

    def test_flat_cosine(self):
        p = ModelProblem(0.0, 3.0, "flat")
        sol = shoot(p, math.pi**2, 0.0, 1.0)
        assert np.max(np.abs(sol.vs + np.cos(math.pi * sol.ts))) <= 1e-8

    def test_power_sinc(self):
        p = ModelProblem(0.0, 3.0, "power")
        lam = math.pi**2
        sol = shoot(p, lam, 0.0, 1.2)
        x = math.sqrt(lam) * sol.ts[1:]
        assert np.max(np.abs(sol.vs[1:] + np.sin(x) / x)) <= 1e-6

    def test_initial_conditions(self):
        p = ModelProblem(0.0, 3.0, "flat")
        sol = shoot(p, 4.0, -0.3, 0.9)
        assert sol.vs[0] == -1.0
        assert sol.vps[0] == 0.0

    def test_rejects_nonpositive_lambda(self):
        with pytest.raises(ValueError):
            shoot(ModelProblem(0.0, 3.0, "flat"), -1.0, 0.0, 1.0)

    def test_invariant_measure_orthogonality(self):
        # int (v'' - T v') dmu = 0 for Neumann solutions; along the shot
        # trajectory v'' - T v' equals -lam v exactly
        for p in [ModelProblem(0.0, 3.0, "flat"), ModelProblem(1.0, 2.0, "tan"),
                  ModelProblem(1.0, INF, "linear")]:
            a, b = (-1.2, 1.2)
            lam = lambda1_interval(p, a, b)
            sol = shoot(p, lam, a, b, max_step=(b - a) / 4000)
            mu = invariant_density(p, sol.ts)
            drift = np.array([coeff_T(p, t) for t in sol.ts])
            vpp = drift * sol.vps - lam * sol.vs
            resid = abs(np.trapezoid((vpp - drift * sol.vps) * mu, sol.ts))
            scale = np.trapezoid(np.abs(vpp) * mu, sol.ts)
            assert resid <= 1e-6 * scale


class TestLambda1:
    def test_flat_interval_pi2(self):
        p = ModelProblem(0.0, 2.0, "flat")
        lam = lambda1_interval(p, -0.5, 0.5)
        assert lam == pytest.approx(math.pi**2, rel=1e-10)

    def test_full_sphere_interval(self):
        p = ModelProblem(1.0, 2.0, "tan")
        lam = lambda1_interval(p, -math.pi / 2, math.pi / 2)
        assert lam == pytest.approx(2.0, rel=1e-6)

    def test_power_interval_exceeds_flat(self):
        lam = lambda1_interval(ModelProblem(0.0, 2.0, "power"), 1.0, 2.0)
        assert lam >= math.pi**2

    def test_model_flat_values(self):
        for N in (2.0, 3.0, 10.0, INF):
            for d in (0.5, 1.0, 2.0):
                lam = lambda1_model(0.0, N, d)
                assert lam == pytest.approx(math.pi**2 / d**2, rel=1e-8)

    def test_model_lichnerowicz_endpoint(self):
        assert lambda1_model(1.0, 2.0, math.pi) == pytest.approx(2.0, abs=1e-6)

    def test_model_myers_violation(self):
        with pytest.raises(ValueError):
            lambda1_model(1.0, 2.0, math.pi + 0.01)

    def test_model_gaussian_large_interval(self):
        assert lambda1_model(1.0, INF, 10.0) == pytest.approx(1.0, abs=1e-3)

    def test_model_negative_curvature_vs_oracle(self):
        lam = lambda1_model(-1.0, 3.0, 2.0)
        vals = sturm_liouville_oracle(ModelProblem(-1.0, 3.0, "tanh"), -1.0, 1.0)
        assert lam == pytest.approx(vals[1], rel=1e-6)

    def test_symmetric_consistency_same_code_path(self):
        p = centered_model(-0.5, 4.0)
        d = 1.7
        assert lambda1_model(-0.5, 4.0, d) == lambda1_interval(p, -d / 2, d / 2)

    def test_oracle_agreement_sample_charts(self):
        cases = [
            (ModelProblem(1.0, 2.0, "tan"), -1.0, 1.0),
            (ModelProblem(-1.0, 2.0, "tanh"), -1.0, 1.0),
            (ModelProblem(-1.0, 3.0, "coth"), 0.5, 2.5),
            (ModelProblem(0.0, 3.0, "power"), 0.3, 1.7),
            (ModelProblem(0.0, 2.0, "flat"), -0.5, 0.5),
            (ModelProblem(2.0, INF, "linear"), 0.5, 3.0),
        ]
        for p, a, b in cases:
            lam = lambda1_interval(p, a, b)
            vals = sturm_liouville_oracle(p, a, b)
            assert vals[0] == pytest.approx(0.0, abs=1e-6 * vals[1])
            assert lam == pytest.approx(vals[1], rel=1e-6)

    def test_monotone_decreasing_in_d(self):
        for K, N, dmax in [(1.0, 3.0, 0.95 * myers_length(1.0, 3.0)),
                           (-1.0, 2.5, 6.0), (0.0, 4.0, 3.0), (2.0, INF, 5.0)]:
            ds = np.linspace(0.3, dmax, 6)
            lams = [lambda1_model(K, N, d) for d in ds]
            assert all(l1 > l2 for l1, l2 in zip(lams, lams[1:]))


class TestModelSolution:
    def test_sphere_threshold_sine(self):
        ms = model_solution(1.0, 2.0, 2.0)
        assert ms.b == pytest.approx(math.pi / 2, abs=1e-12)
        assert ms.max_value == pytest.approx(1.0, abs=1e-12)
        assert ms.vs[0] == pytest.approx(-1.0)

    def test_sinc_case(self):
        # v = -sin(sqrt(lam) t)/(sqrt(lam) t); b from the first root of tan x = x
        ms = model_solution(0.0, 3.0, math.pi**2)
        from scipy.optimize import brentq
        xstar = brentq(lambda x: math.tan(x) - x, math.pi + 0.1, 1.5 * math.pi - 1e-9)
        assert ms.b == pytest.approx(xstar / math.pi, rel=1e-8)
        assert ms.max_value == pytest.approx(-math.cos(xstar), rel=1e-8)
        assert ms.vs[0] == -1.0

    def test_bessel_case(self):
        # N = 2: v = -J_0(sqrt(lam) t), first max at j_{1,1}
        j11 = jn_zeros(1, 1)[0]
        ms = model_solution(0.0, 2.0, 4.0)
        assert ms.b == pytest.approx(j11 / 2.0, rel=1e-8)
        assert ms.max_value == pytest.approx(-j0(j11), rel=1e-8)

    def test_below_threshold_rejected(self):
        with pytest.raises(ValueError):
            model_solution(1.0, 2.0, 1.5)

    def test_requires_finite_N(self):
        with pytest.raises(ValueError):
            model_solution(1.0, INF, 3.0)

    def test_vprime_positive_interior(self):
        ms = model_solution(-1.0, 3.0, 4.0)
        assert np.all(ms.vps[1:-1] > 0)


class TestFit:
    def test_k_at_m_returns_model_solution(self):
        ms = model_solution(0.0, 3.0, math.pi**2)
        fit = fit_model_solution(0.0, 3.0, math.pi**2, ms.max_value)
        assert fit.a == ms.a
        assert fit.b == pytest.approx(ms.b, rel=1e-12)

    def test_centered_symmetric_for_k_one(self):
        fit = fit_model_solution(0.0, INF, math.pi**2, 1.0)
        assert fit.b - fit.a == pytest.approx(1.0, rel=1e-8)
        assert fit.max_value == pytest.approx(1.0, abs=1e-8)

    def test_power_fit_half_reshoots(self):
        lam = math.pi**2
        fit = fit_model_solution(0.0, 3.0, lam, 0.5)
        assert abs(fit.max_value - 0.5) <= 1e-8
        re = shoot(ModelProblem(0.0, 3.0, "power"), lam, fit.a, fit.b)
        assert abs(float(re.vs.max()) - 0.5) <= 1e-6
        assert abs(re.vp_end) <= 1e-6

    def test_constant_chart_analytic_drift(self):
        # max value of the constant-drift family is exp(c pi / (2 omega))
        lam, k = math.pi**2, 0.55
        fit = fit_model_solution(0.0, INF, lam, k)
        c = fit.fitted_param
        om = math.sqrt(lam - c * c / 4.0)
        assert math.exp(c * math.pi / (2 * om)) == pytest.approx(k, abs=1e-7)
        assert fit.b - fit.a == pytest.approx(math.pi / om, rel=1e-6)

    def test_reflection_for_k_above_one(self):
        fit = fit_model_solution(0.0, 3.0, math.pi**2, 2.0)
        assert fit.max_value == pytest.approx(2.0, abs=1e-7)
        assert fit.min_value == pytest.approx(-1.0, abs=1e-7)
        re = shoot(ModelProblem(0.0, 3.0, "power"), math.pi**2, fit.a, fit.b)
        assert float(re.vs.max()) == pytest.approx(2.0, abs=1e-5)

    def test_k_out_of_range(self):
        m = model_solution(0.0, 3.0, math.pi**2).max_value
        with pytest.raises(ValueError):
            fit_model_solution(0.0, 3.0, math.pi**2, 0.5 * m)
        with pytest.raises(ValueError):
            fit_model_solution(0.0, 3.0, math.pi**2, 2.5 / m)

    def test_fit_positive_curvature(self):
        fit = fit_model_solution(1.0, 2.0, 2.5, 0.8)
        assert fit.max_value == pytest.approx(0.8, abs=1e-7)

    def test_fit_negative_curvature_branches(self):
        for k in (0.25, 0.5, 0.95, 1.8):
            fit = fit_model_solution(-1.0, 3.0, 4.0, k)
            assert fit.max_value == pytest.approx(k, abs=1e-7)

    def test_fitted_interval_eigenvalue_matches(self):
        # the fitted interval really has first eigenvalue lam
        lam = math.pi**2
        fit = fit_model_solution(0.0, 3.0, lam, 0.6)
        p = ModelProblem(0.0, 3.0, "power")
        assert lambda1_interval(p, fit.a, fit.b) == pytest.approx(lam, rel=1e-7)


class TestOffCenterIntervals:
    def test_offcenter_at_least_centered_quick(self):
        rng = np.random.default_rng(42)
        # a few samples per chart; the acceptance suite runs the full 50
        for chart in ("tan", "tanh", "coth", "power", "linear"):
            for _ in range(5):
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
                    K, N = rng.choice([-1, 1]) * rng.uniform(0.3, 2.0), INF
                    s = 1 / math.sqrt(abs(K))
                    a = rng.uniform(-2.0, 1.0) * s
                    b = a + rng.uniform(0.4, 2.5) * s
                    p = ModelProblem(K, N, "linear")
                lam_int = lambda1_interval(p, a, b)
                lam_cen = lambda1_model(K, N, b - a)
                assert lam_int >= lam_cen - 1e-8, (chart, K, N, a, b)
