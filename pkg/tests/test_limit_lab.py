"""Sweeps, limit bundles, a-priori bound checks, window-density verdict."""

import math

import numpy as np
import pytest

from plimit.energy import GrowthBounds, power_law
from plimit.errors import ConfigError, ParameterError, UnsupportedError
from plimit.geometry import DomainSpec, build_domain
from plimit.limit_lab import (
    REGIME_P_LESS_Q,
    REGIME_Q_LESS_P,
    check_bound_56_57,
    check_fundamental_inequality,
    compute_l1_l2,
    compute_limit_bundle,
    run_counterexample,
    run_lambda_sweep,
)

R = 10.0
GAMMA = 7.0 + 12.0 / R**2
F = f"{GAMMA!r} * x1"
LAMBDAS = [1.0, 10.0, 100.0, 1000.0]


@pytest.fixture(scope="module")
def annulus():
    return build_domain(DomainSpec(shape="annulus", r_outer=R, n_radial=12))


@pytest.fixture(scope="module")
def bundle_q_less_p(annulus):
    mesh, regions = annulus
    return compute_limit_bundle(mesh, regions, 1.0, 1.0, 2.0, 1.5, F)


@pytest.fixture(scope="module")
def bundle_p_less_q(annulus):
    mesh, regions = annulus
    return compute_limit_bundle(mesh, regions, 1.0, 1.0, 2.0, 3.0, F)


@pytest.fixture(scope="module")
def sweep_q_less_p(annulus, bundle_q_less_p):
    mesh, regions = annulus
    return run_lambda_sweep(mesh, regions, power_law(1.0, 2.0), power_law(1.0, 1.5),
                            2.0, 1.5, F, LAMBDAS, bundle_q_less_p)


@pytest.fixture(scope="module")
def sweep_p_less_q(annulus, bundle_p_less_q):
    mesh, regions = annulus
    return run_lambda_sweep(mesh, regions, power_law(1.0, 2.0), power_law(1.0, 3.0),
                            2.0, 3.0, F, LAMBDAS, bundle_p_less_q)


class TestEnergyLevels:
    def test_levels_match_independent_closed_forms(self):
        # antiderivative oracle: for c(rho + b/rho)cos(theta)-type fields the
        # annulus integral of |grad|^2 from a to b is pi c^2 [(b^2-a^2)+(1/a^2-1/b^2)]
        out = compute_l1_l2(R)
        k = (7 * R**2 + 12) / (R**2 - 1)
        v_outer = math.pi * k**2 * ((R**2 - 4) + (0.25 - 1 / R**2))
        v_inner = math.pi * k**2 * ((4 - 1) + (1 - 0.25))
        w_outer = math.pi * (49 * (R**2 - 4) + 144 * (0.25 - 1 / R**2))
        w_inner = 240 * math.pi
        assert out["v_integrals"]["outer"] == pytest.approx(v_outer, rel=1e-12)
        assert out["v_integrals"]["inner"] == pytest.approx(v_inner, rel=1e-12)
        assert out["w_integrals"]["outer"] == pytest.approx(w_outer, rel=1e-12)
        assert out["w_integrals"]["inner"] == pytest.approx(w_inner, rel=1e-12)
        assert out["l1"] == pytest.approx(2 * v_outer + 3 * v_inner, rel=1e-13)
        assert out["l2"] == pytest.approx(3 * w_outer + 2 * w_inner, rel=1e-13)
        assert out["l1"] < out["l2"]

    def test_quadrature_self_check(self):
        base = compute_l1_l2(10.0)
        fine = compute_l1_l2(10.0, order=96, n_theta=128)
        assert abs(base["l1"] - fine["l1"]) <= 1e-10 * base["l1"]
        assert abs(base["l2"] - fine["l2"]) <= 1e-10 * base["l2"]

    def test_ratio_tends_to_three_halves(self):
        ratios = [compute_l1_l2(r)["l2"] / compute_l1_l2(r)["l1"] for r in (10.0, 50.0, 200.0)]
        assert ratios[0] < ratios[1] < ratios[2] <= 1.5
        assert ratios[2] == pytest.approx(1.5, abs=5e-3)

    def test_small_radius_rejected(self):
        with pytest.raises(ParameterError):
            compute_l1_l2(9.0)


class TestLimitBundle:
    def test_equal_exponents_unsupported(self, annulus):
        mesh, regions = annulus
        with pytest.raises(UnsupportedError):
            compute_limit_bundle(mesh, regions, 1.0, 1.0, 2.0, 2.0, F)

    def test_insulating_regime_fields(self, bundle_q_less_p):
        b = bundle_q_less_p
        assert b.regime == REGIME_Q_LESS_P
        # outer limit matches the closed-form insulating solution
        a = GAMMA * R**2 / (R**2 + 1)
        rho = np.linalg.norm(b.mesh_b.nodes, axis=1)
        exact = a * (rho + 1 / rho) * b.mesh_b.nodes[:, 0] / rho
        rel = np.linalg.norm(b.v_b.values - exact) / np.linalg.norm(exact)
        assert rel < 5e-3
        # inner cascade of a nearly-linear trace is nearly linear
        exact_a = 2 * a * b.mesh_a.nodes[:, 0]
        assert np.abs(b.v_a.values - exact_a).max() < 5e-2 * 2 * a
        # polygonal-domain energy bias is O(h^2) area deficit: ~0.6% here
        assert b.b_energy == pytest.approx(math.pi * a**2 * (R**2 - 1 / R**2), rel=1e-2)

    def test_conducting_regime_fields(self, bundle_p_less_q):
        b = bundle_p_less_q
        assert b.regime == REGIME_P_LESS_Q
        k = (7 * R**2 + 12) / (R**2 - 1)
        rho2 = (b.mesh.nodes**2).sum(axis=1)
        exact = np.where(rho2 >= 1.0, k * (1 - 1 / np.maximum(rho2, 1e-30)) * b.mesh.nodes[:, 0], 0.0)
        rel = np.linalg.norm(b.w.values - exact) / np.linalg.norm(exact)
        assert rel < 2e-3
        assert b.v_b is None and b.v_a is None
        # the conducting limit has exactly zero gradient on every inner element
        from plimit.solver import element_gradient_magnitude

        gm = element_gradient_magnitude(b.mesh, b.w.values)
        assert gm[b.regions.element_region == 1].max() < 1e-12

    def test_zero_data_zero_limits(self, annulus):
        mesh, regions = annulus
        b = compute_limit_bundle(mesh, regions, 1.0, 1.0, 2.0, 3.0, "0.0 * x1")
        assert b.b_energy == pytest.approx(0.0, abs=1e-18)
        assert np.allclose(b.w.values, 0.0, atol=1e-12)


class TestSweep:
    def test_distances_decrease_and_bounds_hold(self, sweep_q_less_p, sweep_p_less_q):
        for records in (sweep_q_less_p, sweep_p_less_q):
            assert all(r.converged for r in records)
            d = [r.dist_to_limit_B for r in records]
            assert all(b < a for a, b in zip(d, d[1:]))
            assert all(r.bound_56_ok and r.bound_57_ok for r in records)

    def test_inner_gradients_vanish_in_conducting_regime(self, sweep_p_less_q):
        g = [r.max_grad_A for r in sweep_p_less_q]
        assert all(b < a for a, b in zip(g, g[1:]))
        assert g[-1] < 0.15

    def test_energy_cauchy_behavior(self, sweep_q_less_p):
        g = [r.g_value for r in sweep_q_less_p]
        diffs = [abs(b - a) for a, b in zip(g, g[1:])]
        assert all(b < a for a, b in zip(diffs, diffs[1:]))

    def test_trace_gap_reported_and_decreasing(self, sweep_q_less_p):
        t = [r.trace_gap for r in sweep_q_less_p]
        assert all(x >= 0 for x in t)
        assert t[-1] < t[0]

    def test_schedule_validation(self, annulus, bundle_p_less_q):
        mesh, regions = annulus
        with pytest.raises(ConfigError):
            run_lambda_sweep(mesh, regions, power_law(1.0, 2.0), power_law(1.0, 3.0),
                             2.0, 3.0, F, [1.0, 2.0, 3.0], bundle_p_less_q)
        with pytest.raises(ConfigError):
            run_lambda_sweep(mesh, regions, power_law(1.0, 2.0), power_law(1.0, 3.0),
                             2.0, 3.0, F, [1.0, 2.0, 2.0, 3.0], bundle_p_less_q)


class TestBoundChecks:
    def test_artificial_violation_detected(self, annulus, bundle_p_less_q, sweep_p_less_q):
        mesh, regions = annulus
        rec = sweep_p_less_q[-1]
        bounds = GrowthBounds(1.0, 1.0, 1.0, 2.0)
        # reconstruct a sweep-like field: the conducting limit scaled tenfold
        big = 10.0 * bundle_p_less_q.w.values
        chk = check_bound_56_57(mesh, regions, big, bundle_p_less_q.w.values, bounds,
                                rec.lam, 2.0, 100.0 * rec.g_value)
        assert not chk["b56"]
        assert not chk["b57"]

    def test_small_lambda_trivially_bounded(self, annulus, bundle_p_less_q):
        mesh, regions = annulus
        bounds = GrowthBounds(1.0, 1.0, 1.0, 2.0)
        chk = check_bound_56_57(mesh, regions, bundle_p_less_q.w.values,
                                bundle_p_less_q.w.values, bounds, 1e-3, 2.0, 0.0)
        assert chk["b56"] and chk["b57"]
        assert chk["slack_56"] > 1e5

    def test_fundamental_inequality_both_regimes(self, bundle_q_less_p, sweep_q_less_p,
                                                 bundle_p_less_q, sweep_p_less_q):
        fi1 = check_fundamental_inequality(sweep_q_less_p[-3:], bundle_q_less_p, 1.0)
        assert fi1["ok"] and fi1["gap_rel"] < 0.02
        fi2 = check_fundamental_inequality(sweep_p_less_q[-3:], bundle_p_less_q, 1.0)
        assert fi2["ok"]

    def test_zero_limit_trivially_ok(self, annulus):
        mesh, regions = annulus
        b = compute_limit_bundle(mesh, regions, 1.0, 1.0, 2.0, 3.0, "0.0 * x1")
        recs = run_lambda_sweep(mesh, regions, power_law(1.0, 2.0), power_law(1.0, 3.0),
                                2.0, 3.0, "0.0 * x1", LAMBDAS, b)
        fi = check_fundamental_inequality(recs[-3:], b, 1.0)
        assert fi["ok"] and fi["lhs"] == pytest.approx(0.0, abs=1e-18)

    def test_too_few_records_rejected(self, bundle_p_less_q, sweep_p_less_q):
        with pytest.raises(ConfigError):
            check_fundamental_inequality(sweep_p_less_q[-2:], bundle_p_less_q, 1.0)


class TestCounterexampleDriver:
    def test_coarse_smoke_run(self):
        rep = run_counterexample(big_l=11.0, lambda2_1=1.0, r=10.0, n_max=2,
                                 n_radial=10, control=False)
        assert rep.l1 < rep.l2
        assert len(rep.g_at_lambda_prime) == 2
        assert len(rep.g_at_lambda_second) == 2
        # oscillation visible even on a coarse mesh
        assert max(rep.g_at_lambda_prime) < min(rep.g_at_lambda_second)
        assert all(f > 0.95 for f in rep.window_fraction_prime + rep.window_fraction_second)
        assert rep.diagnostics["min_window_fraction"] <= 1.0

    def test_bad_window_factor_rejected(self):
        with pytest.raises(ParameterError):
            run_counterexample(big_l=9.0, n_max=1, n_radial=8)

    def test_report_serializes(self):
        import json

        rep = run_counterexample(big_l=11.0, lambda2_1=1.0, r=10.0, n_max=1,
                                 n_radial=8, control=False)
        data = json.loads(rep.to_json())
        assert set(["r", "l1", "l2", "verdict", "g_at_lambda_prime"]).issubset(data)
