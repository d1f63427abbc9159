"""Tests for the SMP protocol simulations and sample-size planning."""

import math

import numpy as np
import pytest

from nonsig.bounds import nu_tilde
from nonsig.core import (
    AffineModel,
    Alphabets,
    enumerate_local_vertices,
    pr_box,
    to_correlation_rep,
)
from nonsig.simulate import (
    SmpPlan,
    boolean_plan,
    classical_plan,
    hoeffding_bound,
    quantum_plan,
    renormalize_estimates,
    run_smp_boolean,
    run_smp_classical,
    run_smp_quantum_sim,
)

B22 = Alphabets(2, 2, 2, 2)


def pr_model():
    return nu_tilde(pr_box()).primal_certificate


class TestPlans:
    def test_classical_plan_pr_numbers(self):
        # independent arithmetic for Lambda=2, delta=0.1, A=B=2
        plan = classical_plan(2.0, 0.1, B22)
        assert plan.beta == pytest.approx(0.1 / 16.0)
        expected_T = math.ceil(8.0 * (4.0 * 2.0 / 0.1) ** 2 * math.log(160.0))
        assert plan.T == expected_T == 259_849
        assert plan.variant == "classical"

    def test_quantum_plan_numbers(self):
        plan = quantum_plan(2.0, 0.2, B22)
        beta = 0.2 / 32.0
        assert plan.beta == pytest.approx(beta)
        assert plan.T == math.ceil(2.0 * (2.0 / beta) ** 4 * math.log(64.0 / 0.2))
        n = math.ceil(math.log2(4))
        assert plan.L == math.ceil(16.0 * n * 4.0 / 0.04)

    def test_boolean_plan_numbers(self):
        assert boolean_plan(1.0, 0.5).T == 3  # ceil(4 ln 2)
        plan = boolean_plan(2.0, 0.05, epsilon=0.0)
        assert plan.T == math.ceil(16.0 * math.log(20.0))
        with pytest.raises(ValueError):
            boolean_plan(1.0, 0.1, epsilon=0.5)

    def test_overrides(self):
        assert classical_plan(2.0, 0.1, B22, T=100).T == 100
        plan = quantum_plan(2.0, 0.1, B22, T=50, L=60)
        assert (plan.T, plan.L) == (50, 60)


class TestHoeffding:
    def test_zero_beta(self):
        assert hoeffding_bound(10, 0.0, 1.0) == 1.0

    def test_direct_formula(self):
        assert hoeffding_bound(200, 0.1, 1.0) == pytest.approx(math.exp(-4.0))

    def test_doubling_squares(self):
        b = hoeffding_bound(137, 0.07, 2.0)
        assert hoeffding_bound(274, 0.07, 2.0) == pytest.approx(b ** 2)

    def test_validation(self):
        with pytest.raises(ValueError):
            hoeffding_bound(0, 0.1, 1.0)
        with pytest.raises(ValueError):
            hoeffding_bound(10, 0.1, 0.0)


class TestRenormalize:
    def test_distribution_unchanged(self):
        out = renormalize_estimates(np.array([0.25, 0.25, 0.5]))
        assert out == pytest.approx([0.25, 0.25, 0.5, 0.0])

    def test_clip_and_deficit(self):
        out = renormalize_estimates(np.array([-0.2, 0.5, 0.3]))
        assert out == pytest.approx([0.0, 0.5, 0.3, 0.2])

    def test_excess_divided_through(self):
        out = renormalize_estimates(np.array([0.8, 0.8]))
        assert out == pytest.approx([0.5, 0.5, 0.0])

    def test_always_sums_to_one(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            out = renormalize_estimates(rng.normal(size=6))
            assert out.sum() == pytest.approx(1.0, abs=1e-15)
            assert out.min() >= 0.0


class TestClassicalProtocol:
    def test_degenerate_deterministic_model(self):
        # q+ = 1 on a single vertex: only replay noise remains
        vtx = next(iter(enumerate_local_vertices(B22)))
        model = AffineModel([(1.0, vtx)])
        plan = classical_plan(1.0, 0.1, B22, T=1000)
        out = run_smp_classical(model, vtx.distribution(), plan, seed=5)
        assert out.distance <= 3.0 / math.sqrt(10_000)

    def test_pr_box_reduced_plan(self):
        model = pr_model()
        plan = classical_plan(model.mass, 0.1, B22, T=40_000)
        out = run_smp_classical(model, pr_box(), plan, seed=1)
        assert out.distance <= 0.1
        # renormalized estimates are exact distributions
        assert np.abs(out.estimates.sum(axis=2) - 1.0).max() <= 1e-12
        assert np.abs(out.empirical.sum(axis=2) - 1.0).max() <= 1e-12

    def test_raw_estimates_within_weight_range(self):
        model = pr_model()
        q_plus, _, q_minus, _ = model.split_signed()
        plan = classical_plan(model.mass, 0.1, B22, T=500)
        for seed in range(5):
            out = run_smp_classical(model, pr_box(), plan, seed=seed, replays=100)
            assert out.raw_estimates.min() >= -q_minus - 1e-12
            assert out.raw_estimates.max() <= q_plus + 1e-12

    def test_estimator_unbiased(self):
        model = pr_model()
        plan = classical_plan(model.mass, 0.1, B22, T=2000)
        seeds = 20
        acc = np.zeros(B22.shape)
        for seed in range(seeds):
            acc += run_smp_classical(model, pr_box(), plan, seed=seed,
                                     replays=100).raw_estimates
        tol = 5.0 / math.sqrt(plan.T * seeds)
        assert np.abs(acc / seeds - pr_box().table).max() <= tol

    def test_determinism(self):
        model = pr_model()
        plan = classical_plan(model.mass, 0.1, B22, T=1000)
        a = run_smp_classical(model, pr_box(), plan, seed=9, replays=500)
        b = run_smp_classical(model, pr_box(), plan, seed=9, replays=500)
        assert np.array_equal(a.empirical, b.empirical)
        assert a.distance == b.distance
        c = run_smp_classical(model, pr_box(), plan, seed=10, replays=500)
        assert not np.array_equal(a.empirical, c.empirical)

    def test_non_local_component_rejected(self):
        model = AffineModel([(1.0, pr_box())])
        plan = classical_plan(1.0, 0.1, B22, T=100)
        with pytest.raises(ValueError):
            run_smp_classical(model, pr_box(), plan, seed=0)


class TestQuantumProtocol:
    def test_pr_box_reduced_plan(self):
        model = pr_model()
        plan = quantum_plan(model.mass, 0.2, B22, T=20_000, L=4000)
        out = run_smp_quantum_sim(model, pr_box(), plan, seed=2)
        assert out.distance <= 0.2
        assert out.extras["pool_ok"]
        assert np.abs(out.empirical.sum(axis=2) - 1.0).max() <= 1e-12

    def test_determinism(self):
        model = pr_model()
        plan = quantum_plan(model.mass, 0.2, B22, T=2000, L=1000)
        a = run_smp_quantum_sim(model, pr_box(), plan, seed=4, replays=500)
        b = run_smp_quantum_sim(model, pr_box(), plan, seed=4, replays=500)
        assert np.array_equal(a.empirical, b.empirical)
        assert a.extras == b.extras

    def test_non_local_component_rejected(self):
        model = AffineModel([(1.0, pr_box())])
        plan = quantum_plan(1.0, 0.2, B22, T=100, L=100)
        with pytest.raises(ValueError):
            run_smp_quantum_sim(model, pr_box(), plan, seed=0)


class TestBooleanProtocol:
    def test_deterministic_sign_function(self):
        # a local C needs only T' = ceil(4 ln(1/delta)) samples
        vtx = next(iter(enumerate_local_vertices(B22)))
        model = AffineModel([(1.0, vtx)])
        C = to_correlation_rep(vtx.distribution()).C
        plan = boolean_plan(1.0, 0.1)
        res = run_smp_boolean(C, model, plan, seed=3)
        assert res["max_error_rate"] == 0.0

    def test_pr_sign_matrix(self):
        model = pr_model()
        C = to_correlation_rep(pr_box()).C
        plan = boolean_plan(model.mass, 0.05)
        res = run_smp_boolean(C, model, plan, seed=6)
        assert res["max_error_rate"] <= 0.05
        assert res["T"] == plan.T
        assert res["error_rate"].shape == (2, 2)

    def test_determinism_and_validation(self):
        model = pr_model()
        C = to_correlation_rep(pr_box()).C
        plan = boolean_plan(model.mass, 0.1)
        a = run_smp_boolean(C, model, plan, seed=7)
        b = run_smp_boolean(C, model, plan, seed=7)
        assert np.array_equal(a["error_rate"], b["error_rate"])
        with pytest.raises(ValueError):
            run_smp_boolean(np.array([[0.5, 1.0], [1.0, 1.0]]), model, plan, seed=0)
