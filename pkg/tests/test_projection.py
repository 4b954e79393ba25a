import math

import numpy as np
import pytest

import discopula as dc
from discopula.errors import ContractError, NoFeasibleProjection

from conftest import (
    CRITICAL_SUPPORT,
    EXCLUSIVE_SUPPORT,
    HAPPINESS_COPULA_4DP,
    HAPPINESS_COUNTS,
    HAPPINESS_PROB_4DP,
    RING_SUPPORT,
    TEEN_COUNTS,
    TEEN_SUPPORT,
    TIGHT,
    random_supported_array,
    ring_array,
    ring_copula,
)


class TestIDivergence:
    def test_identity_is_zero(self):
        rng = np.random.default_rng(0)
        p = rng.uniform(0.1, 1.0, (3, 2))
        p /= p.sum()
        assert dc.i_divergence(p, p) == pytest.approx(0.0, abs=1e-15)

    def test_direct_summation(self):
        q = np.full((2, 2), 0.25)
        p = np.array([[0.4, 0.1], [0.1, 0.4]])
        expected = 2 * 0.25 * math.log(0.25 / 0.4) + 2 * 0.25 * math.log(0.25 / 0.1)
        assert dc.i_divergence(q, p) == pytest.approx(expected, abs=1e-15)
        assert expected == pytest.approx(0.223144, abs=1e-6)

    def test_support_violation_is_infinite(self):
        q = np.full((2, 2), 0.25)
        p = np.array([[0.5, 0.5], [0.0, 0.0]])
        assert dc.i_divergence(q, p) == math.inf

    def test_shape_mismatch(self):
        with pytest.raises(ContractError):
            dc.i_divergence(np.full((2, 2), 0.25), np.full((2, 3), 1 / 6))


class TestIpfProject:
    def test_fixed_point_single_sweep(self):
        p = dc.independence_array([np.array([0.3, 0.7]), np.array([0.6, 0.4])])
        out = dc.ipf_project(p, [np.array([0.3, 0.7]), np.array([0.6, 0.4])])
        assert out.converged and out.sweeps_used == 1
        np.testing.assert_allclose(out.array, p, atol=1e-12)
        for s in out.scalings:
            np.testing.assert_allclose(s, 1.0, atol=1e-12)

    def test_ring_closed_form(self):
        p = ring_array(8.0, np.random.default_rng(5))
        out = dc.ipf_project(p, dc.uniform_targets((3, 3)), TIGHT)
        np.testing.assert_allclose(out.array, ring_copula(8.0), atol=1e-10)
        assert out.array[0, 1] == pytest.approx(2 / 9, abs=1e-10)
        assert out.array[0, 2] == pytest.approx(1 / 9, abs=1e-10)

    def test_exclusive_support_infeasible(self):
        p = random_supported_array(EXCLUSIVE_SUPPORT, np.random.default_rng(6))
        with pytest.raises(NoFeasibleProjection):
            dc.ipf_project(p, dc.uniform_targets((3, 3)))

    def test_scaling_log_reconstructs_output(self):
        rng = np.random.default_rng(7)
        p = random_supported_array(np.ones((3, 4), bool), rng)
        target = [np.array([0.2, 0.3, 0.5]), np.full(4, 0.25)]
        out = dc.ipf_project(p, target)
        rebuilt = p * np.multiply.outer(out.scalings[0], out.scalings[1])
        np.testing.assert_allclose(rebuilt, out.array, atol=1e-12)

    def test_zeros_preserved(self):
        p = ring_array(3.0)
        out = dc.ipf_project(p, dc.uniform_targets((3, 3)))
        assert (out.array[~RING_SUPPORT] == 0.0).all()

    def test_input_not_mutated(self):
        p = dc.smoothed_empirical(HAPPINESS_COUNTS)
        before = p.copy()
        dc.ipf_project(p, dc.uniform_targets((3, 3)))
        np.testing.assert_array_equal(p, before)

    def test_converged_outcome_contract(self):
        p_hat = dc.smoothed_empirical(HAPPINESS_COUNTS)
        cfg = dc.IpfConfig(margin_tol=1e-10)
        out = dc.copula_array(p_hat, cfg)
        assert out.converged and out.final_margin_error <= cfg.margin_tol
        for ax, t in enumerate(dc.uniform_targets((3, 3))):
            assert np.abs(dc.margin(out.array, ax) - t).max() <= cfg.margin_tol

    def test_feasible_but_exhausted_budget(self):
        p_hat = dc.smoothed_empirical(HAPPINESS_COUNTS)
        tight_budget = dc.IpfConfig(margin_tol=1e-15, max_sweeps=2,
                                    stall_window=1000)
        with pytest.raises(dc.MaxSweepsExceeded) as excinfo:
            dc.copula_array(p_hat, tight_budget)
        partial = excinfo.value.outcome
        assert partial is not None and not partial.converged
        assert partial.sweeps_used == 2


class TestCopulaArray:
    def test_independence_maps_to_uniform(self):
        rng = np.random.default_rng(8)
        for dims in [(2, 2), (3, 4), (2, 3, 2)]:
            ms = []
            for r in dims:
                m = rng.uniform(0.2, 1.0, r)
                ms.append(m / m.sum())
            out = dc.copula_array(dc.independence_array(ms))
            np.testing.assert_allclose(
                out.array, np.full(dims, 1.0 / np.prod(dims)), atol=1e-10
            )

    def test_happiness_reproduction(self):
        p_hat = dc.smoothed_empirical(HAPPINESS_COUNTS)
        assert np.abs(p_hat - HAPPINESS_PROB_4DP).max() <= 5e-5
        out = dc.copula_array(p_hat)
        assert np.abs(out.array - HAPPINESS_COPULA_4DP).max() <= 5e-5

    def test_teen_projection_self_consistent(self):
        # frozen from the converged projection; the published display of
        # this array is slightly off (see decisions ledger), but the
        # downstream published coordinate vector pins these values
        p_hat = dc.smoothed_empirical(TEEN_COUNTS, TEEN_SUPPORT)
        out = dc.copula_array(p_hat, TIGHT)
        expected = np.zeros((4, 2, 2))
        expected[:, :, 0] = [[0.0663, 0.0610], [0, 0], [0.1554, 0.0472],
                             [0.1040, 0.0661]]
        expected[:, :, 1] = [[0.0509, 0.0718], [0.0545, 0.1955],
                             [0.0243, 0.0232], [0.0446, 0.0353]]
        assert np.abs(out.array - expected).max() <= 5e-5
        for ax, r in enumerate((4, 2, 2)):
            np.testing.assert_allclose(dc.margin(out.array, ax), 1 / r, atol=1e-12)

    def test_validates_input(self):
        with pytest.raises(ContractError):
            dc.copula_array(np.array([[0.5, 0.5], [0.0, 0.0]]))


class TestFeasibility:
    def test_teen_support_feasible(self):
        check = dc.uniform_margins_feasible(TEEN_SUPPORT)
        assert check.feasible and check.converged

    def test_exclusive_support(self):
        check = dc.uniform_margins_feasible(EXCLUSIVE_SUPPORT)
        assert not check.feasible

    def test_critical_support(self):
        check = dc.uniform_margins_feasible(CRITICAL_SUPPORT)
        assert not check.feasible

    def test_empty_slice_support(self):
        support = np.ones((3, 3), dtype=bool)
        support[1, :] = False
        check = dc.uniform_margins_feasible(support)
        assert not check.feasible

    def test_verdict_matches_certificate_on_random_supports(self):
        # the LP certificate is exact, so the scaling-loop verdict must
        # agree with it whatever the support pattern
        rng = np.random.default_rng(77)
        shapes = [(2, 2), (3, 3), (4, 3), (2, 2, 2), (3, 2, 2)]
        checked = 0
        while checked < 25:
            shape = shapes[rng.integers(len(shapes))]
            support = np.ones(shape, dtype=bool)
            flat = support.reshape(-1)
            drop = rng.integers(0, max(1, support.size // 2))
            flat[rng.choice(support.size, size=drop, replace=False)] = False
            if not flat.any():
                continue
            checked += 1
            feasible, eps = dc.min_entry_certificate(support,
                                                     dc.uniform_targets(shape))
            oracle = bool(feasible and eps is not None and eps > 1e-9)
            assert dc.uniform_margins_feasible(support).feasible == oracle

    def test_certificate_values(self):
        feasible, eps = dc.min_entry_certificate(EXCLUSIVE_SUPPORT,
                                                 dc.uniform_targets((3, 3)))
        assert not feasible
        feasible, eps = dc.min_entry_certificate(CRITICAL_SUPPORT,
                                                 dc.uniform_targets((3, 3)))
        assert feasible and eps == pytest.approx(0.0, abs=1e-9)
        feasible, eps = dc.min_entry_certificate(RING_SUPPORT,
                                                 dc.uniform_targets((3, 3)))
        assert feasible and eps == pytest.approx(1 / 6, abs=1e-9)


class TestQuasiIndependenceArray:
    def test_full_support_uniform(self):
        g = dc.quasi_independence_array(np.ones((3, 4), bool))
        np.testing.assert_allclose(g, 1 / 12, atol=1e-12)

    def test_ring_support(self):
        g = dc.quasi_independence_array(RING_SUPPORT)
        np.testing.assert_allclose(g[RING_SUPPORT], 1 / 6, atol=1e-12)

    def test_teen_support_rationals(self):
        g = dc.quasi_independence_array(TEEN_SUPPORT, TIGHT)
        expected = np.zeros((4, 2, 2))
        expected[:, :, 0] = [[1 / 12] * 2, [0, 0], [1 / 12] * 2, [1 / 12] * 2]
        expected[:, :, 1] = [[1 / 24] * 2, [1 / 8] * 2, [1 / 24] * 2, [1 / 24] * 2]
        np.testing.assert_allclose(g, expected, atol=1e-12)

    def test_infeasible_support_raises(self):
        with pytest.raises(NoFeasibleProjection):
            dc.quasi_independence_array(EXCLUSIVE_SUPPORT)


class TestSmoothedEmpirical:
    def test_happiness_entry(self):
        p_hat = dc.smoothed_empirical(HAPPINESS_COUNTS)
        assert p_hat[0, 0] == pytest.approx((272 + 1 / 9) / 2956, abs=1e-15)
        assert round(p_hat[0, 0], 4) == 0.0921

    def test_teen_entry(self):
        p_hat = dc.smoothed_empirical(TEEN_COUNTS, TEEN_SUPPORT)
        assert p_hat[0, 0, 0] == pytest.approx((4 + 1 / 14) / 292, abs=1e-15)
        assert round(p_hat[0, 0, 0], 4) == 0.0139
        assert (p_hat[~TEEN_SUPPORT] == 0).all()

    def test_single_observation_mixture(self):
        counts = np.zeros((2, 2), dtype=int)
        counts[1, 0] = 1
        p_hat = dc.smoothed_empirical(counts, np.ones((2, 2), bool))
        expected = 0.5 * np.array([[0, 0], [1, 0]]) + 0.5 * np.full((2, 2), 0.25)
        np.testing.assert_allclose(p_hat, expected, atol=1e-15)

    def test_no_smoothing(self):
        p = dc.smoothed_empirical(HAPPINESS_COUNTS, smooth=False)
        np.testing.assert_allclose(p, HAPPINESS_COUNTS / 2955, atol=1e-15)

    def test_count_outside_support(self):
        with pytest.raises(ContractError):
            dc.smoothed_empirical(TEEN_COUNTS, ~TEEN_SUPPORT)

    def test_empty_table(self):
        with pytest.raises(ContractError):
            dc.smoothed_empirical(np.zeros((2, 2), dtype=int))


class TestFactorizationResidual:
    def test_projection_factorises(self):
        rng = np.random.default_rng(9)
        for support in [np.ones((3, 3), bool), RING_SUPPORT, TEEN_SUPPORT]:
            p = random_supported_array(support, rng)
            g = dc.copula_array(p, TIGHT).array
            assert dc.factorization_residual(g, p) < 1e-8

    def test_uniform_identity(self):
        p = np.full((2, 2), 0.25)
        assert dc.factorization_residual(p, p) == pytest.approx(0.0, abs=1e-12)

    def test_margin_preserving_perturbation_detected(self):
        rng = np.random.default_rng(10)
        p = random_supported_array(np.ones((3, 3), bool), rng)
        g = dc.copula_array(p, TIGHT).array
        bundle = dc.canonical_basis((3, 3))
        tilt = dc.unvec(bundle.columns[:, 0], (3, 3))
        perturbed = g + 0.03 * tilt
        assert (perturbed > 0).all()
        assert dc.factorization_residual(perturbed, p) > 1e-3

    def test_support_mismatch(self):
        with pytest.raises(ContractError):
            dc.factorization_residual(np.full((2, 2), 0.25),
                                      np.array([[0.5, 0.5], [0.0, 0.0]]))


class TestProjectionProperties:
    def test_idempotence(self):
        rng = np.random.default_rng(11)
        for support in [np.ones((3, 3), bool), RING_SUPPORT, TEEN_SUPPORT]:
            p = random_supported_array(support, rng)
            g = dc.copula_array(p, TIGHT).array
            again = dc.copula_array(g, TIGHT).array
            assert np.abs(again - g).max() < 1e-10

    def test_duality_round_trip(self):
        rng = np.random.default_rng(12)
        for support in [np.ones((3, 3), bool), RING_SUPPORT, TEEN_SUPPORT]:
            p = random_supported_array(support, rng)
            g = dc.copula_array(p, TIGHT).array
            back = dc.ipf_project(g, dc.margins(p), TIGHT).array
            assert np.abs(back - p).max() < 1e-8
            assert np.array_equal(back > 0, p > 0)

    def test_minimality(self):
        rng = np.random.default_rng(13)
        p = random_supported_array(RING_SUPPORT, rng)
        g = dc.copula_array(p, TIGHT).array
        best = dc.i_divergence(g, p)
        bundle = dc.dependence_basis(RING_SUPPORT, config=TIGHT)
        tried = 0
        while tried < 100:
            coords = rng.uniform(-1 / 6, 1 / 6, bundle.d_circ)
            if not dc.is_admissible(bundle, coords):
                continue
            tried += 1
            other = dc.copula_from_coords(bundle, coords)
            assert dc.i_divergence(other, p) >= best - 1e-10

    def test_four_way_pipeline(self):
        # nothing in the machinery is specific to two or three axes
        rng = np.random.default_rng(15)
        shape = (2, 3, 2, 2)
        support = np.ones(shape, dtype=bool)
        support[0, 1, 0, 0] = False
        support[1, 2, 1, 1] = False
        assert dc.uniform_margins_feasible(support).feasible
        p = random_supported_array(support, rng)
        out = dc.copula_array(p, TIGHT)
        assert out.converged
        bundle = dc.dependence_basis(support, config=TIGHT)
        assert bundle.d_circ == support.size - 2 - (sum(shape) - len(shape) + 1)
        coords = dc.coords_of_copula(bundle, out.array)
        back = dc.copula_from_coords(bundle, coords)
        assert np.abs(back - out.array).max() < 1e-12
        cov = dc.sandwich_covariance(bundle, p, out.array)
        assert np.linalg.eigvalsh(cov.coords).min() > -1e-10

    def test_group_invariance(self):
        rng = np.random.default_rng(14)
        p = random_supported_array(TEEN_SUPPORT, rng)
        g = dc.copula_array(p, TIGHT).array
        scaled = p.copy()
        for ax, r in enumerate(p.shape):
            f = rng.uniform(0.5, 2.0, r)
            shape = [1, 1, 1]
            shape[ax] = -1
            scaled = scaled * f.reshape(shape)
        scaled /= scaled.sum()
        g2 = dc.copula_array(scaled, TIGHT).array
        assert np.abs(g2 - g).max() < 1e-9
