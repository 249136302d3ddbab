"""
Tests for the long-term SSCA phase update and discrete projection
"""
from dataclasses import replace

import numpy as np
import pytest

from longterm import (
    AUTO_FIRST_STEP,
    SurrogateState,
    auto_tau,
    deployed_phases,
    fold_surrogate,
    grad_theta,
    init_surrogate,
    project_discrete,
    ssca_step,
    update_surrogate,
)
from metrics import smooth_secrecy
from scenario import TWO_PI, PhaseShifts, effective_channels


def _finite_difference(sample, sol, phases, cfg, h=1e-6):
    fd = np.empty(phases.n_r)
    for n in range(phases.n_r):
        up, down = phases.theta.copy(), phases.theta.copy()
        up[n] += h
        down[n] -= h
        f_up = smooth_secrecy(effective_channels(sample, PhaseShifts.wrapped(up)), sol, cfg)
        f_down = smooth_secrecy(effective_channels(sample, PhaseShifts.wrapped(down)), sol, cfg)
        fd[n] = (f_up - f_down) / (2 * h)
    return fd


class TestGradient:
    def test_zero_without_ris_links(self, synthetic_sample, random_solution, unit_cfg):
        cfg = unit_cfg(n_s=2, n_r=4, m=2)
        rng = np.random.default_rng(0)
        sample = synthetic_sample(rng, 2, 4, 2)
        sample = replace(sample, h2=np.zeros(4, complex), g2=np.zeros((2, 4), complex))
        phases = PhaseShifts.constant(4)
        sol = random_solution(rng, 2, 2, cfg.pt_w)
        grad = grad_theta(effective_channels(sample, phases), sample, sol, phases, cfg)
        np.testing.assert_array_equal(grad, np.zeros(4))

    @pytest.mark.parametrize("n_r", [4, 8, 16])
    def test_matches_finite_differences(self, synthetic_sample, random_solution, unit_cfg, n_r):
        cfg = unit_cfg(n_s=2, n_r=n_r, m=3)
        rng = np.random.default_rng(n_r)
        sample = synthetic_sample(rng, 2, n_r, 3)
        phases = PhaseShifts(TWO_PI * (1.0 - rng.random(n_r)))
        sol = random_solution(rng, 2, 3, cfg.pt_w)
        grad = grad_theta(effective_channels(sample, phases), sample, sol, phases, cfg)
        fd = _finite_difference(sample, sol, phases, cfg)
        assert np.linalg.norm(grad - fd) <= 1e-5 * max(np.linalg.norm(fd), 1e-9)

    def test_single_eu_ignores_smoothing(self, synthetic_sample, random_solution, unit_cfg):
        rng = np.random.default_rng(3)
        sample = synthetic_sample(rng, 2, 4, 1)
        phases = PhaseShifts(TWO_PI * (1.0 - rng.random(4)))
        sol = random_solution(rng, 2, 1, 1.0)
        eff = effective_channels(sample, phases)
        low = grad_theta(eff, sample, sol, phases, unit_cfg(n_s=2, n_r=4, m=1, p_smooth=1.0))
        high = grad_theta(eff, sample, sol, phases, unit_cfg(n_s=2, n_r=4, m=1, p_smooth=8.0))
        np.testing.assert_allclose(low, high, rtol=1e-12, atol=1e-15)


class TestSurrogate:
    def test_first_fold_takes_the_sample_mean(self):
        state = init_surrogate(PhaseShifts.constant(2))
        folded = fold_surrogate(state, [1.0, 3.0], [np.array([1.0, 0.0]), np.array([3.0, 2.0])])
        assert folded.f_scalar == pytest.approx(2.0)
        np.testing.assert_allclose(folded.f_grad, [2.0, 1.0])

    def test_convex_combination(self):
        state = replace(init_surrogate(PhaseShifts.constant(2)), f_scalar=1.0, f_grad=np.array([1.0, 1.0]), t=1)
        rho = 2.0 ** -0.6
        folded = fold_surrogate(state, [3.0], [np.array([3.0, -1.0])])
        assert folded.f_scalar == pytest.approx((1 - rho) * 1.0 + rho * 3.0)
        np.testing.assert_allclose(folded.f_grad, [(1 - rho) + 3 * rho, (1 - rho) - rho])

    def test_schedules(self):
        state = init_surrogate(PhaseShifts.constant(1))
        assert (state.rho, state.gamma) == (1.0, 1.0)
        later = replace(state, t=3)
        assert later.rho == pytest.approx(4.0 ** -0.6)
        assert later.gamma == pytest.approx(4.0 ** -0.9)
        ratios = [replace(state, t=t).gamma / replace(state, t=t).rho for t in range(1, 200)]
        assert np.all(np.diff(ratios) < 0)

    def test_bad_inputs(self):
        with pytest.raises(ValueError):
            init_surrogate(PhaseShifts.constant(2), tau=0.0)
        state = init_surrogate(PhaseShifts.constant(2))
        with pytest.raises(ValueError):
            fold_surrogate(state, [], [])
        with pytest.raises(ValueError):
            update_surrogate(state, [], [], None)

    def test_update_over_samples(self, synthetic_sample, random_solution, unit_cfg):
        cfg = unit_cfg(n_s=2, n_r=4, m=2)
        rng = np.random.default_rng(5)
        samples = [synthetic_sample(rng, 2, 4, 2) for _ in range(3)]
        sols = [random_solution(rng, 2, 2, cfg.pt_w) for _ in range(3)]
        state = init_surrogate(PhaseShifts.constant(4))
        with pytest.raises(ValueError):
            update_surrogate(state, samples, sols[:2], cfg)
        folded = update_surrogate(state, samples, sols, cfg)
        values = [smooth_secrecy(effective_channels(s, state.theta), x, cfg) for s, x in zip(samples, sols)]
        assert folded.f_scalar == pytest.approx(np.mean(values))
        assert folded.t == 0


class TestSscaStep:
    def test_first_step_lands_on_surrogate_maximizer(self):
        state = replace(init_surrogate(PhaseShifts.constant(2)), f_grad=np.array([2.0, -2.0]))
        moved = ssca_step(state)
        np.testing.assert_allclose(moved.theta.theta, [np.pi + 1.0, np.pi - 1.0])
        assert moved.t == 1

    def test_later_step_is_damped_and_wrapped(self):
        state = replace(
            init_surrogate(PhaseShifts(np.array([6.0])), tau=0.5), f_grad=np.array([4.0]), t=1
        )
        gamma = 2.0 ** -0.9
        moved = ssca_step(state)
        assert moved.theta.theta[0] == pytest.approx(np.mod(6.0 + gamma * 4.0, TWO_PI))
        assert 0 < moved.theta.theta[0] <= TWO_PI

    def test_unset_tau_sizes_the_first_move(self):
        # gradients in bits/s/Hz per rad are small when the RIS path is weak
        state = replace(init_surrogate(PhaseShifts.constant(3), tau=None), f_grad=np.array([0.02, -0.01, 0.0]))
        moved = ssca_step(state)
        np.testing.assert_allclose(moved.theta.theta - np.pi, [AUTO_FIRST_STEP, -AUTO_FIRST_STEP / 2, 0.0])
        assert moved.tau == pytest.approx(0.02 / (2 * AUTO_FIRST_STEP))

        later = ssca_step(replace(moved, f_grad=np.array([0.04, 0.0, 0.0])))
        assert later.tau == moved.tau
        assert later.theta.theta[0] - moved.theta.theta[0] == pytest.approx(moved.gamma * 0.04 / (2 * moved.tau))

    def test_unset_tau_waits_for_a_gradient(self):
        state = init_surrogate(PhaseShifts.constant(2), tau=None)
        moved = ssca_step(state)
        assert moved.tau is None
        assert moved.t == 1
        np.testing.assert_array_equal(moved.theta.theta, state.theta.theta)
        assert auto_tau(np.zeros(2), 1.0) is None

    def test_theta_stays_in_range(self):
        rng = np.random.default_rng(9)
        state = init_surrogate(PhaseShifts(TWO_PI * (1.0 - rng.random(8))), tau=None)
        for _ in range(50):
            state = ssca_step(fold_surrogate(state, [1.0], [rng.normal(size=8)]))
            assert np.all(state.theta.theta > 0) and np.all(state.theta.theta <= TWO_PI)


class TestSchedules:
    def test_step_size_conditions(self):
        t = np.arange(1_000_000, dtype=float)
        rho = (t + 1.0) ** -0.6
        gamma = (t + 1.0) ** -0.9
        partial = np.cumsum(rho ** 2)
        # sum rho^2 converges to zeta(1.2) < 5.6
        assert partial[-1] < 5.6
        assert partial[-1] - partial[99_999] < 0.5
        ratio = gamma / rho
        assert np.all(np.diff(ratio) < 0)
        assert ratio[-1] < 0.02
        # sum gamma diverges
        assert np.sum(gamma) > 10.0


class TestProjection:
    def test_one_bit(self):
        theta = PhaseShifts(np.array([0.1 * np.pi, 0.6 * np.pi, 1.99 * np.pi]))
        np.testing.assert_allclose(project_discrete(theta, 1).theta, [0.0, np.pi, 0.0])

    def test_two_bits(self):
        theta = PhaseShifts(np.array([0.3, 1.99 * np.pi, TWO_PI]))
        np.testing.assert_allclose(project_discrete(theta, 2).theta, [0.0, 0.0, 0.0])

    def test_ties_go_to_smaller_angle(self):
        np.testing.assert_array_equal(project_discrete(PhaseShifts(np.array([np.pi / 2])), 1).theta, [0.0])
        np.testing.assert_array_equal(project_discrete(PhaseShifts(np.array([np.pi / 4])), 2).theta, [0.0])

    @pytest.mark.parametrize("q_bits", [1, 2, 3, 5])
    def test_idempotent_and_nearest(self, q_bits):
        rng = np.random.default_rng(q_bits)
        theta = PhaseShifts(TWO_PI * rng.random(50))
        once = project_discrete(theta, q_bits)
        np.testing.assert_allclose(project_discrete(once, q_bits).theta, once.theta)
        step = TWO_PI / 2 ** q_bits
        distance = np.abs(np.angle(np.exp(1j * (once.theta - theta.theta))))
        assert np.all(distance <= step / 2 + 1e-12)

    def test_continuous_passthrough(self):
        theta = PhaseShifts(np.array([1.234]))
        assert project_discrete(theta, 0) is theta
        with pytest.raises(ValueError):
            project_discrete(theta, -1)

    def test_deployed_phases_use_state_theta(self):
        state = init_surrogate(PhaseShifts(np.array([0.1, 3.0])))
        np.testing.assert_allclose(deployed_phases(state, 1).theta, [0.0, np.pi])
        assert isinstance(state, SurrogateState)
