"""
Tests for SINR, harvested power and secrecy-rate metrics
"""
from decimal import Decimal, localcontext

import numpy as np
import pytest

from metrics import (
    BeamformingSolution,
    harvested_power,
    harvested_powers,
    log_sum_exp,
    sinr_eu,
    sinr_eus,
    sinr_iu,
    smooth_secrecy,
    worst_case_secrecy,
)
from scenario import EffectiveChannels, effective_channels


def _toy():
    eff = EffectiveChannels(h_tilde=np.array([1.0 + 0j]), g_tilde=np.array([[0.5 + 0j]]))
    sol = BeamformingSolution.from_beams(np.array([1.0 + 0j]), np.zeros((1, 1), complex))
    return eff, sol


class TestHandExamples:
    def test_single_antenna_single_eu(self, unit_cfg):
        cfg = unit_cfg(n_s=1, m=1)
        eff, sol = _toy()
        assert sinr_iu(eff, sol, 1.0) == pytest.approx(1.0)
        assert sinr_eu(eff, sol, 0, 1.0) == pytest.approx(0.25)
        assert harvested_power(eff, sol, 0) == pytest.approx(0.25)
        assert worst_case_secrecy(eff, sol, cfg) == pytest.approx(1.0 - np.log2(1.25))

    def test_artificial_noise_counts_as_interference_and_power(self):
        eff = EffectiveChannels(h_tilde=np.array([1.0, 0.0j]), g_tilde=np.array([[0.0, 1.0 + 0j]]))
        sol = BeamformingSolution.from_beams(np.array([2.0, 0.0j]), np.array([[0.0], [3.0 + 0j]]))
        assert sinr_iu(eff, sol, 1.0) == pytest.approx(4.0)
        assert sinr_eu(eff, sol, 0, 1.0) == pytest.approx(0.0)
        assert harvested_power(eff, sol, 0) == pytest.approx(9.0)
        assert sol.power == pytest.approx(13.0)

    def test_clamped_at_zero(self, unit_cfg):
        cfg = unit_cfg(n_s=1, m=1)
        eff = EffectiveChannels(h_tilde=np.array([0.1 + 0j]), g_tilde=np.array([[1.0 + 0j]]))
        sol = BeamformingSolution.from_beams(np.array([1.0 + 0j]), np.zeros((1, 1), complex))
        assert worst_case_secrecy(eff, sol, cfg) == 0.0
        assert smooth_secrecy(eff, sol, cfg) < 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            BeamformingSolution.from_beams(np.ones(2), np.ones((3, 1)))


class TestLogSumExp:
    def test_two_values(self):
        expected = np.log2(2.0 ** 20 + 2.0 ** 40) / 20
        assert log_sum_exp([1.0, 2.0], 20) == pytest.approx(expected, abs=1e-12)
        assert log_sum_exp([1.0, 2.0], 20) == pytest.approx(2.0 + 6.88e-8, abs=1e-9)

    def test_high_precision_oracle(self):
        with localcontext() as ctx:
            ctx.prec = 50
            two = Decimal(2)
            exact = (two ** 20 + two ** 40).ln() / two.ln() / 20
        assert log_sum_exp([1.0, 2.0], 20) == pytest.approx(float(exact), abs=1e-14)

    def test_equal_entries_hit_upper_bound(self):
        assert log_sum_exp([3.0, 3.0, 3.0, 3.0], 2.0) == pytest.approx(3.0 + 1.0)

    def test_no_overflow(self):
        assert log_sum_exp([5000.0, 4999.0], 4.0) == pytest.approx(5000.0 + np.log2(1 + 2.0 ** -4) / 4)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            log_sum_exp([], 4.0)

    def test_bounds_on_random_vectors(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            m = int(rng.integers(1, 9))
            p = float(rng.choice([0.5, 1, 2, 4, 16]))
            x = 10 * rng.normal(size=m)
            value = log_sum_exp(x, p)
            assert x.max() - 1e-12 <= value <= x.max() + np.log2(m) / p + 1e-12


class TestSecrecy:
    @pytest.mark.parametrize("seed", range(10))
    def test_smooth_gap(self, instance, random_solution, seed):
        cfg, _, sample, phases, rng = instance(seed)
        eff = effective_channels(sample, phases)
        sol = random_solution(rng, cfg.n_s, cfg.m, cfg.pt_w)
        rate_iu = np.log2(1 + sinr_iu(eff, sol, cfg.noise_iu_w))
        unclamped = rate_iu - np.max(np.log2(1 + sinr_eus(eff, sol, cfg.noise_eu_w)))
        gap = unclamped - smooth_secrecy(eff, sol, cfg)
        assert -1e-9 <= gap <= np.log2(cfg.m) / cfg.p_smooth + 1e-9
        assert worst_case_secrecy(eff, sol, cfg) == pytest.approx(max(0.0, unclamped))

    def test_common_phase_rotation_is_invisible(self, instance, random_solution):
        cfg, _, sample, phases, rng = instance(3)
        eff = effective_channels(sample, phases)
        sol = random_solution(rng, cfg.n_s, cfg.m, cfg.pt_w)
        turned = sol.with_beams(sol.w * np.exp(0.7j), sol.p_mat * np.exp(-1.3j))
        assert sinr_iu(eff, turned, cfg.noise_iu_w) == pytest.approx(sinr_iu(eff, sol, cfg.noise_iu_w), rel=1e-12)
        np.testing.assert_allclose(harvested_powers(eff, turned), harvested_powers(eff, sol), rtol=1e-12)
        assert smooth_secrecy(eff, turned, cfg) == pytest.approx(smooth_secrecy(eff, sol, cfg), abs=1e-12)

    def test_harvested_power_ignores_noise(self, instance, random_solution):
        cfg, _, sample, phases, rng = instance(5)
        eff = effective_channels(sample, phases)
        sol = random_solution(rng, cfg.n_s, cfg.m, cfg.pt_w)
        gh = eff.g_tilde.conj()
        expected = np.abs(gh @ sol.w) ** 2 + np.sum(np.abs(gh @ sol.p_mat) ** 2, axis=1)
        np.testing.assert_allclose(harvested_powers(eff, sol), expected, rtol=1e-12)

    def test_sinr_is_scale_free(self, instance, random_solution):
        cfg, _, sample, phases, rng = instance(6)
        eff = effective_channels(sample, phases)
        sol = random_solution(rng, cfg.n_s, cfg.m, cfg.pt_w)
        c = 3.7
        louder = sol.with_beams(c * sol.w, c * sol.p_mat)
        noise = c ** 2 * cfg.noise_iu_w
        assert sinr_iu(eff, louder, noise) == pytest.approx(sinr_iu(eff, sol, cfg.noise_iu_w), rel=1e-12)
        np.testing.assert_allclose(sinr_eus(eff, louder, c ** 2 * cfg.noise_eu_w), sinr_eus(eff, sol, cfg.noise_eu_w), rtol=1e-12)

    def test_smooth_exact_with_one_eu(self, instance, random_solution):
        cfg, _, sample, phases, rng = instance(7, m=1)
        eff = effective_channels(sample, phases)
        sol = random_solution(rng, cfg.n_s, 1, cfg.pt_w)
        exact = np.log2(1 + sinr_iu(eff, sol, cfg.noise_iu_w)) - np.log2(1 + sinr_eu(eff, sol, 0, cfg.noise_eu_w))
        assert smooth_secrecy(eff, sol, cfg) == pytest.approx(exact, abs=1e-12)

    def test_half_bit_gap_with_four_equal_eus(self, unit_cfg):
        cfg = unit_cfg(n_s=1, m=4, p_smooth=4.0)
        eff = EffectiveChannels(h_tilde=np.array([2.0 + 0j]), g_tilde=np.full((4, 1), 0.5 + 0j))
        sol = BeamformingSolution.from_beams(np.array([1.0 + 0j]), np.zeros((1, 4), complex))
        unclamped = np.log2(1 + 4.0) - np.log2(1 + 0.25)
        assert smooth_secrecy(eff, sol, cfg) == pytest.approx(unclamped - 0.5, abs=1e-12)


class TestLogSumExpSmoothing:
    def test_decreasing_in_p(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            x = 3 * rng.normal(size=int(rng.integers(2, 9)))
            values = [log_sum_exp(x, p) for p in (1.0, 2.0, 4.0, 8.0)]
            assert np.all(np.diff(values) <= 1e-12)

    def test_exact_for_singletons(self):
        for p in (1.0, 2.0, 4.0, 8.0):
            assert log_sum_exp([1.25], p) == pytest.approx(1.25, abs=1e-15)
