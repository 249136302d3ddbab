"""
Benchmark schemes: random phases, channel-power maximization, instantaneous-CSI alternation
"""
import logging
from typing import Optional, Sequence, Tuple

import numpy as np

from cvxcore import iu_directed_start
from heuristic import a_bar_from_samples, draw_samples, minimize_unimodular
from longterm import grad_theta
from metrics import BeamformingSolution, harvested_powers, smooth_secrecy
from models import SystemConfig
from scenario import TWO_PI, ChannelSample, ChannelStatistics, PhaseShifts, effective_channels
from shortterm import CccpBcdConfig, solve_shortterm

logger = logging.getLogger(__name__)


def random_phases(n_r: int, rng: np.random.Generator) -> PhaseShifts:
    """I.i.d. uniform phases on (0, 2 pi]."""
    return PhaseShifts(TWO_PI * (1.0 - rng.random(n_r)))


def channel_power_max_from_samples(samples: Sequence[ChannelSample]) -> PhaseShifts:
    mat = a_bar_from_samples(samples, 0.0)
    return minimize_unimodular(mat, PhaseShifts.constant(mat.n_r))


def channel_power_max_phases(stats: ChannelStatistics, n_samples: int, rng: np.random.Generator) -> PhaseShifts:
    """Maximize the average BS-IU effective channel power (statistical design with a = 0)."""
    return channel_power_max_from_samples(draw_samples(stats, n_samples, rng))


def _phase_ascent(
    sample: ChannelSample,
    sol: BeamformingSolution,
    phases: PhaseShifts,
    cfg: SystemConfig,
    steps: int,
) -> PhaseShifts:
    """Projected gradient ascent of S_bar over theta at fixed beams, keeping the EH thresholds."""
    eff = effective_channels(sample, phases)
    value = smooth_secrecy(eff, sol, cfg)
    step_size = None
    for _ in range(steps):
        grad = grad_theta(eff, sample, sol, phases, cfg)
        peak = float(np.max(np.abs(grad)))
        if peak == 0:
            break
        if step_size is None:
            step_size = 0.5 / peak
        accepted = False
        for _ in range(30):
            candidate = PhaseShifts.wrapped(phases.theta + step_size * grad)
            cand_eff = effective_channels(sample, candidate)
            cand_value = smooth_secrecy(cand_eff, sol, cfg)
            energy_ok = cfg.eps_w == 0 or bool(np.all(harvested_powers(cand_eff, sol) >= cfg.eps_w))
            if cand_value > value and energy_ok:
                phases, eff, value = candidate, cand_eff, cand_value
                accepted = True
                step_size *= 2.0
                break
            step_size *= 0.5
        if not accepted:
            break
    return phases


def instantaneous_csi_scheme(
    sample: ChannelSample,
    cfg: SystemConfig,
    iters: int = 5,
    ccfg: Optional[CccpBcdConfig] = None,
    theta0: Optional[PhaseShifts] = None,
    pg_steps: int = 20,
) -> Tuple[PhaseShifts, BeamformingSolution]:
    """Alternate CCCP-BCD beams and phase gradient ascent with perfect instantaneous CSI."""
    if iters < 0:
        raise ValueError(f"iters must be non-negative, got {iters}")
    ccfg = ccfg or CccpBcdConfig()
    phases = theta0 or PhaseShifts.constant(sample.n_r)
    eff = effective_channels(sample, phases)
    sol, _ = solve_shortterm(eff, cfg, ccfg, iu_directed_start(eff, cfg))
    value = smooth_secrecy(eff, sol, cfg)
    for round_idx in range(iters):
        phases = _phase_ascent(sample, sol, phases, cfg, pg_steps)
        eff = effective_channels(sample, phases)
        sol, _ = solve_shortterm(eff, cfg, ccfg, sol)
        new_value = smooth_secrecy(eff, sol, cfg)
        logger.debug(f"instantaneous round {round_idx}: S_bar {value:.6f} -> {new_value:.6f}")
        value = new_value
    return phases, sol
