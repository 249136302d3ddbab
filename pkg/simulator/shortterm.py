"""
CCCP-BCD solver for the short-term beamforming subproblem at fixed RIS phases.

The objective minimized here is
    J = z e(w, P, u) - ln z + (v/p) sum_m (1 + y_m)^p - (1/p) ln v
subject to the power budget, y_m >= SINR_E,m and the EH thresholds. With the
closed-form z, u, v and y = SINR_E it equals 1 + 1/p - ln(2) * S_bar.
"""
import logging
from dataclasses import replace
from typing import Iterator, List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from cvxcore import ConvexSubproblem, SolverReport, linearize_at, solve_step3
from metrics import BeamformingSolution, harvested_powers, sinr_eus
from models import ExperimentConfig, SystemConfig
from scenario import EffectiveChannels

logger = logging.getLogger(__name__)

RELAXED_TOL_FACTOR = 100.0


class CccpBcdConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_outer_iters: int = Field(30, ge=1, description="Iteration cap J")
    obj_tol: float = Field(1e-6, gt=0.0, description="Relative objective change that stops the loop")
    solver_tol: float = Field(1e-7, gt=0.0, description="Barrier tolerance of the Step-3 solver")

    @classmethod
    def from_experiment(cls, ecfg: ExperimentConfig) -> "CccpBcdConfig":
        return cls(max_outer_iters=ecfg.max_outer_iters, obj_tol=ecfg.obj_tol, solver_tol=ecfg.solver_tol)


def mse_e(eff: EffectiveChannels, sol: BeamformingSolution, noise_w: float) -> float:
    """MSE of the IU's scalar receiver u."""
    hw = np.vdot(eff.h_tilde, sol.w)
    leak = float(np.sum(np.abs(eff.h_tilde.conj() @ sol.p_mat) ** 2))
    u2 = abs(sol.u) ** 2
    return float(u2 * (abs(hw) ** 2 + leak + noise_w) + 1.0 - 2.0 * (np.conj(sol.u) * hw).real)


def update_z_v(eff: EffectiveChannels, sol: BeamformingSolution, cfg: SystemConfig) -> Tuple[float, float]:
    e = mse_e(eff, sol, cfg.noise_iu_w)
    if e <= 0:
        raise ValueError(f"MSE must be positive, got {e}")
    total = float(np.sum((1.0 + sol.y) ** cfg.p_smooth))
    return 1.0 / e, 1.0 / total


def update_u(eff: EffectiveChannels, sol: BeamformingSolution, noise_w: float) -> complex:
    """MMSE receiver h^H w / (|h^H w|^2 + ||h^H P||^2 + sigma^2)."""
    if noise_w <= 0:
        raise ValueError(f"noise power must be positive, got {noise_w}")
    hw = np.vdot(eff.h_tilde, sol.w)
    leak = float(np.sum(np.abs(eff.h_tilde.conj() @ sol.p_mat) ** 2))
    return complex(hw / (abs(hw) ** 2 + leak + noise_w))


def bcd_objective(eff: EffectiveChannels, sol: BeamformingSolution, cfg: SystemConfig) -> float:
    p = cfg.p_smooth
    e = mse_e(eff, sol, cfg.noise_iu_w)
    smooth = float(np.sum((1.0 + sol.y) ** p))
    return sol.z * e - np.log(sol.z) + sol.v / p * smooth - np.log(sol.v) / p


def linearize(eff: EffectiveChannels, w_f: np.ndarray, p_f: np.ndarray, cfg: SystemConfig) -> ConvexSubproblem:
    """CCCP bounds of the EU SINRs (upper) and received powers (lower) at (w_f, p_f)."""
    return linearize_at(eff, w_f, p_f, cfg)


def _check_feasible(eff: EffectiveChannels, sol: BeamformingSolution, cfg: SystemConfig):
    if sol.power > cfg.pt_w * (1.0 + 1e-9):
        raise ValueError(f"initial point exceeds the power budget: {sol.power:.6g} > {cfg.pt_w:.6g} W")
    if cfg.eps_w > 0:
        q = harvested_powers(eff, sol)
        if np.any(q < cfg.eps_w * (1.0 - 1e-9)):
            raise ValueError(f"initial point misses the EH threshold: min Q = {q.min():.6g} W")


def prime(eff: EffectiveChannels, init: BeamformingSolution, cfg: SystemConfig) -> BeamformingSolution:
    """Tight y = SINR_E and the closed-form u, z, v for the given beams."""
    sol = replace(init, y=sinr_eus(eff, init, cfg.noise_eu_w))
    sol = replace(sol, u=update_u(eff, sol, cfg.noise_iu_w))
    z, v = update_z_v(eff, sol, cfg)
    return replace(sol, z=z, v=v)


class CccpStep(NamedTuple):
    step: str
    objective: float
    solution: BeamformingSolution
    report: Optional[SolverReport] = None


def cccp_bcd_steps(
    eff: EffectiveChannels, cfg: SystemConfig, ccfg: CccpBcdConfig, init: BeamformingSolution
) -> Iterator[CccpStep]:
    """Yield a CccpStep after priming and after every block update."""
    _check_feasible(eff, init, cfg)
    sol = prime(eff, init, cfg)
    yield CccpStep("init", bcd_objective(eff, sol, cfg), sol)
    for _ in range(ccfg.max_outer_iters):
        z, v = update_z_v(eff, sol, cfg)
        sol = replace(sol, z=z, v=v)
        yield CccpStep("z_v", bcd_objective(eff, sol, cfg), sol)

        sol = replace(sol, u=update_u(eff, sol, cfg.noise_iu_w))
        before = bcd_objective(eff, sol, cfg)
        yield CccpStep("u", before, sol)

        prob = linearize(eff, sol.w, sol.p_mat, cfg).with_aux(sol.z, sol.u, sol.v)
        candidate, report = solve_step3(prob, sol, ccfg.solver_tol)
        if report.status == "max-iter" and bcd_objective(eff, candidate, cfg) >= before:
            logger.debug("Step 3 stalled at the barrier tolerance, retrying with a relaxed one")
            candidate, report = solve_step3(prob, candidate, ccfg.solver_tol * RELAXED_TOL_FACTOR)
        if report.status == "infeasible":
            logger.warning("⚠️ Step-3 subproblem reported infeasible, stopping at the current point")
            return
        sol = candidate
        yield CccpStep("w_p_y", bcd_objective(eff, sol, cfg), sol, report)


def solve_shortterm(
    eff: EffectiveChannels, cfg: SystemConfig, ccfg: CccpBcdConfig, init: BeamformingSolution
) -> Tuple[BeamformingSolution, List[float]]:
    """Run CCCP-BCD from a feasible point. The trace holds J after priming and after each iteration.

    The loop stops on a small relative change of J only when Step 3 solved to optimality;
    a stalled Step 3 that also leaves J unchanged ends the run with a warning.
    """
    steps = cccp_bcd_steps(eff, cfg, ccfg, init)
    first = next(steps)
    sol = first.solution
    trace = [first.objective]
    for current in steps:
        sol = current.solution
        if current.step != "w_p_y":
            continue
        previous = trace[-1]
        trace.append(current.objective)
        if abs(previous - current.objective) > ccfg.obj_tol * max(1.0, abs(previous)):
            continue
        if current.report.status != "optimal":
            logger.warning(f"⚠️ CCCP-BCD stalled with Step-3 status {current.report.status}, J={current.objective:.8g}")
        break
    steps.close()
    logger.debug(f"CCCP-BCD finished after {len(trace) - 1} iterations, J={trace[-1]:.8g}")
    return sol, trace
