"""
Experiment orchestration: the two-timescale frame loop, Monte Carlo averaging and sweeps
"""
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

import settings
from baselines import channel_power_max_from_samples, instantaneous_csi_scheme, random_phases
from cvxcore import InfeasibleError, iu_directed_start
from heuristic import low_complexity_phases
from longterm import SurrogateState, init_surrogate, project_discrete, ssca_step, update_surrogate
from metrics import worst_case_secrecy
from models import ExperimentConfig, RunRecord, SystemConfig
from scenario import (
    ChannelSample,
    PhaseShifts,
    build_statistics,
    delayed_sample,
    draw_channel_sample,
    effective_channels,
    full_csi_delay_factor,
    mean_sample,
    move_iu,
    perturbed_sample,
)
from shortterm import CccpBcdConfig, solve_shortterm
from storage import write_records, write_trace

logger = logging.getLogger(__name__)


@dataclass
class SuperFrameOutcome:
    rates: List[float] = field(default_factory=list)
    n_slots: int = 0
    n_dropped: int = 0
    final_theta: Optional[PhaseShifts] = None
    objective_trace: List[float] = field(default_factory=list)
    frame_rates: List[float] = field(default_factory=list)


@dataclass
class ExperimentResult:
    record: RunRecord
    objective_trace: List[float]
    outcomes: List[SuperFrameOutcome]


def load_experiment_config(path: str) -> ExperimentConfig:
    return settings.load_config_file(path)


def with_override(ecfg: ExperimentConfig, name: str, value) -> ExperimentConfig:
    """Copy of the config with one SystemConfig or ExperimentConfig field replaced (validated)."""
    data = ecfg.model_dump()
    if name in SystemConfig.model_fields:
        data["system"][name] = value
    elif name in ExperimentConfig.model_fields and name != "system":
        data[name] = value
    else:
        raise ValueError(f"unknown parameter {name!r}")
    return ExperimentConfig.model_validate(data)


def _short_term(sample: ChannelSample, phases: PhaseShifts, cfg: SystemConfig, ccfg: CccpBcdConfig):
    eff = effective_channels(sample, phases)
    sol, _ = solve_shortterm(eff, cfg, ccfg, iu_directed_start(eff, cfg))
    return sol


def _ssca_frame(state: SurrogateState, samples: Sequence[ChannelSample], ecfg: ExperimentConfig,
                ccfg: CccpBcdConfig) -> SurrogateState:
    cfg = ecfg.system
    if ecfg.discrete_feedback:
        state = replace(state, theta=project_discrete(state.theta, cfg.q_bits))
    solved, solutions = [], []
    for sample in samples:
        try:
            solutions.append(_short_term(sample, state.theta, cfg, ccfg))
            solved.append(sample)
        except InfeasibleError:
            continue
    if not solved:
        logger.warning(f"⚠️ Frame {state.t}: every channel sample infeasible, surrogate not updated")
        return state
    state = update_surrogate(state, solved, solutions, cfg)
    return ssca_step(state)


def simulate_super_frame(ecfg: ExperimentConfig, rng: np.random.Generator,
                         theta0: Optional[PhaseShifts] = None) -> SuperFrameOutcome:
    """Frame/slot loop of one super-frame for the configured scheme."""
    cfg = ecfg.system
    ccfg = CccpBcdConfig.from_experiment(ecfg)
    geo_rng, slot_rng, sample_rng, policy_rng = rng.spawn(4)

    stats = build_statistics(cfg, geo_rng)
    true_stats = move_iu(stats, ecfg.x_mo_m)
    design_stats = true_stats if ecfg.mobility_stats == "updated" else stats
    channel_mean = mean_sample(true_stats)
    delay_ms = ecfg.csi_delay_ms
    if ecfg.scheme == "instantaneous":
        delay_ms *= full_csi_delay_factor(cfg.n_s, cfg.n_r, cfg.m)
    b_linear = ecfg.stat_error_linear

    def design_samples(count: int) -> List[ChannelSample]:
        drawn = [draw_channel_sample(cfg, design_stats, sample_rng) for _ in range(count)]
        if b_linear > 0:
            drawn = [perturbed_sample(s, b_linear, sample_rng) for s in drawn]
        return drawn

    if ecfg.theta_init == "random":
        initial = random_phases(cfg.n_r, policy_rng)
    elif ecfg.theta_init == "warm" and theta0 is not None:
        initial = theta0
    else:
        initial = PhaseShifts.constant(cfg.n_r)

    state: Optional[SurrogateState] = None
    fixed: Optional[PhaseShifts] = None
    if ecfg.scheme == "sa-ssca":
        state = init_surrogate(initial, ecfg.tau, ecfg.rho_exponent, ecfg.gamma_exponent)
    elif ecfg.scheme == "low-complexity":
        fixed = low_complexity_phases(design_samples(ecfg.n_stat_samples), initial, ecfg.heuristic_method)
    elif ecfg.scheme == "channel-power-max":
        fixed = channel_power_max_from_samples(design_samples(ecfg.n_stat_samples))

    outcome = SuperFrameOutcome()
    for frame in range(ecfg.t_f):
        if state is not None:
            deployed = project_discrete(state.theta, cfg.q_bits)
        elif fixed is not None:
            deployed = project_discrete(fixed, cfg.q_bits)
        frame_rates = []
        for _ in range(ecfg.t_s):
            true = draw_channel_sample(cfg, true_stats, slot_rng)
            design = delayed_sample(true, channel_mean, delay_ms, ecfg.doppler_hz)
            outcome.n_slots += 1
            try:
                if ecfg.scheme == "instantaneous":
                    phases, sol = instantaneous_csi_scheme(
                        design, cfg, ecfg.inst_rounds, ccfg, initial, ecfg.inst_pg_steps
                    )
                    if cfg.q_bits > 0:
                        phases = project_discrete(phases, cfg.q_bits)
                        sol = _short_term(design, phases, cfg, ccfg)
                else:
                    if ecfg.scheme == "random":
                        phases = project_discrete(random_phases(cfg.n_r, policy_rng), cfg.q_bits)
                    else:
                        phases = deployed
                    sol = _short_term(design, phases, cfg, ccfg)
            except InfeasibleError as e:
                outcome.n_dropped += 1
                logger.warning(f"⚠️ Frame {frame}: slot dropped as infeasible ({e})")
                continue
            rate = worst_case_secrecy(effective_channels(true, phases), sol, cfg)
            frame_rates.append(rate)
            outcome.rates.append(rate)
        outcome.frame_rates.append(float(np.mean(frame_rates)) if frame_rates else float("nan"))

        if state is not None:
            state = _ssca_frame(state, design_samples(ecfg.t_c), ecfg, ccfg)
            outcome.objective_trace.append(state.f_scalar)
            logger.debug(f"frame {frame}: f={state.f_scalar:.5f}")

    outcome.final_theta = state.theta if state is not None else fixed
    return outcome


def _aggregate(ecfg: ExperimentConfig, outcomes: Sequence[SuperFrameOutcome], seed: int, wall_s: float) -> RunRecord:
    rates = np.concatenate([np.asarray(o.rates, dtype=float) for o in outcomes])
    n_slots = sum(o.n_slots for o in outcomes)
    n_dropped = sum(o.n_dropped for o in outcomes)
    if rates.size == 0:
        logger.error(f"❌ {ecfg.scheme}: all {n_slots} slots infeasible")
        rate, stderr = 0.0, 0.0
    else:
        rate = float(np.mean(rates))
        means = [float(np.mean(o.rates)) for o in outcomes if o.rates]
        if len(means) >= 2:
            stderr = float(np.std(means, ddof=1) / np.sqrt(len(means)))
        elif rates.size >= 2:
            stderr = float(np.std(rates, ddof=1) / np.sqrt(rates.size))
        else:
            stderr = 0.0
    return RunRecord(
        scheme=ecfg.scheme,
        rate_bps_hz=rate,
        stderr=stderr,
        n_slots=n_slots,
        n_dropped=n_dropped,
        seed=seed,
        wall_s=wall_s if ecfg.record_wall_time else 0.0,
    )


def run_super_frame(ecfg: ExperimentConfig, rng: np.random.Generator,
                    theta0: Optional[PhaseShifts] = None) -> RunRecord:
    start = time.perf_counter()
    outcome = simulate_super_frame(ecfg, rng, theta0)
    return _aggregate(ecfg, [outcome], ecfg.seed, time.perf_counter() - start)


def _realization(args: Tuple[ExperimentConfig, np.random.SeedSequence]) -> SuperFrameOutcome:
    ecfg, seed_seq = args
    return simulate_super_frame(ecfg, np.random.default_rng(seed_seq))


def run_experiment(ecfg: ExperimentConfig, seed: Optional[int] = None) -> ExperimentResult:
    """Monte Carlo average over independent super-frames with hierarchically split RNG streams."""
    seed = ecfg.seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(ecfg.n_realizations)
    workers = settings.num_workers()
    start = time.perf_counter()
    outcomes: List[SuperFrameOutcome] = []

    if workers > 1 and ecfg.theta_init != "warm" and len(children) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            jobs = pool.map(_realization, [(ecfg, child) for child in children])
            outcomes = list(tqdm(jobs, total=len(children), desc=f"{ecfg.scheme} super-frames"))
    else:
        theta0 = None
        for child in tqdm(children, desc=f"{ecfg.scheme} super-frames", disable=len(children) == 1):
            outcome = simulate_super_frame(ecfg, np.random.default_rng(child), theta0)
            theta0 = outcome.final_theta
            outcomes.append(outcome)

    record = _aggregate(ecfg, outcomes, seed, time.perf_counter() - start)
    traces = [o.objective_trace for o in outcomes if o.objective_trace]
    trace = np.mean(np.asarray(traces), axis=0).tolist() if traces else []
    logger.info(
        f"✅ {ecfg.scheme}: {record.rate_bps_hz:.4f} ± {record.stderr:.4f} bits/s/Hz "
        f"({record.n_slots} slots, {record.n_dropped} dropped)"
    )
    return ExperimentResult(record=record, objective_trace=trace, outcomes=outcomes)


def _recorded_value(ecfg: ExperimentConfig, name: str) -> Optional[Union[float, str]]:
    """The validated value of a swept field, as written to the value column."""
    value = getattr(ecfg.system, name) if name in SystemConfig.model_fields else getattr(ecfg, name)
    if value is None:
        return None
    if isinstance(value, (bool, int, float)):
        return float(value)
    if isinstance(value, (tuple, list)):
        return ",".join(f"{v:g}" for v in value)
    return str(value)


def sweep(ecfg: ExperimentConfig, parameter: str, values: Sequence[Union[float, str]],
          schemes: Optional[Sequence[str]] = None, out_path: Optional[str] = None) -> List[RunRecord]:
    """One run per (scheme, value); the special parameter "scheme" sweeps scheme ids.

    Values are coerced by the swept field's own type, so strings from the command line work
    for numeric, boolean and choice fields alike.
    """
    if len(values) == 0:
        raise ValueError("sweep needs at least one value")
    records: List[RunRecord] = []
    if parameter == "scheme":
        for scheme in values:
            result = run_experiment(with_override(ecfg, "scheme", scheme))
            records.append(result.record.model_copy(update={"param": "scheme", "value": None}))
    else:
        for scheme in schemes or [ecfg.scheme]:
            base = with_override(ecfg, "scheme", scheme)
            for value in values:
                swept = with_override(base, parameter, value)
                logger.info(f"Running {scheme} with {parameter}={value}")
                result = run_experiment(swept)
                update = {"param": parameter, "value": _recorded_value(swept, parameter)}
                records.append(result.record.model_copy(update=update))
    if out_path:
        write_records(records, out_path)
    return records


def write_run(result: ExperimentResult, out_dir: str) -> List[str]:
    scheme = result.record.scheme
    paths = [write_records([result.record], os.path.join(out_dir, f"run_{scheme}.csv"))]
    if result.objective_trace:
        paths.append(write_trace(result.objective_trace, os.path.join(out_dir, f"convergence_{scheme}.csv")))
    return paths
