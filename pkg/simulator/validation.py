"""
Invariant smoke suite for the simulator
Run through `python main.py validate --quick` to check the solver stack on small instances
"""
from datetime import datetime

import numpy as np

from cvxcore import find_feasible, iu_directed_start
from heuristic import build_a_bar, minimize_unimodular, quadratic_cost
from longterm import grad_theta, project_discrete
from metrics import BeamformingSolution, log_sum_exp, smooth_secrecy, worst_case_secrecy
from models import SystemConfig
from scenario import PhaseShifts, build_statistics, draw_channel_sample, effective_channels
from shortterm import CccpBcdConfig, bcd_objective, linearize, prime, solve_shortterm


def print_result(check_name, success, elapsed_ms, detail=None, error=None):
    """Pretty print check results"""
    status = "✅ PASS" if success else "❌ FAIL"
    print(f"\n{status} {check_name}")
    print(f"   Time: {elapsed_ms:.2f}ms")
    if detail:
        print(f"   {detail}")
    if error:
        print(f"   Error: {error}")


def _instance(seed, n_r=4, m=2):
    cfg = SystemConfig(n_r=n_r, m=m)
    rng = np.random.default_rng(seed)
    stats = build_statistics(cfg, rng)
    sample = draw_channel_sample(cfg, stats, rng)
    phases = PhaseShifts.wrapped(2 * np.pi * rng.random(n_r))
    return cfg, stats, sample, phases, rng


def _timed(check_name, fn):
    try:
        start = datetime.now()
        ok, detail = fn()
        elapsed = (datetime.now() - start).total_seconds() * 1000
        print_result(check_name, ok, elapsed, detail)
        return ok
    except Exception as e:
        print_result(check_name, False, 0, error=str(e))
        return False


def check_log_sum_exp(trials):
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, 9))
        p = float(rng.choice([1, 2, 4, 8]))
        x = rng.normal(size=m) * 5
        value = log_sum_exp(x, p)
        if not (x.max() - 1e-12 <= value <= x.max() + np.log2(m) / p + 1e-12):
            return False, f"bound violated for m={m}, p={p}"
        worst = max(worst, value - x.max())
    return True, f"largest smoothing gap {worst:.4f} over {trials} vectors"


def check_effective_channels():
    _, _, sample, phases, _ = _instance(2)
    eff = effective_channels(sample, phases)
    dense = sample.h1.conj() + phases.phi.conj() @ np.diag(sample.h2.conj()) @ sample.f1.conj().T
    err = np.max(np.abs(eff.h_tilde.conj() - dense))
    return err < 1e-12 * max(1.0, np.max(np.abs(dense))), f"max deviation {err:.2e}"


def check_closed_form_aux(trials):
    worst = 0.0
    for seed in range(trials):
        cfg, _, sample, phases, rng = _instance(10 + seed)
        eff = effective_channels(sample, phases)
        w = (rng.normal(size=cfg.n_s) + 1j * rng.normal(size=cfg.n_s)) * np.sqrt(cfg.pt_w / 4)
        p_mat = (rng.normal(size=(cfg.n_s, cfg.m)) + 1j * rng.normal(size=(cfg.n_s, cfg.m))) * 1e-2
        sol = prime(eff, BeamformingSolution.from_beams(w, p_mat), cfg)
        lhs = bcd_objective(eff, sol, cfg)
        rhs = 1 + 1 / cfg.p_smooth - np.log(2) * smooth_secrecy(eff, sol, cfg)
        worst = max(worst, abs(lhs - rhs))
    return worst < 1e-8, f"largest identity deviation {worst:.2e}"


def check_cccp_tangency(trials):
    for seed in range(trials):
        cfg, _, sample, phases, rng = _instance(40 + seed)
        eff = effective_channels(sample, phases)
        ref = find_feasible(eff, cfg)
        prob = linearize(eff, ref.w, ref.p_mat, cfg)
        sol_ref = prime(eff, ref, cfg)
        if np.max(np.abs(prob.sinr_bound(ref.w, ref.p_mat) - sol_ref.y)) > 1e-12 * max(1.0, sol_ref.y.max()):
            return False, f"SINR bound not tight on instance {seed}"
    return True, f"{trials} instances tight at the reference point"


def check_gradient():
    cfg, _, sample, phases, rng = _instance(3, n_r=8)
    eff = effective_channels(sample, phases)
    sol = find_feasible(eff, cfg)
    grad = grad_theta(eff, sample, sol, phases, cfg)
    h = 1e-6
    fd = np.empty_like(grad)
    for n in range(cfg.n_r):
        up, down = phases.theta.copy(), phases.theta.copy()
        up[n] += h
        down[n] -= h
        fd[n] = (
            smooth_secrecy(effective_channels(sample, PhaseShifts.wrapped(up)), sol, cfg)
            - smooth_secrecy(effective_channels(sample, PhaseShifts.wrapped(down)), sol, cfg)
        ) / (2 * h)
    rel = np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-12)
    return rel < 1e-5, f"relative error {rel:.2e}"


def check_projection():
    theta = PhaseShifts(np.array([0.1 * np.pi, 0.6 * np.pi, 1.99 * np.pi]))
    q1 = project_discrete(theta, 1).theta
    q2 = project_discrete(theta, 2).theta
    ok = np.allclose(q1, [0.0, np.pi, 0.0]) and np.isclose(q2[2], 0.0)
    return ok, f"Q=1 -> {np.round(q1, 4).tolist()}"


def check_heuristic():
    cfg, stats, _, _, rng = _instance(4)
    mat = build_a_bar(stats, 1.0, 50, rng)
    init = PhaseShifts.constant(cfg.n_r)
    result = minimize_unimodular(mat, init)
    before, after = quadratic_cost(mat, init), quadratic_cost(mat, result)
    return after <= before + 1e-9, f"cost {before:.4e} -> {after:.4e}"


def check_shortterm_monotone(trials):
    for seed in range(trials):
        cfg, _, sample, phases, _ = _instance(70 + seed)
        eff = effective_channels(sample, phases)
        sol, trace = solve_shortterm(eff, cfg, CccpBcdConfig(max_outer_iters=10), iu_directed_start(eff, cfg))
        if np.any(np.diff(trace) > 1e-7 * np.maximum(1.0, np.abs(trace[:-1]))):
            return False, f"trace increased on instance {seed}"
        if sol.power > cfg.pt_w * (1 + 1e-6):
            return False, f"power budget violated on instance {seed}"
        rate = worst_case_secrecy(eff, sol, cfg)
    return True, f"{trials} monotone traces, last rate {rate:.3f} bits/s/Hz"


def run_quick_validation(quick=True):
    """Run all checks and print a summary"""
    print("=" * 60)
    print("SECURE SWIPT SIMULATOR - INVARIANT CHECKS")
    print("=" * 60)

    scale = 1 if quick else 10
    results = [
        _timed("Log-sum-exp bounds", lambda: check_log_sum_exp(200 * scale)),
        _timed("Effective channel identity", check_effective_channels),
        _timed("Closed-form auxiliary variables", lambda: check_closed_form_aux(5 * scale)),
        _timed("CCCP tangency", lambda: check_cccp_tangency(3 * scale)),
        _timed("Theta gradient vs finite differences", check_gradient),
        _timed("Discrete phase projection", check_projection),
        _timed("Unit-modulus BCD descent", check_heuristic),
        _timed("CCCP-BCD monotonicity", lambda: check_shortterm_monotone(2 * scale)),
    ]

    passed = sum(results)
    total = len(results)
    print("\n" + "=" * 60)
    print(f"SUMMARY: {passed}/{total} checks passed")
    print("=" * 60)
    if passed == total:
        print("🎉 All checks passed.")
    else:
        print("⚠️  Some checks failed. See details above.")
    return passed == total


if __name__ == "__main__":
    run_quick_validation()
