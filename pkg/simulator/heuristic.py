"""
Low-complexity long-term phase design from channel statistics
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, Sequence

import numpy as np

from scenario import ChannelSample, ChannelStatistics, PhaseShifts, draw_channel_sample

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StatMatrix:
    """Sample average of -H^H H + a sum_m G_m^H G_m with H = [F1 diag(h2), h1]."""
    a_bar: np.ndarray
    n_samples: int
    a: float

    @property
    def n_r(self) -> int:
        return self.a_bar.shape[0] - 1


def draw_samples(stats: ChannelStatistics, n_samples: int, rng: np.random.Generator) -> List[ChannelSample]:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    return [draw_channel_sample(stats.cfg, stats, rng) for _ in range(n_samples)]


def weight_a_from_samples(samples: Sequence[ChannelSample]) -> float:
    if len(samples) == 0:
        raise ValueError("weight_a needs at least one channel sample")
    iu = np.mean([np.sum(np.abs(s.h1) ** 2) for s in samples])
    eu = np.mean([np.mean(np.sum(np.abs(s.g1) ** 2, axis=1)) for s in samples])
    if eu == 0:
        raise ValueError("BS-EU channels have zero average power")
    return float(iu / eu)


def weight_a(stats: ChannelStatistics, n_samples: int, rng: np.random.Generator) -> float:
    """Ratio E||h1||^2 / E[(1/M) sum_m ||g1_m||^2] balancing IU and EU channel powers."""
    return weight_a_from_samples(draw_samples(stats, n_samples, rng))


def _cascade(f1: np.ndarray, ris: np.ndarray, direct: np.ndarray) -> np.ndarray:
    return np.column_stack([f1 * ris[None, :], direct])


def a_bar_from_samples(samples: Sequence[ChannelSample], a: float) -> StatMatrix:
    if len(samples) == 0:
        raise ValueError("the statistical matrix needs at least one channel sample")
    n = samples[0].n_r + 1
    total = np.zeros((n, n), dtype=complex)
    for s in samples:
        h_bar = _cascade(s.f1, s.h2, s.h1)
        total -= h_bar.conj().T @ h_bar
        if a != 0:
            for k in range(s.m):
                g_bar = _cascade(s.f1, s.g2[k], s.g1[k])
                total += a * (g_bar.conj().T @ g_bar)
    total /= len(samples)
    return StatMatrix(a_bar=(total + total.conj().T) / 2.0, n_samples=len(samples), a=a)


def build_a_bar(stats: ChannelStatistics, a: float, n_samples: int, rng: np.random.Generator) -> StatMatrix:
    return a_bar_from_samples(draw_samples(stats, n_samples, rng), a)


def _extended(phases: PhaseShifts) -> np.ndarray:
    return np.append(phases.phi, 1.0 + 0j)


def quadratic_cost(mat: StatMatrix, phases: PhaseShifts) -> float:
    phi = _extended(phases)
    return float(np.vdot(phi, mat.a_bar @ phi).real)


def _angles(phi: np.ndarray) -> PhaseShifts:
    return PhaseShifts.wrapped(np.angle(phi[:-1]))


def _bcd(mat: StatMatrix, phi: np.ndarray, max_iters: int, tol: float) -> np.ndarray:
    a_bar = mat.a_bar
    cost = float(np.vdot(phi, a_bar @ phi).real)
    for sweep in range(max_iters):
        for n in range(mat.n_r):
            c = a_bar[n] @ phi - a_bar[n, n] * phi[n]
            magnitude = abs(c)
            if magnitude > 0:
                phi[n] = -c / magnitude
        new_cost = float(np.vdot(phi, a_bar @ phi).real)
        logger.debug(f"BCD sweep {sweep}: cost={new_cost:.10g}")
        # purely relative: costs carry the path-loss scale
        if abs(cost - new_cost) <= tol * abs(cost):
            break
        cost = new_cost
    return phi


def _pdd(mat: StatMatrix, phi: np.ndarray, max_iters: int, tol: float,
         shrink: float = 0.8, penalty_floor: float = 1e-8) -> np.ndarray:
    # Augmented Lagrangian on x = phi with phi kept on the unit circle; the last entry stays 1.
    a_bar = mat.a_bar
    n = a_bar.shape[0]
    lowest = float(np.linalg.eigvalsh(a_bar)[0])
    penalty = 1.0 / (2.0 * (max(-lowest, 0.0) + np.linalg.norm(a_bar, 2) + 1e-12))
    dual = np.zeros(n, dtype=complex)
    best, best_cost = phi.copy(), float(np.vdot(phi, a_bar @ phi).real)
    for _ in range(max_iters):
        x = np.linalg.solve(a_bar + np.eye(n) / (2.0 * penalty), phi / (2.0 * penalty) - dual / 2.0)
        target = x + penalty * dual
        phi = np.where(np.abs(target) > 0, target / np.maximum(np.abs(target), 1e-300), phi)
        phi[-1] = 1.0
        dual = dual + (x - phi) / penalty
        penalty = max(penalty * shrink, penalty_floor)
        cost = float(np.vdot(phi, a_bar @ phi).real)
        if cost < best_cost - tol * abs(best_cost):
            best, best_cost = phi.copy(), cost
        elif np.max(np.abs(x - phi)) < tol:
            break
    return best


def minimize_unimodular(
    mat: StatMatrix,
    init: PhaseShifts,
    max_iters: int = 200,
    tol: float = 1e-10,
    method: Literal["bcd", "pdd"] = "bcd",
) -> PhaseShifts:
    """Minimize phi^H A phi over unit-modulus phi with the last entry pinned to 1."""
    if init.n_r != mat.n_r:
        raise ValueError(f"{init.n_r} initial phases for a {mat.n_r}-element matrix")
    phi = _extended(init)
    if method == "bcd":
        phi = _bcd(mat, phi, max_iters, tol)
    elif method == "pdd":
        phi = _pdd(mat, phi, max_iters, tol)
        # finish with coordinate sweeps so the result is coordinate-wise optimal
        phi = _bcd(mat, phi, max_iters, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _angles(phi)


def low_complexity_phases(
    samples: Sequence[ChannelSample], init: PhaseShifts, method: Literal["bcd", "pdd"] = "bcd"
) -> PhaseShifts:
    """Weighted statistical design: a from the direct-link powers, then the unimodular minimization."""
    a = weight_a_from_samples(samples)
    mat = a_bar_from_samples(samples, a)
    logger.debug(f"low-complexity design: a={a:.4g} from {len(samples)} samples")
    return minimize_unimodular(mat, init, method=method)
