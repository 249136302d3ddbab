"""
Stochastic successive convex approximation of the long-term RIS phases
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import softmax

from metrics import BeamformingSolution, smooth_secrecy
from models import SystemConfig
from scenario import TWO_PI, ChannelSample, EffectiveChannels, PhaseShifts, effective_channels

logger = logging.getLogger(__name__)

AUTO_FIRST_STEP = np.pi / 4


def _user_log_rate_grads(h_tilde, h2, f1_h, beams, noise_w):
    """Wirtinger derivatives of ln(1 + SINR) for one user w.r.t. phi and conj(phi).

    beams: (N_s, K) with column 0 the information beam, the rest interference.
    """
    s = h_tilde.conj() @ beams  # h_tilde^H x_k
    c = h2.conj()[:, None] * (f1_h @ beams)  # c_n(x_k) = conj(h2_n) (F1^H x_k)_n
    power = np.abs(s) ** 2
    d_phi = c.conj() * s[None, :]  # d|s_k|^2 / d phi_n
    d_phi_conj = c * s.conj()[None, :]  # d|s_k|^2 / d conj(phi_n)
    signal, leak = power[0], float(np.sum(power[1:])) + noise_w
    log_rate = np.log1p(signal / leak)

    def combine(d):
        d_leak = d[:, 1:].sum(axis=1)
        return (d[:, 0] + d_leak) / (signal + leak) - d_leak / leak

    return log_rate, combine(d_phi), combine(d_phi_conj)


def grad_theta(
    eff: EffectiveChannels,
    sample: ChannelSample,
    sol: BeamformingSolution,
    phases: PhaseShifts,
    cfg: SystemConfig,
) -> np.ndarray:
    """Gradient of the smooth secrecy rate (bits/s/Hz per rad) w.r.t. theta at fixed beams."""
    phi = phases.phi
    f1_h = sample.f1.conj().T
    beams = np.column_stack([sol.w, sol.p_mat])

    _, iu_phi, iu_conj = _user_log_rate_grads(eff.h_tilde, sample.h2, f1_h, beams, cfg.noise_iu_w)
    eu_rates = np.empty(sample.m)
    eu_phi = np.empty((sample.m, sample.n_r), dtype=complex)
    eu_conj = np.empty((sample.m, sample.n_r), dtype=complex)
    for k in range(sample.m):
        eu_rates[k], eu_phi[k], eu_conj[k] = _user_log_rate_grads(
            eff.g_tilde[k], sample.g2[k], f1_h, beams, cfg.noise_eu_w
        )
    weights = softmax(cfg.p_smooth * eu_rates)

    d_phi = (iu_phi - weights @ eu_phi) / np.log(2.0)
    d_phi_conj = (iu_conj - weights @ eu_conj) / np.log(2.0)
    grad = d_phi * (1j * phi) + d_phi_conj * (-1j * phi.conj())
    scale = max(1.0, float(np.max(np.abs(grad))))
    assert np.max(np.abs(grad.imag)) < 1e-12 * scale, "theta gradient has an imaginary residue"
    return grad.real


@dataclass(frozen=True, eq=False)
class SurrogateState:
    f_scalar: float
    f_grad: np.ndarray
    theta: PhaseShifts
    t: int = 0
    tau: Optional[float] = 1.0
    rho_exponent: float = 0.6
    gamma_exponent: float = 0.9

    @property
    def rho(self) -> float:
        return (self.t + 1.0) ** (-self.rho_exponent)

    @property
    def gamma(self) -> float:
        return (self.t + 1.0) ** (-self.gamma_exponent)


def init_surrogate(theta: PhaseShifts, tau: Optional[float] = 1.0, rho_exponent: float = 0.6,
                   gamma_exponent: float = 0.9) -> SurrogateState:
    """Fresh surrogate at theta. tau=None defers the proximal weight to the first ssca_step."""
    if tau is not None and tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return SurrogateState(
        f_scalar=0.0,
        f_grad=np.zeros(theta.n_r),
        theta=theta,
        tau=tau,
        rho_exponent=rho_exponent,
        gamma_exponent=gamma_exponent,
    )


def fold_surrogate(state: SurrogateState, values: Sequence[float], grads: Sequence[np.ndarray]) -> SurrogateState:
    """Convex-combination recursion of the running objective and gradient estimates."""
    if len(values) == 0 or len(values) != len(grads):
        raise ValueError(f"need matching nonempty values and gradients, got {len(values)} and {len(grads)}")
    rho = state.rho
    f_scalar = (1.0 - rho) * state.f_scalar + rho * float(np.mean(values))
    f_grad = (1.0 - rho) * state.f_grad + rho * np.mean(np.asarray(grads), axis=0)
    return replace(state, f_scalar=f_scalar, f_grad=f_grad)


def update_surrogate(
    state: SurrogateState,
    samples: Sequence[ChannelSample],
    solutions: Sequence[BeamformingSolution],
    cfg: SystemConfig,
) -> SurrogateState:
    """Fold the smooth secrecy rate and its theta-gradient over this frame's samples."""
    if len(samples) == 0:
        raise ValueError("update_surrogate needs at least one channel sample")
    if len(samples) != len(solutions):
        raise ValueError(f"{len(samples)} samples but {len(solutions)} short-term solutions")
    values, grads = [], []
    for sample, sol in zip(samples, solutions):
        eff = effective_channels(sample, state.theta)
        values.append(smooth_secrecy(eff, sol, cfg))
        grads.append(grad_theta(eff, sample, sol, state.theta, cfg))
    return fold_surrogate(state, values, grads)


def auto_tau(f_grad: np.ndarray, gamma: float, first_step: float = AUTO_FIRST_STEP) -> Optional[float]:
    """Proximal weight that makes the largest phase move of this step equal `first_step` rad."""
    peak = float(np.max(np.abs(f_grad))) if f_grad.size else 0.0
    if peak == 0.0:
        return None
    return gamma * peak / (2.0 * first_step)


def ssca_step(state: SurrogateState) -> SurrogateState:
    """Move toward the surrogate maximizer theta + f_grad / (2 tau) with step gamma.

    An unset tau is fixed here from the first nonzero gradient and kept for every later step.
    """
    tau = state.tau
    if tau is None:
        tau = auto_tau(state.f_grad, state.gamma)
        if tau is None:
            return replace(state, t=state.t + 1)
        logger.debug(f"SSCA proximal weight set to tau={tau:.4g} at frame {state.t}")
    theta = state.theta.theta
    target = theta + state.f_grad / (2.0 * tau)
    gamma = state.gamma
    updated = (1.0 - gamma) * theta + gamma * target
    return replace(state, theta=PhaseShifts.wrapped(updated), t=state.t + 1, tau=tau)


def project_discrete(phases: PhaseShifts, q_bits: int) -> PhaseShifts:
    """Circularly nearest point of {0, 2 pi / L, ..., 2 pi (L - 1) / L}, L = 2**q_bits; ties go down."""
    if q_bits < 0:
        raise ValueError(f"q_bits must be non-negative, got {q_bits}")
    if q_bits == 0:
        return phases
    levels = 2 ** q_bits
    step = TWO_PI / levels
    k = np.mod(np.ceil(phases.theta / step - 0.5), levels)
    return PhaseShifts(k * step)


def deployed_phases(state: SurrogateState, q_bits: int) -> PhaseShifts:
    return project_discrete(state.theta, q_bits)
