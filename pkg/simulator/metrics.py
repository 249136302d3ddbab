"""
SINRs, harvested power and secrecy-rate metrics
"""
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import logsumexp

from models import SystemConfig
from scenario import EffectiveChannels

LN2 = float(np.log(2.0))


@dataclass(frozen=True, eq=False)
class BeamformingSolution:
    """Transmit beams plus the auxiliary variables of the CCCP-BCD reformulation."""
    w: np.ndarray
    p_mat: np.ndarray
    z: float = 1.0
    u: complex = 0j
    v: float = 1.0
    y: np.ndarray = field(default=None)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=complex)
        p_mat = np.asarray(self.p_mat, dtype=complex)
        if p_mat.ndim != 2 or p_mat.shape[0] != w.shape[0]:
            raise ValueError(f"beam shapes disagree: w {w.shape}, P {p_mat.shape}")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p_mat", p_mat)
        y = np.zeros(p_mat.shape[1]) if self.y is None else np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_beams(cls, w, p_mat) -> "BeamformingSolution":
        return cls(w=w, p_mat=p_mat)

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real + np.vdot(self.p_mat, self.p_mat).real)

    def with_beams(self, w, p_mat, y=None) -> "BeamformingSolution":
        return replace(self, w=w, p_mat=p_mat, y=self.y if y is None else y)


def _eu_terms(eff: EffectiveChannels, sol: BeamformingSolution):
    gh = eff.g_tilde.conj()
    signal = np.abs(gh @ sol.w) ** 2
    leak = np.sum(np.abs(gh @ sol.p_mat) ** 2, axis=1)
    return signal, leak


def sinr_iu(eff: EffectiveChannels, sol: BeamformingSolution, noise_w: float) -> float:
    signal = abs(np.vdot(eff.h_tilde, sol.w)) ** 2
    leak = float(np.sum(np.abs(eff.h_tilde.conj() @ sol.p_mat) ** 2))
    return signal / (leak + noise_w)


def sinr_eus(eff: EffectiveChannels, sol: BeamformingSolution, noise_w: float) -> np.ndarray:
    signal, leak = _eu_terms(eff, sol)
    return signal / (leak + noise_w)


def sinr_eu(eff: EffectiveChannels, sol: BeamformingSolution, m: int, noise_w: float) -> float:
    return float(sinr_eus(eff, sol, noise_w)[m])


def harvested_powers(eff: EffectiveChannels, sol: BeamformingSolution) -> np.ndarray:
    signal, leak = _eu_terms(eff, sol)
    return signal + leak


def harvested_power(eff: EffectiveChannels, sol: BeamformingSolution, m: int) -> float:
    """Received RF power at EU m; noise is not harvested."""
    return float(harvested_powers(eff, sol)[m])


def worst_case_secrecy(eff: EffectiveChannels, sol: BeamformingSolution, cfg: SystemConfig) -> float:
    """IU rate minus the strongest eavesdropper rate, clamped at zero (bits/s/Hz)."""
    rate_iu = np.log2(1.0 + sinr_iu(eff, sol, cfg.noise_iu_w))
    rate_eu = np.log2(1.0 + sinr_eus(eff, sol, cfg.noise_eu_w))
    return max(0.0, float(rate_iu - np.max(rate_eu)))


def log_sum_exp(x, p: float) -> float:
    """Base-2 smooth maximum (1/p) log2 sum 2**(p x)."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("log_sum_exp needs a nonempty vector")
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    scale = p * LN2
    return float(logsumexp(scale * x)) / scale


def smooth_secrecy(eff: EffectiveChannels, sol: BeamformingSolution, cfg: SystemConfig) -> float:
    """Smooth lower bound of the unclamped worst-case secrecy rate (bits/s/Hz)."""
    rate_iu = float(np.log2(1.0 + sinr_iu(eff, sol, cfg.noise_iu_w)))
    rate_eu = np.log2(1.0 + sinr_eus(eff, sol, cfg.noise_eu_w))
    return rate_iu - log_sum_exp(rate_eu, cfg.p_smooth)
