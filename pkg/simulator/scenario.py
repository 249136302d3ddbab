"""
Physical scenario: geometry, Rician channel draws, effective channels and CSI impairments
"""
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import j0

from models import SystemConfig

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


class Link(str, Enum):
    BS_RIS = "br"
    BS_IU = "bi"
    RIS_IU = "ri"
    BS_EU = "be"
    RIS_EU = "re"


def path_loss(link: Link, distance_m: float, cfg: Optional[SystemConfig] = None) -> float:
    """Large-scale gain C0 * (d / D0) ** -alpha for one link."""
    if distance_m <= 0:
        raise ValueError(f"distance must be positive, got {distance_m}")
    cfg = cfg or SystemConfig()
    alpha = getattr(cfg, f"alpha_{Link(link).value}")
    return cfg.c0 * (distance_m / cfg.d0_m) ** (-alpha)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Zero-mean, unit-variance circular complex Gaussian entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def ris_shape(n_r: int) -> Tuple[int, int]:
    """Most-square factorization of the RIS element count, rows <= cols."""
    if n_r < 1:
        raise ValueError(f"n_r must be >= 1, got {n_r}")
    rows = max(d for d in range(1, math.isqrt(n_r) + 1) if n_r % d == 0)
    return rows, n_r // rows


def full_csi_delay_factor(n_s: int, n_r: int, m: int) -> float:
    """Delay of full-channel acquisition relative to effective-channel acquisition."""
    return (n_s * (m + 1) + n_r * n_s + n_r * (m + 1)) / (n_s * (m + 1))


def _unit(src, dst) -> Tuple[np.ndarray, float]:
    delta = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    dist = float(np.linalg.norm(delta))
    if dist <= 0:
        raise ValueError(f"nodes at {src} and {dst} coincide")
    return delta / dist, dist


def ula_response(n_s: int, direction: np.ndarray) -> np.ndarray:
    # half-wavelength ULA along the x axis
    return np.exp(1j * np.pi * np.arange(n_s) * direction[0])


def upa_response(n_r: int, direction: np.ndarray) -> np.ndarray:
    # half-wavelength UPA in the y-z plane, columns along y, rows along z
    rows, cols = ris_shape(n_r)
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    phase = np.pi * (c.ravel() * direction[1] + r.ravel() * direction[2])
    return np.exp(1j * phase)


@dataclass(frozen=True, eq=False)
class LinkPathLoss:
    br: float
    bi: float
    ri: float
    be: np.ndarray
    re: np.ndarray


@dataclass(frozen=True, eq=False)
class ChannelSample:
    """One realization of every link.

    h1: (N_s,) BS-IU; f1: (N_s, N_r) so that F1^H is BS-RIS; h2: (N_r,) RIS-IU;
    g1: (M, N_s) BS-EU rows; g2: (M, N_r) RIS-EU rows.
    """
    h1: np.ndarray
    f1: np.ndarray
    h2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    loss: LinkPathLoss

    @property
    def n_s(self) -> int:
        return self.h1.shape[0]

    @property
    def n_r(self) -> int:
        return self.h2.shape[0]

    @property
    def m(self) -> int:
        return self.g1.shape[0]

    def map_links(self, fn: Callable[[str, np.ndarray, np.ndarray], np.ndarray]) -> "ChannelSample":
        """Apply fn(name, link, per-entry path loss) to every link."""
        loss = self.loss
        return replace(
            self,
            h1=fn("h1", self.h1, loss.bi),
            f1=fn("f1", self.f1, loss.br),
            h2=fn("h2", self.h2, loss.ri),
            g1=fn("g1", self.g1, loss.be[:, None]),
            g2=fn("g2", self.g2, loss.re[:, None]),
        )


@dataclass(frozen=True, eq=False)
class EffectiveChannels:
    h_tilde: np.ndarray
    g_tilde: np.ndarray  # (M, N_s)


@dataclass(frozen=True, eq=False)
class PhaseShifts:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1 or not np.all(np.isfinite(theta)):
            raise ValueError("theta must be a finite 1-D vector")
        if np.any(theta < 0.0) or np.any(theta > TWO_PI + 1e-12):
            raise ValueError("theta entries must lie in [0, 2*pi]")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def wrapped(cls, theta) -> "PhaseShifts":
        """Map arbitrary angles into (0, 2*pi]."""
        t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        t[t <= 0.0] = TWO_PI
        return cls(t)

    @classmethod
    def constant(cls, n_r: int, value: float = np.pi) -> "PhaseShifts":
        return cls(np.full(n_r, value))

    @property
    def phi(self) -> np.ndarray:
        return np.exp(1j * self.theta)

    @property
    def n_r(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True, eq=False)
class ChannelStatistics:
    """Per-super-frame state: node positions, LoS components and path losses."""
    cfg: SystemConfig
    iu_pos: np.ndarray
    eu_pos: np.ndarray
    loss: LinkPathLoss
    los: ChannelSample
    k_bs_user: float
    k_ris: float


def _rician_weights(k: float) -> Tuple[float, float]:
    if math.isinf(k):
        return 1.0, 0.0
    return math.sqrt(k / (k + 1.0)), math.sqrt(1.0 / (k + 1.0))


def _iu_components(cfg: SystemConfig, iu_pos: np.ndarray):
    u_bi, d_bi = _unit(cfg.bs_pos, iu_pos)
    u_ri, d_ri = _unit(cfg.ris_pos, iu_pos)
    h1 = ula_response(cfg.n_s, u_bi)
    h2 = upa_response(cfg.n_r, u_ri)
    return h1, h2, path_loss(Link.BS_IU, d_bi, cfg), path_loss(Link.RIS_IU, d_ri, cfg)


def build_statistics(cfg: SystemConfig, rng: np.random.Generator) -> ChannelStatistics:
    """Place the EUs and fix the LoS components for one super-frame."""
    bs = np.asarray(cfg.bs_pos, dtype=float)
    angles = TWO_PI * rng.random(cfg.m)
    eu_pos = np.column_stack((
        bs[0] + cfg.eu_radius_m * np.cos(angles),
        bs[1] + cfg.eu_radius_m * np.sin(angles),
        np.zeros(cfg.m),
    ))
    iu_pos = np.asarray(cfg.iu_pos, dtype=float)

    u_br, d_br = _unit(cfg.bs_pos, cfg.ris_pos)
    f1 = np.outer(ula_response(cfg.n_s, u_br), np.conj(upa_response(cfg.n_r, -u_br)))
    h1, h2, l_bi, l_ri = _iu_components(cfg, iu_pos)

    g1 = np.empty((cfg.m, cfg.n_s), dtype=complex)
    g2 = np.empty((cfg.m, cfg.n_r), dtype=complex)
    l_be = np.empty(cfg.m)
    l_re = np.empty(cfg.m)
    for k, pos in enumerate(eu_pos):
        u_be, d_be = _unit(cfg.bs_pos, pos)
        u_re, d_re = _unit(cfg.ris_pos, pos)
        g1[k] = ula_response(cfg.n_s, u_be)
        g2[k] = upa_response(cfg.n_r, u_re)
        l_be[k] = path_loss(Link.BS_EU, d_be, cfg)
        l_re[k] = path_loss(Link.RIS_EU, d_re, cfg)

    loss = LinkPathLoss(br=path_loss(Link.BS_RIS, d_br, cfg), bi=l_bi, ri=l_ri, be=l_be, re=l_re)
    los = ChannelSample(h1=h1, f1=f1, h2=h2, g1=g1, g2=g2, loss=loss)
    return ChannelStatistics(
        cfg=cfg,
        iu_pos=iu_pos,
        eu_pos=eu_pos,
        loss=loss,
        los=los,
        k_bs_user=10.0 ** (cfg.rician_bs_user_db / 10.0),
        k_ris=10.0 ** (cfg.rician_ris_db / 10.0),
    )


def draw_channel_sample(cfg: SystemConfig, stats: ChannelStatistics, rng: np.random.Generator) -> ChannelSample:
    """Rician draw of every link around the fixed LoS components."""
    if (cfg.n_s, cfg.n_r, cfg.m) != (stats.cfg.n_s, stats.cfg.n_r, stats.cfg.m):
        raise ValueError("config dimensions do not match the channel statistics")
    user = _rician_weights(stats.k_bs_user)
    ris = _rician_weights(stats.k_ris)
    weights = {"h1": user, "g1": user, "f1": ris, "h2": ris, "g2": ris}

    def draw(name, los, loss):
        w_los, w_nlos = weights[name]
        nlos = complex_gaussian(rng, los.shape)
        return np.sqrt(loss) * (w_los * los + w_nlos * nlos)

    return stats.los.map_links(draw)


def mean_sample(stats: ChannelStatistics) -> ChannelSample:
    """Rician mean of every link (scaled LoS part)."""
    user = _rician_weights(stats.k_bs_user)[0]
    ris = _rician_weights(stats.k_ris)[0]
    weights = {"h1": user, "g1": user, "f1": ris, "h2": ris, "g2": ris}
    return stats.los.map_links(lambda name, los, loss: np.sqrt(loss) * weights[name] * los)


def effective_channels(sample: ChannelSample, phases: PhaseShifts) -> EffectiveChannels:
    """h_tilde = h1 + F1 (h2 * phi), g_tilde_m = g1_m + F1 (g2_m * phi)."""
    if phases.n_r != sample.n_r or sample.f1.shape != (sample.n_s, sample.n_r):
        raise ValueError(
            f"dimension mismatch: {phases.n_r} phases, f1 {sample.f1.shape}, h2 {sample.h2.shape}"
        )
    phi = phases.phi
    h_tilde = sample.h1 + sample.f1 @ (sample.h2 * phi)
    g_tilde = sample.g1 + (sample.g2 * phi) @ sample.f1.T
    return EffectiveChannels(h_tilde=h_tilde, g_tilde=g_tilde)


def delay_correlation(delay_ms: float, doppler_hz: float) -> float:
    return float(j0(TWO_PI * doppler_hz * delay_ms / 1000.0))


def delayed_sample(sample: ChannelSample, mean: ChannelSample, delay_ms: float, doppler_hz: float) -> ChannelSample:
    """Outdated estimate rho * link + (1 - rho) * mean with rho = J0(2 pi f_d s)."""
    if delay_ms < 0:
        raise ValueError(f"delay must be non-negative, got {delay_ms}")
    rho = delay_correlation(delay_ms, doppler_hz)
    if rho == 1.0:
        return sample
    means = {"h1": mean.h1, "f1": mean.f1, "h2": mean.h2, "g1": mean.g1, "g2": mean.g2}
    return sample.map_links(lambda name, link, loss: rho * link + (1.0 - rho) * means[name])


def perturbed_sample(sample: ChannelSample, b_linear: float, rng: np.random.Generator) -> ChannelSample:
    """Additive CN(0, b * L) error on every entry of every link."""
    if b_linear < 0:
        raise ValueError(f"error level must be non-negative, got {b_linear}")
    if b_linear == 0:
        return sample
    return sample.map_links(
        lambda name, link, loss: link + np.sqrt(b_linear * loss) * complex_gaussian(rng, link.shape)
    )


def move_iu(stats: ChannelStatistics, x_mo_m: float) -> ChannelStatistics:
    """Shift the IU along x and recompute its LoS components and path losses."""
    if x_mo_m < 0:
        raise ValueError(f"displacement must be non-negative, got {x_mo_m}")
    if x_mo_m == 0:
        return stats
    iu_pos = np.asarray(stats.cfg.iu_pos, dtype=float) + np.array([x_mo_m, 0.0, 0.0])
    h1, h2, l_bi, l_ri = _iu_components(stats.cfg, iu_pos)
    loss = replace(stats.loss, bi=l_bi, ri=l_ri)
    los = replace(stats.los, h1=h1, h2=h2, loss=loss)
    logger.debug(f"IU moved to {iu_pos.tolist()}, L_BI={l_bi:.3e}")
    return replace(stats, iu_pos=iu_pos, loss=loss, los=los)
