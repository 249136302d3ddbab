"""
Shared pytest fixtures for the simulator tests
"""
import os
import sys

import numpy as np
import pytest

# Modules are flat and imported by bare name, like main.py does
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from metrics import BeamformingSolution  # noqa: E402
from models import SystemConfig  # noqa: E402
from scenario import (  # noqa: E402
    ChannelSample,
    LinkPathLoss,
    PhaseShifts,
    build_statistics,
    complex_gaussian,
    draw_channel_sample,
)


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long Monte Carlo checks")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long Monte Carlo acceptance check")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_cfg():
    return SystemConfig(n_r=4, m=2)


@pytest.fixture
def unit_cfg():
    """1 W budget and 1 W noise, for synthetic O(1) channels."""
    def make(**overrides):
        base = dict(pt_dbm=30.0, noise_iu_dbm=30.0, noise_eu_dbm=30.0, eps_uw=0.0)
        base.update(overrides)
        return SystemConfig(**base)
    return make


@pytest.fixture
def instance():
    """Factory: (cfg, stats, sample, phases, rng) drawn from the physical scenario."""
    def make(seed, **overrides):
        cfg = SystemConfig(**{"n_r": 4, "m": 2, **overrides})
        rng = np.random.default_rng(seed)
        stats = build_statistics(cfg, rng)
        sample = draw_channel_sample(cfg, stats, rng)
        phases = PhaseShifts(2 * np.pi * (1.0 - rng.random(cfg.n_r)))
        return cfg, stats, sample, phases, rng
    return make


@pytest.fixture
def synthetic_sample():
    """Factory: unit-variance links, useful where physical path losses make numbers tiny."""
    def make(rng, n_s, n_r, m, scale=1.0):
        loss = LinkPathLoss(br=1.0, bi=1.0, ri=1.0, be=np.ones(m), re=np.ones(m))
        return ChannelSample(
            h1=scale * complex_gaussian(rng, n_s),
            f1=complex_gaussian(rng, (n_s, n_r)),
            h2=complex_gaussian(rng, n_r),
            g1=scale * complex_gaussian(rng, (m, n_s)),
            g2=complex_gaussian(rng, (m, n_r)),
            loss=loss,
        )
    return make


@pytest.fixture
def random_solution():
    """Factory: random beams using a fraction of the power budget."""
    def make(rng, n_s, m, power, fraction=0.9):
        w = complex_gaussian(rng, n_s)
        p_mat = 0.3 * complex_gaussian(rng, (n_s, m))
        total = np.vdot(w, w).real + np.vdot(p_mat, p_mat).real
        factor = np.sqrt(fraction * power / total)
        return BeamformingSolution.from_beams(w * factor, p_mat * factor)
    return make
