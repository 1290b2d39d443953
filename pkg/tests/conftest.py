"""Shared fixtures: a small scenario plus random feasible solver states."""

import numpy as np
import pytest

from arisopt.fp import AuxiliaryVars, update_aux
from arisopt.hwi import HwiModel
from arisopt.orchestrator import init_beamformer, init_reflection
from arisopt.rate import amplification_power
from arisopt.scenario import ScenarioConfig, generate_channels, split_budget


@pytest.fixture
def small_cfg():
    # shrunk geometry keeps the per-test solves fast
    return ScenarioConfig(M=6, N=3, K=2, seed=11)


@pytest.fixture
def small_setup(small_cfg):
    rng = np.random.default_rng(small_cfg.seed)
    channels = generate_channels(small_cfg, rng)
    hwi = HwiModel.from_config(small_cfg)
    p_t, p_a, _ = split_budget(small_cfg)
    return small_cfg, channels, hwi, p_t, p_a


def make_state(channels, hwi, p_t, p_a, rng, frac=0.8):
    """Random (W, psi) strictly inside both power constraints."""
    N, K, M = channels.N, channels.K, channels.M
    W = rng.standard_normal((N, K)) + 1j * rng.standard_normal((N, K))
    W *= np.sqrt(frac * p_t / np.sum(np.abs(W) ** 2))
    psi = np.exp(1j * rng.uniform(0, 2 * np.pi, M))
    p_unit = amplification_power(channels, W, psi, hwi.kappa_t, hwi.sigma_d_sq)
    psi *= np.sqrt(frac * p_a / p_unit) * rng.uniform(0.5, 1.0, M)
    return W, psi


def random_aux(channels, rng, scale=10.0):
    """Arbitrary (not optimal) auxiliary variables for identity checks."""
    K, M = channels.K, channels.M
    u = scale * (rng.standard_normal((K, M + 1)) + 1j * rng.standard_normal((K, M + 1)))
    v = rng.uniform(0.1, 5.0, K)
    return AuxiliaryVars(u=u, v=v)


@pytest.fixture
def feasible_state(small_setup):
    cfg, channels, hwi, p_t, p_a = small_setup
    rng = np.random.default_rng(99)
    W, psi = make_state(channels, hwi, p_t, p_a, rng)
    aux = update_aux(channels, W, psi, hwi)
    return channels, hwi, p_t, p_a, W, psi, aux


@pytest.fixture
def default_init():
    """Paper-scale scenario at its documented initialization."""
    cfg = ScenarioConfig()
    rng = np.random.default_rng(cfg.seed)
    channels = generate_channels(cfg, rng)
    hwi = HwiModel.from_config(cfg)
    p_t, p_a, _ = split_budget(cfg)
    W = init_beamformer(channels, p_t)
    state = init_reflection(channels, W, p_a, hwi, rng)
    return cfg, channels, hwi, p_t, p_a, W, state
