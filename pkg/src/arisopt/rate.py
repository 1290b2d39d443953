"""Effective channels, SINR, average-rate model, and power accounting.

The instantaneous SINR treats the RIS phase noise as a realized diagonal
factor; the average-rate path replaces phase-noise randomness by its
closed-form first/second moments, which factor into an effective N x (M+1)
channel Gbar_k = [f_hat_k, G_hat_k] per user.  A Monte-Carlo oracle over
phase-noise draws is kept alongside to quantify the approximation gap.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidModel
from .hwi import DD_SCALE, MEAN_CONJ_SCALE, phase_noise_sample

LOG2E = np.log2(np.e)


@dataclass
class Beamformer:
    """Transmit matrix W (N x K); w is its column-stacked vectorization."""

    W: np.ndarray

    @property
    def w(self):
        return self.W.reshape(-1, order="F")

    def power(self):
        return float(np.sum(np.abs(self.W) ** 2))


@dataclass
class ReflectionCoefficients:
    """Per-element amplitudes a >= 0 and phases phi in [0, 2pi)."""

    a: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, float)
        self.phi = np.mod(np.asarray(self.phi, float), 2.0 * np.pi)
        if np.any(self.a < 0):
            raise InvalidInput("amplitudes must be non-negative")

    @property
    def psi(self):
        return self.a * np.exp(1j * self.phi)

    @classmethod
    def from_psi(cls, psi):
        psi = np.asarray(psi, complex)
        return cls(a=np.abs(psi), phi=np.angle(psi))

    @classmethod
    def zeros(cls, M):
        return cls(a=np.zeros(M), phi=np.zeros(M))


@dataclass
class RateBreakdown:
    varpi1: float
    varpi2: float
    varpi3: float
    sinr_tilde: float
    rate_tilde: float


def effective_channel(channels, psi, k):
    """Phase-noise-averaged channel factor Gbar_k = [f_hat_k, G_hat_k], N x (M+1)."""
    h_k = channels.h[k]
    scaled = np.conj(psi) * h_k                  # Psi^H h_k
    f_hat = channels.f[k] + MEAN_CONJ_SCALE * (channels.G.conj().T @ scaled)
    G_hat = np.sqrt(DD_SCALE) * (channels.G.conj().T * scaled[None, :])
    return np.concatenate([f_hat[:, None], G_hat], axis=1)


def ris_noise_gain(channels, psi, k):
    """sum_m |psi_m|^2 |h_km|^2; the dynamic-noise gain seen by user k."""
    return float(np.sum(np.abs(psi) ** 2 * np.abs(channels.h[k]) ** 2))


def approx_average_rate(channels, W, psi, hwi, k):
    """Average-rate breakdown (varpi terms, SINR, bps/Hz) for user k."""
    Gbar = effective_channel(channels, psi, k)
    proj = Gbar.conj().T @ W                     # (M+1, K): Gbar^H w_i columns
    varpi1 = float(np.sum(np.abs(proj[:, k]) ** 2))
    row_gain = np.sum(np.abs(Gbar) ** 2, axis=1)          # diag of Gbar Gbar^H
    per_antenna = np.sum(np.abs(W) ** 2, axis=1)          # diag of W W^H
    kr = hwi.kappa_r[k]
    varpi2 = (1.0 + kr) * float(
        np.sum(np.abs(proj) ** 2) + hwi.kappa_t * np.dot(per_antenna, row_gain)
    )
    varpi3 = (1.0 + kr) * (hwi.sigma_d_sq * ris_noise_gain(channels, psi, k) + hwi.sigma_k_sq)
    denom = varpi2 + varpi3 - varpi1
    if denom <= 0:
        raise InvalidModel(
            f"varpi2+varpi3 <= varpi1 for user {k}; the construction forbids this"
        )
    sinr = varpi1 / denom
    return RateBreakdown(
        varpi1=varpi1,
        varpi2=varpi2,
        varpi3=varpi3,
        sinr_tilde=sinr,
        rate_tilde=float(np.log2(1.0 + sinr)),
    )


def sum_rate(channels, W, psi, hwi):
    """Sum of approximate average rates (bps/Hz)."""
    return sum(
        approx_average_rate(channels, W, psi, hwi, k).rate_tilde
        for k in range(channels.K)
    )


def instantaneous_sinr(channels, W, psi, phase, hwi, k):
    """SINR at user k for one phase-noise realization `phase` (unit modulus)."""
    g = channels.f[k] + channels.G.conj().T @ (np.conj(psi * phase) * channels.h[k])
    z = g.conj() @ W                              # entries g^H w_i
    abs2 = np.abs(z) ** 2
    num = abs2[k]
    per_antenna = np.sum(np.abs(W) ** 2, axis=1)
    kr = hwi.kappa_r[k]
    distortion = kr * num + (1.0 + kr) * hwi.kappa_t * float(
        np.dot(per_antenna, np.abs(g) ** 2)
    )
    other = (1.0 + kr) * (
        float(np.sum(abs2) - num)
        + hwi.sigma_d_sq * ris_noise_gain(channels, psi, k)
        + hwi.sigma_k_sq
    )
    den = distortion + other
    if den <= 0:
        raise InvalidModel("zero SINR denominator; needs sigma_k_sq > 0")
    return float(num / den)


def amplification_power(channels, W, psi, kappa_t, sigma_d_sq):
    """Signal + distortion + dynamic-noise power at the RIS output.

    Depends on the amplitudes only (unit-modulus factors cancel inside the
    norms), so no expectation over phase noise is needed.
    """
    T = channels.G @ W                            # (M, K)
    signal = float(np.sum(np.abs(psi[:, None] * T) ** 2))
    per_antenna = np.sum(np.abs(W) ** 2, axis=1)
    distort = kappa_t * float(np.abs(psi) ** 2 @ (np.abs(channels.G) ** 2 @ per_antenna))
    noise = sigma_d_sq * float(np.sum(np.abs(psi) ** 2))
    return signal + distort + noise


def total_power(p_t, p_a, cfg):
    """xi_T*P_T + xi_A*P_A + P_BS + M*(P_SW + P_DC), in watts."""
    return cfg.xi_t * p_t + cfg.xi_a * p_a + cfg.p_bs + cfg.M * (cfg.p_sw + cfg.p_dc)


@dataclass
class MonteCarloRate:
    mean: float
    stderr: float


def monte_carlo_rate(channels, W, psi, hwi, trials, rng):
    """Sample mean of sum_k log2(1 + gamma_k(Phi)) over phase-noise draws."""
    if trials < 1:
        raise InvalidInput("trials must be >= 1")
    phases = phase_noise_sample(channels.M, rng, size=trials)
    per_antenna = np.sum(np.abs(W) ** 2, axis=1)
    rates = np.zeros(trials)
    for k in range(channels.K):
        scaled = (np.conj(psi) * channels.h[k])[None, :]
        gs = channels.f[k][None, :] + (np.conj(phases) * scaled) @ np.conj(channels.G)
        z = gs.conj() @ W                          # (trials, K)
        abs2 = np.abs(z) ** 2
        num = abs2[:, k]
        kr = hwi.kappa_r[k]
        distortion = kr * num + (1.0 + kr) * hwi.kappa_t * (
            np.abs(gs) ** 2 @ per_antenna
        )
        other = (1.0 + kr) * (
            abs2.sum(axis=1) - num
            + hwi.sigma_d_sq * ris_noise_gain(channels, psi, k)
            + hwi.sigma_k_sq
        )
        rates += np.log2(1.0 + num / (distortion + other))
    mean = float(rates.mean())
    stderr = float(rates.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloRate(mean=mean, stderr=stderr)
