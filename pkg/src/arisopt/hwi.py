"""Transceiver distortion statistics and RIS phase-noise model.

Phase noise at each reflecting element is a unit-modulus factor e^{j*theta}
with theta ~ U[-pi/2, pi/2], i.i.d. across elements.  The difference of two
such angles follows a triangular density on [-pi, pi], which gives the
closed-form moments used throughout the average-rate model:

    E{phi phi^H} = I + J,  J off-diagonal = 4/pi^2
    E{conj(phi)} = (2/pi) 1
    D D^T        = (1 - 4/pi^2) I
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

MEAN_CONJ_SCALE = 2.0 / np.pi          # E{conj(phi_m)}
OFFDIAG_SECOND_MOMENT = 4.0 / np.pi**2  # E{phi_i conj(phi_j)}, i != j
DD_SCALE = 1.0 - 4.0 / np.pi**2         # diagonal of D D^T


@dataclass
class PhaseNoiseStats:
    second_moment: np.ndarray        # I_M + J
    mean_conj_scale: float = MEAN_CONJ_SCALE
    dd_scale: float = DD_SCALE


@dataclass
class HwiModel:
    """Impairment and noise parameters entering the rate model.

    kappa_r is stored per user; `uniform` builds the common equal-kappa case.
    """

    kappa_t: float
    kappa_r: np.ndarray   # shape (K,)
    sigma_d_sq: float     # RIS dynamic-noise power (W)
    sigma_k_sq: float     # receiver noise power (W)

    @classmethod
    def uniform(cls, kappa_t, kappa_r, K, sigma_d_sq, sigma_k_sq):
        if not (0.0 <= kappa_t < 1.0) or not (0.0 <= kappa_r < 1.0):
            raise InvalidInput("kappa coefficients must lie in [0, 1)")
        return cls(
            kappa_t=float(kappa_t),
            kappa_r=np.full(K, float(kappa_r)),
            sigma_d_sq=float(sigma_d_sq),
            sigma_k_sq=float(sigma_k_sq),
        )

    @classmethod
    def from_config(cls, cfg):
        return cls.uniform(cfg.kappa_t, cfg.kappa_r, cfg.K, cfg.sigma_d_sq, cfg.sigma_k_sq)


def transmit_distortion_cov(W, kappa_t):
    """Diagonal covariance of the transmit distortion: kappa_t * ddiag(W W^H)."""
    if not (0.0 <= kappa_t < 1.0):
        raise InvalidInput("kappa_t must lie in [0, 1)")
    W = np.asarray(W)
    per_antenna = np.sum(np.abs(W) ** 2, axis=1)  # diag of W W^H
    return kappa_t * np.diag(per_antenna)


def receive_distortion_power(signal_power, kappa_r):
    """Receiver distortion variance, proportional to the received signal power."""
    if not (0.0 <= kappa_r < 1.0):
        raise InvalidInput("kappa_r must lie in [0, 1)")
    return kappa_r * signal_power


def phase_noise_sample(M, rng, size=None):
    """Draw unit-modulus phase-noise vectors, theta ~ U[-pi/2, pi/2] i.i.d.

    Returns shape (M,) or (size, M) when `size` is given.
    """
    shape = (M,) if size is None else (size, M)
    theta = rng.uniform(-np.pi / 2, np.pi / 2, size=shape)
    return np.exp(1j * theta)


def phase_noise_second_moment(M):
    """E{phi phi^H} = I_M + J with 4/pi^2 off the diagonal."""
    J = np.full((M, M), OFFDIAG_SECOND_MOMENT)
    np.fill_diagonal(J, 0.0)
    return np.eye(M) + J


def phase_noise_stats(M):
    return PhaseNoiseStats(second_moment=phase_noise_second_moment(M))
