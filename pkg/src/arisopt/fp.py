"""Quadratic-transform reformulation and assembly of both subproblems.

The fractional objective sum_k log(1+gamma_k) is linearized through
auxiliary variables (u_k, v_k) with closed-form optimal updates.  With
(u, v) fixed, the negative transformed objective -sum_k r_k is an exact
quadratic in the stacked beamformer w and, separately, in the reflection
vector psi; both quadratics are assembled here with every constant carried
explicitly so objective traces line up with the rate traces.

Both NK x NK matrices in the beamforming subproblem are I_K (x) block for a
single N x N block, so only the blocks are stored; the full Kronecker forms
are exposed as properties for verification.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleReflection
from .hwi import DD_SCALE, MEAN_CONJ_SCALE
from .numerics import hermitian_eig
from .rate import approx_average_rate, effective_channel, ris_noise_gain


@dataclass
class AuxiliaryVars:
    u: np.ndarray    # (K, M+1) complex rows
    v: np.ndarray    # (K,) real, non-negative


def update_v(channels, W, psi, hwi, k):
    """Optimal v_k: the average SINR at the current operating point."""
    return approx_average_rate(channels, W, psi, hwi, k).sinr_tilde


def update_u(channels, W, psi, hwi, v, k):
    """Optimal u_k = sqrt(1+v_k) Gbar_k^H w_k / (varpi2 + varpi3)."""
    bd = approx_average_rate(channels, W, psi, hwi, k)
    Gbar = effective_channel(channels, psi, k)
    return np.sqrt(1.0 + v[k]) * (Gbar.conj().T @ W[:, k]) / (bd.varpi2 + bd.varpi3)


def update_aux(channels, W, psi, hwi):
    """Closed-form (v*, u*) for every user at the current (W, psi)."""
    K = channels.K
    v = np.empty(K)
    u = np.empty((K, channels.M + 1), dtype=complex)
    for k in range(K):
        bd = approx_average_rate(channels, W, psi, hwi, k)
        v[k] = bd.sinr_tilde
        Gbar = effective_channel(channels, psi, k)
        u[k] = np.sqrt(1.0 + v[k]) * (Gbar.conj().T @ W[:, k]) / (bd.varpi2 + bd.varpi3)
    return AuxiliaryVars(u=u, v=v)


def objective_r(channels, W, psi, hwi, aux):
    """Transformed objective sum_k r_k (natural-log scale) at arbitrary (u, v)."""
    total = 0.0
    for k in range(channels.K):
        bd = approx_average_rate(channels, W, psi, hwi, k)
        Gbar = effective_channel(channels, psi, k)
        u_k, v_k = aux.u[k], aux.v[k]
        udot = float(np.real(np.vdot(u_k, u_k)))
        cross = np.real(np.vdot(u_k, Gbar.conj().T @ W[:, k]))
        total += (
            np.log(1.0 + v_k)
            - v_k
            + 2.0 * np.sqrt(1.0 + v_k) * cross
            - udot * (bd.varpi2 + bd.varpi3)
        )
    return float(total)


@dataclass
class WSubproblem:
    """min_w w^H Xi w - 2Re{omega^H w} - c  s.t.  ||w||^2 <= P_T, w^H Gamma w <= P_m.

    xi_blk / gamma_blk are the N x N diagonal blocks; the stacked matrices
    are I_K (x) block.  omega_cols holds the per-user pieces of omega.
    """

    xi_blk: np.ndarray       # (N, N) Hermitian PSD
    omega_cols: np.ndarray   # (N, K)
    c: float
    gamma_blk: np.ndarray    # (N, N) Hermitian PSD
    p_m: float
    _xi_eig: object = field(default=None, repr=False, compare=False)

    @property
    def K(self):
        return self.omega_cols.shape[1]

    @property
    def omega(self):
        return self.omega_cols.reshape(-1, order="F")

    @property
    def Xi_tilde(self):
        return np.kron(np.eye(self.K), self.xi_blk)

    @property
    def Gamma(self):
        return np.kron(np.eye(self.K), self.gamma_blk)

    def xi_eig(self):
        # Fixed while the multipliers vary; one factorization serves every
        # (mu, lambda_1) evaluation because the shifts are scalar.
        if self._xi_eig is None:
            self._xi_eig = hermitian_eig(self.xi_blk)
        return self._xi_eig

    def objective(self, W):
        quad = np.real(np.sum(np.conj(W) * (self.xi_blk @ W)))
        lin = np.real(np.sum(np.conj(self.omega_cols) * W))
        return float(quad - 2.0 * lin - self.c)

    def gamma_power(self, W):
        return float(np.real(np.sum(np.conj(W) * (self.gamma_blk @ W))))


def assemble_w_subproblem(channels, psi, hwi, aux, p_a):
    """Build the beamforming quadratic of the transformed problem."""
    N, K = channels.N, channels.K
    xi = np.zeros((N, N), dtype=complex)
    omega_cols = np.zeros((N, K), dtype=complex)
    c = 0.0
    for k in range(K):
        Gbar = effective_channel(channels, psi, k)
        S = Gbar @ Gbar.conj().T
        udot = float(np.real(np.vdot(aux.u[k], aux.u[k])))
        kr = hwi.kappa_r[k]
        xi += (1.0 + kr) * udot * (S + hwi.kappa_t * np.diag(np.real(np.diag(S))))
        omega_cols[:, k] = np.sqrt(1.0 + aux.v[k]) * (Gbar @ aux.u[k])
        c += (
            np.log(1.0 + aux.v[k])
            - aux.v[k]
            - (1.0 + kr)
            * udot
            * (hwi.sigma_d_sq * ris_noise_gain(channels, psi, k) + hwi.sigma_k_sq)
        )
    a2 = np.abs(psi) ** 2
    B = (channels.G.conj().T * a2[None, :]) @ channels.G
    gamma_blk = B + hwi.kappa_t * np.diag(np.real(np.diag(B)))
    p_m = p_a - hwi.sigma_d_sq * float(np.sum(a2))
    if np.isfinite(p_a) and p_m <= 0:
        raise InfeasibleReflection(
            f"P_m = {p_m:.3e} <= 0: reflection noise amplification exhausts P_A"
        )
    return WSubproblem(xi_blk=xi, omega_cols=omega_cols, c=float(c), gamma_blk=gamma_blk, p_m=p_m)


@dataclass
class PsiSubproblem:
    """min_psi psi^H Delta psi - 2Re{psi^H alpha} - d  s.t.  psi^H Lambda psi <= P_A."""

    delta: np.ndarray        # (M, M) Hermitian PSD
    alpha: np.ndarray        # (M,)
    d: float
    lambda_diag: np.ndarray  # (M,) real positive diagonal of Lambda

    @property
    def Lambda(self):
        return np.diag(self.lambda_diag)

    def objective(self, psi):
        quad = np.real(np.vdot(psi, self.delta @ psi))
        return float(quad - 2.0 * np.real(np.vdot(psi, self.alpha)) - self.d)

    def lambda_power(self, psi):
        return float(np.abs(psi) ** 2 @ self.lambda_diag)


def assemble_psi_subproblem(channels, W, hwi, aux):
    """Build the reflection quadratic of the transformed problem."""
    M = channels.M
    R = W @ W.conj().T
    per_antenna = np.real(np.diag(R))
    R_aug = R + hwi.kappa_t * np.diag(per_antenna)

    delta = np.zeros((M, M), dtype=complex)
    alpha = np.zeros(M, dtype=complex)
    d = 0.0
    for k in range(channels.K):
        h = channels.h[k]
        f = channels.f[k]
        u0 = aux.u[k][0]
        uvec = aux.u[k][1:]
        udot = float(np.real(np.vdot(aux.u[k], aux.u[k])))
        kr = hwi.kappa_r[k]
        Q = udot * (1.0 + kr) * R_aug

        X = channels.G @ Q @ channels.G.conj().T
        moment = (4.0 / np.pi**2) * np.outer(h, h.conj()) + DD_SCALE * np.diag(np.abs(h) ** 2)
        delta += moment * X.T
        delta += np.diag(hwi.sigma_d_sq * (1.0 + kr) * udot * np.abs(h) ** 2)

        t = channels.G @ W[:, k]
        r1 = MEAN_CONJ_SCALE * np.conj(u0) * (np.conj(h) * t) + np.sqrt(DD_SCALE) * (
            np.conj(uvec) * np.conj(h) * t
        )
        s = channels.G @ (Q @ f)
        r2 = MEAN_CONJ_SCALE * np.conj(h) * s
        alpha += np.sqrt(1.0 + aux.v[k]) * np.conj(r1) - np.conj(r2)

        d1 = np.conj(u0) * np.vdot(f, W[:, k])
        d2 = float(np.real(np.vdot(f, Q @ f)))
        d += (
            np.log(1.0 + aux.v[k])
            - aux.v[k]
            - (1.0 + kr) * hwi.sigma_k_sq * udot
            + 2.0 * np.real(np.sqrt(1.0 + aux.v[k]) * d1)
            - d2
        )

    lambda_diag = (
        np.real(np.einsum("mn,np,mp->m", channels.G, R_aug, channels.G.conj()))
        + hwi.sigma_d_sq
    )
    return PsiSubproblem(delta=delta, alpha=alpha, d=float(d), lambda_diag=lambda_diag)
