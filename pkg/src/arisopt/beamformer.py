"""Beamforming subproblem: MM-majorized constraint plus dual bisection.

The quadratic objective is minimized under the transmit-power ball and the
reflected-power ellipsoid.  The ellipsoid is replaced each iteration by the
scaled-identity majorizer built from the largest eigenvalue of Gamma, which
keeps every multiplier shift scalar, so one eigendecomposition of Xi serves
all dual evaluations:

  Case I  - transmit power inactive: single multiplier mu on the majorized
            reflected-power constraint, found by bisection on P_m_tilde(mu).
  Case II - transmit power active: closed-form lambda_2 for the (linearized)
            reflected-power constraint inside a bisection on lambda_1
            against P_T(lambda_1).

Both P_m_tilde(mu) and P_T(lambda_1) are non-increasing, and the accepted
iterate of each MM step is surrogate-feasible, hence feasible for the true
constraints.  All dual evaluations run in the eigenbasis of Xi (norms are
unitarily invariant), so no matrix product or inverse appears inside the
bisections.
"""

from dataclasses import dataclass

import numpy as np

from .numerics import bisect, max_eigenvalue, shifted_pinv_diag


@dataclass
class WSurrogate:
    """Majorization state for the reflected-power constraint at one anchor."""

    lam_gamma: float        # scalar of Z_Gamma = lam_gamma * I
    E: np.ndarray           # (Z_Gamma - Gamma) applied to the anchor, (N, K)
    anchor_term: float      # anchor^H (Z_Gamma - Gamma) anchor, >= 0
    p_m_tilde: float        # P_m - anchor_term
    W_anchor: np.ndarray

    def constraint_value(self, W):
        """lam*||W||^2 - 2Re{Tr(E^H W)}; the constraint reads <= p_m_tilde."""
        quad = self.lam_gamma * float(np.sum(np.abs(W) ** 2))
        return quad - 2.0 * float(np.real(np.sum(np.conj(self.E) * W)))

    def surrogate_value(self, W):
        """Full majorizer of w^H Gamma w; equals it at the anchor."""
        return self.constraint_value(W) + self.anchor_term


def majorize_gamma(sub, W_anchor):
    """Scaled-identity majorizer of the Gamma quadratic at the given anchor."""
    lam = max_eigenvalue(sub.gamma_blk)
    E = lam * W_anchor - sub.gamma_blk @ W_anchor
    anchor_term = lam * float(np.sum(np.abs(W_anchor) ** 2)) - sub.gamma_power(W_anchor)
    return WSurrogate(
        lam_gamma=lam,
        E=E,
        anchor_term=anchor_term,
        p_m_tilde=sub.p_m - anchor_term,
        W_anchor=W_anchor.copy(),
    )


class _DualWorkspace:
    """Eigenbasis projections reused across all multiplier evaluations."""

    def __init__(self, sub, sur):
        eig = sub.xi_eig()
        self.lam = eig.eigenvalues
        self.Q = eig.eigenvectors
        self.pw = self.Q.conj().T @ sub.omega_cols   # omega in eigen-coords
        self.pe = self.Q.conj().T @ sur.E            # (Z - Gamma) anchor image
        self.lam_gamma = sur.lam_gamma

    def x_case1(self, mu):
        inv = shifted_pinv_diag(self.lam, mu * self.lam_gamma)
        return inv[:, None] * (self.pw + mu * self.pe)

    def constraint_of(self, x):
        # same value as sur.constraint_value(Q @ x)
        quad = self.lam_gamma * float(np.sum(np.abs(x) ** 2))
        return quad - 2.0 * float(np.real(np.sum(np.conj(self.pe) * x)))

    def x_case2(self, lam1, p_hat):
        inv = shifted_pinv_diag(self.lam, lam1)
        base = inv[:, None] * self.pw
        lin_base = 2.0 * float(np.real(np.sum(np.conj(self.pe) * base)))
        if lin_base >= p_hat:
            return base, 0.0
        direction = inv[:, None] * self.pe
        denom = 2.0 * float(np.real(np.sum(np.conj(self.pe) * direction)))
        if denom <= 0.0:
            return base, 0.0
        lam2 = (p_hat - lin_base) / denom
        if lam2 < 0.0:  # slack linearized constraint; derivation assumes activity
            return base, 0.0
        return base + lam2 * direction, lam2

    def lift(self, x):
        return self.Q @ x


def solve_case1(sub, sur, mult_tol=1e-8):
    """Minimize under the majorized reflected-power constraint only."""
    ws = _DualWorkspace(sub, sur)
    x0 = ws.x_case1(0.0)
    if ws.constraint_of(x0) <= sur.p_m_tilde:
        return ws.lift(x0), 0.0
    ytol = 1e-12 * max(abs(sur.p_m_tilde), 1e-300)
    res = bisect(
        lambda mu: ws.constraint_of(ws.x_case1(mu)),
        sur.p_m_tilde,
        lo=0.0,
        hi=1.0,
        tol=mult_tol,
        ytol=ytol,
    )
    mu = res.hi  # feasible side of the bracket
    return ws.lift(ws.x_case1(mu)), mu


def solve_case2(sub, sur, p_t, mult_tol=1e-8):
    """Minimize with the transmit-power constraint active (on the sphere)."""
    ws = _DualWorkspace(sub, sur)
    p_hat = sur.lam_gamma * p_t - sur.p_m_tilde

    def power_at(lam1):
        x, _ = ws.x_case2(lam1, p_hat)
        return float(np.sum(np.abs(x) ** 2))

    if power_at(0.0) <= p_t:
        x, lam2 = ws.x_case2(0.0, p_hat)
        return ws.lift(x), 0.0, lam2
    res = bisect(power_at, p_t, lo=0.0, hi=1.0, tol=mult_tol, ytol=1e-12 * p_t)
    lam1 = res.hi
    x, lam2 = ws.x_case2(lam1, p_hat)
    return ws.lift(x), lam1, lam2


@dataclass
class WSolveResult:
    W: np.ndarray
    trace: list           # true-subproblem objective after each MM iteration
    lam_t: float          # multiplier on ||w||^2 <= P_T (original problem)
    lam_a: float          # multiplier on w^H Gamma w <= P_m
    case: int             # 1, 2, or 0 for the degenerate omega = 0 shortcut
    iterations: int
    converged: bool


def optimize_w(sub, W_init, p_t, tol=1e-6, max_iters=30, mult_tol=1e-8):
    """MM loop: majorize at the current iterate, solve Case I, fall back to
    Case II when the transmit-power ball is violated.

    W_init must be feasible for both true constraints; every accepted iterate
    then stays feasible and the objective trace is non-increasing.
    """
    if np.linalg.norm(sub.omega_cols) == 0.0:
        W = np.zeros_like(W_init)
        return WSolveResult(
            W=W, trace=[sub.objective(W)], lam_t=0.0, lam_a=0.0,
            case=0, iterations=0, converged=True,
        )

    W = W_init
    prev = sub.objective(W)
    trace = [prev]
    lam_t = lam_a = 0.0
    case = 1
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        sur = majorize_gamma(sub, W)
        W_new, mu = solve_case1(sub, sur, mult_tol)
        if float(np.sum(np.abs(W_new) ** 2)) <= p_t * (1.0 + 1e-12):
            lam_t, lam_a, case = 0.0, mu, 1
        else:
            W_new, lam1, lam2 = solve_case2(sub, sur, p_t, mult_tol)
            lam_t, lam_a, case = lam1 - lam2 * sur.lam_gamma, lam2, 2
        obj = sub.objective(W_new)
        trace.append(obj)
        delta_w = np.linalg.norm(W_new - W)
        W = W_new
        if abs(obj - prev) <= tol * max(abs(prev), 1e-300) and delta_w <= np.sqrt(tol) * max(
            np.linalg.norm(W), 1e-300
        ):
            converged = True
            prev = obj
            break
        prev = obj
    return WSolveResult(
        W=W, trace=trace, lam_t=lam_t, lam_a=lam_a,
        case=case, iterations=it, converged=converged,
    )


def kkt_residuals(sub, p_t, result):
    """Relative KKT residuals of the original (un-majorized) subproblem."""
    W = result.W
    omega_norm = np.linalg.norm(sub.omega_cols)
    grad = (
        sub.xi_blk @ W
        + result.lam_t * W
        + result.lam_a * (sub.gamma_blk @ W)
        - sub.omega_cols
    )
    stationarity = np.linalg.norm(grad) / max(omega_norm, 1e-300)
    power = float(np.sum(np.abs(W) ** 2))
    gpow = sub.gamma_power(W)
    feas_t = (power - p_t) / p_t
    feas_a = (gpow - sub.p_m) / sub.p_m if np.isfinite(sub.p_m) else -np.inf
    slack_t = abs(result.lam_t * (power - p_t)) / max(1.0 + result.lam_t, 1.0) / p_t
    if np.isfinite(sub.p_m):
        slack_a = abs(result.lam_a * (gpow - sub.p_m)) / max(1.0 + result.lam_a, 1.0) / sub.p_m
    else:
        slack_a = 0.0
    return {
        "stationarity": float(stationarity),
        "feas_t": float(feas_t),
        "feas_a": float(feas_a),
        "slack_t": float(slack_t),
        "slack_a": float(slack_a),
    }
