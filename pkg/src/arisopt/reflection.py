"""Reflection subproblem: MM majorization, price mechanism, element sweep.

Both the objective quadratic (Delta) and the constraint quadratic (Lambda)
are majorized by scaled identities at the current anchor, after which the
priced objective h = f + eta*g separates per element.  Each (phase,
amplitude) pair then has a closed form:

    phi_m = angle(b_m) - pi,   a_m = |b_m| / (2*(z_delta + eta*z_lambda))

with b_m = p_tilde_m + eta*q_tilde_m held fixed during a sweep.  The price
eta is the smallest value making the sweep minimizer satisfy the majorized
power constraint; g(psi(eta)) is non-increasing in eta, so bisection applies.

Baselines reuse the same machinery with one component frozen: phase-only
sweeps for the unit-modulus surface, amplitude-only sweeps for the
random-phase scheme.  Frozen components live in the (a, phi) state so a
zero-amplitude element keeps its phase.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .numerics import bisect, max_eigenvalue
from .rate import ReflectionCoefficients


@dataclass
class PsiSurrogate:
    lam_delta: float      # Z_Delta = lam_delta * I
    lam_lambda: float     # Z_Lambda = lam_lambda * I
    p_tilde: np.ndarray   # (M,)
    q_tilde: np.ndarray   # (M,)
    d_tilde: float
    p_a_tilde: float
    psi_anchor: np.ndarray

    def f_value(self, psi):
        """Majorized objective; equals the true quadratic at the anchor."""
        return (
            self.lam_delta * float(np.sum(np.abs(psi) ** 2))
            + float(np.real(np.vdot(psi, self.p_tilde)))
            + self.d_tilde
        )

    def g_value(self, psi):
        """Majorized amplification power; the constraint reads <= p_a_tilde."""
        return self.lam_lambda * float(np.sum(np.abs(psi) ** 2)) + float(
            np.real(np.vdot(psi, self.q_tilde))
        )


def majorize_psi(sub, psi_anchor, p_a):
    """Scaled-identity majorizers of both quadratics at the given anchor."""
    lam_d = max_eigenvalue(sub.delta)
    lam_l = float(np.max(sub.lambda_diag))
    residual_d = lam_d * psi_anchor - sub.delta @ psi_anchor
    residual_l = (lam_l - sub.lambda_diag) * psi_anchor
    anchor_d = float(np.real(np.vdot(psi_anchor, residual_d)))
    anchor_l = float(np.real(np.vdot(psi_anchor, residual_l)))
    return PsiSurrogate(
        lam_delta=lam_d,
        lam_lambda=lam_l,
        p_tilde=-2.0 * (sub.alpha + residual_d),
        q_tilde=-2.0 * residual_l,
        d_tilde=-sub.d + anchor_d,
        p_a_tilde=p_a - anchor_l,
        psi_anchor=psi_anchor.copy(),
    )


def _minimizer_psi(sur, eta, phi_fix, a_fix, update_phase, update_amp):
    """Joint minimizer of h = f + eta*g over the allowed components (as a
    complex vector; None when the amplitude subproblem is unbounded).

    b_m is anchored, so the per-element problems decouple; with both
    components free the closed forms compose to psi = -b / (2 z).
    """
    b = sur.p_tilde + eta * sur.q_tilde
    z = sur.lam_delta + eta * sur.lam_lambda
    if update_amp and z <= 0.0:
        return None  # caller raises the price until z > 0
    if update_phase and update_amp:
        return -b / (2.0 * z)
    if update_amp:
        theta = np.exp(1j * phi_fix)
        a = np.maximum(0.0, -np.real(b * np.conj(theta)) / (2.0 * z))
        return a * theta
    if update_phase:
        absb = np.abs(b)
        theta = np.where(absb > 0, -b / np.where(absb > 0, absb, 1.0), np.exp(1j * phi_fix))
        return a_fix * theta
    raise InvalidInput("at least one of phase/amplitude must be optimized")


def sweep_minimizer(sur, eta, state, update_phase=True, update_amp=True):
    """ReflectionCoefficients form of the sweep minimizer (see _minimizer_psi)."""
    psi = _minimizer_psi(sur, eta, state.phi, state.a, update_phase, update_amp)
    if psi is None:
        return None
    a = np.abs(psi)
    phi = np.where(a > 0, np.angle(psi), state.phi)
    return ReflectionCoefficients(a=a, phi=phi)


def aso_step(m, state, sur, eta, update_phase=True, update_amp=True):
    """Closed-form update of element m; returns (theta_m, a_m).

    The per-element objective (z_d + eta*z_l) a^2 + Re{b theta* a} never
    increases.  A vanished b_m zeroes the amplitude and keeps the phase.
    """
    b = sur.p_tilde[m] + eta * sur.q_tilde[m]
    z = sur.lam_delta + eta * sur.lam_lambda
    if update_amp and z <= 0.0:
        raise InvalidInput("nonpositive quadratic coefficient in element update")
    if update_phase and abs(b) > 0:
        state.phi[m] = np.mod(np.angle(b) - np.pi, 2.0 * np.pi)
    theta = np.exp(1j * state.phi[m])
    if update_amp:
        if abs(b) == 0.0 and update_phase:
            state.a[m] = 0.0
        elif update_phase:
            state.a[m] = abs(b) / (2.0 * z)
        else:
            state.a[m] = max(0.0, -np.real(b * np.conj(theta)) / (2.0 * z))
    return theta, state.a[m]


def find_price(sur, state, tol=1e-8, update_phase=True, update_amp=True):
    """Smallest eta >= 0 whose sweep minimizer meets g(psi) <= p_a_tilde."""

    def g_of(eta):
        psi = _minimizer_psi(sur, eta, state.phi, state.a, update_phase, update_amp)
        if psi is None:
            return np.inf
        return sur.g_value(psi)

    if g_of(0.0) <= sur.p_a_tilde:
        return 0.0
    ytol = 1e-12 * max(abs(sur.p_a_tilde), 1e-300)
    res = bisect(g_of, sur.p_a_tilde, lo=0.0, hi=1.0, tol=tol, ytol=ytol)
    return res.hi  # feasible side


@dataclass
class PsiSolveResult:
    state: ReflectionCoefficients
    trace: list           # true-subproblem objective after each iteration
    h_trace: list         # priced surrogate objective per iteration
    eta: float
    iterations: int
    converged: bool


def optimize_psi(
    sub,
    state_init,
    p_a,
    tol=1e-6,
    max_iters=50,
    price_tol=1e-8,
    update_phase=True,
    update_amp=True,
    constrained=True,
):
    """MM + price + element sweep (Algorithm-style ASO loop).

    `constrained=False` drops the amplification-power constraint (eta = 0
    throughout); the unit-modulus baseline uses this together with
    update_amp=False.
    """
    state = ReflectionCoefficients(a=state_init.a.copy(), phi=state_init.phi.copy())
    trace = [sub.objective(state.psi)]
    h_trace = []
    eta = 0.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        sur = majorize_psi(sub, state.psi, p_a)
        if constrained:
            eta = find_price(sur, state, price_tol, update_phase, update_amp)
        for m in range(len(state.a)):
            aso_step(m, state, sur, eta, update_phase, update_amp)
        psi = state.psi
        h = sur.f_value(psi) + eta * sur.g_value(psi)
        h_trace.append(h)
        trace.append(sub.objective(psi))
        if len(h_trace) >= 2 and abs(h_trace[-1] - h_trace[-2]) <= tol * max(
            abs(h_trace[-2]), 1e-300
        ):
            converged = True
            break
    return PsiSolveResult(
        state=state, trace=trace, h_trace=h_trace, eta=eta,
        iterations=it, converged=converged,
    )
