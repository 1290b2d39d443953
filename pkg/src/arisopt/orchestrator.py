"""BCD outer loop tying the pieces together, plus initialization and baselines.

One outer iteration refreshes the auxiliary variables in closed form, then
solves the beamforming subproblem (MM + dual bisection) and the reflection
subproblem (MM + price + element sweep).  Every block update can only raise
the transformed objective, so the sum-rate trace is non-decreasing; a drop
beyond rounding tolerance aborts loudly instead of being masked.

Baseline schemes reuse the same loop with pieces frozen:

  active_random_phase  - phases fixed at random draws, amplitude-only sweeps
  passive_unit_modulus - amplitudes pinned at one, phase-only sweeps, no
                         amplification constraint, transmit power per the
                         equal-total-budget accounting (an in-repo
                         simplification, not the originally cited algorithm)
  no_ris               - surface off, beamforming only, full budget at the BS
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .beamformer import kkt_residuals, optimize_w
from .errors import InfeasibleReflection, InvalidInput, NonMonotoneObjective
from .fp import assemble_psi_subproblem, assemble_w_subproblem, objective_r, update_aux
from .hwi import HwiModel
from .rate import LOG2E, ReflectionCoefficients, amplification_power, sum_rate
from .reflection import optimize_psi
from .scenario import generate_channels, split_budget, split_budget_passive

SCHEMES = ("bcd_aso", "active_random_phase", "passive_unit_modulus", "no_ris")


@dataclass
class SolveReport:
    scheme: str
    objective_trace: list
    fp_trace: list
    constraint_slacks: list     # (P_T slack, P_A slack), relative, per iteration
    iterations: int
    converged: bool
    wall_time: float
    final_W: np.ndarray
    final_psi: ReflectionCoefficients
    p_t: float
    p_a: float
    ris_active: bool
    kkt: dict = field(default_factory=dict)

    @property
    def sum_rate(self):
        return self.objective_trace[-1]


def init_beamformer(channels, p_t):
    """Matched-filter columns with uniform power, scaled to ||W||_F^2 = P_T."""
    K = channels.K
    W = np.empty((channels.N, K), dtype=complex)
    for k in range(K):
        f = channels.f[k]
        W[:, k] = f / np.linalg.norm(f)
    return np.sqrt(p_t / K) * W


def init_reflection(channels, W, p_a, hwi, rng):
    """Random phases; one common amplitude placing the RIS at 90% of P_A."""
    phi = rng.uniform(0.0, 2.0 * np.pi, channels.M)
    unit = np.exp(1j * phi)
    p_unit = amplification_power(channels, W, unit, hwi.kappa_t, hwi.sigma_d_sq)
    a0 = np.sqrt(0.9 * p_a / p_unit)
    return ReflectionCoefficients(a=np.full(channels.M, a0), phi=phi)


def _repair_amplitudes(state, p_a, sigma_d_sq):
    # Shrink so the noise-amplification share alone sits at 90% of P_A.
    scale = np.sqrt(0.9 * p_a / (sigma_d_sq * float(np.sum(state.a**2))))
    return ReflectionCoefficients(a=state.a * scale, phi=state.phi.copy())


def _bcd_loop(
    channels,
    hwi,
    p_t,
    p_a,
    W,
    state,
    scheme,
    *,
    optimize_reflection,
    update_phase=True,
    update_amp=True,
    constrained_psi=True,
    eps=1e-4,
    n_max=100,
    w_tol=1e-6,
    w_max_iters=30,
    psi_tol=1e-6,
    psi_max_iters=50,
    mult_tol=1e-8,
):
    start = time.perf_counter()
    psi = state.psi
    trace = [sum_rate(channels, W, psi, hwi)]
    fp_trace = []
    slacks = []
    w_result = None
    converged = False
    n = 0
    for n in range(1, n_max + 1):
        aux = update_aux(channels, W, psi, hwi)
        fp_trace.append(objective_r(channels, W, psi, hwi, aux) * LOG2E)

        p_a_constraint = p_a if constrained_psi else np.inf
        repaired = False
        try:
            sub_w = assemble_w_subproblem(channels, psi, hwi, aux, p_a_constraint)
        except InfeasibleReflection:
            repaired = True
            state = _repair_amplitudes(state, p_a, hwi.sigma_d_sq)
            psi = state.psi
            aux = update_aux(channels, W, psi, hwi)
            sub_w = assemble_w_subproblem(channels, psi, hwi, aux, p_a_constraint)
        w_result = optimize_w(
            sub_w, W, p_t, tol=w_tol, max_iters=w_max_iters, mult_tol=mult_tol
        )
        W = w_result.W

        if optimize_reflection:
            sub_psi = assemble_psi_subproblem(channels, W, hwi, aux)
            psi_result = optimize_psi(
                sub_psi,
                state,
                p_a,
                tol=psi_tol,
                max_iters=psi_max_iters,
                price_tol=mult_tol,
                update_phase=update_phase,
                update_amp=update_amp,
                constrained=constrained_psi,
            )
            state = psi_result.state
            psi = state.psi

        rate = sum_rate(channels, W, psi, hwi)
        prev = trace[-1]
        if not repaired and rate < prev - max(1e-9 * abs(prev), 1e-15):
            raise NonMonotoneObjective(
                f"{scheme}: sum rate dropped from {prev:.12g} to {rate:.12g} "
                f"at outer iteration {n}; trace so far: {trace}"
            )
        trace.append(rate)

        pt_slack = (p_t - float(np.sum(np.abs(W) ** 2))) / p_t
        if constrained_psi and p_a > 0:
            p_y = amplification_power(channels, W, psi, hwi.kappa_t, hwi.sigma_d_sq)
            pa_slack = (p_a - p_y) / p_a
        else:
            pa_slack = np.nan
        slacks.append((pt_slack, pa_slack))

        if (rate - prev) < eps * max(prev, 1e-300):
            converged = True
            break

    return SolveReport(
        scheme=scheme,
        objective_trace=trace,
        fp_trace=fp_trace,
        constraint_slacks=slacks,
        iterations=n,
        converged=converged,
        wall_time=time.perf_counter() - start,
        final_W=W,
        final_psi=state,
        p_t=p_t,
        p_a=p_a,
        ris_active=optimize_reflection,
        kkt=kkt_residuals(sub_w, p_t, w_result) if w_result is not None else {},
    )


def run_bcd_aso(cfg, channels=None, rng=None, **opts):
    """Joint design of W and psi (Algorithm-6-style BCD with ASO reflections)."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if channels is None:
        channels = generate_channels(cfg, rng)
    hwi = HwiModel.from_config(cfg)
    p_t, p_a, ris_on = split_budget(cfg)
    if not ris_on:
        return _run_no_ris(cfg, channels, hwi, p_t, scheme="bcd_aso", **opts)
    W = init_beamformer(channels, p_t)
    state = init_reflection(channels, W, p_a, hwi, rng)
    return _bcd_loop(
        channels, hwi, p_t, p_a, W, state, "bcd_aso",
        optimize_reflection=True, **opts,
    )


def _run_no_ris(cfg, channels, hwi, p_t, scheme, **opts):
    W = init_beamformer(channels, p_t)
    state = ReflectionCoefficients.zeros(cfg.M)
    report = _bcd_loop(
        channels, hwi, p_t, 0.0, W, state, scheme,
        optimize_reflection=False, constrained_psi=False, **opts,
    )
    report.ris_active = False
    return report


def run_baseline(kind, cfg, channels=None, rng=None, **opts):
    """Reference schemes sharing the model and the total power budget."""
    if kind not in SCHEMES or kind == "bcd_aso":
        raise InvalidInput(f"unknown baseline {kind!r}; options: {SCHEMES[1:]}")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if channels is None:
        channels = generate_channels(cfg, rng)
    hwi = HwiModel.from_config(cfg)

    if kind == "no_ris":
        p_t = cfg.p_budget / cfg.xi_t
        return _run_no_ris(cfg, channels, hwi, p_t, scheme=kind, **opts)

    if kind == "active_random_phase":
        p_t, p_a, ris_on = split_budget(cfg)
        if not ris_on:
            return _run_no_ris(cfg, channels, hwi, p_t, scheme=kind, **opts)
        W = init_beamformer(channels, p_t)
        state = init_reflection(channels, W, p_a, hwi, rng)
        return _bcd_loop(
            channels, hwi, p_t, p_a, W, state, kind,
            optimize_reflection=True, update_phase=False, **opts,
        )

    # passive_unit_modulus: a = 1 fixed, phase-only, no amplification power
    p_t, ris_on = split_budget_passive(cfg)
    if not ris_on:
        return _run_no_ris(cfg, channels, hwi, p_t, scheme=kind, **opts)
    W = init_beamformer(channels, p_t)
    state = ReflectionCoefficients(
        a=np.ones(cfg.M), phi=rng.uniform(0.0, 2.0 * np.pi, cfg.M)
    )
    report = _bcd_loop(
        channels, hwi, p_t, np.inf, W, state, kind,
        optimize_reflection=True, update_phase=True, update_amp=False,
        constrained_psi=False, **opts,
    )
    report.p_a = 0.0
    return report
