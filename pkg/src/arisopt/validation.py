"""Independent oracles checking closed forms and solution quality at desk scale.

These run against the model and solvers from the outside: Monte-Carlo moment
estimates against the closed-form phase-noise statistics, finite differences
against the majorizer gradients, an exhaustive per-element grid against the
BCD-ASO output, and a phase-noise Monte-Carlo rate against the average-rate
model.  Every check reports pass/fail against explicit tolerances and is
deterministic given its RNG.
"""

import numpy as np

from .errors import InvalidInput
from .hwi import HwiModel, MEAN_CONJ_SCALE, OFFDIAG_SECOND_MOMENT
from .orchestrator import run_bcd_aso
from .rate import monte_carlo_rate, sum_rate
from .scenario import generate_channels, split_budget

_CHUNK = 200_000


def check_phase_noise_moments(M, samples, rng):
    """Empirical E{phi phi^H} and E{conj(phi)} versus the closed forms.

    Entrywise z-scores use the sample standard error; |z| <= 3 passes.
    """
    sum_cos = np.zeros((M, M))
    sum_cos2 = np.zeros((M, M))
    sum_c = np.zeros(M)
    sum_c2 = np.zeros(M)
    done = 0
    while done < samples:
        n = min(_CHUNK, samples - done)
        theta = rng.uniform(-np.pi / 2, np.pi / 2, size=(n, M))
        c, s = np.cos(theta), np.sin(theta)
        c2, s2 = np.cos(2 * theta), np.sin(2 * theta)
        # sum over t of cos(theta_i - theta_j) and cos(2(theta_i - theta_j))
        sum_cos += c.T @ c + s.T @ s
        sum_cos2 += c2.T @ c2 + s2.T @ s2
        sum_c += c.sum(axis=0)
        sum_c2 += (c**2).sum(axis=0)
        done += n

    T = samples
    mean_re = sum_cos / T                       # Re E{phi_i conj(phi_j)}
    var_re = (1.0 + sum_cos2 / T) / 2.0 - mean_re**2
    se_re = np.sqrt(np.maximum(var_re, 1e-300) / T)
    z_second = (mean_re - OFFDIAG_SECOND_MOMENT) / se_re
    off = ~np.eye(M, dtype=bool)
    max_z_second = float(np.max(np.abs(z_second[off]))) if M > 1 else 0.0

    mean_c = sum_c / T                          # Re E{conj(phi_m)} (Im is 0-mean)
    var_c = sum_c2 / T - mean_c**2
    se_c = np.sqrt(np.maximum(var_c, 1e-300) / T)
    z_mean = (mean_c - MEAN_CONJ_SCALE) / se_c
    max_z_mean = float(np.max(np.abs(z_mean)))

    return {
        "samples": samples,
        "max_z_second_moment": max_z_second,
        "max_z_mean_conj": max_z_mean,
        "second_moment_offdiag": float(mean_re[off].mean()) if M > 1 else None,
        "mean_conj": float(mean_c.mean()),
        "passed": bool(max_z_second <= 3.0 and max_z_mean <= 3.0),
    }


def _directional_fd(fun, x, direction, step):
    return (fun(x + step * direction) - fun(x - step * direction)) / (2.0 * step)


def check_surrogates(sub_w, sub_psi, W_anchor, psi_anchor, p_a, trials, rng,
                     grad_tol=1e-5, dom_tol=1e-10):
    """Verify tightness, gradient match, and domination for all majorizers."""
    from .beamformer import majorize_gamma
    from .reflection import majorize_psi

    report = {}

    sur_w = majorize_gamma(sub_w, W_anchor)
    true_w = sub_w.gamma_power
    tilde_w = sur_w.surrogate_value
    report["w_tightness"] = abs(tilde_w(W_anchor) - true_w(W_anchor)) / max(
        abs(true_w(W_anchor)), 1e-300
    )
    scale_w = np.linalg.norm(W_anchor)
    step = 1e-6 * (1.0 + scale_w)
    worst_grad = 0.0
    worst_dom = 0.0
    for _ in range(trials):
        d = rng.standard_normal(W_anchor.shape) + 1j * rng.standard_normal(W_anchor.shape)
        d /= np.linalg.norm(d)
        g_true = _directional_fd(true_w, W_anchor, d, step)
        g_sur = _directional_fd(tilde_w, W_anchor, d, step)
        denom = max(abs(g_true), abs(g_sur), 1e-300)
        worst_grad = max(worst_grad, abs(g_true - g_sur) / denom)
        X = W_anchor + scale_w * (
            rng.standard_normal(W_anchor.shape) + 1j * rng.standard_normal(W_anchor.shape)
        )
        margin = true_w(X) - tilde_w(X)
        worst_dom = max(worst_dom, margin / max(abs(true_w(X)), 1e-300))
    report["w_gradient_mismatch"] = worst_grad
    report["w_domination_margin"] = worst_dom

    sur_p = majorize_psi(sub_psi, psi_anchor, p_a)
    anchor_l = p_a - sur_p.p_a_tilde

    def true_obj(psi):
        return sub_psi.objective(psi)

    def true_pow(psi):
        return sub_psi.lambda_power(psi)

    def tilde_pow(psi):
        return sur_p.g_value(psi) + anchor_l

    report["psi_obj_tightness"] = abs(sur_p.f_value(psi_anchor) - true_obj(psi_anchor)) / max(
        abs(true_obj(psi_anchor)), 1e-300
    )
    report["psi_pow_tightness"] = abs(tilde_pow(psi_anchor) - true_pow(psi_anchor)) / max(
        abs(true_pow(psi_anchor)), 1e-300
    )
    scale_p = np.linalg.norm(psi_anchor)
    step = 1e-6 * (1.0 + scale_p)
    worst_grad_p = 0.0
    worst_dom_p = 0.0
    for _ in range(trials):
        d = rng.standard_normal(len(psi_anchor)) + 1j * rng.standard_normal(len(psi_anchor))
        d /= np.linalg.norm(d)
        for f_true, f_sur in ((true_obj, sur_p.f_value), (true_pow, tilde_pow)):
            g_true = _directional_fd(f_true, psi_anchor, d, step)
            g_sur = _directional_fd(f_sur, psi_anchor, d, step)
            denom = max(abs(g_true), abs(g_sur), 1e-300)
            worst_grad_p = max(worst_grad_p, abs(g_true - g_sur) / denom)
        X = psi_anchor + scale_p * (
            rng.standard_normal(len(psi_anchor)) + 1j * rng.standard_normal(len(psi_anchor))
        )
        for f_true, f_sur in ((true_obj, sur_p.f_value), (true_pow, tilde_pow)):
            margin = f_true(X) - f_sur(X)
            worst_dom_p = max(worst_dom_p, margin / max(abs(f_true(X)), 1e-300))
    report["psi_gradient_mismatch"] = worst_grad_p
    report["psi_domination_margin"] = worst_dom_p

    report["passed"] = bool(
        report["w_tightness"] <= 1e-10
        and report["psi_obj_tightness"] <= 1e-10
        and report["psi_pow_tightness"] <= 1e-10
        and report["w_gradient_mismatch"] <= grad_tol
        and report["psi_gradient_mismatch"] <= grad_tol
        and report["w_domination_margin"] <= dom_tol
        and report["psi_domination_margin"] <= dom_tol
    )
    return report


def _top_eigvec_2x2(S):
    """Principal eigenvector/value of batched 1x1 or 2x2 Hermitian matrices."""
    n = S.shape[-1]
    if n == 1:
        v = np.ones(S.shape[:-2] + (1,), dtype=complex)
        return v, np.real(S[..., 0, 0])
    a = np.real(S[..., 0, 0])
    c = np.real(S[..., 1, 1])
    b = S[..., 0, 1]
    half = 0.5 * (a - c)
    lam = 0.5 * (a + c) + np.sqrt(half**2 + np.abs(b) ** 2)
    v1 = np.where(np.abs(b) > 0, b, np.where(a >= c, 1.0, 0.0))
    v2 = np.where(np.abs(b) > 0, lam - a, np.where(a >= c, 0.0, 1.0))
    v = np.stack([v1, v2], axis=-1)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return v, lam


def grid_search_small(channels, hwi, p_t, p_a, n_phase=64, n_amp=32):
    """Exhaustive per-element (phase, amplitude) search with an inner
    matched/eigen beamformer; the near-optimality oracle for K=1, M<=2, N<=2.

    Amplitude grids run up to the constraint boundary evaluated at the
    full-power matched beamformer; candidate transmit powers are capped at
    the feasible level for each grid point.
    """
    M, N, K = channels.M, channels.N, channels.K
    if K != 1 or M > 2 or N > 2:
        raise InvalidInput("grid oracle supports K=1, M<=2, N<=2")
    f = channels.f[0]
    G = channels.G
    kt = hwi.kappa_t

    W0 = np.sqrt(p_t) * (f / np.linalg.norm(f))[:, None]
    if M == 0:
        best_rate, _ = _best_inner_rate(
            np.zeros((1, 0), dtype=complex), channels, hwi, p_t, np.inf
        )
        return {"best_rate": float(best_rate[0]), "best_psi": np.zeros(0, complex)}

    # per-element amplitude bound: element alone saturating P_A at the
    # full-power matched beamformer
    R0 = W0 @ W0.conj().T
    R0_aug = R0 + kt * np.diag(np.real(np.diag(R0)))
    lam0 = np.real(np.einsum("mn,np,mp->m", G, R0_aug, G.conj())) + hwi.sigma_d_sq
    a_max = np.sqrt(p_a / lam0)
    phases = np.linspace(0.0, 2.0 * np.pi, n_phase, endpoint=False)
    per_elem = [
        (np.linspace(0.0, a_max[m], n_amp)[:, None] * np.exp(1j * phases)[None, :]).ravel()
        for m in range(M)
    ]
    sizes = [len(v) for v in per_elem]
    total = int(np.prod(sizes))

    best_rate = -np.inf
    best_psi = None
    chunk = 65536
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        if M == 1:
            psi = per_elem[0][idx][:, None]
        else:
            i, j = np.unravel_index(idx, sizes)
            psi = np.stack([per_elem[0][i], per_elem[1][j]], axis=1)
        rates, _ = _best_inner_rate(psi, channels, hwi, p_t, p_a)
        pos = int(np.argmax(rates))
        if rates[pos] > best_rate:
            best_rate = float(rates[pos])
            best_psi = psi[pos].copy()
    return {"best_rate": best_rate, "best_psi": best_psi, "n_points": total}


def _best_inner_rate(psi, channels, hwi, p_t, p_a):
    """Best single-user rate over candidate beamformer directions, batched
    over grid points (rows of psi)."""
    f = channels.f[0]
    h = channels.h[0]
    G = channels.G
    kr = float(hwi.kappa_r[0])
    kt = hwi.kappa_t
    B = psi.shape[0]

    scaled = np.conj(psi) * h[None, :]                       # (B, M)
    f_hat = f[None, :] + MEAN_CONJ_SCALE * (scaled @ np.conj(G))     # (B, N)
    G_hat = np.sqrt(1.0 - 4.0 / np.pi**2) * (
        np.conj(G).T[None, :, :] * scaled[:, None, :]
    )                                                        # (B, N, M)
    Gbar = np.concatenate([f_hat[:, :, None], G_hat], axis=2)
    S = np.einsum("bnm,bpm->bnp", Gbar, Gbar.conj())
    nbar = (1.0 + kr) * (
        hwi.sigma_d_sq * (np.abs(psi) ** 2 @ np.abs(h) ** 2) + hwi.sigma_k_sq
    )                                                        # (B,)

    a2 = np.abs(psi) ** 2
    N = channels.N
    if channels.M:
        gamma_blk = np.einsum("bm,mn,mp->bnp", a2, G.conj(), G)
    else:
        gamma_blk = np.zeros((B, N, N), dtype=complex)
    rng_idx = np.arange(N)
    gamma_blk[:, rng_idx, rng_idx] += kt * np.real(gamma_blk[:, rng_idx, rng_idx])
    p_m = (p_a - hwi.sigma_d_sq * a2.sum(axis=1)) if np.isfinite(p_a) else np.full(B, np.inf)

    diagS = np.real(np.einsum("bnn->bn", S))                 # (B, N)

    def rate_for(v):
        # v: (B, N) unit directions; power capped by both constraints
        gq = np.real(np.einsum("bn,bnp,bp->b", v.conj(), gamma_blk, v))
        with np.errstate(divide="ignore", invalid="ignore"):
            p_cap = np.where(gq > 0, p_m / np.maximum(gq, 1e-300), np.inf)
        p = np.minimum(p_t, p_cap)
        p = np.where(p_m < 0, 0.0, np.maximum(p, 0.0))
        num = p * np.real(np.einsum("bn,bnp,bp->b", v.conj(), S, v))
        distort = kr * num + (1.0 + kr) * kt * p * np.einsum(
            "bn,bn->b", np.abs(v) ** 2, diagS
        )
        return np.log2(1.0 + num / (distort + nbar))

    v_eig, _ = _top_eigvec_2x2(S)
    cand = [rate_for(v_eig)]
    fdir = np.broadcast_to(f / np.linalg.norm(f), v_eig.shape)
    cand.append(rate_for(fdir))
    fh_norm = np.linalg.norm(f_hat, axis=1, keepdims=True)
    cand.append(rate_for(f_hat / np.maximum(fh_norm, 1e-300)))
    rates = np.max(np.stack(cand, axis=0), axis=0)
    return rates, None


def check_rate_approximation(cfg, trials, rng, solver_opts=None):
    """Gap between the average-rate model and a phase-noise Monte Carlo at
    the jointly optimized operating point."""
    channels = generate_channels(cfg, rng)
    report = run_bcd_aso(cfg, channels=channels, rng=rng, **(solver_opts or {}))
    hwi = HwiModel.from_config(cfg)
    psi = report.final_psi.psi
    approx = sum_rate(channels, report.final_W, psi, hwi)
    mc = monte_carlo_rate(channels, report.final_W, psi, hwi, trials, rng)
    gap = abs(approx - mc.mean) / mc.mean
    return {
        "approx_rate": approx,
        "mc_mean": mc.mean,
        "mc_stderr": mc.stderr,
        "rel_gap": float(gap),
        "passed": bool(gap <= 0.10),
    }


def run_validation_suite(cfg, rng=None, moment_samples=1_000_000, mc_trials=100_000,
                         surrogate_trials=100):
    """Full oracle suite; returns a JSON-serializable report with a global flag."""
    from .fp import assemble_psi_subproblem, assemble_w_subproblem, update_aux
    from .orchestrator import init_beamformer, init_reflection

    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    report = {}
    report["phase_noise_moments"] = check_phase_noise_moments(4, moment_samples, rng)

    channels = generate_channels(cfg, rng)
    hwi = HwiModel.from_config(cfg)
    p_t, p_a, ris_on = split_budget(cfg)
    W = init_beamformer(channels, p_t)
    state = init_reflection(channels, W, p_a, hwi, rng) if ris_on else None
    if ris_on:
        psi = state.psi
        aux = update_aux(channels, W, psi, hwi)
        sub_w = assemble_w_subproblem(channels, psi, hwi, aux, p_a)
        sub_psi = assemble_psi_subproblem(channels, W, hwi, aux)
        report["surrogates"] = check_surrogates(
            sub_w, sub_psi, W, psi, p_a, surrogate_trials, rng
        )
        report["rate_approximation"] = check_rate_approximation(cfg, mc_trials, rng)

    small = cfg.with_updates(M=2, N=2, K=1)
    ch_small = generate_channels(small, np.random.default_rng(small.seed))
    hwi_small = HwiModel.from_config(small)
    pt_s, pa_s, _ = split_budget(small)
    oracle = grid_search_small(ch_small, hwi_small, pt_s, pa_s)
    solved = run_bcd_aso(small)
    ratio = solved.sum_rate / oracle["best_rate"]
    report["grid_oracle"] = {
        "bcd_rate": solved.sum_rate,
        "grid_rate": oracle["best_rate"],
        "ratio": float(ratio),
        "passed": bool(ratio >= 0.95),
    }
    report["passed"] = bool(all(v.get("passed", True) for v in report.values() if isinstance(v, dict)))
    return report
