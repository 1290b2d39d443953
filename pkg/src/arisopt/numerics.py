"""Hermitian linear algebra helpers and a generic monotone bisection.

Everything here is stateless; solver modules build on these primitives so
that pseudo-inverses are always taken through an explicit eigenbasis
(scalar shifts then cost one matrix product instead of a fresh inverse).
"""

from dataclasses import dataclass

import numpy as np

from .errors import BracketFailure, InvalidInput

# Relative cutoff below which a (shifted) eigenvalue is treated as zero when
# pseudo-inverting.  Balances rank-deficient systems against conditioning.
RANK_TOL = 1e-12


@dataclass
class HermitianEig:
    """Eigendecomposition H = Q diag(w) Q^H with eigenvalues sorted descending."""

    eigenvalues: np.ndarray   # real, shape (n,), descending
    eigenvectors: np.ndarray  # complex unitary, shape (n, n), columns


def hermitian_eig(H):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as (H + H^H)/2 before factoring, so callers may
    pass matrices that are Hermitian only up to rounding.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise InvalidInput("matrix contains non-finite entries")
    Hs = 0.5 * (H + H.conj().T)
    w, Q = np.linalg.eigh(Hs)
    order = np.argsort(w)[::-1]
    return HermitianEig(eigenvalues=w[order], eigenvectors=Q[:, order])


def max_eigenvalue(H):
    """Largest eigenvalue of a Hermitian PSD matrix (clamped at zero)."""
    return float(max(hermitian_eig(H).eigenvalues[0], 0.0))


def psd_solve(H, b, shift=0.0):
    """Solve (H + shift*I)^† b for Hermitian PSD H through its eigenbasis.

    Shifted eigenvalues at or below RANK_TOL times the largest one are
    treated as exact zeros (null-space components of b are dropped).
    """
    if shift < 0:
        raise InvalidInput("shift must be non-negative")
    b = np.asarray(b, dtype=complex)
    if not np.all(np.isfinite(b)):
        raise InvalidInput("right-hand side contains non-finite entries")
    eig = hermitian_eig(H)
    return apply_shifted_pinv(eig, shift, b)


def shifted_pinv_diag(eigenvalues, shift):
    """Elementwise (eigenvalues + shift)^† with the RANK_TOL null cutoff."""
    d = eigenvalues + shift
    dmax = d[0]
    inv = np.zeros_like(d)
    if dmax > 0:
        keep = d > RANK_TOL * dmax
        inv[keep] = 1.0 / d[keep]
    return inv


def apply_shifted_pinv(eig, shift, b):
    """(H + shift*I)^† b given a cached eigendecomposition of H.

    `b` may be a vector or a matrix of stacked right-hand sides (columns).
    """
    inv = shifted_pinv_diag(eig.eigenvalues, shift)
    Q = eig.eigenvectors
    proj = Q.conj().T @ b
    if proj.ndim == 1:
        return Q @ (inv * proj)
    return Q @ (inv[:, None] * proj)


@dataclass
class BisectResult:
    x: float      # midpoint of the final bracket
    lo: float     # f(lo) >= target
    hi: float     # f(hi) <= target (feasible side for <=-constraints)
    f_x: float
    n_eval: int


def bisect(f, target, lo, hi, tol, *, ytol=None, max_expand=60, max_iter=200):
    """Solve f(x) = target for a non-increasing f on [lo, hi].

    The upper end is doubled (up to `max_expand` times) until f(hi) <= target;
    a BracketFailure is raised if no valid bracket exists.  Iteration stops
    once |hi - lo| <= tol (and, when `ytol` is given, |f(mid) - target| <= ytol),
    or when floating-point resolution is exhausted.
    """
    if not (hi > lo):
        raise InvalidInput("need hi > lo")
    n_eval = 0

    f_lo = f(lo)
    n_eval += 1
    if not np.isfinite(target) or not np.isfinite(lo):
        raise InvalidInput("target and lo must be finite")
    if f_lo < target:
        raise BracketFailure(
            f"f(lo)={f_lo:.6g} below target={target:.6g}; no bracket on the left"
        )

    f_hi = f(hi)
    n_eval += 1
    expand = 0
    while f_hi > target:
        expand += 1
        if expand > max_expand:
            raise BracketFailure(
                f"no bracket after {max_expand} doublings (f(hi)={f_hi:.6g} > {target:.6g})"
            )
        lo, f_lo = hi, f_hi
        hi = 2.0 * hi if hi > 0 else 1.0
        f_hi = f(hi)
        n_eval += 1

    mid, f_mid = hi, f_hi
    for _ in range(max_iter):
        if hi - lo <= tol and (ytol is None or abs(f_mid - target) <= ytol):
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float resolution exhausted
            break
        f_mid = f(mid)
        n_eval += 1
        if f_mid >= target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    x = 0.5 * (lo + hi)
    return BisectResult(x=x, lo=lo, hi=hi, f_x=f_mid, n_eval=n_eval)
