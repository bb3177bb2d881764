"""Regularised least squares shared by the polynomial fit and the ELM output layer.

Matrices are plain 2-D float64 numpy arrays.  Following the ELM convention,
the design ``Z`` is features x samples (h x N) and the targets ``T`` are
Q x N, so the solution ``O`` is Q x h.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import NonFiniteInput, SingularSystem

# Largest acceptable condition number of the (equilibrated) Gram matrix
# when lambda == 0.
MAX_COND = 1e13


def _as_matrix(a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    return a


def _jacobi_scale(G: np.ndarray) -> np.ndarray:
    d = np.sqrt(np.diagonal(G, axis1=-2, axis2=-1)).copy()
    d[d == 0] = 1.0
    return 1.0 / d


def solve_ridge(Z, T, lam: float) -> np.ndarray:
    """Return ``O = T Z^T (Z Z^T + lam I)^{-1}``.

    The system is symmetrically rescaled to unit diagonal and solved with a
    Cholesky factorisation.  If Cholesky fails for ``lam > 0`` a pivoted
    symmetric-indefinite (LDL^T) solve is used instead.

    Raises
    ------
    SingularSystem
        ``lam == 0`` and ``Z Z^T`` is numerically singular.
    NonFiniteInput
        ``Z``, ``T`` or ``lam`` contain inf/nan.
    """
    Z = _as_matrix(Z, "Z")
    T = _as_matrix(T, "T")
    if Z.shape[1] != T.shape[1]:
        raise ValueError(f"Z has {Z.shape[1]} samples but T has {T.shape[1]}")
    if Z.shape[1] < 1:
        raise ValueError("need at least one sample")
    if not np.isfinite(lam) or lam < 0:
        raise NonFiniteInput(f"lambda must be finite and >= 0, got {lam}")

    h = Z.shape[0]
    G = Z @ Z.T
    G[np.diag_indices(h)] += lam
    B = Z @ T.T  # h x Q
    s = _jacobi_scale(G)
    Gs = G * s[:, None] * s[None, :]
    Bs = B * s[:, None]

    if lam == 0:
        cond = np.linalg.cond(Gs)
        if not np.isfinite(cond) or cond > MAX_COND:
            raise SingularSystem(f"Z Z^T is singular (condition number {cond:.3g})")
    try:
        factor = scipy.linalg.cho_factor(Gs, lower=True, check_finite=False)
        Y = scipy.linalg.cho_solve(factor, Bs, check_finite=False)
    except np.linalg.LinAlgError:
        if lam == 0:
            raise SingularSystem("Cholesky factorisation failed with lambda = 0") from None
        Y = scipy.linalg.solve(Gs, Bs, assume_a="sym", check_finite=False)
    return (Y * s[:, None]).T


def solve_ridge_batched(G: np.ndarray, B: np.ndarray, lam: float) -> np.ndarray:
    """Batched variant working on precomputed Gram matrices.

    ``G`` is (..., h, h) = Z Z^T, ``B`` is (..., h) = Z t.  Returns the
    (..., h) output weights for a single target row.  Same equilibrated
    Cholesky approach as :func:`solve_ridge` but without the pivoted
    fallback, so it is meant for ``lam > 0``.
    """
    h = G.shape[-1]
    A = G + lam * np.eye(h)
    s = _jacobi_scale(A)
    As = A * s[..., :, None] * s[..., None, :]
    bs = B * s
    flat_A = As.reshape(-1, h, h)
    flat_b = bs.reshape(-1, h)
    out = np.empty_like(flat_b)
    for i in range(len(flat_A)):
        try:
            factor = scipy.linalg.cho_factor(flat_A[i], lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise SingularSystem(f"Cholesky failed in batch item {i} (lambda = {lam})") from None
        out[i] = scipy.linalg.cho_solve(factor, flat_b[i], check_finite=False)
    return out.reshape(bs.shape) * s


def ridge_objective(Z, T, O, lam: float) -> float:
    """``sum_n ||t_n - O z_n||^2 + lam ||O||_F^2``."""
    Z, T, O = (np.atleast_2d(np.asarray(a, dtype=np.float64)) for a in (Z, T, O))
    R = T - O @ Z
    return float(np.sum(R * R) + lam * np.sum(O * O))


def vandermonde(day_indices, degree: int = 3) -> np.ndarray:
    """Rows ``[1, n, n^2, ..., n^degree]`` for each index ``n``."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    n = np.asarray(day_indices, dtype=np.float64)
    return n[:, None] ** np.arange(degree + 1)[None, :]
