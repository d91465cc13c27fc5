"""Small shared numerical linear algebra helpers."""

from __future__ import annotations

import numpy as np
from scipy.linalg import null_space

from .errors import NotPositiveDefiniteError


def numerical_rank(a, rtol=1e-10):
    """Rank by singular values above rtol * largest (0 for an empty matrix)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def orth_basis(a, rtol=1e-10):
    """Orthonormal basis (columns) of the column span of ``a``."""
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.reshape(a.shape[0] if a.ndim == 2 else 0, 0)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    return u[:, :r]


def subspace_intersection(b1, b2, rtol=1e-10):
    """Orthonormal basis of span(b1) ∩ span(b2); bases are column matrices."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.shape[1] == 0 or b2.shape[1] == 0:
        return np.zeros((b1.shape[0], 0))
    stacked = np.hstack([b1, -b2])
    ns = null_space(stacked, rcond=rtol)
    if ns.shape[1] == 0:
        return np.zeros((b1.shape[0], 0))
    return orth_basis(b1 @ ns[: b1.shape[1], :], rtol)


def spd_eigh(g):
    w, v = np.linalg.eigh(np.asarray(g, dtype=float))
    if np.any(w <= 0):
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (min eigenvalue {w.min():.3e})")
    return w, v


def spd_sqrt(g):
    w, v = spd_eigh(g)
    return (v * np.sqrt(w)) @ v.T


def spd_inv_sqrt(g):
    w, v = spd_eigh(g)
    return (v / np.sqrt(w)) @ v.T


def spd_log(g):
    w, v = spd_eigh(g)
    return (v * np.log(w)) @ v.T


def sym_exp(s):
    s = np.asarray(s, dtype=float)
    w, v = np.linalg.eigh(0.5 * (s + s.T))
    return (v * np.exp(w)) @ v.T


def check_spd(g, name="gram matrix"):
    g = np.asarray(g, dtype=float)
    if not np.allclose(g, g.T, rtol=0, atol=1e-12 * max(1.0, np.abs(g).max())):
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(f"{name} fails Cholesky") from None
    return g
