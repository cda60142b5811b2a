"""Cyclic Jacobi eigensolver for small real symmetric matrices."""

from __future__ import annotations

import warnings

import numpy as np


class JacobiNotConverged(RuntimeError):
    pass


def off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))  # direct sum; total minus diagonal cancels badly
    return float(np.sqrt(np.sum(off**2)))


def jacobi_eigh(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors (columns) of a real symmetric matrix.

    Sweeps over all (p, q) pairs in row order, annihilating a[p, q] with one
    plane rotation each, until the off-diagonal Frobenius norm is <= ``tol``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0):
        raise ValueError("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        if off_norm(a) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                h = a[q, q] - a[p, p]
                if abs(apq) < 1e-100 * abs(h):
                    t = apq / h  # small-angle limit; theta**2 would overflow
                else:
                    theta = h / (2 * apq)
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    else:
        if off_norm(a) > tol:
            raise JacobiNotConverged(f"off-diagonal norm {off_norm(a):.3g} after {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def solve_checked(a: np.ndarray, b: np.ndarray, cond_limit: float = 1e12) -> np.ndarray:
    """``np.linalg.solve`` with a warning when ``a`` is badly conditioned."""
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_limit:
        warnings.warn(f"ill-conditioned system (condition number {cond:.3g})", stacklevel=2)
    return np.linalg.solve(a, b)
