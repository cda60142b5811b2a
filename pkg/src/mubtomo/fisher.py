"""Closed-form error analysis of MUB tomography in the probability representation.

Tables are ``(d+1, d)`` arrays indexed ``[basis, outcome]``: ``p[a, j] =
Tr(rho Pi_aj)`` and observable coefficients ``z[a, j]`` with
``Z = sum_aj z[a, j] Pi_aj``. ``copies`` is the number of copies measured per
basis; every error scales as ``1 / copies``.

Within one basis the multinomial covariance of the first d-1 frequencies is

    Finv[k, l] = p_k (1 - p_k) delta_kl - p_k p_l (1 - delta_kl),

and the last outcome is the dependent one. The effective d x d form
``S^T Finv S`` with ``S[k, j] = delta_kj - delta_jd`` equals
``diag(p) - p p^T`` whenever the row sums to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import MubCatalog
from .linalg import jacobi_eigh
from .states import as_generator

ROW_SUM_TOL = 1e-10


def _check_copies(copies: float) -> None:
    if copies <= 0:
        raise ValueError(f"copies per basis must be positive, got {copies}")


def check_probability_table(p: np.ndarray, tol: float = ROW_SUM_TOL) -> None:
    p = np.asarray(p)
    if p.ndim != 2:
        raise ValueError(f"probability table must be 2-D, got shape {p.shape}")
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise ValueError("probabilities outside [0, 1]")
    dev = np.max(np.abs(p.sum(axis=1) - 1))
    if dev > tol:
        raise ValueError(f"table rows do not sum to one (max deviation {dev:.3g})")


def probability_table(rho: np.ndarray, catalog: MubCatalog) -> np.ndarray:
    """Born-rule table p[a, j] = Tr(rho Pi_aj) for a density matrix."""
    P = catalog.projectors
    rho = np.asarray(rho)
    if rho.shape != P.shape[-2:]:
        raise ValueError(f"dimension mismatch: rho {rho.shape}, projectors {P.shape[-2:]}")
    return np.real(np.einsum("abij,ji->ab", P, rho))


def probability_tables(psis: np.ndarray, catalog: MubCatalog) -> np.ndarray:
    """Tables for a batch of pure state vectors, shape (S, d+1, d)."""
    psis = np.atleast_2d(psis)
    P = catalog.projectors
    if psis.shape[-1] != P.shape[-1]:
        raise ValueError(f"dimension mismatch: vectors of length {psis.shape[-1]}")
    return np.real(np.einsum("si,abij,sj->sab", psis.conj(), P, psis))


def inverse_fisher_block(p: np.ndarray, copies: float = 1) -> np.ndarray:
    """(d-1) x (d-1) inverse Fisher matrix of one basis, last outcome dropped."""
    _check_copies(copies)
    q = np.asarray(p, dtype=float)[:-1]
    return (np.diag(q) - np.outer(q, q)) / copies


def fisher_block(p: np.ndarray, copies: float = 1) -> np.ndarray:
    """Direct Fisher matrix N (delta_kl / p_k + 1 / p_d); needs every p_k > 0."""
    _check_copies(copies)
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("Fisher matrix is singular for a row with zero probabilities")
    return copies * (np.diag(1 / p[:-1]) + 1 / p[-1])


def reduction_matrix(d: int) -> np.ndarray:
    """S with S[k, j] = delta_kj - delta_jd, shape (d-1, d)."""
    s = np.eye(d - 1, d)
    s[:, -1] = -1
    return s


def effective_inverse_fisher_block(p: np.ndarray, copies: float = 1) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    s = reduction_matrix(p.size)
    return s.T @ inverse_fisher_block(p, copies) @ s


@dataclass(frozen=True, eq=False)
class FisherBlock:
    index: int
    inverse: np.ndarray
    effective_inverse: np.ndarray


def fisher_blocks(p: np.ndarray, copies: float = 1) -> list[FisherBlock]:
    return [
        FisherBlock(a, inverse_fisher_block(row, copies), effective_inverse_fisher_block(row, copies))
        for a, row in enumerate(np.asarray(p, dtype=float))
    ]


def _check_shapes(z: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = np.asarray(z, dtype=float)
    p = np.asarray(p, dtype=float)
    if z.shape != p.shape:
        raise ValueError(f"shape mismatch: coefficients {z.shape}, probabilities {p.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("observable coefficients must be finite")
    return z, p


def observable_error(z: np.ndarray, p: np.ndarray, copies: float = 1) -> float:
    """Predicted variance of Tr(rho_hat Z), summed over independent bases.

    Uses the differences z_ak - z_ad against the (d-1) x (d-1) inverse Fisher
    matrix of each basis.
    """
    z, p = _check_shapes(z, p)
    total = 0.0
    for za, pa in zip(z, p):
        diff = za[:-1] - za[-1]
        total += diff @ inverse_fisher_block(pa, copies) @ diff
    return float(total)


def observable_error_effective(z: np.ndarray, p: np.ndarray, copies: float = 1) -> float:
    """Same variance as :func:`observable_error`, as sum_a <z_a| S^T Finv_a S |z_a>."""
    z, p = _check_shapes(z, p)
    return float(sum(za @ effective_inverse_fisher_block(pa, copies) @ za for za, pa in zip(z, p)))


def quadratic_errors(z: np.ndarray, p: np.ndarray, copies: float = 1) -> np.ndarray:
    """Vectorized variance for stacks of tables, using S^T Finv S = diag(p) - p p^T.

    ``z`` and ``p`` broadcast over leading axes; the last two axes are (d+1, d).
    """
    _check_copies(copies)
    z = np.asarray(z, dtype=float)
    p = np.asarray(p, dtype=float)
    per_block = np.sum(p * z * z, axis=-1) - np.sum(p * z, axis=-1) ** 2
    return np.sum(per_block, axis=-1) / copies


def observable_coefficients(observable: np.ndarray, catalog: MubCatalog) -> np.ndarray:
    """Expansion coefficients z[a, j] = Tr(Z Pi_aj) - Tr(Z)/(d+1) of a Hermitian Z."""
    Z = np.asarray(observable)
    P = catalog.projectors
    if Z.shape != P.shape[-2:]:
        raise ValueError(f"dimension mismatch: observable {Z.shape}")
    nb = P.shape[0]
    return np.real(np.einsum("abij,ji->ab", P, Z)) - np.real(np.trace(Z)) / nb


def reconstruct_observable(z: np.ndarray, catalog: MubCatalog) -> np.ndarray:
    return np.einsum("ab,abij->ij", np.asarray(z, dtype=float), catalog.projectors)


def fidelity_coefficients(p_true: np.ndarray) -> np.ndarray:
    """Coefficients of the projector onto the (pure) true state.

    These are w = p - 1/(d+1); the per-basis constant is dropped since only
    differences within a basis enter the error.
    """
    return np.asarray(p_true, dtype=float).copy()


def fidelity_error(p_true: np.ndarray, copies: float = 1) -> float:
    return observable_error(fidelity_coefficients(p_true), p_true, copies)


def fidelity_errors(p_true: np.ndarray, copies: float = 1) -> np.ndarray:
    """Vectorized :func:`fidelity_error` over a stack of tables (..., d+1, d)."""
    return quadratic_errors(p_true, p_true, copies)


def hs_error(p: np.ndarray, copies: float = 1) -> float:
    """Mean squared Hilbert-Schmidt distance <Tr[(rho - rho_hat)^2]> = sum_a Tr(S^T Finv_a S)."""
    return float(sum(np.trace(b.effective_inverse) for b in fisher_blocks(p, copies)))


@dataclass(frozen=True, eq=False)
class PrincipalAxes:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # columns
    zero_tol: float = 1e-12

    @property
    def zero_mode(self) -> np.ndarray:
        return self.eigenvectors[:, 0]

    @property
    def most_favorable(self) -> tuple[float, np.ndarray]:
        """Second-smallest axis: the least noisy direction orthogonal to the trace."""
        return float(self.eigenvalues[1]), self.eigenvectors[:, 1]

    @property
    def least_favorable(self) -> tuple[float, np.ndarray]:
        return float(self.eigenvalues[-1]), self.eigenvectors[:, -1]


def principal_axes(block: FisherBlock | np.ndarray, tol: float = 1e-12) -> PrincipalAxes:
    mat = block.effective_inverse if isinstance(block, FisherBlock) else np.asarray(block)
    w, v = jacobi_eigh(mat, tol=tol, max_sweeps=100)
    return PrincipalAxes(w, v)


def shadow_samples(p: np.ndarray, count: int, rng, copies: float = 1) -> np.ndarray:
    """Real shadow of the block-diagonal effective inverse Fisher matrix.

    Each sample is <z| (+)_a S^T Finv_a S |z> for z uniform on the unit sphere
    of R^{d(d+1)}.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    gen = as_generator(rng)
    p = np.asarray(p, dtype=float)
    z = gen.standard_normal((count, p.size))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return quadratic_errors(z.reshape((count,) + p.shape), p, copies)


def linear_inversion(p_hat: np.ndarray, catalog: MubCatalog) -> np.ndarray:
    """rho_hat = sum_aj (p_hat[a, j] - 1/(d+1)) Pi_aj; positivity is not enforced."""
    p_hat = np.asarray(p_hat, dtype=float)
    P = catalog.projectors
    if p_hat.shape != P.shape[:2]:
        raise ValueError(f"table shape {p_hat.shape} does not match catalog {P.shape[:2]}")
    return np.einsum("ab,abij->ij", p_hat - 1 / P.shape[0], P)


def outcome_entropy(p: np.ndarray) -> float:
    """Sum over bases of the Shannon entropy (bits) of each outcome distribution."""
    return float(outcome_entropies(p))


def outcome_entropies(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    safe = np.where(p > 0, p, 1.0)
    return -np.sum(np.where(p > 0, p * np.log2(safe), 0.0), axis=(-2, -1))


def measurement_jacobian(catalog: MubCatalog) -> np.ndarray:
    """d p[a, k] / d w[b, l] = Tr(Pi_ak Pi_bl), flattened to (d(d+1), d(d+1)).

    For MUBs this Gram matrix acts as the identity on variations whose
    per-basis sums vanish, which are the only variations of normalized states.
    """
    P = catalog.projectors
    flat = P.reshape(-1, P.shape[-1] ** 2)
    return np.real(flat @ flat.conj().T)
