"""Reference computations that do not use the probability representation.

The Bloch path parametrizes rho = I/d + sum_k a_k lambda_k with orthonormal
traceless generators and builds the (d^2-1) x (d^2-1) Fisher matrix of the
d(d+1)-outcome POVM {Pi_aj / (d+1)} directly. The Monte Carlo path samples
multinomial counts and measures the spread of linear estimators.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .catalog import MubCatalog
from .fisher import probability_table
from .linalg import solve_checked
from .pauli import PauliString, pauli_matrix
from .states import as_generator

MIN_PROBABILITY = 1e-9


class SingularFisherError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BlochBasis:
    labels: tuple[str, ...]
    generators: np.ndarray  # (d^2 - 1, d, d)

    @property
    def dim(self) -> int:
        return self.generators.shape[-1]


@lru_cache(maxsize=None)
def bloch_basis(n: int = 3) -> BlochBasis:
    """Non-identity Pauli strings scaled by 1/sqrt(d)."""
    d = 2**n
    labels = tuple("".join(t) for t in itertools.product("IXYZ", repeat=n))[1:]
    gens = np.array([pauli_matrix(PauliString(s)) for s in labels]) / np.sqrt(d)
    gens.setflags(write=False)
    return BlochBasis(labels, gens)


def bloch_vector(rho: np.ndarray, basis: BlochBasis | None = None) -> np.ndarray:
    basis = basis or bloch_basis(int(np.log2(rho.shape[0])))
    return np.real(np.einsum("kij,ji->k", basis.generators, rho))


def density_from_bloch(a: np.ndarray, basis: BlochBasis) -> np.ndarray:
    d = basis.dim
    return np.eye(d) / d + np.einsum("k,kij->ij", a, basis.generators)


def probability_gradients(catalog: MubCatalog, basis: BlochBasis | None = None) -> np.ndarray:
    """d p[a, j] / d a_k = Tr(lambda_k Pi_aj), shape (d+1, d, d^2-1)."""
    basis = basis or bloch_basis(catalog.n)
    return np.real(np.einsum("kij,abji->abk", basis.generators, catalog.projectors))


def finite_difference_gradients(
    rho: np.ndarray, catalog: MubCatalog, step: float = 1e-4, basis: BlochBasis | None = None
) -> np.ndarray:
    """Central differences of the probability table along each Bloch coordinate."""
    basis = basis or bloch_basis(catalog.n)
    out = np.empty(catalog.projectors.shape[:2] + (len(basis.labels),))
    for k, lam in enumerate(basis.generators):
        plus = probability_table(rho + step * lam, catalog)
        minus = probability_table(rho - step * lam, catalog)
        out[..., k] = (plus - minus) / (2 * step)
    return out


def bloch_fisher(rho: np.ndarray, catalog: MubCatalog, total_copies: float) -> np.ndarray:
    """Fisher matrix in Bloch coordinates for ``total_copies`` spread over all bases."""
    p = probability_table(rho, catalog)
    nb = p.shape[0]
    low = np.argwhere(p <= MIN_PROBABILITY)
    if low.size:
        a, j = low[0]
        raise SingularFisherError(
            f"outcome (basis {a + 1}, vector {j + 1}) has probability {p[a, j]:.3g}; "
            "the Bloch-path Fisher matrix needs a full-rank state"
        )
    q = (p / nb).reshape(-1)
    dq = probability_gradients(catalog).reshape(q.size, -1) / nb
    return total_copies * (dq.T / q) @ dq


def bloch_crb_error(
    observable: np.ndarray, rho: np.ndarray, catalog: MubCatalog, total_copies: float
) -> float:
    """Cramer-Rao variance c^T F^{-1} c of Tr(rho Z), with c_k = Tr(lambda_k Z)."""
    basis = bloch_basis(catalog.n)
    c = np.real(np.einsum("kij,ji->k", basis.generators, np.asarray(observable)))
    if not np.any(c):
        return 0.0
    F = bloch_fisher(rho, catalog, total_copies)
    return float(c @ solve_checked(F, c))


@dataclass(frozen=True, eq=False)
class ShotRecord:
    counts: np.ndarray  # (d+1, d) integers
    shots: int

    def __post_init__(self):
        if np.any(self.counts.sum(axis=-1) != self.shots):
            raise ValueError("each basis row must sum to the number of shots")

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots


def _clean(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return p / p.sum(axis=-1, keepdims=True)


def simulate_experiment(rho: np.ndarray, catalog: MubCatalog, shots: int, rng) -> ShotRecord:
    """Independent multinomial(shots, p_a) counts for every basis."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    gen = as_generator(rng)
    p = _clean(probability_table(rho, catalog))
    return ShotRecord(gen.multinomial(shots, p), shots)


def simulate_estimates(
    p: np.ndarray, z: np.ndarray, shots: int, trials: int, rng
) -> np.ndarray:
    """Linear estimates sum_aj z_aj n_aj / shots over ``trials`` simulated experiments."""
    gen = as_generator(rng)
    p = _clean(np.asarray(p, dtype=float))
    counts = gen.multinomial(shots, p, size=(trials,) + p.shape[:-1])
    return np.einsum("tab,ab->t", counts, np.asarray(z, dtype=float)) / shots


def empirical_observable_variance(
    rho: np.ndarray, catalog: MubCatalog, z: np.ndarray, shots: int, trials: int, rng
) -> float:
    """Sample variance of the linear-inversion estimate of Tr(rho Z) over ``trials`` runs."""
    if trials < 2:
        raise ValueError("trials must be >= 2")
    est = simulate_estimates(probability_table(rho, catalog), z, shots, trials, rng)
    return float(np.var(est, ddof=1))
