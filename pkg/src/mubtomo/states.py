"""Three-qubit state ensembles and state utilities."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .catalog import marginal_purities

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream addressed by ``(seed, stream, substream)``.

    Backed by the counter-based Philox generator: the 128-bit key is
    ``seed || stream`` and substreams start 2**128 counter steps apart, so
    draws depend only on the address and never on scheduling.
    """

    seed: int
    stream: int = 0
    substream: int = 0

    def generator(self) -> np.random.Generator:
        key = ((self.seed & _MASK64) << 64) | (self.stream & _MASK64)
        bitgen = np.random.Philox(key=key)
        if self.substream:
            bitgen = bitgen.advance(self.substream << 128)
        return np.random.Generator(bitgen)

    def sub(self, substream: int) -> RngStream:
        return RngStream(self.seed, self.stream, substream)


def as_generator(rng: RngStream | np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class StateFamily(str, enum.Enum):
    GHZ = "GHZ"
    W = "W"
    BIPARTITE = "BIPARTITE"
    SEPARABLE = "SEPARABLE"

    @classmethod
    def parse(cls, name: str) -> StateFamily:
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ValueError(
                f"unknown state family {name!r}; choose from {', '.join(f.value for f in cls)}"
            ) from None


FAMILY_CODES = {f: i for i, f in enumerate(StateFamily)}


def canonical_state(family: StateFamily | str) -> np.ndarray:
    family = StateFamily(family)
    psi = np.zeros(8, dtype=complex)
    if family is StateFamily.GHZ:
        psi[[0b000, 0b111]] = 1 / np.sqrt(2)
    elif family is StateFamily.W:
        psi[[0b001, 0b010, 0b100]] = 1 / np.sqrt(3)
    elif family is StateFamily.BIPARTITE:
        psi[[0b000, 0b110]] = 1 / np.sqrt(2)
    else:
        psi[0b000] = 1.0
    return psi


def haar_unitary(dim: int, rng) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with the R-diagonal phases removed."""
    gen = as_generator(rng)
    g = (gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_state(dim: int, rng) -> np.ndarray:
    gen = as_generator(rng)
    v = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return v / np.linalg.norm(v)


def local_unitaries(rng, n: int = 3) -> list[np.ndarray]:
    gen = as_generator(rng)
    return [haar_unitary(2, gen) for _ in range(n)]


def apply_local(unitaries: list[np.ndarray], psi: np.ndarray) -> np.ndarray:
    u = unitaries[0]
    for v in unitaries[1:]:
        u = np.kron(u, v)
    return u @ psi


def _embed_pair(pair: np.ndarray, single: np.ndarray, single_qubit: int) -> np.ndarray:
    """Three-qubit vector with ``single`` on ``single_qubit`` (0-based) and ``pair`` on the rest."""
    t = np.kron(pair, single).reshape(2, 2, 2)
    return np.moveaxis(t, 2, single_qubit).reshape(8)


def random_pure_state(
    family: StateFamily | str, rng, single_qubit: int | None = None
) -> np.ndarray:
    """Random pure state vector from one of the four class-preserving ensembles.

    GHZ and W: the canonical vector under a Haar-random U1 x U2 x U3.
    BIPARTITE: a Haar-random two-qubit vector on a uniformly chosen pair,
    times a Haar-random qubit (``single_qubit`` pins which qubit factors out).
    SEPARABLE: a product of three Haar-random qubits.
    """
    family = StateFamily(family)
    gen = as_generator(rng)
    if family in (StateFamily.GHZ, StateFamily.W):
        return apply_local(local_unitaries(gen), canonical_state(family))
    if family is StateFamily.BIPARTITE:
        k = int(gen.integers(3)) if single_qubit is None else single_qubit
        pair = haar_state(4, gen)
        single = haar_state(2, gen)
        return _embed_pair(pair, single, k)
    a, b, c = (haar_state(2, gen) for _ in range(3))
    return np.kron(np.kron(a, b), c)


def random_state(family: StateFamily | str, rng, single_qubit: int | None = None) -> np.ndarray:
    """Density matrix of :func:`random_pure_state`."""
    psi = random_pure_state(family, rng, single_qubit)
    return np.outer(psi, psi.conj())


def density(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed(dim: int = 8) -> np.ndarray:
    return np.eye(dim, dtype=complex) / dim


def mix_with_identity(rho: np.ndarray, weight: float) -> np.ndarray:
    """(1 - weight) * rho + weight * I/d."""
    d = rho.shape[0]
    return (1 - weight) * rho + weight * np.eye(d) / d


def check_density_matrix(rho: np.ndarray, herm_tol=1e-12, trace_tol=1e-12, eig_tol=1e-10) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValueError(f"density matrix has trace {np.trace(rho).real:.3g}")
    if np.min(np.linalg.eigvalsh(rho)) < -eig_tol:
        raise ValueError("density matrix is not positive semidefinite")


def fidelity(rho: np.ndarray, psi: np.ndarray) -> float:
    """<psi|rho|psi>, clamped to [0, 1]."""
    rho = np.asarray(rho)
    psi = np.asarray(psi)
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: rho {rho.shape}, psi {psi.shape}")
    f = float(np.real(np.vdot(psi, rho @ psi)))
    if f < -1e-12 or f > 1 + 1e-12:
        raise ValueError(f"fidelity {f} outside [0, 1]; is rho a density matrix?")
    return min(max(f, 0.0), 1.0)


def single_qubit_purities(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.size != 8:
        raise ValueError(f"expected a three-qubit vector of length 8, got {psi.size}")
    return marginal_purities(psi)


def random_density_matrix(dim: int, rng, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble mixed state; used by tests that need varied purity."""
    gen = as_generator(rng)
    rank = dim if rank is None else rank
    g = gen.standard_normal((dim, rank)) + 1j * gen.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
