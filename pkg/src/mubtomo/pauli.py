"""Signed n-qubit Pauli strings.

Letters are ordered left to right as qubit 1, 2, ..., n; qubit 1 is the most
significant bit of a computational-basis index, so ``pauli_matrix("ZII")`` is
``kron(Z, I, I)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

LETTERS = "IXYZ"

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (power of i, letter) with sigma_a sigma_b = i^k sigma_c
_LETTER_PRODUCT = {
    ("I", "I"): (0, "I"), ("I", "X"): (0, "X"), ("I", "Y"): (0, "Y"), ("I", "Z"): (0, "Z"),
    ("X", "I"): (0, "X"), ("X", "X"): (0, "I"), ("X", "Y"): (1, "Z"), ("X", "Z"): (3, "Y"),
    ("Y", "I"): (0, "Y"), ("Y", "X"): (3, "Z"), ("Y", "Y"): (0, "I"), ("Y", "Z"): (1, "X"),
    ("Z", "I"): (0, "Z"), ("Z", "X"): (1, "Y"), ("Z", "Y"): (3, "X"), ("Z", "Z"): (0, "I"),
}

PHASES = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


class PauliParseError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    letters: str
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        bad = [c for c in self.letters if c not in LETTERS]
        if bad or not self.letters:
            raise PauliParseError(f"invalid Pauli letters {self.letters!r}")

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @classmethod
    def parse(cls, token: str) -> PauliString:
        """Parse ``"ZIZ"`` or ``"-XYZ"``; the inverse of ``str()``."""
        sign = 1
        body = token
        if token.startswith("-"):
            sign, body = -1, token[1:]
        for col, c in enumerate(body):
            if c not in LETTERS:
                raise PauliParseError(
                    f"invalid Pauli letter {c!r} at offset {col + len(token) - len(body)} in {token!r}"
                )
        if not body:
            raise PauliParseError(f"empty Pauli token {token!r}")
        return cls(body, sign)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls("I" * n)

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + self.letters

    def __neg__(self) -> PauliString:
        return PauliString(self.letters, -self.sign)

    def unsigned(self) -> PauliString:
        return PauliString(self.letters)


@dataclass(frozen=True)
class SymplecticVector:
    """X and Z bit vectors of a Pauli string over GF(2); the sign is dropped."""

    x: tuple[int, ...]
    z: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.x)

    def as_array(self) -> np.ndarray:
        return np.array(self.x + self.z, dtype=np.uint8)


def as_pauli(p: PauliString | str) -> PauliString:
    return p if isinstance(p, PauliString) else PauliString.parse(p)


def _check_sizes(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"{a} acts on {a.n} qubits, {b} on {b.n}")


def pauli_mul(a: PauliString | str, b: PauliString | str) -> tuple[complex, PauliString]:
    """Return ``(phase, product)`` with ``matrix(a) @ matrix(b) == phase * matrix(product)``.

    The phase is one of 1, 1j, -1, -1j and is accumulated as an integer power
    of i; the signs of ``a`` and ``b`` are folded into ``product.sign``.
    """
    a, b = as_pauli(a), as_pauli(b)
    _check_sizes(a, b)
    power = 0
    letters = []
    for la, lb in zip(a.letters, b.letters):
        k, c = _LETTER_PRODUCT[la, lb]
        power += k
        letters.append(c)
    return PHASES[power % 4], PauliString("".join(letters), a.sign * b.sign)


def symplectic_product(a: PauliString | str, b: PauliString | str) -> int:
    a, b = as_pauli(a), as_pauli(b)
    _check_sizes(a, b)
    va, vb = to_symplectic(a), to_symplectic(b)
    s = sum(xa & zb for xa, zb in zip(va.x, vb.z)) + sum(za & xb for za, xb in zip(va.z, vb.x))
    return s % 2


def commutes(a: PauliString | str, b: PauliString | str) -> bool:
    return symplectic_product(a, b) == 0


def real_product(a: PauliString | str, b: PauliString | str) -> PauliString:
    """Product of two commuting strings, with the real phase folded into the sign."""
    phase, prod = pauli_mul(a, b)
    if phase not in (1, -1):
        raise ValueError(f"{a} and {b} anticommute; their product is not Hermitian")
    return prod if phase == 1 else -prod


def to_symplectic(p: PauliString | str) -> SymplecticVector:
    p = as_pauli(p)
    x = tuple(int(c in "XY") for c in p.letters)
    z = tuple(int(c in "ZY") for c in p.letters)
    return SymplecticVector(x, z)


def from_symplectic(v: SymplecticVector, sign: int = 1) -> PauliString:
    table = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
    return PauliString("".join(table[xi, zi] for xi, zi in zip(v.x, v.z)), sign)


def pauli_matrix(p: PauliString | str) -> np.ndarray:
    p = as_pauli(p)
    m = reduce(np.kron, (_SINGLE[c] for c in p.letters))
    return p.sign * m


def independent_subset(
    strings: Sequence[PauliString | str], order: str = "first"
) -> list[PauliString]:
    """Select a GF(2)-independent subset by greedy Gaussian elimination.

    ``order="first"`` keeps the earliest independent strings, ``"last"`` scans
    from the end.
    """
    if order not in ("first", "last"):
        raise ValueError(f"unknown pivot order {order!r}")
    items = [as_pauli(s) for s in strings]
    if order == "last":
        items = items[::-1]
    # reduced rows keyed by pivot column
    pivots: dict[int, np.ndarray] = {}
    chosen = []
    for p in items:
        v = to_symplectic(p).as_array()
        for col, row in pivots.items():
            if v[col]:
                v ^= row
        nz = np.flatnonzero(v)
        if nz.size == 0:
            continue
        col = int(nz[0])
        for c, row in pivots.items():
            if row[col]:
                pivots[c] = row ^ v
        pivots[col] = v
        chosen.append(p)
    return chosen


def gf2_rank(strings: Iterable[PauliString | str]) -> int:
    return len(independent_subset(list(strings)))
