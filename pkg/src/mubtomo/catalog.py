"""Complete sets of mutually unbiased bases for n qubits, built from Pauli tables.

Each row of a catalog file lists the d-1 non-identity elements of a maximal
abelian Pauli subgroup. The row's basis is the common eigenbasis of those
operators, obtained from n independent generators g_i as

    Pi_s = prod_i (I + s_i g_i) / 2,   s in {+1, -1}^n.

Catalog file grammar (UTF-8, line oriented)::

    file    := { line "\\n" }
    line    := blank | comment | header | row
    comment := ws* "#" any*
    header  := "class" ws+ NAME
    row     := "row" ws+ INT ws+ "label" ws+ ("1"|"2"|"3") ws* ":" ( ws+ TOKEN ){d-1}
    TOKEN   := ["-"] ("I"|"X"|"Y"|"Z"){n}

Exactly one header must precede the first row. Row indices must be 1..d+1 in
order. The label is the number of subsystems every basis vector factorizes
into (3 = fully separable, 2 = biseparable, 1 = nonseparable).
"""

from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources

import numpy as np

from .pauli import (
    PauliParseError,
    PauliString,
    commutes,
    independent_subset,
    pauli_matrix,
    real_product,
)

CATALOG_NAMES = ("234", "090", "162", "306")
CATALOG_FILES = {name: f"mub_{name}.txt" for name in CATALOG_NAMES}

PURITY_TOL = 1e-9
PROJECTOR_TOL = 1e-12


class CatalogParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class RowValidationError(ValueError):
    def __init__(self, row_index: int | None, problems: list[str]):
        where = f"row {row_index}" if row_index is not None else "row"
        super().__init__(f"{where} is not a maximal abelian Pauli set: " + "; ".join(problems))
        self.problems = problems


class StructuralError(ValueError):
    """A row does not contain n independent generators."""


class UnsupportedClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class MubRow:
    operators: tuple[PauliString, ...]
    declared_label: int
    index: int | None = None

    @property
    def n(self) -> int:
        return self.operators[0].n

    @property
    def dim(self) -> int:
        return 2**self.n


@dataclass(frozen=True, eq=False)
class MubBasis:
    projectors: np.ndarray  # (d, d, d), projectors[j] = Pi_j
    generators: tuple[PauliString, ...]
    label: int
    row: MubRow | None = None

    @property
    def dim(self) -> int:
        return self.projectors.shape[-1]

    def vectors(self) -> np.ndarray:
        """Unit eigenvectors, one per row, with a real non-negative largest component."""
        out = []
        for proj in self.projectors:
            col = proj[:, np.argmax(np.real(np.diag(proj)))]
            v = col / np.linalg.norm(col)
            k = np.argmax(np.abs(v))
            out.append(v * (abs(v[k]) / v[k]))
        return np.array(out)


@dataclass(frozen=True, eq=False)
class MubCatalog:
    name: str
    rows: tuple[MubRow, ...]
    bases: tuple[MubBasis, ...] = ()
    signature: tuple[int, int, int] | None = None
    _stack: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.rows[0].n

    @property
    def dim(self) -> int:
        return 2**self.n

    @property
    def projectors(self) -> np.ndarray:
        """All projectors as an array of shape (d+1, d, d, d)."""
        if self._stack is None:
            raise ValueError(f"catalog {self.name!r} has not been built")
        return self._stack


_HEADER = re.compile(r"class\s+(\S+)\s*$")
_ROW = re.compile(r"row\s+(\S+)\s+label\s+(\S+)\s*:")


def parse_catalog(text: str) -> MubCatalog:
    """Parse catalog text into an unbuilt :class:`MubCatalog` (rows only)."""
    name = None
    rows: list[MubRow] = []
    expected_ops = None
    n_qubits = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.lstrip()
        indent = len(line) - len(stripped)
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("class"):
            m = _HEADER.match(stripped)
            if not m:
                raise CatalogParseError("malformed header, expected 'class <name>'", lineno, indent + 1)
            if name is not None:
                raise CatalogParseError("duplicate class header", lineno, indent + 1)
            name = m.group(1)
            continue
        if not stripped.startswith("row"):
            raise CatalogParseError(f"unexpected text {stripped.split()[0]!r}", lineno, indent + 1)
        if name is None:
            raise CatalogParseError("row before 'class' header", lineno, indent + 1)
        m = _ROW.match(stripped)
        if not m:
            col = indent + 1
            if "label" not in stripped:
                raise CatalogParseError("missing label", lineno, col)
            raise CatalogParseError("malformed row, expected 'row <i> label <l> :'", lineno, col)
        idx_txt, label_txt = m.group(1), m.group(2)
        if not idx_txt.isdigit():
            raise CatalogParseError(f"row index {idx_txt!r} is not an integer", lineno, indent + m.start(1) + 1)
        if label_txt not in ("1", "2", "3"):
            raise CatalogParseError(f"label must be 1, 2 or 3, got {label_txt!r}", lineno, indent + m.start(2) + 1)
        index = int(idx_txt)
        if index != len(rows) + 1:
            raise CatalogParseError(f"expected row {len(rows) + 1}, got {index}", lineno, indent + m.start(1) + 1)

        ops = []
        for tok in re.finditer(r"\S+", stripped[m.end():]):
            col = indent + m.end() + tok.start() + 1
            try:
                p = PauliString.parse(tok.group())
            except PauliParseError:
                body = tok.group().lstrip("-")
                bad = next(i for i, c in enumerate(body) if c not in "IXYZ") if body else 0
                offset = len(tok.group()) - len(body) + bad
                raise CatalogParseError(
                    f"invalid Pauli token {tok.group()!r}", lineno, col + offset
                ) from None
            if n_qubits is None:
                n_qubits = p.n
                expected_ops = 2**n_qubits - 1
            elif p.n != n_qubits:
                raise CatalogParseError(f"token {tok.group()!r} has {p.n} qubits, expected {n_qubits}", lineno, col)
            ops.append(p)
        if expected_ops is None or len(ops) != expected_ops:
            raise CatalogParseError(
                f"expected {expected_ops if expected_ops else 'd-1'} operators, found {len(ops)}",
                lineno,
                len(line) + 1,
            )
        rows.append(MubRow(tuple(ops), int(label_txt), index))
    if name is None:
        raise CatalogParseError("missing 'class' header", 1, 1)
    if not rows:
        raise CatalogParseError("catalog has no rows", 1, 1)
    d = 2**n_qubits
    if len(rows) != d + 1:
        raise CatalogParseError(f"expected {d + 1} rows, found {len(rows)}", lineno, 1)
    return MubCatalog(name=name, rows=tuple(rows))


@dataclass(frozen=True)
class RowReport:
    index: int | None
    pairs_checked: int
    products_checked: int


def validate_row(row: MubRow) -> RowReport:
    """Check commutation, distinctness and group closure of a row.

    Raises :class:`RowValidationError` listing every offending pair.
    """
    ops = row.operators
    problems = []
    if len(ops) != row.dim - 1:
        problems.append(f"expected {row.dim - 1} operators, found {len(ops)}")
    letters = [p.letters for p in ops]
    for p in ops:
        if p.is_identity:
            problems.append(f"{p} is the identity")
    seen = set()
    for p in letters:
        if p in seen:
            problems.append(f"duplicate operator {p}")
        seen.add(p)
    members = set(letters) | {"I" * row.n}
    pairs = products = 0
    for a, b in itertools.combinations(ops, 2):
        pairs += 1
        if not commutes(a, b):
            problems.append(f"{a} and {b} anticommute")
            continue
        if a.letters == b.letters:
            continue
        products += 1
        prod = real_product(a, b)
        if prod.letters not in members:
            problems.append(f"{a}*{b} = {prod} is not in the row")
    if problems:
        raise RowValidationError(row.index, problems)
    return RowReport(row.index, pairs, products)


def build_basis(row: MubRow, pivot: str = "first") -> MubBasis:
    """Common eigenbasis of a validated row via stabilizer sign patterns.

    Projector j corresponds to the sign pattern whose n-bit binary expansion
    (first generator = most significant bit) has bit 0 for s_i = +1.
    """
    gens = independent_subset(row.operators, order=pivot)
    n = row.n
    if len(gens) < n:
        raise StructuralError(
            f"row {row.index} has only {len(gens)} independent generators, need {n}"
        )
    gens = gens[:n]
    d = 2**n
    ident = np.eye(d, dtype=complex)
    mats = [pauli_matrix(g) for g in gens]
    projs = np.empty((d, d, d), dtype=complex)
    for j, bits in enumerate(itertools.product((0, 1), repeat=n)):
        proj = ident
        for bit, m in zip(bits, mats):
            proj = proj @ ((ident + (1 - 2 * bit) * m) / 2)
        projs[j] = proj
    projs.setflags(write=False)
    return MubBasis(projectors=projs, generators=tuple(gens), label=row.declared_label, row=row)


def projector_residuals(basis: MubBasis) -> dict[str, float]:
    """Max deviations from the projector-basis invariants (0 for an exact basis)."""
    P = basis.projectors
    d = basis.dim
    herm = np.max(np.abs(P - np.conj(np.transpose(P, (0, 2, 1)))))
    idem = np.max(np.abs(P @ P - P))
    rank1 = np.max(np.abs(np.real(np.trace(P, axis1=1, axis2=2)) - 1))
    cross = 0.0
    for i, j in itertools.combinations(range(d), 2):
        cross = max(cross, np.max(np.abs(P[i] @ P[j])))
    complete = np.max(np.abs(P.sum(axis=0) - np.eye(d)))
    eig = 0.0
    if basis.row is not None:
        for op in basis.row.operators:
            m = pauli_matrix(op)
            for proj in P:
                mp = m @ proj
                eig = max(eig, min(np.max(np.abs(mp - proj)), np.max(np.abs(mp + proj))))
    return {
        "hermitian": float(herm),
        "idempotent": float(idem),
        "rank_one": float(rank1),
        "orthogonal": float(cross),
        "complete": float(complete),
        "eigen": float(eig),
    }


def verify_unbiasedness(catalog: MubCatalog) -> float:
    """Max |Tr(Pi_aj Pi_bk) - (delta_ab delta_jk + (1 - delta_ab)/d)| over all pairs."""
    P = catalog.projectors
    nb, d = P.shape[0], P.shape[1]
    flat = P.reshape(nb * d, d * d)
    # Tr(A B) = sum_ij A_ij B_ji; projectors are Hermitian so B_ji = conj(B_ij)
    gram = np.real(flat @ flat.conj().T)
    block = np.kron(np.eye(nb), np.ones((d, d)))
    target = np.eye(nb * d) + (1 - block) / d
    return float(np.max(np.abs(gram - target)))


def marginal_purities(psi: np.ndarray) -> np.ndarray:
    """Tr(rho_i^2) of every single-qubit reduced state of a pure n-qubit vector."""
    psi = np.asarray(psi, dtype=complex)
    n = int(round(np.log2(psi.size)))
    if 2**n != psi.size:
        raise ValueError(f"vector length {psi.size} is not a power of two")
    t = psi.reshape((2,) * n)
    out = np.empty(n)
    for i in range(n):
        m = np.moveaxis(t, i, 0).reshape(2, -1)
        r = m @ m.conj().T
        out[i] = np.real(np.trace(r @ r))
    return out


def classify_vector(psi: np.ndarray, tol: float = PURITY_TOL) -> int:
    """Entanglement class of a three-qubit vector: 3 product, 2 biseparable, 1 genuinely entangled.

    For other qubit counts use :func:`marginal_purities` directly.
    """
    pur = marginal_purities(psi)
    if pur.size != 3:
        raise UnsupportedClassificationError(f"classification is defined for 3 qubits, got {pur.size}")
    pure = int(np.sum(pur >= 1 - tol))
    if pure == 3:
        return 3
    if pure == 1:
        return 2
    if pure == 0:
        return 1
    # two pure marginals of a pure state force the third to be pure
    raise AssertionError(f"inconsistent marginal purities {pur}")


def classify_basis(basis: MubBasis, tol: float = PURITY_TOL) -> int:
    if basis.dim != 8:
        raise UnsupportedClassificationError(
            f"basis classification needs 3 qubits, basis has dimension {basis.dim}"
        )
    labels = {classify_vector(v, tol) for v in basis.vectors()}
    if len(labels) > 1:
        warnings.warn(f"basis vectors fall into mixed classes {sorted(labels)}", stacklevel=2)
    return min(labels)


def signature(catalog: MubCatalog) -> tuple[int, int, int]:
    """(separable, biseparable, nonseparable) basis counts."""
    labels = [classify_basis(b) for b in catalog.bases]
    return (labels.count(3), labels.count(2), labels.count(1))


def build_catalog(catalog: MubCatalog, pivot: str = "first") -> MubCatalog:
    """Validate every row and build its basis; returns a new, built catalog."""
    for row in catalog.rows:
        validate_row(row)
    bases = tuple(build_basis(row, pivot=pivot) for row in catalog.rows)
    stack = np.stack([b.projectors for b in bases])
    stack.setflags(write=False)
    built = replace(catalog, bases=bases, _stack=stack)
    sig = signature(built) if catalog.n == 3 else None
    return replace(built, signature=sig)


def catalog_text(name: str) -> str:
    if name not in CATALOG_FILES:
        raise KeyError(f"unknown catalog {name!r}; choose from {', '.join(CATALOG_NAMES)}")
    return resources.files("mubtomo").joinpath("data", CATALOG_FILES[name]).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_catalog(name: str) -> MubCatalog:
    """Parse, validate and build one of the shipped three-qubit catalogs."""
    return build_catalog(parse_catalog(catalog_text(name)))


def expected_signature(name: str) -> tuple[int, int, int]:
    """The class signature encoded in a shipped catalog's name, e.g. '162' -> (1, 6, 2)."""
    return tuple(int(c) for c in name)  # type: ignore[return-value]


def catalog_from_projectors(name: str, projectors: np.ndarray) -> MubCatalog:
    """Wrap an arbitrary (d+1, d, d, d) projector stack, e.g. for negative tests."""
    stack = np.array(projectors, dtype=complex)
    stack.setflags(write=False)
    n = int(round(np.log2(stack.shape[-1])))
    dummy = MubRow((PauliString.identity(n),), 1)
    return MubCatalog(name=name, rows=(dummy,), _stack=stack)
