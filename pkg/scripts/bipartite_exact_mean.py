#!/usr/bin/env python3
"""Exact ensemble mean of the fidelity error for BIPARTITE random states.

For a pure state the per-basis fidelity error (N = 1) is

    sum_j p_j^3 - (sum_j p_j^2)^2,

so its ensemble mean needs the third and fourth moments E[rho^{(x)k}].
For a Haar vector in dimension m, E[(|v><v|)^{(x)k}] is the normalized
projector onto the symmetric subspace of (C^m)^{(x)k}. The BIPARTITE
ensemble is a Haar pair (m = 4) times a Haar qubit (m = 2), so its moments
are tensor products of two such projectors, reordered into three-qubit
copies. No sampling is involved.

Usage: python scripts/bipartite_exact_mean.py [--catalogs 090,306] [--mc 20000]
Building the fourth moment (4096 x 4096) dominates; expect well under a minute per catalog.
"""

from __future__ import annotations

import argparse
import itertools
from fractions import Fraction
from math import comb, factorial

import numpy as np

from mubtomo import fisher
from mubtomo.catalog import CATALOG_NAMES, load_catalog
from mubtomo.states import RngStream, random_pure_state


def symmetric_projector(dim: int, k: int) -> np.ndarray:
    size = dim**k
    out = np.zeros((size, size))
    shape = (dim,) * k
    for perm in itertools.permutations(range(k)):
        for idx in itertools.product(range(dim), repeat=k):
            src = np.ravel_multi_index(idx, shape)
            dst = np.ravel_multi_index(tuple(idx[p] for p in perm), shape)
            out[dst, src] += 1
    return out / factorial(k)


def qubit_permutation(single_qubit: int) -> np.ndarray:
    """Maps |pair, single> (single last) to the three-qubit order with the single on ``single_qubit``."""
    q = np.zeros((8, 8))
    for bits in itertools.product((0, 1), repeat=3):
        actual = list(bits[:2])
        actual.insert(single_qubit, bits[2])
        q[np.ravel_multi_index(actual, (2, 2, 2)), np.ravel_multi_index(bits, (2, 2, 2))] = 1
    return q


def ensemble_moment(k: int, single_qubit: int) -> np.ndarray:
    """E[rho^{(x)k}] on (C^8)^{(x)k}, copy-major ordering."""
    pair = symmetric_projector(4, k) / comb(4 + k - 1, k)
    single = symmetric_projector(2, k) / comb(2 + k - 1, k)
    m = np.kron(pair, single)
    # axes (pair_1..pair_k, single_1..single_k) -> (pair_1, single_1, ..., pair_k, single_k)
    order = [x for i in range(k) for x in (i, k + i)]
    t = m.reshape((4,) * k + (2,) * k + (4,) * k + (2,) * k)
    m = t.transpose(order + [2 * k + o for o in order]).reshape(8**k, 8**k)
    q = qubit_permutation(single_qubit)
    qk = q
    for _ in range(k - 1):
        qk = np.kron(qk, q)
    return qk @ m @ qk.T


def mean_fidelity_error(projectors: np.ndarray, m3: np.ndarray, m4: np.ndarray) -> float:
    third = 0.0
    fourth = 0.0
    for basis in projectors:
        for p in basis:
            third += np.einsum("ij,ji->", np.kron(np.kron(p, p), p), m3).real
        b = sum(np.kron(p, p) for p in basis)
        fourth += np.einsum("ij,ji->", np.kron(b, b), m4).real
    return float(third - fourth)


def monte_carlo_mean(name: str, trials: int, seed: int) -> tuple[float, float]:
    psis = np.array([random_pure_state("BIPARTITE", RngStream(seed, i).generator()) for i in range(trials)])
    e = fisher.fidelity_errors(fisher.probability_tables(psis, load_catalog(name)))
    return float(e.mean()), float(e.std(ddof=1) / np.sqrt(trials))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--catalogs", default=",".join(CATALOG_NAMES))
    ap.add_argument("--mc", type=int, default=0, help="also report a Monte Carlo mean over this many states")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    moments = {s: (ensemble_moment(3, s), ensemble_moment(4, s)) for s in range(3)}
    for name in args.catalogs.split(","):
        P = load_catalog(name).projectors
        per_partition = [mean_fidelity_error(P, *moments[s]) for s in range(3)]
        mean = float(np.mean(per_partition))
        frac = Fraction(mean).limit_denominator(10_000)
        line = f"{name}: " + " ".join(f"{v:.13f}" for v in per_partition) + f"  mean {mean:.13f} ~ {frac}"
        if args.mc:
            mc, se = monte_carlo_mean(name, args.mc, args.seed)
            line += f"  (MC {mc:.5f} +/- {se:.5f})"
        print(line)


if __name__ == "__main__":
    main()
