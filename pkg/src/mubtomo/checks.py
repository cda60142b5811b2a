"""Cross-check suites comparing the closed-form errors with independent routes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fisher, oracle
from .catalog import MubCatalog, load_catalog
from .states import (
    RngStream,
    as_generator,
    canonical_state,
    density,
    haar_state,
    mix_with_identity,
    random_pure_state,
)

MIX_WEIGHT = 0.1


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def random_observable(dim: int, rng) -> np.ndarray:
    gen = as_generator(rng)
    g = gen.standard_normal((dim, dim)) + 1j * gen.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def full_rank_state(rng, dim: int = 8, weight: float = MIX_WEIGHT) -> np.ndarray:
    """(1 - weight) |psi><psi| + weight I/d with Haar-random psi."""
    return mix_with_identity(density(haar_state(dim, rng)), weight)


def oracle_equivalence(
    seed: int, n_states: int = 50, n_observables: int = 20, catalog: MubCatalog | None = None
) -> CheckResult:
    """Max relative gap between the probability-representation error (N = 1 per basis)
    and the Bloch-path Cramer-Rao bound (d+1 total copies)."""
    catalog = catalog or load_catalog("234")
    nb = catalog.dim + 1
    worst = 0.0
    for i in range(n_states):
        gen = RngStream(seed, i).generator()
        rho = full_rank_state(gen, catalog.dim)
        p = fisher.probability_table(rho, catalog)
        for _ in range(n_observables):
            Z = random_observable(catalog.dim, gen)
            closed = fisher.observable_error(fisher.observable_coefficients(Z, catalog), p, copies=1)
            bloch = oracle.bloch_crb_error(Z, rho, catalog, total_copies=nb)
            worst = max(worst, abs(closed - bloch) / abs(bloch))
    tol = 1e-8
    return CheckResult(
        "oracle_equivalence", worst, tol, worst <= tol, f"{n_states} states x {n_observables} observables"
    )


def monte_carlo_pair(seed: int, index: int, shots: int, trials: int, catalog: MubCatalog):
    """(analytic, empirical) variance for one random (state, observable) pair."""
    state_gen = RngStream(seed, index, 0).generator()
    rho = full_rank_state(state_gen, catalog.dim)
    z = fisher.observable_coefficients(random_observable(catalog.dim, state_gen), catalog)
    p = fisher.probability_table(rho, catalog)
    analytic = fisher.observable_error(z, p, copies=shots)
    empirical = oracle.empirical_observable_variance(rho, catalog, z, shots, trials, RngStream(seed, index, 1))
    return analytic, empirical


def monte_carlo_consistency(
    seed: int, pairs: int = 10, shots: int = 10_000, trials: int = 10_000, rel_tol: float = 0.03,
    catalog: MubCatalog | None = None,
) -> list[CheckResult]:
    catalog = catalog or load_catalog("234")
    out = []
    for i in range(pairs):
        analytic, empirical = monte_carlo_pair(seed, i, shots, trials, catalog)
        rel = abs(empirical - analytic) / analytic
        out.append(
            CheckResult(
                f"monte_carlo_pair_{i}", rel, rel_tol, rel <= rel_tol,
                f"analytic={analytic:.6g} empirical={empirical:.6g}",
            )
        )
    return out


def shot_scaling_slope(
    seed: int, shots=(100, 1_000, 10_000), trials: int = 10_000, catalog: MubCatalog | None = None
) -> float:
    """Log-log slope of the empirical fidelity-estimate variance against shots.

    Uses a local-unitary rotated GHZ state: the canonical GHZ vector is a
    stabilizer state whose fidelity estimate has zero variance in every
    stabilizer MUB.
    """
    catalog = catalog or load_catalog("090")
    rho = density(random_pure_state("GHZ", RngStream(seed, 999).generator()))
    p = fisher.probability_table(rho, catalog)
    z = fisher.fidelity_coefficients(p)
    var = [
        oracle.empirical_observable_variance(rho, catalog, z, n, trials, RngStream(seed, 1000 + k))
        for k, n in enumerate(shots)
    ]
    slope, _ = np.polyfit(np.log(shots), np.log(var), 1)
    return float(slope)


def fidelity_mc_check(
    name: str, psi: np.ndarray, catalog: MubCatalog, shots: int, trials: int, rng, rel_tol: float = 0.03
) -> CheckResult:
    rho = density(psi)
    p = fisher.probability_table(rho, catalog)
    analytic = fisher.fidelity_error(p, copies=shots)
    emp = oracle.empirical_observable_variance(rho, catalog, fisher.fidelity_coefficients(p), shots, trials, rng)
    detail = f"analytic={analytic:.6g} empirical={emp:.6g}"
    if analytic <= 1e-15:
        # deterministic estimator: every simulated estimate is identical
        return CheckResult(name, abs(emp - analytic), 1e-15, abs(emp - analytic) <= 1e-15, detail)
    rel = abs(emp - analytic) / analytic
    return CheckResult(name, rel, rel_tol, rel <= rel_tol, detail)


def mc_tolerance(trials: int) -> float:
    """Relative tolerance for sample variances: 3%, widened to 2 sqrt(2/T) for small T."""
    return max(0.03, 2 * np.sqrt(2 / trials))


def run_crosscheck(seed: int, shots: int, trials: int) -> list[CheckResult]:
    tol = mc_tolerance(trials)
    results = [oracle_equivalence(seed)]
    results += monte_carlo_consistency(seed, shots=shots, trials=trials, rel_tol=tol)
    slope = shot_scaling_slope(seed, trials=trials)
    results.append(CheckResult("shot_scaling_slope", slope, 0.05, abs(slope + 1) <= 0.05, "expected -1"))
    for k, name in enumerate(("090", "306")):
        cat = load_catalog(name)
        stream = 2000 + 10 * k
        results.append(fidelity_mc_check(
            f"canonical_ghz_fidelity_{name}", canonical_state("GHZ"), cat, shots, trials, RngStream(seed, stream), tol
        ))
        results.append(fidelity_mc_check(
            f"canonical_w_fidelity_{name}", canonical_state("W"), cat, shots, trials, RngStream(seed, stream + 1), tol
        ))
        psi = random_pure_state("GHZ", RngStream(seed, stream + 2).generator())
        results.append(fidelity_mc_check(
            f"random_ghz_fidelity_{name}", psi, cat, shots, trials, RngStream(seed, stream + 3), tol
        ))
    return results
