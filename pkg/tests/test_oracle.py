import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubtomo import fisher, oracle
from mubtomo.catalog import load_catalog
from mubtomo.checks import full_rank_state, oracle_equivalence, random_observable
from mubtomo.linalg import jacobi_eigh
from mubtomo.states import RngStream, canonical_state, density, maximally_mixed, random_density_matrix

CAT = load_catalog("306")
D = 8


def test_bloch_basis_is_orthonormal_and_traceless():
    gens = oracle.bloch_basis(3).generators
    assert gens.shape == (63, D, D)
    np.testing.assert_allclose(np.einsum("kii->k", gens), 0, atol=1e-12)
    gram = np.einsum("kij,lji->kl", gens, gens)
    np.testing.assert_allclose(gram, np.eye(63), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_bloch_round_trip(seed):
    rho = random_density_matrix(D, RngStream(seed).generator())
    basis = oracle.bloch_basis(3)
    np.testing.assert_allclose(oracle.density_from_bloch(oracle.bloch_vector(rho), basis), rho, atol=1e-12)


@pytest.mark.parametrize("name", ["234", "090", "162", "306"])
def test_gradients_match_finite_differences(name):
    cat = load_catalog(name)
    rho = random_density_matrix(D, RngStream(3).generator())
    exact = oracle.probability_gradients(cat)
    approx = oracle.finite_difference_gradients(rho, cat, step=1e-4)
    assert np.max(np.abs(exact - approx)) <= 1e-6


def test_fisher_of_maximally_mixed_has_full_rank():
    F = oracle.bloch_fisher(maximally_mixed(), CAT, total_copies=9)
    np.testing.assert_allclose(F, F.T, atol=1e-12)
    w, _ = jacobi_eigh(F)
    assert np.all(w > 1e-9) and w.size == 63


def test_fisher_symmetric_for_random_full_rank_state():
    F = oracle.bloch_fisher(full_rank_state(RngStream(4).generator()), CAT, 9)
    assert np.max(np.abs(F - F.T)) <= 1e-12


def test_pure_state_is_singular():
    with pytest.raises(oracle.SingularFisherError, match="basis"):
        oracle.bloch_fisher(density(canonical_state("W")), CAT, 9)


def test_crb_examples():
    rho = full_rank_state(RngStream(5).generator())
    assert oracle.bloch_crb_error(np.eye(D), rho, CAT, 9) == 0
    Z = random_observable(D, RngStream(6).generator())
    a = oracle.bloch_crb_error(Z, rho, CAT, 9)
    assert oracle.bloch_crb_error(Z, rho, CAT, 90) == pytest.approx(a / 10, rel=1e-12)


def test_crb_equals_closed_form_for_n_copies():
    rho = full_rank_state(RngStream(7).generator())
    Z = random_observable(D, RngStream(8).generator())
    p = fisher.probability_table(rho, CAT)
    for n in (1, 5, 100):
        closed = fisher.observable_error(fisher.observable_coefficients(Z, CAT), p, copies=n)
        assert oracle.bloch_crb_error(Z, rho, CAT, 9 * n) == pytest.approx(closed, rel=1e-8)


def test_oracle_equivalence_small_run():
    result = oracle_equivalence(seed=1, n_states=5, n_observables=5, catalog=CAT)
    assert result.passed, result


def test_simulate_maximally_mixed_frequencies():
    rec = oracle.simulate_experiment(maximally_mixed(), CAT, 10**6, RngStream(9))
    sigma = np.sqrt((1 / 8) * (7 / 8) / 10**6)
    assert np.all(np.abs(rec.frequencies - 1 / 8) < 5 * sigma)
    assert np.all(rec.counts.sum(axis=1) == 10**6)


def test_simulate_deterministic_row():
    rec = oracle.simulate_experiment(CAT.projectors[2, 5], CAT, 1000, RngStream(10))
    assert rec.counts[2, 5] == 1000


def test_simulate_is_reproducible():
    rho = random_density_matrix(D, RngStream(11).generator())
    a = oracle.simulate_experiment(rho, CAT, 500, RngStream(12)).counts
    b = oracle.simulate_experiment(rho, CAT, 500, RngStream(12)).counts
    np.testing.assert_array_equal(a, b)


def test_shot_record_validation():
    with pytest.raises(ValueError, match="sum"):
        oracle.ShotRecord(np.ones((9, 8), dtype=int), shots=7)
    with pytest.raises(ValueError):
        oracle.simulate_experiment(maximally_mixed(), CAT, 0, RngStream(1))


def test_constant_coefficients_have_zero_empirical_variance():
    rho = full_rank_state(RngStream(13).generator())
    z = np.repeat(np.arange(9.0)[:, None], 8, axis=1)
    assert oracle.empirical_observable_variance(rho, CAT, z, 100, 50, RngStream(14)) == pytest.approx(0, abs=1e-24)


def test_empirical_variance_needs_two_trials():
    with pytest.raises(ValueError):
        oracle.empirical_observable_variance(maximally_mixed(), CAT, np.zeros((9, 8)), 10, 1, RngStream(1))


def test_empirical_variance_matches_analytic():
    rho = full_rank_state(RngStream(15).generator())
    z = fisher.observable_coefficients(random_observable(D, RngStream(16).generator()), CAT)
    trials = 4000
    analytic = fisher.observable_error(z, fisher.probability_table(rho, CAT), copies=200)
    emp = oracle.empirical_observable_variance(rho, CAT, z, 200, trials, RngStream(17))
    assert abs(emp - analytic) / analytic <= 2 * np.sqrt(2 / trials)
