import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mubtomo.states import (
    RngStream,
    StateFamily,
    canonical_state,
    check_density_matrix,
    density,
    fidelity,
    haar_unitary,
    maximally_mixed,
    random_density_matrix,
    random_pure_state,
    random_state,
    single_qubit_purities,
)


def test_canonical_states_are_normalized():
    for fam in StateFamily:
        assert np.linalg.norm(canonical_state(fam)) == pytest.approx(1, abs=1e-15)


def test_canonical_bipartite_layout():
    psi = canonical_state("BIPARTITE")
    expected = np.kron(np.array([1, 0, 0, 1]) / np.sqrt(2), [1, 0])
    np.testing.assert_allclose(psi, expected)


@pytest.mark.parametrize(
    "family, purities",
    [("GHZ", [0.5] * 3), ("W", [5 / 9] * 3), ("SEPARABLE", [1] * 3), ("BIPARTITE", [0.5, 0.5, 1])],
)
def test_canonical_marginal_purities(family, purities):
    np.testing.assert_allclose(single_qubit_purities(canonical_state(family)), purities, atol=1e-12)


def test_fidelity_examples():
    ghz = canonical_state("GHZ")
    w = canonical_state("W")
    assert fidelity(density(ghz), ghz) == pytest.approx(1)
    assert fidelity(maximally_mixed(), w) == pytest.approx(1 / 8)
    assert fidelity(density(canonical_state("SEPARABLE")), w) == 0


def test_fidelity_rejects_non_state():
    with pytest.raises(ValueError):
        fidelity(2 * np.eye(8), canonical_state("GHZ"))
    with pytest.raises(ValueError, match="dimension"):
        fidelity(np.eye(4) / 4, canonical_state("GHZ"))


def test_rng_stream_reproducible():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    c = RngStream(7, 4).generator().standard_normal(5)
    d = RngStream(7, 3, 1).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)


def test_rng_stream_pinned_values():
    # guards against silent changes to the key layout
    x = RngStream(0xC0FFEE, 0).generator().integers(0, 2**32, size=3)
    y = np.random.Generator(np.random.Philox(key=0xC0FFEE << 64)).integers(0, 2**32, size=3)
    np.testing.assert_array_equal(x, y)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(StateFamily)))
def test_random_states_are_valid(seed, family):
    rho = random_state(family, RngStream(seed, 1).generator())
    check_density_matrix(rho)
    assert np.trace(rho @ rho).real == pytest.approx(1, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_local_unitaries_preserve_marginals(seed):
    gen = RngStream(seed).generator()
    np.testing.assert_allclose(single_qubit_purities(random_pure_state("GHZ", gen)), 0.5, atol=1e-12)
    np.testing.assert_allclose(single_qubit_purities(random_pure_state("W", gen)), 5 / 9, atol=1e-12)
    np.testing.assert_allclose(single_qubit_purities(random_pure_state("SEPARABLE", gen)), 1, atol=1e-12)


def test_bipartite_has_exactly_one_pure_marginal():
    gen = RngStream(2024).generator()
    hits = np.zeros(3, dtype=int)
    for _ in range(10_000):
        pure = single_qubit_purities(random_pure_state("BIPARTITE", gen)) >= 1 - 1e-9
        assert pure.sum() == 1
        hits += pure
    # the factored qubit is uniform over the three positions
    assert np.all(np.abs(hits - 10_000 / 3) < 5 * np.sqrt(10_000 * 2 / 9))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_bipartite_pinned_qubit(k):
    psi = random_pure_state("BIPARTITE", RngStream(5).generator(), single_qubit=k)
    assert np.argmax(single_qubit_purities(psi)) == k


def test_haar_unitary_is_unitary_and_phase_uniform():
    gen = RngStream(1).generator()
    u = haar_unitary(4, gen)
    np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)
    # first-entry phases of Haar 2x2 unitaries have zero mean
    phases = np.array([np.angle(haar_unitary(2, gen)[0, 0]) for _ in range(4000)])
    assert abs(np.mean(np.exp(1j * phases))) < 0.06


def test_check_density_matrix_errors():
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_matrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ValueError, match="trace"):
        check_density_matrix(np.eye(2))
    with pytest.raises(ValueError, match="positive"):
        check_density_matrix(np.diag([1.5, -0.5]))


def test_random_density_matrix_rank():
    rho = random_density_matrix(8, RngStream(3).generator(), rank=2)
    check_density_matrix(rho)
    assert np.sum(np.linalg.eigvalsh(rho) > 1e-12) == 2


def test_family_parse():
    assert StateFamily.parse("ghz") is StateFamily.GHZ
    with pytest.raises(ValueError, match="unknown state family"):
        StateFamily.parse("cluster")
