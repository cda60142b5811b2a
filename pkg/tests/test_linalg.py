import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mubtomo.linalg import JacobiNotConverged, jacobi_eigh, off_norm, solve_checked


def test_diagonal_input():
    w, v = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(w, [1, 2, 3])
    np.testing.assert_array_equal(np.abs(v), np.eye(3)[:, [1, 2, 0]])


def test_two_by_two():
    w, v = jacobi_eigh(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(w, [1, 3], atol=1e-14)
    np.testing.assert_allclose(np.abs(v[:, 0]), [1 / np.sqrt(2)] * 2, atol=1e-14)


symmetric = arrays(np.float64, (8, 8), elements=st.floats(-10, 10, allow_nan=False)).map(lambda a: (a + a.T) / 2)


@settings(max_examples=60, deadline=None)
@given(symmetric)
def test_matches_lapack_and_reassembles(a):
    w, v = jacobi_eigh(a)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(a), atol=1e-9)
    np.testing.assert_allclose(v.T @ v, np.eye(8), atol=1e-10)
    np.testing.assert_allclose(v @ np.diag(w) @ v.T, a, atol=1e-9)
    assert np.all(np.diff(w) >= 0)


def test_rejects_non_symmetric():
    with pytest.raises(ValueError, match="symmetric"):
        jacobi_eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_sweep_limit():
    a = np.random.default_rng(0).normal(size=(6, 6))
    with pytest.raises(JacobiNotConverged):
        jacobi_eigh(a + a.T, tol=0.0, max_sweeps=1)


def test_off_norm():
    assert off_norm(np.array([[1.0, 3.0], [4.0, 2.0]])) == pytest.approx(5.0)


def test_solve_checked_warns_when_ill_conditioned():
    a = np.diag([1.0, 1e-14])
    with pytest.warns(UserWarning, match="ill-conditioned"):
        solve_checked(a, np.ones(2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        np.testing.assert_allclose(solve_checked(np.eye(2) * 2, np.ones(2)), [0.5, 0.5])
