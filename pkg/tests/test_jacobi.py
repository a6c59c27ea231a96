"""Jacobi eigensolver cross-checked against LAPACK."""

import numpy as np
import pytest

from ejalg.jacobi import jacobi_eigh


def _random_sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_matches_eigh(n):
    rng = np.random.default_rng(n)
    for _ in range(20):
        A = _random_sym(rng, n)
        w, V = jacobi_eigh(A)
        assert np.all(np.diff(w) <= 0.0)
        assert np.allclose(np.sort(w), np.sort(np.linalg.eigvalsh(A)), atol=1e-10)
        assert np.allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)
        assert np.allclose(V.T @ V, np.eye(n), atol=1e-12)


def test_diagonal_is_fixed_point():
    w, V = jacobi_eigh(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0, 1.0])
    assert np.allclose(np.abs(V[np.array([0, 2, 1]), np.arange(3)]), 1.0)


def test_scaling_equivariance():
    rng = np.random.default_rng(42)
    A = _random_sym(rng, 4)
    w1, _ = jacobi_eigh(A)
    w2, _ = jacobi_eigh(1e-8 * A)
    assert np.allclose(w2, 1e-8 * w1, rtol=1e-10)


def test_tied_spectrum():
    w, _ = jacobi_eigh(np.eye(5) * 2.0)
    assert np.allclose(w, 2.0)
