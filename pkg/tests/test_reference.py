import numpy as np
import pytest

from qsshift.core import identity, random_qs
from qsshift.reference import (assemble_r, assemble_t, assemble_u, assemble_v, dense_shifted_solve,
                               kronecker_solve, sqrtm_denman_beavers, sqrtm_symmetric)
from qsshift.shift_solver import shared_factorize, shift_factorize

from helpers import random_mixed


def test_assembly_guard():
    A = random_qs(600, 1, 1, 1, seed=0)
    F = shared_factorize(A)
    with pytest.raises(ValueError, match="guard"):
        assemble_v(F)
    assert assemble_v(F, cap=10 ** 4).shape == (600, 600)
    with pytest.raises(ValueError):
        kronecker_solve(np.eye(50), np.eye(50), np.ones((50, 50)))


def test_identity_factorization():
    F = shared_factorize(identity([2, 1, 2]))
    assert np.allclose(assemble_v(F), np.eye(5))
    assert np.allclose(assemble_t(F, 1.0), 2 * np.eye(5))
    S = shift_factorize(F, 2.0)
    assert np.allclose(assemble_u(S), np.eye(5)) and np.allclose(assemble_r(S), 3 * np.eye(5))


def test_factorization_identities():
    rng = np.random.default_rng(3)
    for _ in range(5):
        A = random_mixed(rng, N_max=10)
        D = A.to_dense()
        n = D.shape[0]
        F = shared_factorize(A)
        V = assemble_v(F)
        for s in (0.0, 1.3 - 0.4j):
            T = assemble_t(F, s)
            assert np.linalg.norm(D + s * np.eye(n) - V @ T) <= 1e-12 * (np.linalg.norm(D) + abs(s))
            S = shift_factorize(F, s)
            assert np.linalg.norm(T - assemble_u(S) @ assemble_r(S)) <= 1e-12 * np.linalg.norm(T)


def test_upper_generators_of_t_do_not_depend_on_shift():
    A = random_qs(6, 2, 2, 1, seed=4, complex_entries=True)
    F = shared_factorize(A)
    T0, T1 = assemble_t(F, 0.0), assemble_t(F, 2.5)
    V = assemble_v(F)
    # T_sigma - T_0 = sigma V^H
    assert np.allclose(T1 - T0, 2.5 * V.conj().T, atol=1e-13)


def test_dense_references():
    D = np.array([[4.0, 1.0], [0.0, 9.0]])
    assert np.allclose(dense_shifted_solve(D, 1.0, [5.0, 10.0]), [0.8, 1.0])
    S = sqrtm_denman_beavers(D)
    assert np.allclose(S @ S, D, atol=1e-13)
    P = np.array([[2.0, -1.0], [-1.0, 2.0]])
    R = sqrtm_symmetric(P)
    assert np.allclose(R @ R, P, atol=1e-14) and np.allclose(R, R.T)
    with pytest.raises(ValueError):
        sqrtm_symmetric(-P)
    L = np.array([[1.0, 0.0], [1.0, 1.0]])
    assert np.allclose(kronecker_solve(np.array([[1.0]]), L, [[2.0, 4.0]]), [[0.0, 2.0]])
