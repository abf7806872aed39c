import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qsshift.core import from_tridiagonal, identity, matvec, random_qs
from qsshift.reference import assemble_r, assemble_t, assemble_u, assemble_v, dense_shifted_solve
from qsshift.shift_solver import (SingularShift, apply_u_adjoint, apply_v_adjoint, backsubstitute,
                                  factorization_count, reset_counters, shared_factorize, shift_factorize,
                                  solve_many, solve_sequential_baseline, solve_shifted)

from helpers import random_mixed, random_shifts, rel

U = np.finfo(float).eps / 2


def tridiag3():
    return from_tridiagonal([-1.0, -1.0], [2.0, 2.0, 2.0], [-1.0, -1.0])


def test_upper_triangular_has_no_state():
    N = 4
    A = random_qs(N, 1, 0, 1, seed=3)
    F = shared_factorize(A)
    assert F.rho == [0] * (N + 1)
    assert np.allclose(assemble_t(F, 0.0), A.to_dense(), atol=1e-15)
    assert np.allclose(assemble_v(F), np.eye(N), atol=1e-15)


def test_tridiagonal_three_by_three():
    A = tridiag3()
    F = shared_factorize(A)
    assert F.rho == [0, 1, 1, 0]
    y = np.ones(3)
    assert np.allclose(solve_shifted(F, 0.0, y), [1.5, 2.0, 1.5], atol=1e-14)
    assert np.allclose(solve_shifted(F, 1.0, y), [4 / 7, 5 / 7, 4 / 7], atol=1e-14)


def test_identity_shifts():
    A = identity([1, 2, 1])
    y = np.arange(1.0, 5.0)
    assert np.allclose(solve_many(A, [1.0], y)[0], y / 2, atol=1e-15)
    with pytest.raises(SingularShift) as info:
        solve_many(A, [0.5, -1.0], y)
    assert info.value.shift_index == 1
    assert info.value.shift == -1.0


def test_factors_are_unitary_and_norm_preserving():
    rng = np.random.default_rng(7)
    A = random_qs(12, [1, 2, 3] * 4, 2, 2, seed=1, complex_entries=True)
    F = shared_factorize(A)
    S = shift_factorize(F, 0.3 - 0.2j)
    n = A.shape[0]
    for Q in (assemble_v(F), assemble_u(S)):
        assert np.linalg.norm(Q.conj().T @ Q - np.eye(n)) <= 100 * U * n
    y = rng.normal(size=n) + 1j * rng.normal(size=n)
    w = apply_v_adjoint(F, y)
    assert abs(np.linalg.norm(w) - np.linalg.norm(y)) <= 1e-13 * np.linalg.norm(y)
    v = apply_u_adjoint(S, w)
    assert abs(np.linalg.norm(v) - np.linalg.norm(y)) <= 1e-13 * np.linalg.norm(y)


def test_vector_sweeps_match_assembled_factors():
    rng = np.random.default_rng(8)
    A = random_mixed(rng, N_max=15, N_min=5)
    F = shared_factorize(A)
    S = shift_factorize(F, 1.5 + 0.5j)
    n = A.shape[0]
    y = rng.normal(size=n) + 1j * rng.normal(size=n)
    V, Uf = assemble_v(F), assemble_u(S)
    assert np.linalg.norm(apply_v_adjoint(F, y) - V.conj().T @ y) <= 1e-13 * np.linalg.norm(y)
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    assert np.linalg.norm(apply_u_adjoint(S, w) - Uf.conj().T @ w) <= 1e-13 * np.linalg.norm(w)
    R = assemble_r(S)
    assert np.allclose(np.tril(R, -1), 0)
    x = rng.normal(size=n)
    assert np.allclose(backsubstitute(S, R @ x), x, atol=1e-8)


def test_multiple_right_hand_side_columns():
    rng = np.random.default_rng(2)
    A = random_qs(10, 2, 2, 2, seed=5)
    F = shared_factorize(A)
    Y = rng.normal(size=(20, 3))
    X = solve_shifted(F, 3.0, Y)
    for k in range(3):
        assert np.allclose(X[:, k], solve_shifted(F, 3.0, Y[:, k]), atol=1e-13)


def test_solve_many_matches_baseline_and_dense():
    rng = np.random.default_rng(11)
    A = random_qs(100, 1, 3, 3, seed=2)
    shifts = list(random_shifts(rng, 50) + 4.0)
    y = rng.uniform(-1, 1, 100)
    fast = solve_many(A, shifts, y)
    base = solve_sequential_baseline(A, shifts, y)
    D = A.to_dense()
    for s, xf, xb in zip(shifts, fast, base):
        assert rel(xf, xb) <= 1e-12
        assert rel(xf, dense_shifted_solve(D, s, y)) <= 1e-9


def test_single_shift_is_bitwise_reproducible():
    A = random_qs(30, 2, 2, 1, seed=9, complex_entries=True)
    y = np.random.default_rng(0).normal(size=60)
    a = solve_many(A, [0.7j, 2.0], y)
    b = solve_many(A, [0.7j], y)
    c = solve_sequential_baseline(A, [0.7j], y)
    assert np.array_equal(a[0], b[0]) and np.array_equal(b[0], c[0])


def test_threaded_workers_agree():
    A = random_qs(40, 1, 2, 2, seed=4)
    y = np.ones(40)
    shifts = [1.0, 2.0, 3.0 + 1j, -4.0]
    one = solve_many(A, shifts, y, workers=1)
    many = solve_many(A, shifts, y, workers=3)
    assert all(np.array_equal(a, b) for a, b in zip(one, many))


def test_per_shift_right_hand_sides_and_errors():
    A = tridiag3()
    ys = [np.ones(3), np.arange(3.0)]
    xs = solve_many(A, [0.0, 1.0], ys)
    for s, x, y in zip([0.0, 1.0], xs, ys):
        assert np.allclose(matvec(A, x) + s * x, y, atol=1e-14)
    with pytest.raises(ValueError):
        solve_many(A, [0.0, 1.0], [np.ones(3)])
    with pytest.raises(ValueError):
        solve_many(A, [], np.ones(3))


def test_factorization_counter():
    reset_counters()
    A = tridiag3()
    solve_many(A, [1.0, 2.0, 3.0], np.ones(3))
    assert factorization_count() == 1
    solve_sequential_baseline(A, [1.0, 2.0, 3.0], np.ones(3))
    assert factorization_count() == 4


def test_single_block():
    A = random_qs(1, 4, 0, 0, seed=0)
    y = np.arange(4.0)
    x = solve_many(A, [5.0], y)[0]
    assert rel(matvec(A, x) + 5 * x, y) <= 1e-14


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_backward_stable_residual_property(seed):
    rng = np.random.default_rng(seed)
    A = random_mixed(rng, N_max=25)
    F = shared_factorize(A)
    D = A.to_dense()
    nA = np.linalg.norm(D)
    n = D.shape[0]
    y = rng.normal(size=n) + 1j * rng.normal(size=n)
    for s in random_shifts(rng, 3):
        try:
            x = solve_shifted(F, s, y)
        except SingularShift:
            continue
        res = np.linalg.norm(D @ x + s * x - y)
        assert res <= 1e3 * U * n * (nA + abs(s)) * np.linalg.norm(x)
