"""Sylvester-type equations ``A X + X L = Y`` with a quasiseparable ``A``.

``A`` is large and structured (``n x n``), ``L`` is a small dense
``ell x ell`` matrix.  Column ``i`` of the equation reads

    (A + l_ii I) x_i + sum_{j != i} l_ji x_j = y_i,

so for diagonal ``L`` every column is an independent shifted solve, and for
lower triangular ``L`` (``l_ji = 0`` for ``j < i``) the columns are found by
backward substitution ``i = ell, ..., 1`` with

    (A + l_ii I) x_i = y_i - sum_{j > i} l_ji x_j.

The coupling coefficient of ``x_j`` in column ``i`` is ``L[j, i]``, the
entry of ``L`` *below* the diagonal.  Every shift ``l_ii`` reuses a single
shared factorization of ``A``.
"""

from __future__ import annotations

import numpy as np

from .core import QSMatrix, from_tridiagonal
from .kernels import symmetric_eig
from .reference import kronecker_solve
from .shift_solver import SingularShift, shared_factorize, solve_shifted

__all__ = [
    "solve_diag",
    "solve_lower_triangular",
    "schur_reduce_and_solve",
    "symmetric_schur",
    "poisson_matrix",
    "poisson_eigenpairs",
    "poisson_demo",
]


def _rhs_matrix(A: QSMatrix, Y, ell: int) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim == 1:
        Y = Y.reshape(-1, 1)
    if Y.shape != (A.shape[0], ell):
        raise ValueError(f"right-hand side has shape {Y.shape}, expected {(A.shape[0], ell)}")
    return Y


def _solve(F, sigma, rhs, i):
    try:
        return solve_shifted(F, sigma, rhs)
    except SingularShift as exc:
        raise SingularShift(exc.shift, exc.block, shift_index=i) from None


def solve_diag(A: QSMatrix, d, Y) -> np.ndarray:
    """Solve ``A X + X diag(d) = Y``.

    Column ``i`` solves ``(A + d_i I) x_i = y_i``; one shared factorization
    of ``A`` serves all columns.

    Examples
    --------
    >>> from qsshift.core import from_tridiagonal
    >>> solve_diag(from_tridiagonal([], [2.0], []), [2.0], [[4.0]]).real
    array([[1.]])
    """
    d = np.atleast_1d(np.asarray(d, dtype=np.complex128))
    Y = _rhs_matrix(A, Y, d.size)
    F = shared_factorize(A)
    X = np.empty_like(Y)
    for i in range(d.size):
        X[:, i] = _solve(F, d[i], Y[:, i], i)
    return X


def solve_lower_triangular(A: QSMatrix, L, Y) -> np.ndarray:
    """Solve ``A X + X L = Y`` for lower triangular ``L`` by backward substitution.

    Raises ``ValueError`` if ``L`` has nonzero entries above the diagonal.
    Zero coupling entries are skipped, so a diagonal ``L`` takes exactly the
    same arithmetic as :func:`solve_diag`.
    """
    L = np.atleast_2d(np.asarray(L, dtype=np.complex128))
    ell = L.shape[0]
    if L.shape != (ell, ell):
        raise ValueError("L must be square")
    if np.any(np.triu(L, 1) != 0):
        raise ValueError("L must be lower triangular")
    Y = _rhs_matrix(A, Y, ell)
    F = shared_factorize(A)
    X = np.empty_like(Y)
    for i in range(ell - 1, -1, -1):
        rhs = Y[:, i]
        coupled = [j for j in range(i + 1, ell) if L[j, i] != 0]
        if coupled:
            rhs = rhs.copy()
            for j in coupled:
                rhs -= L[j, i] * X[:, j]
        X[:, i] = _solve(F, L[i, i], rhs, i)
    return X


def schur_reduce_and_solve(A: QSMatrix, Fmat, Y, schur, tol: float = 1e-10) -> np.ndarray:
    """Solve ``A X + X F = Y`` given a Schur-type pair ``F = U L U^H``.

    ``U`` must be unitary and ``L`` lower triangular; the equation becomes
    ``A (X U) + (X U) L = Y U``.
    """
    Fmat = np.atleast_2d(np.asarray(Fmat))
    U, L = (np.atleast_2d(np.asarray(a, dtype=np.complex128)) for a in schur)
    ell = Fmat.shape[0]
    if U.shape != (ell, ell) or L.shape != (ell, ell):
        raise ValueError("Schur factors do not match the size of F")
    if np.linalg.norm(U.conj().T @ U - np.eye(ell)) > tol * max(1, ell):
        raise ValueError("invalid Schur pair: U is not unitary")
    if np.any(np.triu(L, 1) != 0):
        raise ValueError("invalid Schur pair: L is not lower triangular")
    fn = np.linalg.norm(Fmat)
    if np.linalg.norm(Fmat - U @ L @ U.conj().T) > tol * max(fn, np.finfo(float).tiny):
        raise ValueError("invalid Schur pair: F != U L U^H")
    Z = solve_lower_triangular(A, L, _rhs_matrix(A, Y, ell) @ U)
    return Z @ U.conj().T


def symmetric_schur(Fmat):
    """Schur pair ``(U, diag(w))`` of a real symmetric ``F`` from the Jacobi eigensolver."""
    w, U = symmetric_eig(np.asarray(Fmat).real)
    return U, np.diag(w)


def poisson_matrix(n: int) -> QSMatrix:
    """``tridiag(-1, 2, -1)`` of size ``n``."""
    return from_tridiagonal([-1.0] * (n - 1), [2.0] * n, [-1.0] * (n - 1))


def poisson_eigenpairs(n: int):
    """Eigenvalues ``2 - 2 cos(k pi/(n+1))`` and orthonormal sine eigenvectors of ``tridiag(-1, 2, -1)``."""
    k = np.arange(1, n + 1)
    lam = 2.0 - 2.0 * np.cos(k * np.pi / (n + 1))
    U = np.sqrt(2.0 / (n + 1)) * np.sin(np.outer(k, k) * np.pi / (n + 1))
    return lam, U


def poisson_demo(Na: int, Nb: int, F=None, cap: int = 50 * 200):
    """Solve the discrete Poisson equation ``A X + X B = F`` on an ``Nb x Na`` grid.

    ``A`` (size ``Nb``) and ``B`` (size ``Na``) are both ``tridiag(-1, 2, -1)``;
    ``B`` is diagonalized analytically and the diagonal equation is handled
    by :func:`solve_diag`.  ``F`` defaults to all ones.

    Returns ``(X, rel_err)`` where ``rel_err`` is the Frobenius relative
    difference to the dense Kronecker solve, or ``None`` if ``Na * Nb``
    exceeds ``cap``.
    """
    if Na < 1 or Nb < 1:
        raise ValueError("grid sizes must be positive")
    F = np.ones((Nb, Na)) if F is None else np.asarray(F)
    if F.shape != (Nb, Na):
        raise ValueError(f"F has shape {F.shape}, expected {(Nb, Na)}")
    A = poisson_matrix(Nb)
    lam, U = poisson_eigenpairs(Na)
    X = (solve_diag(A, lam, F @ U) @ U.T)
    if not np.iscomplexobj(F):
        X = X.real
    if Na * Nb > cap:
        return X, None
    B = 2.0 * np.eye(Na) - np.eye(Na, k=1) - np.eye(Na, k=-1)
    ref = kronecker_solve(A.to_dense().real, B, F, cap=cap)
    return X, float(np.linalg.norm(X - ref) / np.linalg.norm(ref))
