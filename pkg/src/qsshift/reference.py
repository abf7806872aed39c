"""Dense O(n^3) oracles for testing the structured solvers.

Nothing here is used on the fast path.  Every function refuses inputs above
a size guard so that test code cannot silently run at benchmark scale.
"""

from __future__ import annotations

import numpy as np

from .core import QSMatrix
from .kernels import QRFactors, dense_solve, symmetric_eig
from .shift_solver import SharedFactorization, ShiftFactorization

__all__ = [
    "MAX_ASSEMBLY",
    "MAX_KRONECKER",
    "assemble_v",
    "assemble_t",
    "assemble_u",
    "assemble_r",
    "dense_shifted_solve",
    "kronecker_solve",
    "sqrtm_denman_beavers",
    "sqrtm_symmetric",
]

MAX_ASSEMBLY = 500
MAX_KRONECKER = 2000


def _guard(n, cap, what):
    if n > cap:
        raise ValueError(f"{what}: size {n} exceeds the test-scale guard {cap}")


def _embedded_product(F: SharedFactorization, factors, reverse: bool) -> np.ndarray:
    n = F.structure.total
    off = F.structure.offsets
    m = F.A.sizes
    out = np.eye(n, dtype=np.complex128)
    order = range(F.N) if not reverse else range(F.N - 1, -1, -1)
    for b in order:
        lo, hi = off[b], off[b] + m[b] + F.rho[b + 1]
        f = factors[b]
        out[:, lo:hi] = out[:, lo:hi] @ (f.q if isinstance(f, QRFactors) else f)
    return out


def assemble_v(F: SharedFactorization, cap: int = MAX_ASSEMBLY) -> np.ndarray:
    """Dense ``V = V~_N ... V~_1`` with each ``V_b`` embedded on its active rows."""
    _guard(F.structure.total, cap, "assemble_v")
    return _embedded_product(F, F.V, reverse=True)


def assemble_u(S: ShiftFactorization, cap: int = MAX_ASSEMBLY) -> np.ndarray:
    """Dense ``U_sigma = U~_1 ... U~_N``."""
    F = S.shared
    _guard(F.structure.total, cap, "assemble_u")
    return _embedded_product(F, S.U, reverse=False)


def _upper_dense(row_sizes, col_sizes, diag, G, H, Theta):
    roff = np.concatenate(([0], np.cumsum(row_sizes)))
    coff = np.concatenate(([0], np.cumsum(col_sizes)))
    N = len(diag)
    out = np.zeros((roff[-1], coff[-1]), dtype=np.complex128)
    for i in range(N):
        out[roff[i]:roff[i + 1], coff[i]:coff[i + 1]] = diag[i]
        if i == N - 1:
            continue
        chain = G[i]
        for j in range(i + 1, N):
            out[roff[i]:roff[i + 1], coff[j]:coff[j + 1]] = chain @ H[j]
            if j < N - 1:
                chain = chain @ Theta[j]
    return out


def assemble_t(F: SharedFactorization, sigma: complex = 0.0, cap: int = MAX_ASSEMBLY) -> np.ndarray:
    """Dense ``T_sigma`` from its generators.

    Block rows follow ``F.nu`` and block columns the block sizes of ``A``;
    ``T_sigma`` is zero below the block diagonal in that partition.
    """
    _guard(F.structure.total, cap, "assemble_t")
    N = F.N
    diag = [F.LT[0] + sigma * F.Gamma[0]] + [F.LT[b] + sigma * F.LVh[b] for b in range(1, N)]
    H = [None] + [F.HT[b] + sigma * F.Gamma[b] for b in range(1, N)]
    return _upper_dense(F.nu, F.A.sizes, diag, F.GT, H, F.ThetaT)


def assemble_r(S: ShiftFactorization, cap: int = MAX_ASSEMBLY) -> np.ndarray:
    """Dense upper triangular ``R_sigma``."""
    F = S.shared
    _guard(F.structure.total, cap, "assemble_r")
    sizes = F.A.sizes
    return _upper_dense(sizes, sizes, S.LR, S.GR, S.HTs, F.ThetaT)


def dense_shifted_solve(A, sigma: complex, y) -> np.ndarray:
    """``(A + sigma I)^{-1} y`` by dense LU."""
    dense = A.to_dense() if isinstance(A, QSMatrix) else np.asarray(A)
    n = dense.shape[0]
    return dense_solve(dense + sigma * np.eye(n), np.asarray(y))


def kronecker_solve(A_dense, L, Y, cap: int = MAX_KRONECKER) -> np.ndarray:
    """Solve ``A X + X L = Y`` through ``(I kron A + L^T kron I) vec(X) = vec(Y)``."""
    A_dense = np.asarray(A_dense)
    L = np.atleast_2d(np.asarray(L))
    Y = np.asarray(Y)
    n, ell = A_dense.shape[0], L.shape[0]
    if Y.ndim == 1:
        Y = Y.reshape(n, 1)
    if Y.shape != (n, ell):
        raise ValueError(f"right-hand side has shape {Y.shape}, expected {(n, ell)}")
    _guard(n * ell, cap, "kronecker_solve")
    big = np.kron(np.eye(ell), A_dense) + np.kron(L.T, np.eye(n))
    x = dense_solve(big, Y.reshape(-1, order="F"))
    return x.reshape((n, ell), order="F")


def sqrtm_symmetric(A) -> np.ndarray:
    """Principal square root of a symmetric positive definite matrix via Jacobi."""
    w, V = symmetric_eig(np.asarray(A).real)
    if w[0] <= 0:
        raise ValueError("matrix is not positive definite")
    return (V * np.sqrt(w)) @ V.T


def sqrtm_denman_beavers(A, tol: float = 1e-13, maxit: int = 100) -> np.ndarray:
    """Principal square root by the scaled product-form Denman-Beavers iteration.

    Iterates ``M <- (I + (mu^2 M + mu^-2 M^-1)/2)/2`` and
    ``Y <- mu Y (I + mu^-2 M^-1)/2`` from ``M = Y = A`` until
    ``||M - I||_F <= tol``; determinantal scaling ``mu`` is used while the
    iterate is far from converged.
    """
    A = np.asarray(A)
    n = A.shape[0]
    I = np.eye(n)
    M = A.astype(np.result_type(A, float)).copy()
    Y = M.copy()
    for _ in range(maxit):
        Minv = np.linalg.inv(M)
        dist = np.linalg.norm(M - I)
        if dist > 1e-2:
            _, logdet = np.linalg.slogdet(M)
            mu = np.exp(-logdet / (2.0 * n))
        else:
            mu = 1.0
        Y = 0.5 * mu * Y @ (I + Minv / mu ** 2)
        M = 0.5 * (I + 0.5 * (mu ** 2 * M + Minv / mu ** 2))
        if np.linalg.norm(M - I) <= tol:
            return Y
    raise np.linalg.LinAlgError("Denman-Beavers iteration did not converge")
