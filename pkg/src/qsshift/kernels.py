"""Small dense linear algebra used by the structured sweeps and the oracles."""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import zgeqrf as _zgeqrf, zunmqr as _zunmqr

__all__ = [
    "QRFactors",
    "SingularDiagonal",
    "ExactSingular",
    "TOL_SINGULAR",
    "qr",
    "apply_adjoint",
    "solve_upper",
    "symmetric_eig",
    "dense_solve",
]

EPS = np.finfo(float).eps
TOL_SINGULAR = 1e3 * EPS


class SingularDiagonal(np.linalg.LinAlgError):
    """A triangular factor has a (numerically) zero pivot."""

    def __init__(self, index: int, value: float = 0.0, msg: str | None = None):
        self.index = index
        self.value = value
        super().__init__(msg or f"singular diagonal entry at index {index} (|r_jj| = {value:.3e})")


class ExactSingular(np.linalg.LinAlgError):
    """LU factorization met an exactly zero pivot column."""


class QRFactors:
    """Householder QR factors kept in compact reflector form.

    ``packed`` and ``tau`` are the LAPACK ``geqrf`` output; ``phase`` holds
    the unit scalars moved from ``r`` into the first columns of ``q`` so that
    ``r`` has a real nonnegative diagonal.  ``q`` (the explicit square
    unitary factor) is formed only on request; the sweeps apply it through
    :meth:`apply_adjoint` and :meth:`apply`.
    """

    __slots__ = ("packed", "tau", "phase", "r", "_q")

    def __init__(self, packed, tau, phase, r):
        self.packed = packed
        self.tau = tau
        self.phase = phase
        self.r = r
        self._q = None

    @property
    def rows(self) -> int:
        return self.r.shape[0]

    def __iter__(self):
        # allows ``q, r = qr(M)``
        yield self.q
        yield self.r

    def _unmqr(self, x, trans):
        k = self.tau.size
        c = np.asarray(x, dtype=np.complex128)
        vec = c.ndim == 1
        c = c.reshape(c.shape[0], -1)
        if c.shape[0] != self.rows:
            raise ValueError(f"cannot apply a {self.rows}x{self.rows} factor to an operand with {c.shape[0]} rows")
        if k == 0 or c.shape[1] == 0:
            out = c.copy()
        else:
            c = np.array(c, order="F")
            if trans == "C":
                out, _, info = _zunmqr("L", "C", self.packed[:, :k], self.tau, c,
                                       max(1, 64 * c.shape[1]), overwrite_c=1)
                out[:k] *= self.phase.conj()[:, None]
            else:
                c[:k] *= self.phase[:, None]
                out, _, info = _zunmqr("L", "N", self.packed[:, :k], self.tau, c,
                                       max(1, 64 * c.shape[1]), overwrite_c=1)
            if info != 0:
                raise np.linalg.LinAlgError(f"unmqr failed with info={info}")
        return out[:, 0] if vec else out

    def apply_adjoint(self, x) -> np.ndarray:
        """``q^H x`` in ``O(rows * k * cols)`` from the reflectors."""
        return self._unmqr(x, "C")

    def apply(self, x) -> np.ndarray:
        """``q x``."""
        return self._unmqr(x, "N")

    @property
    def q(self) -> np.ndarray:
        if self._q is None:
            self._q = self.apply(np.eye(self.rows, dtype=np.complex128))
        return self._q


def qr(M) -> QRFactors:
    """Full Householder QR ``M = q r`` with ``q`` square unitary.

    The diagonal of ``r`` is made real and nonnegative by moving unit phases
    into ``q``, which makes the factors unique for full-rank input.

    >>> f = qr(np.array([[3.0], [4.0]]))
    >>> f.r.real
    array([[5.],
           [0.]])
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] < 1:
        raise ValueError(f"qr needs a matrix with at least one row, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("qr input contains non-finite values")
    p, c = M.shape
    if c == 0:
        empty = np.zeros((p, 0), dtype=np.complex128)
        return QRFactors(empty, np.zeros(0, dtype=np.complex128), np.zeros(0, dtype=np.complex128), empty)
    work = np.array(M, dtype=np.complex128, order="F")
    packed, tau, _, info = _zgeqrf(work, lwork=max(1, 64 * c), overwrite_a=1)
    if info != 0:
        raise np.linalg.LinAlgError(f"geqrf failed with info={info}")
    k = min(p, c)
    r = np.tril(packed.T).T  # C-ordered view: faster than triu on Fortran data
    idx = np.arange(k)
    d = r[idx, idx]
    mag = np.abs(d)
    phase = np.ones(k, dtype=np.complex128)
    nz = mag > 0
    phase[nz] = d[nz] / mag[nz]
    if np.any(phase != 1):
        r[:k] *= phase.conj()[:, None]
        r[idx, idx] = mag
    return QRFactors(packed, tau, phase, r)


def apply_adjoint(q, x) -> np.ndarray:
    """Return ``q^H x``; ``q`` may be a :class:`QRFactors` or a square matrix."""
    if isinstance(q, QRFactors):
        return q.apply_adjoint(x)
    x = np.asarray(x)
    if q.shape[0] != x.shape[0]:
        raise ValueError(f"cannot apply a {q.shape} factor to an operand with {x.shape[0]} rows")
    return q.conj().T @ x


def solve_upper(r, b, scale: float | None = None, tol: float = TOL_SINGULAR) -> np.ndarray:
    """Back substitution with an upper triangular ``r``.

    A pivot is singular when ``|r_jj| <= tol * max(scale, max_j |r_jj|)``;
    ``scale`` lets the caller compare against a norm larger than ``r`` itself.
    """
    r = np.asarray(r)
    b = np.asarray(b)
    n = r.shape[0]
    if r.shape != (n, n):
        raise ValueError("solve_upper needs a square matrix")
    if b.shape[0] != n:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, expected {n}")
    if n == 0:
        return b.astype(np.result_type(r, b, np.complex128))
    d = np.abs(np.diagonal(r))
    ref = d.max() if scale is None else max(scale, d.max())
    bad = np.nonzero(d <= tol * ref)[0]
    if bad.size:
        raise SingularDiagonal(int(bad[0]), float(d[bad[0]]))
    return sla.solve_triangular(r, b, lower=False, check_finite=False)


def symmetric_eig(M, tol: float = 1e-14, max_sweeps: int = 100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, V)`` with ascending ``w`` and orthogonal ``V`` such that
    ``M = V diag(w) V^T``.  Each eigenvector is normalized so that its first
    nonzero component is positive.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("symmetric_eig needs a square matrix")
    fro = np.linalg.norm(A)
    if np.linalg.norm(A - A.T) > 1e-12 * fro:
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    target = tol * fro

    def off(X):
        # direct sum of the off-diagonal squares; subtracting the diagonal from
        # the full norm would stall at sqrt(eps) * ||X|| by cancellation
        return np.linalg.norm(X - np.diag(np.diag(X)))

    for _ in range(max_sweeps):
        if off(A) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.hypot(1.0, tau))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap, aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if off(A) > target:
            raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    for k in range(n):
        nz = np.nonzero(np.abs(V[:, k]) > 1e-300)[0]
        if nz.size and V[nz[0], k] < 0:
            V[:, k] = -V[:, k]
    return w, V


def dense_solve(M, b) -> np.ndarray:
    """Solve ``M x = b`` by LU with partial pivoting (LAPACK ``getrf``)."""
    M = np.asarray(M)
    b = np.asarray(b)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("dense_solve needs a square matrix")
    if b.shape[0] != M.shape[0]:
        raise ValueError("dimension mismatch between matrix and right-hand side")
    dt = np.result_type(M, b, float)
    if not M.size:
        return b.astype(dt)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M.astype(dt), check_finite=True, overwrite_a=True)
    zero = np.nonzero(np.diagonal(lu) == 0)[0]
    if zero.size:
        raise ExactSingular(f"zero pivot in column {int(zero[0])}")
    return sla.lu_solve((lu, piv), b.astype(dt), check_finite=False)
