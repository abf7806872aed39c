"""Shifted quasiseparable systems ``(A + sigma_i I) x_i = y_i``.

The solver factors ``A + sigma I = V T_sigma`` where the unitary ``V`` and
most generators of the block upper triangular ``T_sigma`` depend only on the
lower generators of ``A``.  That shared part is computed once by
:func:`shared_factorize`; each shift then costs one forward QR sweep
``T_sigma = U_sigma R_sigma`` (:func:`shift_factorize`) and two linear-time
vector sweeps.

Index conventions (0-based blocks ``b = 0..N-1``):

* ``rho[b]`` is the size of the state carried across the link between blocks
  ``b-1`` and ``b`` during the ``V`` sweep, with ``rho[0] = rho[N] = 0``;
* ``nu[b] = m[b] + rho[b+1] - rho[b]`` is the row size of block ``b`` of
  ``T_sigma`` (and of ``w = V^H y``);
* ``rhop[b] = rho[b+1] + ru[b]`` is the order of the upper generators of
  ``T_sigma`` on link ``b``.

Each small unitary factor ``V[b]`` / ``U[b]`` acts on the rows
``off[b] : off[b] + m[b] + rho[b+1]`` of the full vector.  Factors coming
from a QR step are stored as :class:`~qsshift.kernels.QRFactors` (compact
Householder form); ``V[0]`` is an explicit identity.
"""

from __future__ import annotations

import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import QSMatrix
from .kernels import SingularDiagonal, apply_adjoint, qr, solve_upper

__all__ = [
    "SharedFactorization",
    "ShiftFactorization",
    "SingularShift",
    "shared_factorize",
    "apply_v_adjoint",
    "shift_factorize",
    "apply_u_adjoint",
    "backsubstitute",
    "solve_shifted",
    "solve_many",
    "solve_sequential_baseline",
    "factorization_count",
    "reset_counters",
]

_DT = np.complex128

_counts = Counter()
_count_lock = threading.Lock()


def _bump(key):
    with _count_lock:
        _counts[key] += 1


def factorization_count() -> int:
    """Number of :func:`shared_factorize` calls since the last reset."""
    return _counts["shared_factorize"]


def reset_counters():
    with _count_lock:
        _counts.clear()


class SingularShift(np.linalg.LinAlgError):
    """``A + sigma I`` is singular to working precision."""

    def __init__(self, shift, block, shift_index=None):
        self.shift = shift
        self.block = block
        self.shift_index = shift_index
        where = "" if shift_index is None else f" (shift #{shift_index})"
        super().__init__(f"A + sigma I is singular for sigma = {shift!r}{where}: zero pivot in block {block}")


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("QSSHIFT_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True, eq=False)
class SharedFactorization:
    """Shift-independent part of ``A + sigma I = V T_sigma``."""

    A: QSMatrix
    rho: list
    nu: list
    rhop: list
    V: list
    PV: list
    QV: list
    XiV: list
    LV: list
    HT: list
    ThetaT: list
    LT: list
    GT: list
    Gamma: list
    LVh: list
    X: list | None = None

    @property
    def structure(self):
        return self.A.structure

    @property
    def N(self) -> int:
        return self.A.N


@dataclass(frozen=True, eq=False)
class ShiftFactorization:
    """Factors ``T_sigma = U_sigma R_sigma`` for one shift."""

    shared: SharedFactorization
    sigma: complex
    U: list
    LR: list
    GR: list
    HTs: list = field(repr=False)
    pivot_scale: float = 0.0


def shared_factorize(A: QSMatrix, keep_x: bool = False) -> SharedFactorization:
    """Compute ``V`` and the shift-independent generators of ``T_sigma``.

    One backward sweep over the blocks; at block ``b`` the stacked matrix
    ``[P[b]; X_{b+1} Xi[b]]`` is triangularized and the resulting unitary
    ``V[b]`` is applied to the block row of ``A``.  Only the generators of
    ``A`` are read; the output does not depend on any shift.
    """
    _bump("shared_factorize")
    m, N = A.sizes, A.N
    rl, ru = A.rl, A.ru
    rho = [0] * (N + 1)
    for b in range(N - 1, 0, -1):
        rho[b] = min(m[b] + rho[b + 1], rl[b - 1])
    nu = [m[b] + rho[b + 1] - rho[b] for b in range(N)]
    rhop = [rho[b + 1] + ru[b] for b in range(N - 1)]

    V, PV, QV, XiV, LV = [None] * N, [None] * N, [None] * N, [None] * N, [None] * N
    HT, ThetaT, LT, GT, Gamma = [None] * N, [None] * N, [None] * N, [None] * N, [None] * N
    Xs = [None] * N
    Xn = None  # X of the block below the current one
    for b in range(N - 1, 0, -1):
        mb, rb, rn = m[b], rho[b], rho[b + 1]
        M = A.P[b] if b == N - 1 else np.vstack([A.P[b], Xn @ A.Xi[b]])
        f = qr(M)
        r = f.r
        Vb = f.q
        V[b] = f
        PV[b], LV[b] = Vb[:mb, :rb], Vb[:mb, rb:]
        XiV[b], QV[b] = Vb[mb:, :rb], Vb[mb:, rb:]
        if b == N - 1:
            stacked = np.vstack([A.H[b], f.apply_adjoint(A.D[b])])
            HT[b], LT[b] = stacked[:rhop[b - 1]], stacked[rhop[b - 1]:]
        else:
            ru_prev, ru_b = ru[b - 1], ru[b]
            top = np.hstack([A.H[b], A.Theta[b], np.zeros((ru_prev, rn), dtype=_DT)])
            mid = np.vstack([
                np.hstack([A.D[b], A.G[b], np.zeros((mb, rn), dtype=_DT)]),
                np.hstack([Xn @ A.Q[b], np.zeros((rn, ru_b), dtype=_DT), np.eye(rn, dtype=_DT)]),
            ])
            stacked = np.vstack([top, f.apply_adjoint(mid)])
            k = rhop[b - 1]
            HT[b], ThetaT[b] = stacked[:k, :mb], stacked[:k, mb:]
            LT[b], GT[b] = stacked[k:, :mb], stacked[k:, mb:]
        Gamma[b] = np.vstack([np.zeros((ru[b - 1], mb), dtype=_DT), PV[b].conj().T])
        Xn = r[:rb]
        Xs[b] = Xn

    m0 = m[0]
    V[0] = np.eye(nu[0], dtype=_DT)
    if N == 1:
        LT[0] = A.D[0].copy()
        Gamma[0] = np.eye(m0, dtype=_DT)
    else:
        r1 = rho[1]
        LT[0] = np.vstack([A.D[0], Xn @ A.Q[0]])
        GT[0] = np.block([[A.G[0], np.zeros((m0, r1), dtype=_DT)],
                          [np.zeros((r1, ru[0]), dtype=_DT), np.eye(r1, dtype=_DT)]])
        Gamma[0] = np.vstack([np.eye(m0, dtype=_DT), np.zeros((r1, m0), dtype=_DT)])
    LVh = [None if lv is None else lv.conj().T for lv in LV]
    return SharedFactorization(A, rho, nu, rhop, V, PV, QV, XiV, LV, HT, ThetaT, LT, GT, Gamma, LVh,
                               Xs if keep_x else None)


def _split(x, sizes):
    off = np.concatenate(([0], np.cumsum(sizes)))
    return [x[off[k]:off[k + 1]] for k in range(len(sizes))]


def apply_v_adjoint(F: SharedFactorization, y) -> np.ndarray:
    """Return ``w = V^H y`` in one backward sweep.

    ``y`` has length ``total`` (or shape ``(total, k)``); ``w`` is
    partitioned by ``F.nu``.
    """
    y = np.asarray(y, dtype=_DT)
    if y.shape[0] != F.structure.total:
        raise ValueError(f"right-hand side of length {y.shape[0]} does not match size {F.structure.total}")
    N, rho = F.N, F.rho
    ys = F.structure.split(y)
    w = [None] * N
    c = None
    for b in range(N - 1, 0, -1):
        z = ys[b] if b == N - 1 else np.concatenate([ys[b], c])
        t = F.V[b].apply_adjoint(z)
        c, w[b] = t[:rho[b]], t[rho[b]:]
    w[0] = ys[0] if N == 1 else np.concatenate([ys[0], c])
    return np.concatenate(w)


def shift_factorize(F: SharedFactorization, sigma: complex) -> ShiftFactorization:
    """Forward QR sweep ``T_sigma = U_sigma R_sigma`` for one shift.

    The shifted generators of ``T_sigma`` are ``H_T + sigma Gamma`` and
    ``Lambda_T + sigma Lambda_V^H``; the other generators are shared.  The
    factorization always completes; singular pivots surface in
    :func:`backsubstitute`.
    """
    sigma = complex(sigma)
    m, N = F.A.sizes, F.N
    U, LR, GR, HTs = [None] * N, [None] * N, [None] * N, [None] * N
    if N == 1:
        f = qr(F.LT[0] + sigma * F.Gamma[0])
        U[0], LR[0] = f, f.r[:m[0]]
    else:
        f = qr(F.LT[0] + sigma * F.Gamma[0])
        U[0], LR[0] = f, f.r[:m[0]]
        t = f.apply_adjoint(F.GT[0])
        GR[0], Y = t[:m[0]], t[m[0]:]
        for b in range(1, N):
            HTs[b] = F.HT[b] + sigma * F.Gamma[b]
            M = np.vstack([Y @ HTs[b], F.LT[b] + sigma * F.LVh[b]])
            f = qr(M)
            U[b], LR[b] = f, f.r[:m[b]]
            if b < N - 1:
                t = f.apply_adjoint(np.vstack([Y @ F.ThetaT[b], F.GT[b]]))
                GR[b], Y = t[:m[b]], t[m[b]:]
    scale = max((float(np.abs(np.diagonal(lr)).max()) for lr in LR), default=0.0)
    return ShiftFactorization(F, sigma, U, LR, GR, HTs, scale)


def apply_u_adjoint(S: ShiftFactorization, w) -> np.ndarray:
    """Return ``v = U_sigma^H w`` in one forward sweep (``w`` partitioned by ``nu``)."""
    F = S.shared
    w = np.asarray(w, dtype=_DT)
    if w.shape[0] != F.structure.total:
        raise ValueError(f"operand of length {w.shape[0]} does not match size {F.structure.total}")
    m, N = F.A.sizes, F.N
    ws = _split(w, F.nu)
    v = [None] * N
    alpha = None
    for b in range(N):
        z = ws[b] if b == 0 else np.concatenate([alpha, ws[b]])
        t = apply_adjoint(S.U[b], z)
        v[b], alpha = t[:m[b]], t[m[b]:]
    return np.concatenate(v)


def backsubstitute(S: ShiftFactorization, v) -> np.ndarray:
    """Solve ``R_sigma x = v`` by the backward generator recursion."""
    F = S.shared
    N = F.N
    v = np.asarray(v, dtype=_DT)
    vs = F.structure.split(v)
    x = [None] * N

    def solve(b, rhs):
        try:
            return solve_upper(S.LR[b], rhs, scale=S.pivot_scale)
        except SingularDiagonal:
            raise SingularShift(S.sigma, b) from None

    x[N - 1] = solve(N - 1, vs[N - 1])
    if N > 1:
        eta = S.HTs[N - 1] @ x[N - 1]
        for b in range(N - 2, 0, -1):
            x[b] = solve(b, vs[b] - S.GR[b] @ eta)
            eta = F.ThetaT[b] @ eta + S.HTs[b] @ x[b]
        x[0] = solve(0, vs[0] - S.GR[0] @ eta)
    return np.concatenate(x)


def solve_shifted(F: SharedFactorization, sigma: complex, y) -> np.ndarray:
    """Solve ``(A + sigma I) x = y`` reusing the shared factorization ``F``.

    ``y`` may hold several right-hand sides as columns.
    """
    S = shift_factorize(F, sigma)
    return backsubstitute(S, apply_u_adjoint(S, apply_v_adjoint(F, y)))


def _rhs_list(rhs, count):
    if isinstance(rhs, np.ndarray) or not isinstance(rhs, (list, tuple)):
        return [rhs] * count
    if len(rhs) != count:
        raise ValueError(f"got {len(rhs)} right-hand sides for {count} shifts")
    return list(rhs)


def _run(F, shifts, rhs, workers):
    def one(i):
        try:
            return solve_shifted(F, shifts[i], rhs[i])
        except SingularShift as exc:
            raise SingularShift(exc.shift, exc.block, shift_index=i) from None

    if workers <= 1 or len(shifts) == 1:
        return [one(i) for i in range(len(shifts))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(len(shifts))))


def solve_many(A: QSMatrix, shifts, rhs, workers: int | None = None) -> list[np.ndarray]:
    """Solve ``(A + shifts[i] I) x_i = rhs[i]`` with a single shared factorization.

    ``rhs`` is either one vector used for every shift or a list with one
    entry per shift.  ``workers`` (default: ``QSSHIFT_WORKERS`` or 1) sets
    the number of threads over shifts.
    """
    shifts = list(shifts)
    if not shifts:
        raise ValueError("need at least one shift")
    rhs = _rhs_list(rhs, len(shifts))
    F = shared_factorize(A)
    return _run(F, shifts, rhs, _default_workers() if workers is None else workers)


def solve_sequential_baseline(A: QSMatrix, shifts, rhs) -> list[np.ndarray]:
    """Reference path that redoes the shared factorization for every shift."""
    shifts = list(shifts)
    rhs = _rhs_list(rhs, len(shifts))
    out = []
    for i, s in enumerate(shifts):
        F = shared_factorize(A)
        try:
            out.append(solve_shifted(F, s, rhs[i]))
        except SingularShift as exc:
            raise SingularShift(exc.shift, exc.block, shift_index=i) from None
    return out
