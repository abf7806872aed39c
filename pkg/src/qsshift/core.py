"""Block quasiseparable matrices.

A block matrix ``A = (A_ij)`` with ``N`` blocks of sizes ``m_0, ..., m_{N-1}``
is stored through its generators::

    A_ij = P[i] Xi[i-1] ... Xi[j+1] Q[j]          i > j
    A_ij = G[i] Theta[i+1] ... Theta[j-1] H[j]    i < j
    A_ii = D[i]

Block indices are 0-based.  Generator slots that do not exist are ``None``:
``P[0]``, ``Q[N-1]``, ``G[N-1]``, ``H[0]`` and ``Xi``/``Theta`` at ``0`` and
``N-1``.  The link between blocks ``j`` and ``j+1`` carries the lower order
``rl[j] = Q[j].shape[0]`` and the upper order ``ru[j] = G[j].shape[1]``;
orders may be zero, in which case the generators are empty arrays.

All generators are stored as ``complex128``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "BlockStructure",
    "BlockVector",
    "QSMatrix",
    "as_structure",
    "from_block_tridiagonal",
    "from_tridiagonal",
    "convection_diffusion_2d",
    "convection_diffusion_spectrum",
    "random_qs",
    "identity",
    "qs_product",
    "to_dense",
    "matvec",
    "gemv_powers",
]

_DT = np.complex128


def _c(a) -> np.ndarray:
    return np.array(a, dtype=_DT, ndmin=2)


@dataclass(frozen=True)
class BlockStructure:
    """Block sizes ``m_0, ..., m_{N-1}`` of a square block partition."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 1:
            raise ValueError("a block structure needs at least one block")
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def N(self) -> int:
        return len(self.sizes)

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def offsets(self) -> np.ndarray:
        """Start index of every block, plus ``total`` at the end."""
        return np.concatenate(([0], np.cumsum(self.sizes)))

    def split(self, x: np.ndarray) -> list[np.ndarray]:
        x = np.asarray(x)
        if x.shape[0] != self.total:
            raise ValueError(f"vector of length {x.shape[0]} does not match block structure of size {self.total}")
        off = self.offsets
        return [x[off[k]:off[k + 1]] for k in range(self.N)]


def as_structure(sizes) -> BlockStructure:
    if isinstance(sizes, BlockStructure):
        return sizes
    return BlockStructure(tuple(sizes))


@dataclass(frozen=True)
class BlockVector:
    """A vector partitioned conformally with a :class:`BlockStructure`."""

    structure: BlockStructure
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=_DT)
        if data.ndim != 1 or data.shape[0] != self.structure.total:
            raise ValueError(
                f"block vector data of shape {data.shape} does not match total size {self.structure.total}")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_blocks(cls, blocks: Sequence) -> "BlockVector":
        blocks = [np.atleast_1d(np.asarray(b, dtype=_DT)) for b in blocks]
        return cls(BlockStructure(tuple(len(b) for b in blocks)), np.concatenate(blocks))

    @property
    def blocks(self) -> list[np.ndarray]:
        return self.structure.split(self.data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __len__(self):
        return self.structure.total


class QSMatrix:
    """Block quasiseparable matrix given by generators.

    Parameters
    ----------
    structure
        Block sizes, as a :class:`BlockStructure` or a sequence of ints.
    P, Q, Xi
        Lower generators, lists of length ``N`` (``None`` where undefined).
    G, H, Theta
        Upper generators, lists of length ``N``.
    D
        Diagonal blocks, list of length ``N``.

    Instances are treated as immutable; every operation returns new objects.
    """

    def __init__(self, structure, P, Q, Xi, G, H, Theta, D):
        self.structure = as_structure(structure)
        N = self.structure.N
        for name, lst in (("P", P), ("Q", Q), ("Xi", Xi), ("G", G), ("H", H), ("Theta", Theta), ("D", D)):
            if len(lst) != N:
                raise ValueError(f"generator list {name} must have length N={N}, got {len(lst)}")
        self.P = tuple(None if i == 0 else _c(P[i]) for i in range(N))
        self.Q = tuple(None if j == N - 1 else _c(Q[j]) for j in range(N))
        self.Xi = tuple(None if k in (0, N - 1) else _c(Xi[k]) for k in range(N))
        self.G = tuple(None if i == N - 1 else _c(G[i]) for i in range(N))
        self.H = tuple(None if j == 0 else _c(H[j]) for j in range(N))
        self.Theta = tuple(None if k in (0, N - 1) else _c(Theta[k]) for k in range(N))
        self.D = tuple(_c(D[k]) for k in range(N))
        self._validate()

    # ------------------------------------------------------------------
    @property
    def N(self) -> int:
        return self.structure.N

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.structure.sizes

    @property
    def shape(self) -> tuple[int, int]:
        n = self.structure.total
        return (n, n)

    @property
    def rl(self) -> list[int]:
        """Lower orders on the ``N-1`` links."""
        return [self.Q[j].shape[0] for j in range(self.N - 1)]

    @property
    def ru(self) -> list[int]:
        """Upper orders on the ``N-1`` links."""
        return [self.G[j].shape[1] for j in range(self.N - 1)]

    def _validate(self):
        m, N = self.sizes, self.N
        for k in range(N):
            if self.D[k].shape != (m[k], m[k]):
                raise ValueError(f"D[{k}] has shape {self.D[k].shape}, expected {(m[k], m[k])}")
        for j in range(N - 1):
            if self.Q[j].shape[1] != m[j]:
                raise ValueError(f"Q[{j}] has shape {self.Q[j].shape}, expected (*, {m[j]})")
            if self.G[j].shape[0] != m[j]:
                raise ValueError(f"G[{j}] has shape {self.G[j].shape}, expected ({m[j]}, *)")
        rl, ru = self.rl, self.ru
        for i in range(1, N):
            if self.P[i].shape != (m[i], rl[i - 1]):
                raise ValueError(f"P[{i}] has shape {self.P[i].shape}, expected {(m[i], rl[i - 1])}")
            if self.H[i].shape != (ru[i - 1], m[i]):
                raise ValueError(f"H[{i}] has shape {self.H[i].shape}, expected {(ru[i - 1], m[i])}")
        for k in range(1, N - 1):
            if self.Xi[k].shape != (rl[k], rl[k - 1]):
                raise ValueError(f"Xi[{k}] has shape {self.Xi[k].shape}, expected {(rl[k], rl[k - 1])}")
            if self.Theta[k].shape != (ru[k - 1], ru[k]):
                raise ValueError(f"Theta[{k}] has shape {self.Theta[k].shape}, expected {(ru[k - 1], ru[k])}")
        for lst in (self.P, self.Q, self.Xi, self.G, self.H, self.Theta, self.D):
            for g in lst:
                if g is not None and not np.all(np.isfinite(g)):
                    raise ValueError("generators must be finite")

    def __repr__(self):
        return f"QSMatrix(N={self.N}, total={self.structure.total}, rl<={max(self.rl, default=0)}, ru<={max(self.ru, default=0)})"

    # ------------------------------------------------------------------
    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def matvec(self, x) -> np.ndarray:
        return matvec(self, x)

    def __matmul__(self, other):
        if isinstance(other, QSMatrix):
            return qs_product(self, other)
        return matvec(self, other)

    def transpose(self) -> "QSMatrix":
        """Plain (non-conjugated) transpose; lower and upper generators swap roles."""
        N = self.N
        t = lambda g: None if g is None else g.T
        return QSMatrix(
            self.structure,
            P=[t(self.H[i]) for i in range(N)],
            Q=[t(self.G[j]) for j in range(N)],
            Xi=[t(self.Theta[k]) for k in range(N)],
            G=[t(self.Q[i]) for i in range(N)],
            H=[t(self.P[j]) for j in range(N)],
            Theta=[t(self.Xi[k]) for k in range(N)],
            D=[self.D[k].T for k in range(N)],
        )

    @property
    def T(self) -> "QSMatrix":
        return self.transpose()

    def scaled(self, alpha: complex) -> "QSMatrix":
        """Return ``alpha * A``; only ``P``, ``G`` and ``D`` are scaled."""
        N = self.N
        s = lambda g: None if g is None else alpha * g
        return QSMatrix(self.structure, [s(p) for p in self.P], list(self.Q), list(self.Xi),
                        [s(g) for g in self.G], list(self.H), list(self.Theta), [alpha * d for d in self.D])

    def __neg__(self):
        return self.scaled(-1.0)

    def shifted(self, sigma: complex) -> "QSMatrix":
        """Return ``A + sigma*I``."""
        D = [d + sigma * np.eye(d.shape[0]) for d in self.D]
        return QSMatrix(self.structure, list(self.P), list(self.Q), list(self.Xi),
                        list(self.G), list(self.H), list(self.Theta), D)


# ----------------------------------------------------------------------
# dense reconstruction and matvec


def to_dense(A: QSMatrix) -> np.ndarray:
    """Assemble the dense ``total x total`` matrix represented by ``A``."""
    N, off = A.N, A.structure.offsets
    out = np.zeros(A.shape, dtype=_DT)
    for k in range(N):
        out[off[k]:off[k + 1], off[k]:off[k + 1]] = A.D[k]
    for j in range(N - 1):
        # lower: column j, chain Xi[i-1]...Xi[j+1] Q[j]
        chain = A.Q[j]
        for i in range(j + 1, N):
            out[off[i]:off[i + 1], off[j]:off[j + 1]] = A.P[i] @ chain
            if i < N - 1:
                chain = A.Xi[i] @ chain
        # upper: row j, chain G[j] Theta[j+1]...Theta[i-1]
        chain = A.G[j]
        for i in range(j + 1, N):
            out[off[j]:off[j + 1], off[i]:off[i + 1]] = chain @ A.H[i]
            if i < N - 1:
                chain = chain @ A.Theta[i]
    return out


def matvec(A: QSMatrix, x) -> np.ndarray:
    """Compute ``A @ x`` in linear time with two generator sweeps.

    ``x`` may be a vector of length ``total`` or a ``(total, k)`` array.
    """
    x = np.asarray(x)
    if x.shape[0] != A.structure.total:
        raise ValueError(f"operand of length {x.shape[0]} does not match matrix of size {A.structure.total}")
    xs = A.structure.split(x)
    N = A.N
    tail = x.shape[1:]
    y = [A.D[k] @ xs[k] for k in range(N)]
    # forward sweep: f carries Q-contributions of blocks < i
    f = None
    for i in range(1, N):
        f = A.Q[i - 1] @ xs[i - 1] if f is None else A.Xi[i - 1] @ f + A.Q[i - 1] @ xs[i - 1]
        y[i] = y[i] + A.P[i] @ f
    # backward sweep: g carries H-contributions of blocks > i
    g = None
    for i in range(N - 2, -1, -1):
        g = A.H[i + 1] @ xs[i + 1] if g is None else A.Theta[i + 1] @ g + A.H[i + 1] @ xs[i + 1]
        y[i] = y[i] + A.G[i] @ g
    out = np.concatenate(y) if N > 1 else y[0]
    return out.reshape((A.structure.total,) + tail)


def gemv_powers(A: QSMatrix, g, p: int) -> list[np.ndarray]:
    """Return ``[g, A g, ..., A^p g]`` by repeated :func:`matvec`."""
    if p < 0:
        raise ValueError("p must be nonnegative")
    out = [np.asarray(g, dtype=_DT)]
    for _ in range(p):
        out.append(matvec(A, out[-1]))
    return out


def _lower_product(A: QSMatrix, B: QSMatrix):
    """Lower generators and diagonal of ``A @ B``.

    The lower part couples the direct product of the lower chains with the
    contributions routed through ``A``'s upper part (carried by ``T``) and
    through ``B``'s upper part (carried by ``S``).
    """
    N = A.N
    rla, rlb, rua, rub = A.rl, B.rl, A.ru, B.ru
    # S[j]: sum over k<j of Xi_A chain * Q_A(k) G_B(k) * Theta_B chain, shape rla[j-1] x rub[j-1]
    S = [None] * N
    for j in range(1, N):
        S[j] = A.Q[j - 1] @ B.G[j - 1]
        if j >= 2:
            S[j] = S[j] + A.Xi[j - 1] @ S[j - 1] @ B.Theta[j - 1]
    # T[i]: sum over k>i of Theta_A chain * H_A(k) P_B(k) * Xi_B chain, shape rua[i] x rlb[i]
    T = [None] * N
    for i in range(N - 2, -1, -1):
        T[i] = A.H[i + 1] @ B.P[i + 1]
        if i <= N - 3:
            T[i] = T[i] + A.Theta[i + 1] @ T[i + 1] @ B.Xi[i + 1]

    P, Q, Xi, D = [None] * N, [None] * N, [None] * N, [None] * N
    for k in range(N):
        d = A.D[k] @ B.D[k]
        if k >= 1:
            d = d + A.P[k] @ S[k] @ B.H[k]
        if k <= N - 2:
            d = d + A.G[k] @ T[k] @ B.Q[k]
        D[k] = d
    for i in range(1, N):
        x = A.D[i] @ B.P[i]
        if i <= N - 2:
            x = x + A.G[i] @ T[i] @ B.Xi[i]
        P[i] = np.hstack([A.P[i], x])
    for j in range(N - 1):
        y = A.Q[j] @ B.D[j]
        if j >= 1:
            y = y + A.Xi[j] @ S[j] @ B.H[j]
        Q[j] = np.vstack([y, B.Q[j]])
    for k in range(1, N - 1):
        Xi[k] = np.block([[A.Xi[k], A.Q[k] @ B.P[k]],
                          [np.zeros((rlb[k], rla[k - 1]), dtype=_DT), B.Xi[k]]])
    return P, Q, Xi, D


def qs_product(A: QSMatrix, B: QSMatrix) -> QSMatrix:
    """Generators of ``A @ B`` with orders ``rl_A + rl_B`` and ``ru_A + ru_B``.

    No compression is performed, so the orders are an upper bound.
    """
    if A.structure != B.structure:
        raise ValueError("block structures differ")
    P, Q, Xi, D = _lower_product(A, B)
    # upper part of AB is the transposed lower part of B^T A^T
    Pt, Qt, Xit, _ = _lower_product(B.transpose(), A.transpose())
    N = A.N
    t = lambda g: None if g is None else g.T
    return QSMatrix(A.structure, P, Q, Xi,
                    G=[t(Qt[i]) for i in range(N)],
                    H=[t(Pt[j]) for j in range(N)],
                    Theta=[t(Xit[k]) for k in range(N)],
                    D=D)


# ----------------------------------------------------------------------
# builders


def _empty(r, c):
    return np.zeros((r, c), dtype=_DT)


def identity(sizes) -> QSMatrix:
    """Identity matrix with all orders zero."""
    st = as_structure([1] * sizes if isinstance(sizes, int) else sizes)
    m, N = st.sizes, st.N
    return QSMatrix(
        st,
        P=[None] + [_empty(m[i], 0) for i in range(1, N)],
        Q=[_empty(0, m[j]) for j in range(N - 1)] + [None],
        Xi=[None] + [_empty(0, 0) for _ in range(1, N - 1)] + ([None] if N > 1 else []),
        G=[_empty(m[i], 0) for i in range(N - 1)] + [None],
        H=[None] + [_empty(0, m[j]) for j in range(1, N)],
        Theta=[None] + [_empty(0, 0) for _ in range(1, N - 1)] + ([None] if N > 1 else []),
        D=[np.eye(mk, dtype=_DT) for mk in m],
    )


def from_block_tridiagonal(sub: Sequence, diag: Sequence, sup: Sequence) -> QSMatrix:
    """Block tridiagonal matrix as a quasiseparable matrix.

    ``sub[i]`` is block ``(i+1, i)``, ``sup[i]`` is block ``(i, i+1)`` and
    ``diag[k]`` block ``(k, k)``.  The lower order on link ``j`` equals
    ``m_j`` and the upper order equals ``m_{j+1}``; the chain generators are
    zero, so reconstruction is exact.
    """
    diag = [_c(d) for d in diag]
    N = len(diag)
    if len(sub) != N - 1 or len(sup) != N - 1:
        raise ValueError(f"expected {N - 1} off-diagonal blocks, got {len(sub)} and {len(sup)}")
    m = [d.shape[0] for d in diag]
    sub = [_c(s) for s in sub]
    sup = [_c(s) for s in sup]
    for j in range(N - 1):
        if sub[j].shape != (m[j + 1], m[j]) or sup[j].shape != (m[j], m[j + 1]):
            raise ValueError(f"off-diagonal block {j} has inconsistent shape")
    return QSMatrix(
        m,
        P=[None] + [sub[i - 1] for i in range(1, N)],
        Q=[np.eye(m[j], dtype=_DT) for j in range(N - 1)] + [None],
        Xi=[None] + [_empty(m[k], m[k - 1]) for k in range(1, N - 1)] + ([None] if N > 1 else []),
        G=[sup[i] for i in range(N - 1)] + [None],
        H=[None] + [np.eye(m[j], dtype=_DT) for j in range(1, N)],
        Theta=[None] + [_empty(m[k - 1], m[k]) for k in range(1, N - 1)] + ([None] if N > 1 else []),
        D=diag,
    )


def from_tridiagonal(sub: Sequence, diag: Sequence, sup: Sequence) -> QSMatrix:
    """Scalar tridiagonal matrix as a (1,1)-quasiseparable matrix.

    >>> from_tridiagonal([-1, -1], [2, 2, 2], [-1, -1]).to_dense().real
    array([[ 2., -1.,  0.],
           [-1.,  2., -1.],
           [ 0., -1.,  2.]])
    """
    diag = list(diag)
    n = len(diag)
    if n < 1:
        raise ValueError("empty diagonal")
    if len(sub) != n - 1 or len(sup) != n - 1:
        raise ValueError(f"off-diagonals must have length {n - 1}, got {len(sub)} and {len(sup)}")
    if n == 1:
        return QSMatrix([1], [None], [None], [None], [None], [None], [None], [[[diag[0]]]])
    return from_block_tridiagonal([[[s]] for s in sub], [[[d]] for d in diag], [[[s]] for s in sup])


def convection_diffusion_2d(n: int, c: float = 10.0) -> QSMatrix:
    """Centered 5-point discretization of ``-Laplace(u) + c u_x`` on the unit square.

    Homogeneous Dirichlet conditions on an ``n x n`` interior grid with
    ``h = 1/(n+1)``.  The stencil is unscaled (no ``1/h**2`` factor); the
    convection enters as ``c_hat = c*h/2`` on the couplings along the block
    index, giving ``-(1+c_hat) I`` below and ``-(1-c_hat) I`` above the
    diagonal blocks ``tridiag(-1, 4, -1)``.
    """
    if n < 2:
        raise ValueError("grid size must be at least 2")
    h = 1.0 / (n + 1)
    ch = c * h / 2.0
    T = 4.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    I = np.eye(n)
    return from_block_tridiagonal([-(1.0 + ch) * I] * (n - 1), [T] * n, [-(1.0 - ch) * I] * (n - 1))


def convection_diffusion_spectrum(n: int, c: float = 10.0) -> tuple[float, float]:
    """Smallest and largest eigenvalue of :func:`convection_diffusion_2d`.

    The operator is diagonally similar to a symmetric one as long as
    ``|c h / 2| < 1``, so its eigenvalues are real and known in closed form.
    """
    h = 1.0 / (n + 1)
    ch = c * h / 2.0
    if abs(ch) >= 1:
        raise ValueError("cell Peclet number must be below one for a real spectrum")
    cs = np.cos(np.pi * h)
    w = np.sqrt(1.0 - ch * ch)
    return 4.0 - 2.0 * cs - 2.0 * w * cs, 4.0 + 2.0 * cs + 2.0 * w * cs


def random_qs(N: int, m, r_L: int, r_U: int, seed=None, complex_entries: bool = False) -> QSMatrix:
    """Random quasiseparable generators with entries uniform on ``[-1, 1]``.

    ``m`` is either a common block size or a sequence of ``N`` sizes.  With
    ``complex_entries`` the imaginary parts are drawn the same way; by default
    they are zero.  The output depends only on the arguments.
    """
    rng = np.random.default_rng(seed)
    sizes = [int(m)] * N if np.isscalar(m) else [int(s) for s in m]
    if len(sizes) != N:
        raise ValueError("need one block size per block")
    st = BlockStructure(tuple(sizes))

    def draw(r, c):
        a = rng.uniform(-1.0, 1.0, size=(r, c))
        if complex_entries:
            a = a + 1j * rng.uniform(-1.0, 1.0, size=(r, c))
        return a

    # per-link orders cannot exceed what the adjacent blocks can carry usefully,
    # but any nonnegative value is valid; keep them as requested
    P = [None] + [draw(sizes[i], r_L) for i in range(1, N)]
    Q = [draw(r_L, sizes[j]) for j in range(N - 1)] + [None]
    Xi = [None] + [draw(r_L, r_L) for _ in range(1, N - 1)] + ([None] if N > 1 else [])
    G = [draw(sizes[i], r_U) for i in range(N - 1)] + [None]
    H = [None] + [draw(r_U, sizes[j]) for j in range(1, N)]
    Theta = [None] + [draw(r_U, r_U) for _ in range(1, N - 1)] + ([None] if N > 1 else [])
    D = [draw(s, s) for s in sizes]
    return QSMatrix(st, P, Q, Xi, G, H, Theta, D)
