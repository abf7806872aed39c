"""File formats: quasiseparable matrices and block vectors as JSON, dense matrices as CSV.

Complex numbers are written as ``[re, im]`` pairs in JSON and as
``re+imj`` tokens in CSV.

A matrix document looks like::

    {"block_sizes": [m_1, ..., m_N],
     "lower": {"P": [...], "Q": [...], "Xi": [...]},
     "upper": {"G": [...], "H": [...], "Theta": [...]},
     "diag": [...]}

where each generator list holds only the generators that exist, in block
order (``P`` and ``H`` for blocks ``2..N``, ``Q`` and ``G`` for ``1..N-1``,
``Xi`` and ``Theta`` for ``2..N-1``, ``diag`` for ``1..N``), and each
generator is a row-major nested list of pairs.  An order-zero generator
``Q`` is ``[]``; ``P`` of order zero is a list of empty rows.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .core import QSMatrix

__all__ = [
    "qsmatrix_to_dict",
    "qsmatrix_from_dict",
    "save_qsmatrix",
    "load_qsmatrix",
    "blockvector_to_list",
    "blockvector_from_list",
    "save_blockvector",
    "load_blockvector",
    "read_csv_matrix",
    "write_csv_matrix",
    "format_complex",
    "parse_complex",
]


def _pairs(M) -> list:
    M = np.atleast_2d(np.asarray(M, dtype=np.complex128))
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _matrix(doc, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(doc, list):
        raise ValueError(f"{where}: expected a nested list, got {type(doc).__name__}")
    if rows == 0 or cols == 0:
        if doc not in ([], [[]] * rows) and not all(r == [] for r in doc):
            raise ValueError(f"{where}: expected an empty {rows}x{cols} generator")
        return np.zeros((rows, cols), dtype=np.complex128)
    if len(doc) != rows or any(not isinstance(r, list) or len(r) != cols for r in doc):
        raise ValueError(f"{where}: expected shape {rows}x{cols}")
    out = np.empty((rows, cols), dtype=np.complex128)
    for i, row in enumerate(doc):
        for j, z in enumerate(row):
            out[i, j] = _pair(z, f"{where}[{i}][{j}]")
    return out


def _pair(z, where) -> complex:
    if (not isinstance(z, list) or len(z) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
        raise ValueError(f"{where}: expected a [re, im] pair, got {z!r}")
    return complex(z[0], z[1])


def qsmatrix_to_dict(A: QSMatrix) -> dict:
    N = A.N
    return {
        "block_sizes": list(A.sizes),
        "lower": {"P": [_pairs(A.P[i]) for i in range(1, N)],
                  "Q": [_pairs(A.Q[j]) if A.rl[j] else [] for j in range(N - 1)],
                  "Xi": [_pairs(A.Xi[k]) if A.rl[k] and A.rl[k - 1] else [] for k in range(1, N - 1)]},
        "upper": {"G": [_pairs(A.G[i]) for i in range(N - 1)],
                  "H": [_pairs(A.H[j]) if A.ru[j - 1] else [] for j in range(1, N)],
                  "Theta": [_pairs(A.Theta[k]) if A.ru[k - 1] and A.ru[k] else [] for k in range(1, N - 1)]},
        "diag": [_pairs(D) for D in A.D],
    }


def _get(doc, *keys):
    cur = doc
    path = []
    for k in keys:
        path.append(k)
        if not isinstance(cur, dict) or k not in cur:
            raise ValueError(f"missing field '{'.'.join(path)}'")
        cur = cur[k]
    return cur


def qsmatrix_from_dict(doc: dict) -> QSMatrix:
    sizes = _get(doc, "block_sizes")
    if not isinstance(sizes, list) or not sizes or not all(isinstance(s, int) and s >= 1 for s in sizes):
        raise ValueError("block_sizes must be a non-empty list of positive integers")
    N = len(sizes)
    lists = {name: _get(doc, part, name) for part, names in (("lower", ("P", "Q", "Xi")),
                                                             ("upper", ("G", "H", "Theta")))
             for name in names}
    lists["diag"] = _get(doc, "diag")
    expected = {"P": N - 1, "Q": N - 1, "Xi": max(N - 2, 0), "G": N - 1, "H": N - 1,
                "Theta": max(N - 2, 0), "diag": N}
    for name, count in expected.items():
        if not isinstance(lists[name], list) or len(lists[name]) != count:
            raise ValueError(f"field '{name}' must list {count} generators")
    rl = [len(q) for q in lists["Q"]]
    ru = []
    for i, g in enumerate(lists["G"]):
        if not isinstance(g, list) or len(g) != sizes[i]:
            raise ValueError(f"G[{i}]: expected {sizes[i]} rows")
        ru.append(len(g[0]) if isinstance(g[0], list) else -1)
        if ru[-1] < 0:
            raise ValueError(f"G[{i}]: rows must be lists")
    P = [None] + [_matrix(lists["P"][i - 1], sizes[i], rl[i - 1], f"P[{i - 1}]") for i in range(1, N)]
    Q = [_matrix(lists["Q"][j], rl[j], sizes[j], f"Q[{j}]") for j in range(N - 1)] + [None]
    Xi = [None] + [_matrix(lists["Xi"][k - 1], rl[k], rl[k - 1], f"Xi[{k - 1}]") for k in range(1, N - 1)]
    G = [_matrix(lists["G"][i], sizes[i], ru[i], f"G[{i}]") for i in range(N - 1)] + [None]
    H = [None] + [_matrix(lists["H"][j - 1], ru[j - 1], sizes[j], f"H[{j - 1}]") for j in range(1, N)]
    Theta = [None] + [_matrix(lists["Theta"][k - 1], ru[k - 1], ru[k], f"Theta[{k - 1}]")
                      for k in range(1, N - 1)]
    if N > 1:
        Xi.append(None)
        Theta.append(None)
    D = [_matrix(lists["diag"][k], sizes[k], sizes[k], f"diag[{k}]") for k in range(N)]
    return QSMatrix(sizes, P, Q, Xi, G, H, Theta, D)


def _load_json(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def save_qsmatrix(A: QSMatrix, path) -> None:
    Path(path).write_text(json.dumps(qsmatrix_to_dict(A)), encoding="utf-8")


def load_qsmatrix(path) -> QSMatrix:
    try:
        return qsmatrix_from_dict(_load_json(path))
    except ValueError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise ValueError(f"{path}: {exc}") from None


def blockvector_to_list(x, sizes) -> list:
    x = np.asarray(x, dtype=np.complex128).ravel()
    off = np.concatenate(([0], np.cumsum(sizes)))
    return [[[float(z.real), float(z.imag)] for z in x[off[k]:off[k + 1]]] for k in range(len(sizes))]


def blockvector_from_list(doc, sizes=None) -> np.ndarray:
    """Flatten a list of blocks of pairs; with ``sizes`` the block partition is checked."""
    if not isinstance(doc, list) or not all(isinstance(b, list) for b in doc):
        raise ValueError("block vector must be a list of blocks")
    if sizes is not None and [len(b) for b in doc] != list(sizes):
        raise ValueError(f"block vector partition {[len(b) for b in doc]} does not match {list(sizes)}")
    return np.array([_pair(z, f"block[{k}][{i}]") for k, b in enumerate(doc) for i, z in enumerate(b)],
                    dtype=np.complex128)


def save_blockvector(x, sizes, path) -> None:
    Path(path).write_text(json.dumps(blockvector_to_list(x, sizes)), encoding="utf-8")


def load_blockvector(path, sizes=None) -> np.ndarray:
    try:
        return blockvector_from_list(_load_json(path), sizes)
    except ValueError as exc:
        if str(exc).startswith(str(path)):
            raise
        raise ValueError(f"{path}: {exc}") from None


def format_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or np.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def parse_complex(token: str) -> complex:
    """Parse ``"1.5"``, ``"2-3j"``, ``"-1e-3+0j"`` and similar tokens."""
    try:
        return complex(token.strip().replace(" ", ""))
    except ValueError:
        raise ValueError(f"cannot parse complex number {token!r}") from None


def read_csv_matrix(path) -> np.ndarray:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([parse_complex(c) for c in row])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: empty matrix")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: rows have different lengths")
    out = np.array(rows, dtype=np.complex128)
    return out.real.copy() if not np.any(out.imag) else out


def write_csv_matrix(M, path=None) -> str:
    M = np.atleast_2d(np.asarray(M))
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in M:
        w.writerow([format_complex(z) for z in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
