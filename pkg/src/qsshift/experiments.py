"""Experiment drivers shared by the command line and the acceptance tests.

Every driver returns an :class:`ExperimentReport`: a small table of rows
(input parameter -> measured error or time) plus a metadata record.  Error
rows are deterministic given the seed; timings are not.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .core import convection_diffusion_2d, convection_diffusion_spectrum, from_tridiagonal, random_qs
from .matfun import bvp_context, bvp_exact_dense, bvp_series, rational_apply, sqrt_poles
from .reference import sqrtm_denman_beavers, sqrtm_symmetric
from .shift_solver import solve_many, solve_sequential_baseline
from .sylvester import poisson_demo

__all__ = [
    "ExperimentReport",
    "loglog_slope",
    "ell_grid",
    "run_bvp",
    "run_sqrt",
    "run_poisson",
    "bench_n",
    "bench_m",
]


@dataclass
class ExperimentReport:
    experiment: str
    params: dict
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def column(self, name) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows], dtype=float)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_json(self, path=None) -> str:
        text = json.dumps(_clean(asdict(self)), indent=1)
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _clean(obj):
    """Make a report JSON-safe: numpy scalars to Python, NaN/inf to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def _meta(seed=None, workers=1, **extra):
    return {"seed": seed, "precision": "complex128", "workers": workers,
            "python": platform.python_version(), "numpy": np.__version__, **extra}


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def ell_grid(lmin: int, lmax: int, points: int) -> list[int]:
    """Roughly log-spaced integer grid containing both ends."""
    if lmin < 1 or lmax < lmin:
        raise ValueError("need 1 <= lmin <= lmax")
    return sorted({int(round(v)) for v in np.geomspace(lmin, lmax, max(points, 2))} | {lmin, lmax})


# ----------------------------------------------------------------------
# series for the boundary value problem


def run_bvp(n: int = 100, ts=(np.pi / 2,), lmin: int = 10, lmax: int = 500, points: int = 25,
            variant: str = "both", seed: int = 0, fit_from: int = 50) -> ExperimentReport:
    """Errors of the plain and accelerated truncations on the 1-D Laplacian.

    ``A = tridiag(-1, 2, -1)`` of size ``n``, ``g`` uniform on ``[0, 1]``;
    the reference is the dense eigendecomposition formula.  The metadata hold
    log-log slopes of the error over ``ell >= fit_from``.
    """
    if variant not in ("plain", "accel", "both"):
        raise ValueError(f"unknown variant {variant!r}")
    start = time.perf_counter()
    A = from_tridiagonal([-1.0] * (n - 1), [2.0] * n, [-1.0] * (n - 1))
    g = np.random.default_rng(seed).uniform(0.0, 1.0, n)
    ctx = bvp_context(A, g)
    ells = ell_grid(lmin, lmax, points)
    rep = ExperimentReport("bvp", {"n": n, "t": [float(t) for t in ts], "lmin": lmin, "lmax": lmax,
                                   "points": points, "variant": variant, "fit_from": fit_from},
                           ["t", "ell", "err_plain", "err_accel"])
    slopes = {}
    for t in ts:
        exact = bvp_exact_dense(ctx, t)
        errs = {}
        for v in ("plain", "accel"):
            if variant in (v, "both"):
                vals = bvp_series(ctx, t, ells, v)
                errs[v] = [float(np.linalg.norm(vals[e] - exact)) for e in ells]
            else:
                errs[v] = [float("nan")] * len(ells)
        for i, e in enumerate(ells):
            rep.rows.append((float(t), e, errs["plain"][i], errs["accel"][i]))
        sel = [i for i, e in enumerate(ells) if e >= fit_from]
        slopes[f"{t:.6g}"] = {v: loglog_slope([ells[i] for i in sel], [errs[v][i] for i in sel])
                              for v in ("plain", "accel")}
    rep.meta = _meta(seed, slopes=slopes, seconds=time.perf_counter() - start)
    return rep


# ----------------------------------------------------------------------
# square root


def _sqrt_problem(n, c):
    if n == 1:
        # scalar sanity case: the 1x1 stencil centre, interval around it
        A = from_tridiagonal([], [4.0], [])
        return A, (2.0, 8.0)
    return convection_diffusion_2d(n, c), convection_diffusion_spectrum(n, c)


def run_sqrt(n: int = 20, c: float = 10.0, method: int = 3, lvalues=(6, 8, 10, 12, 14, 16, 18, 20),
             seed: int = 0) -> ExperimentReport:
    """Relative errors of ``A^{1/2} b`` on the convection-diffusion operator.

    The reference is the symmetric eigendecomposition when ``c = 0`` and the
    Denman-Beavers iteration otherwise.  ``b`` is uniform on ``[0, 1]``.
    """
    start = time.perf_counter()
    A, spectrum = _sqrt_problem(n, c)
    dense = A.to_dense().real
    b = np.random.default_rng(seed).uniform(0.0, 1.0, dense.shape[0])
    if c == 0 or n == 1:
        S, refname = sqrtm_symmetric(dense), "symmetric_eig"
    else:
        S, refname = sqrtm_denman_beavers(dense), "denman_beavers"
    ref = S @ b
    rep = ExperimentReport("sqrt", {"n": n, "c": c, "method": method, "lvalues": list(lvalues),
                                    "spectrum": list(map(float, spectrum))},
                           ["ell", "terms", "rel_err"])
    for ell in lvalues:
        ra = sqrt_poles(method, int(ell), spectrum)
        x = rational_apply(A, b, ra)
        rep.rows.append((int(ell), len(ra), float(np.linalg.norm(x - ref) / np.linalg.norm(ref))))
    errs = rep.column("rel_err")
    ells = rep.column("ell")
    keep = errs > 0
    rate = float(np.polyfit(ells[keep], np.log10(errs[keep]), 1)[0]) if keep.sum() >= 2 else float("nan")
    rep.meta = _meta(seed, reference=refname, log10_decay_per_term=rate,
                     seconds=time.perf_counter() - start)
    return rep


# ----------------------------------------------------------------------
# Poisson / Sylvester


def run_poisson(pairs=((10, 50), (25, 100), (50, 150)), cap: int = 50 * 200) -> ExperimentReport:
    rep = ExperimentReport("poisson", {"pairs": [list(p) for p in pairs], "cap": cap},
                           ["na", "nb", "rel_err", "seconds"])
    for na, nb in pairs:
        start = time.perf_counter()
        _, err = poisson_demo(int(na), int(nb), cap=cap)
        rep.rows.append((int(na), int(nb), float("nan") if err is None else err, time.perf_counter() - start))
    rep.meta = _meta()
    return rep


# ----------------------------------------------------------------------
# timings


def _median_time(fn, trials):
    fn()  # warm-up, excluded
    ts = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - start)
    return float(np.median(ts))


def bench_n(sizes=tuple(range(100, 1001, 100)), r: int = 3, shifts: int = 50, trials: int = 5,
            m: int = 1, seed: int = 0) -> ExperimentReport:
    """Fast shared-factorization solver vs the sequential baseline for growing ``N``.

    Runs single-threaded (one worker, BLAS limited to one thread).
    """
    rep = ExperimentReport("bench_n", {"sizes": list(sizes), "r": r, "shifts": shifts, "trials": trials, "m": m},
                           ["N", "t_fast", "t_sequential", "ratio"])
    rng = np.random.default_rng(seed)
    with threadpool_limits(limits=1):
        for N in sizes:
            A = random_qs(int(N), m, r, r, seed=seed + int(N))
            sig = list(rng.uniform(-1, 1, shifts) + 1j * rng.uniform(-1, 1, shifts))
            y = rng.uniform(-1, 1, A.shape[0])
            tf = _median_time(lambda: solve_many(A, sig, y, workers=1), trials)
            tb = _median_time(lambda: solve_sequential_baseline(A, sig, y), trials)
            rep.rows.append((int(N), tf, tb, tb / tf))
    rep.meta = _meta(seed, fast_loglog_slope=loglog_slope(rep.column("N"), rep.column("t_fast")))
    return rep


def bench_m(blocks=(200, 400, 800, 1600), N: int = 2, ell: int = 2, r: int = 1, trials: int = 5,
            seed: int = 0) -> ExperimentReport:
    """Run time of the fast solver against the block size ``m`` (single-threaded)."""
    rep = ExperimentReport("bench_m", {"blocks": list(blocks), "N": N, "ell": ell, "r": r, "trials": trials},
                           ["m", "t_fast"])
    rng = np.random.default_rng(seed)
    with threadpool_limits(limits=1):
        for m in blocks:
            A = random_qs(N, int(m), r, r, seed=seed + int(m))
            sig = list(rng.uniform(-1, 1, ell) + 1j * rng.uniform(-1, 1, ell))
            y = rng.uniform(-1, 1, A.shape[0])
            rep.rows.append((int(m), _median_time(lambda: solve_many(A, sig, y, workers=1), trials)))
    rep.meta = _meta(seed, loglog_slope=loglog_slope(rep.column("m"), rep.column("t_fast")))
    return rep
