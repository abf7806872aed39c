"""Acceptance suite: one test per criterion, reported in a summary section.

Each test records a one-line measurement in ``detail`` before asserting, so
the summary shows the measured numbers whether the criterion passes or not.
Run with ``pytest tests/test_acceptance.py -v``.
"""

import time

import numpy as np
import pytest

from qsshift.core import random_qs
from qsshift.experiments import bench_m, bench_n, run_bvp, run_poisson, run_sqrt
from qsshift.kernels import dense_solve, qr, symmetric_eig
from qsshift.reference import assemble_r, assemble_t, assemble_u, assemble_v
from qsshift.shift_solver import (SingularShift, factorization_count, reset_counters, shared_factorize,
                                  shift_factorize, solve_many)
from qsshift.sylvester import solve_lower_triangular

from helpers import random_mixed, random_shifts

U = np.finfo(float).eps / 2


def note(request, text):
    request.node.user_properties[:] = [p for p in request.node.user_properties if p[0] != "detail"]
    request.node.user_properties.append(("detail", text))
    print(text)


@pytest.mark.criterion(1, "oracle equivalence of solve_many vs dense LU")
def test_criterion_1_oracle_equivalence(request):
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    worst_err = worst_res = worst_bwd = 0.0
    checked = skipped = false_singular = 0
    for _ in range(200):
        A = random_mixed(rng, N_max=40, r_max=3)
        D = A.to_dense()
        n = D.shape[0]
        shifts = random_shifts(rng, 5)
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        try:
            xs = solve_many(A, shifts, y)
        except SingularShift:
            # redo shift by shift so the nonsingular ones are still checked
            xs = []
            for s in shifts:
                try:
                    xs.append(solve_many(A, [s], y)[0])
                except SingularShift:
                    xs.append(None)
        for s, x in zip(shifts, xs):
            M = D + s * np.eye(n)
            if np.linalg.cond(M) > 1e6:
                skipped += 1
                continue
            if x is None:
                false_singular += 1
                continue
            checked += 1
            ref = dense_solve(M, y)
            r = np.linalg.norm(M @ x - y)
            worst_err = max(worst_err, np.linalg.norm(x - ref) / np.linalg.norm(ref))
            worst_res = max(worst_res, r / np.linalg.norm(y))
            worst_bwd = max(worst_bwd, r / ((np.linalg.norm(D) + abs(s)) * np.linalg.norm(x)))
    elapsed = time.perf_counter() - start
    note(request, f"{checked} systems ({skipped} with cond > 1e6 skipped, {false_singular} well-conditioned "
                  f"reported singular); max rel err {worst_err:.2e}, "
                  f"max rel residual {worst_res:.2e}, max backward error {worst_bwd:.2e}, {elapsed:.1f} s")
    assert checked > 500 and false_singular == 0
    assert worst_err <= 1e-9
    assert worst_res <= 1e-11
    assert elapsed <= 60


@pytest.mark.criterion(2, "factorization identities V T = A + sigma I and U R = T")
def test_criterion_2_factorization_identities(request):
    rng = np.random.default_rng(7)
    worst_v = worst_u = 0.0
    for _ in range(50):
        A = random_mixed(rng, N_max=10)
        D = A.to_dense()
        n = D.shape[0]
        F = shared_factorize(A)
        V = assemble_v(F)
        s = complex(random_shifts(rng, 1)[0])
        T = assemble_t(F, s)
        S = shift_factorize(F, s)
        M = D + s * np.eye(n)
        worst_v = max(worst_v, np.linalg.norm(V @ T - M) / np.linalg.norm(M))
        worst_u = max(worst_u, np.linalg.norm(assemble_u(S) @ assemble_r(S) - T) / np.linalg.norm(T))
    note(request, f"max ||VT - (A+sI)||/||A+sI|| = {worst_v:.2e}, max ||UR - T||/||T|| = {worst_u:.2e}")
    assert worst_v <= 1e-12
    assert worst_u <= 1e-12


@pytest.mark.criterion(3, "boundary value problem series: accuracy ratios and decay slopes")
def test_criterion_3_bvp_series(request):
    start = time.perf_counter()
    rep = run_bvp(n=100, ts=(np.pi / 2,), lmin=10, lmax=500, points=25, fit_from=50)
    elapsed = time.perf_counter() - start
    ell = rep.column("ell")
    plain, accel = rep.column("err_plain"), rep.column("err_accel")
    i10, i500 = int(np.nonzero(ell == 10)[0][0]), int(np.nonzero(ell == 500)[0][0])
    slopes = next(iter(rep.meta["slopes"].values()))
    note(request, f"err plain(500) {plain[i500]:.2e}, accel(10) {accel[i10]:.2e}, accel(500) {accel[i500]:.2e}; "
                  f"slope accel {slopes['accel']:.2f} (need <= -2.0), plain {slopes['plain']:.2f} "
                  f"(need in [-1.6, -0.5]); {elapsed:.1f} s")
    assert accel[i500] <= plain[i500] / 10
    assert accel[i500] <= accel[i10] / 100
    assert slopes["accel"] <= -2.0
    assert -1.6 <= slopes["plain"] <= -0.5
    assert elapsed <= 120


# published relative errors at l = 6, 8, 10 for the 2500 x 2500 operator
REFERENCE_TREND = {6: 3.25e-5, 8: 6.77e-7, 10: 9.90e-9}


def _check_sqrt_trend(rep):
    errs = dict(zip(rep.column("ell").astype(int), rep.column("rel_err")))
    steps = []
    for a, b in ((6, 8), (8, 10)):
        ours, expected = errs[a] / errs[b], REFERENCE_TREND[a] / REFERENCE_TREND[b]
        steps.append((a, b, ours, expected, errs[a] <= 1e-11))
    return errs, steps


def _sqrt_detail(errs, steps):
    e = ", ".join(f"l={k}: {v:.2e}" for k, v in sorted(errs.items()))
    s = ", ".join(f"{a}->{b}: x{o:.1f} (ref x{p:.1f})" for a, b, o, p, _ in steps)
    return f"{e}; per-step reduction {s}"


def _assert_sqrt_trend(steps):
    for a, b, ours, expected, floor in steps:
        if floor:  # already at the accuracy floor; no further decrease required
            continue
        assert ours >= 10, f"step {a}->{b} reduces the error only by {ours:.1f}"
        assert expected / 10 <= ours <= expected * 10, f"step {a}->{b}: x{ours:.1f} vs reference x{expected:.1f}"


@pytest.mark.criterion(4, "square root, method3, n=20 grid, c=10: geometric error decrease")
def test_criterion_4_sqrt_desk_scale(request):
    rep = run_sqrt(n=20, c=10.0, method=3, lvalues=(6, 8, 10))
    errs, steps = _check_sqrt_trend(rep)
    note(request, _sqrt_detail(errs, steps))
    _assert_sqrt_trend(steps)


@pytest.mark.criterion(4, "square root, method3, full 2500 x 2500 run")
def test_criterion_4_sqrt_full_scale(request):
    start = time.perf_counter()
    rep = run_sqrt(n=50, c=10.0, method=3, lvalues=(6, 8, 10))
    elapsed = time.perf_counter() - start
    errs, steps = _check_sqrt_trend(rep)
    note(request, _sqrt_detail(errs, steps) + f"; {elapsed:.0f} s")
    _assert_sqrt_trend(steps)
    # same operator size as the reference table: compare the values themselves too
    for ell, ref in REFERENCE_TREND.items():
        assert ref / 10 <= errs[ell] <= ref * 10, f"l={ell}: {errs[ell]:.2e} vs reference {ref:.2e}"
    assert elapsed <= 600


@pytest.mark.criterion(5, "Poisson equation via the Sylvester solver vs Kronecker oracle")
def test_criterion_5_poisson(request):
    start = time.perf_counter()
    rep = run_poisson(((10, 50), (25, 100), (50, 150)))
    elapsed = time.perf_counter() - start
    errs = rep.column("rel_err")
    note(request, ", ".join(f"({int(a)},{int(b)}): {e:.2e}" for a, b, e in
                            zip(rep.column("na"), rep.column("nb"), errs)) + f"; {elapsed:.1f} s")
    assert np.all(errs <= 1e-12)
    assert elapsed <= 120


@pytest.mark.criterion(6, "timings vs N: speed-up over sequential baseline and linear growth")
def test_criterion_6_bench_n(request):
    rep = bench_n(sizes=(200, 400, 800), r=3, shifts=50, trials=5)
    t = dict(zip(rep.column("N").astype(int), rep.column("t_fast")))
    ratios = rep.column("ratio")
    g1, g2 = t[400] / t[200], t[800] / t[400]
    note(request, "speed-up " + ", ".join(f"N={int(n)}: {r:.2f}" for n, r in zip(rep.column("N"), ratios))
         + f"; t(400)/t(200) {g1:.2f}, t(800)/t(400) {g2:.2f}")
    assert np.all(ratios >= 1.5)
    assert g1 <= 2.6 and g2 <= 2.6


@pytest.mark.criterion(7, "timings vs block size m: cubic growth")
def test_criterion_7_bench_m(request):
    rep = bench_m(blocks=(200, 400, 800, 1600), N=2, ell=2, r=1, trials=5)
    slope = rep.meta["loglog_slope"]
    note(request, ", ".join(f"m={int(m)}: {s:.3f} s" for m, s in zip(rep.column("m"), rep.column("t_fast")))
         + f"; log-log slope {slope:.2f} (need in [2.5, 3.3])")
    assert 2.5 <= slope <= 3.3


@pytest.mark.criterion(8, "kernel properties: qr and symmetric_eig bounds")
def test_criterion_8_kernels(request):
    rng = np.random.default_rng(8)
    start = time.perf_counter()
    worst_q = worst_r = worst_e = 0.0
    for i in range(500):
        p, c = int(rng.integers(1, 9)), int(rng.integers(0, 9))
        M = rng.normal(size=(p, c)) + 1j * rng.normal(size=(p, c))
        f = qr(M)
        q, r = f.q, f.r
        worst_q = max(worst_q, np.linalg.norm(q.conj().T @ q - np.eye(p)) / (U * p))
        if c:
            worst_r = max(worst_r, np.linalg.norm(q @ r - M) / (U * np.linalg.norm(M)))
        assert np.all(np.tril(r, -1) == 0)
        d = np.diagonal(r)
        assert np.all(d.imag == 0) and np.all(d.real >= 0)
        n = int(rng.integers(1, 9))
        S = rng.normal(size=(n, n))
        S = S + S.T
        w, V = symmetric_eig(S)
        assert np.all(np.diff(w) >= 0)
        worst_e = max(worst_e, np.linalg.norm(V @ np.diag(w) @ V.T - S) / np.linalg.norm(S))
    elapsed = time.perf_counter() - start
    note(request, f"max ||q^H q - I||/(u p) = {worst_q:.1f}, max ||qr - M||/(u ||M||) = {worst_r:.1f} (limit 50); "
                  f"max eig reconstruction {worst_e:.2e} (limit 1e-12); {elapsed:.1f} s")
    assert worst_q <= 50 and worst_r <= 50
    assert worst_e <= 1e-12
    assert elapsed <= 30


@pytest.mark.criterion(9, "Sylvester residuals and one shared factorization per solve")
def test_criterion_9_sylvester(request):
    rng = np.random.default_rng(9)
    worst = 0.0
    counts = []
    for _ in range(50):
        A = random_mixed(rng, N_max=20)
        n = A.shape[0]
        ell = int(rng.integers(1, 7))
        L = np.tril(rng.normal(size=(ell, ell)) + 1j * rng.normal(size=(ell, ell)))
        Y = rng.normal(size=(n, ell)) + 1j * rng.normal(size=(n, ell))
        reset_counters()
        X = solve_lower_triangular(A, L, Y)
        counts.append(factorization_count())
        D = A.to_dense()
        res = np.linalg.norm(D @ X + X @ L - Y)
        scale = (np.linalg.norm(D) + np.linalg.norm(L)) * max(np.linalg.norm(X), np.linalg.norm(Y))
        worst = max(worst, res / scale)
    note(request, f"max scaled residual {worst:.2e} (limit 1e-10); factorizations per solve {sorted(set(counts))}")
    assert worst <= 1e-10
    assert all(c == 1 for c in counts)


def test_random_instances_cover_the_stated_ranges():
    rng = np.random.default_rng(20240101)
    mats = [random_mixed(rng, N_max=40, r_max=3) for _ in range(50)]
    assert max(A.N for A in mats) <= 40
    assert {s for A in mats for s in A.sizes} == {1, 2, 3}
    assert max(max(A.rl + A.ru, default=0) for A in mats) == 3
    assert random_qs(3, 1, 1, 1, seed=0).N == 3
