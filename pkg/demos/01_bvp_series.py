"""Nonlocal boundary value problem: truncated partial-fraction series.

The solution of ``v' = A v`` on ``(0, 2 pi)`` with prescribed mean ``g`` is
``q_t(A) g``.  It is approximated by a series of shifted solves with
``A^2 + k^2 I``; every shift reuses one factorization of ``A^2``.

The plain truncation keeps terms of size ``1/k^2``; the accelerated one
sums the polynomial part in closed form and keeps terms of size ``1/k^4``.
Run:  python demos/01_bvp_series.py
"""

import numpy as np

from qsshift.experiments import run_bvp

rep = run_bvp(n=100, ts=(np.pi / 2, np.pi / 12), lmin=10, lmax=500, points=12)
print(f"{'t':>8} {'ell':>5} {'plain':>10} {'accel':>10}")
for t, ell, ep, ea in rep.rows:
    print(f"{t:8.4f} {ell:5d} {ep:10.2e} {ea:10.2e}")
for t, s in rep.meta["slopes"].items():
    print(f"t={t}: log-log slope plain {s['plain']:.2f}, accelerated {s['accel']:.2f}")
