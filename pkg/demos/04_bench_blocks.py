"""Run time against the number of blocks ``N``.

Compares the shared-factorization solver with a baseline that refactors for
every shift (50 shifts, order 3, 1x1 blocks, single thread).  The fast
solver grows linearly in ``N`` and is roughly twice as fast.
Run:  python demos/04_bench_blocks.py [N1,N2,...]
"""

import sys

from qsshift.experiments import bench_n

sizes = [int(s) for s in sys.argv[1].split(",")] if len(sys.argv) > 1 else [100, 200, 400, 800]
rep = bench_n(sizes=sizes, r=3, shifts=50, trials=3)
print(f"{'N':>6} {'fast [s]':>10} {'baseline [s]':>13} {'ratio':>6}")
for N, tf, tb, ratio in rep.rows:
    print(f"{N:6d} {tf:10.4f} {tb:13.4f} {ratio:6.2f}")
print(f"log-log slope of the fast solver: {rep.meta['fast_loglog_slope']:.2f}")
