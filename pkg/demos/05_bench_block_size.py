"""Run time against the block size ``m`` (two blocks, two shifts, order one).

The work is dominated by dense QR factorizations of ``m x m`` blocks, so the
operation count grows like ``m^3``; the measured slope also reflects how the
BLAS throughput changes with ``m`` on the machine at hand.
Run:  python demos/05_bench_block_size.py [m1,m2,...]
"""

import sys

from qsshift.experiments import bench_m

blocks = [int(s) for s in sys.argv[1].split(",")] if len(sys.argv) > 1 else [100, 200, 400, 800]
rep = bench_m(blocks=blocks, trials=3)
for m, t in rep.rows:
    print(f"m={m:5d}  {t:.4f} s")
print(f"log-log slope: {rep.meta['loglog_slope']:.2f}")
