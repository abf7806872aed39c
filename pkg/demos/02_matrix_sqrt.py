"""Square root of a convection-diffusion operator times a vector.

``A^{1/2} b`` is approximated by ``sum_k kappa_k (omega_k^2 I - A)^{-1} A b``
with poles and weights from conformally mapped quadrature rules; all terms
share one factorization of ``-A``.  The error decreases geometrically in the
number of terms, faster for the square-root-specific map (method 3).
Run:  python demos/02_matrix_sqrt.py [n]     (matrix order n^2, default 20)
"""

import sys

from qsshift.experiments import run_sqrt

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20
for method in (2, 3):
    rep = run_sqrt(n=n, c=10.0, method=method, lvalues=(6, 8, 10, 12, 14, 16))
    print(f"method {method} (reference: {rep.meta['reference']}), n={n}, c=10")
    for ell, terms, err in rep.rows:
        print(f"  ell={ell:3d}  terms={terms:3d}  rel err {err:.2e}")
