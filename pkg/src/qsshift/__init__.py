"""Shifted linear systems with block quasiseparable matrices.

One shift-independent factorization ``A + sigma I = V T_sigma`` is shared
by all shifts; each further shift costs a linear-time QR sweep.  On top of
the solver sit matrix functions given by partial fractions
(:mod:`qsshift.matfun`) and Sylvester equations with a small dense
coefficient (:mod:`qsshift.sylvester`).
"""

from .core import (BlockStructure, BlockVector, QSMatrix, convection_diffusion_2d, from_block_tridiagonal,
                   from_tridiagonal, gemv_powers, identity, matvec, qs_product, random_qs, to_dense)
from .kernels import ExactSingular, SingularDiagonal
from .matfun import (RationalApproximation, bvp_context, bvp_exact_dense, bvp_series_accel, bvp_series_plain,
                     load_rational, rational_apply, save_rational, sqrt_poles)
from .shift_solver import (SharedFactorization, ShiftFactorization, SingularShift, shared_factorize,
                           solve_many, solve_sequential_baseline, solve_shifted)
from .sylvester import poisson_demo, schur_reduce_and_solve, solve_diag, solve_lower_triangular

__version__ = "0.1.0"
