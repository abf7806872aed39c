"""Random instances shared by several test modules."""

import numpy as np

from qsshift.core import random_qs


def random_mixed(rng, N_max=40, r_max=3, complex_entries=True, N_min=1):
    """Random quasiseparable matrix with block sizes drawn from {1, 2, 3}."""
    N = int(rng.integers(N_min, N_max + 1))
    sizes = [int(s) for s in rng.integers(1, 4, size=N)]
    r_L, r_U = (int(v) for v in rng.integers(0, r_max + 1, size=2))
    return random_qs(N, sizes, r_L, r_U, seed=int(rng.integers(2 ** 31)), complex_entries=complex_entries)


def random_shifts(rng, k):
    return rng.uniform(-2, 2, k) + 1j * rng.uniform(-2, 2, k)


def rel(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(np.linalg.norm(b), 1e-300)
