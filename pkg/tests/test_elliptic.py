import numpy as np
import pytest
from scipy import special

from qsshift.elliptic import ellipj, ellipj_complex, ellipk, ellipkkp


@pytest.mark.parametrize("k", [0.0, 0.1, 0.5, 0.9, 0.999, 1 - 1e-10])
def test_ellipk_matches_scipy(k):
    ref = special.ellipkm1((1 - k) * (1 + k))
    assert abs(ellipk(k) - ref) <= 1e-13 * ref


def test_ellipk_small_complement():
    kp = 1e-9
    k = np.sqrt(1 - kp * kp)
    K, Kp = ellipkkp(k, kp)
    assert abs(K - special.ellipkm1(kp * kp)) <= 1e-13 * K
    assert abs(Kp - np.pi / 2) <= 1e-15
    with pytest.raises(ValueError):
        ellipk(1.0)


@pytest.mark.parametrize("k", [0.0, 0.3, 0.8, 0.99])
def test_ellipj_matches_scipy(k):
    u = np.linspace(-3, 5, 41)
    sn, cn, dn = ellipj(u, k)
    ref = special.ellipj(u, k * k)
    for a, b in zip((sn, cn, dn), ref[:3]):
        assert np.max(np.abs(a - b)) <= 1e-13


def test_ellipj_complex_identities():
    k = 0.6
    kp = 0.8
    K, Kp = ellipkkp(k, kp)
    t = np.array([0.3 + 0.2j, -0.7 + 0.5j * Kp, 1.1 + 0.1j])
    sn, cn, dn = ellipj_complex(t, k, kp)
    assert np.max(np.abs(sn ** 2 + cn ** 2 - 1)) <= 1e-13
    assert np.max(np.abs(dn ** 2 + k * k * sn ** 2 - 1)) <= 1e-13
    real = ellipj(t.real, k, kp)
    sn0, cn0, dn0 = ellipj_complex(t.real, k, kp)
    assert np.allclose(sn0, real[0], atol=1e-15) and np.allclose(dn0, real[2], atol=1e-15)
    # sn(K) = 1
    assert abs(ellipj_complex(K + 0j, k, kp)[0] - 1) <= 1e-13
