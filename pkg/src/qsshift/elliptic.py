"""Complete elliptic integrals and Jacobi elliptic functions via the AGM.

Moduli are passed as ``k`` together with the complementary modulus
``kp = sqrt(1 - k**2)``; giving both avoids the cancellation in
``1 - k**2`` when ``k`` is close to one.
"""

from __future__ import annotations

import numpy as np

__all__ = ["ellipk", "ellipkkp", "ellipj", "ellipj_complex"]

_TOL = 1e-16
_MAXIT = 40


def _kp(k, kp):
    if kp is None:
        kp = np.sqrt((1.0 - k) * (1.0 + k))
    return kp


def _agm(a, b):
    for _ in range(_MAXIT):
        if abs(a - b) <= _TOL * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return 0.5 * (a + b)


def ellipk(k: float, kp: float | None = None) -> float:
    """Complete elliptic integral of the first kind ``K(k) = pi / (2 AGM(1, k'))``."""
    kp = _kp(k, kp)
    if not (0.0 <= k <= 1.0) or not kp > 0.0:
        raise ValueError(f"modulus must lie in [0, 1), got k={k}, kp={kp}")
    return np.pi / (2.0 * _agm(1.0, kp))


def ellipkkp(k: float, kp: float | None = None) -> tuple[float, float]:
    """Return ``(K, K')``, the quarter periods for moduli ``k`` and ``k'``."""
    kp = _kp(k, kp)
    return ellipk(k, kp), ellipk(kp, k)


def ellipj(u, k: float, kp: float | None = None):
    """Jacobi ``sn, cn, dn`` of real argument ``u`` by descending Landen transformation.

    The AGM sequence ``a_n, b_n, c_n`` is run until ``c_n`` is below
    ``1e-16 a_n``; the amplitude ``phi = 2^n a_n u`` is then carried back
    through ``phi_{j-1} = (phi_j + asin(c_j sin(phi_j) / a_j)) / 2``.
    """
    kp = _kp(k, kp)
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    a = [1.0]
    c = [k]
    b = kp
    while abs(c[-1]) > _TOL * a[-1]:
        if len(a) > _MAXIT:
            raise RuntimeError("AGM did not converge")
        an = a[-1]
        a.append(0.5 * (an + b))
        c.append(c[-1] * c[-1] / (4.0 * a[-1]))
        b = np.sqrt(an * b)
    n = len(a) - 1
    phi = (2.0 ** n) * a[n] * u
    phi_prev = phi
    for j in range(n, 0, -1):
        phi_prev = phi
        phi = 0.5 * (np.arcsin(c[j] * np.sin(phi) / a[j]) + phi)
    sn = np.sin(phi)
    cn = np.cos(phi)
    dn = cn / np.cos(phi_prev - phi) if n > 0 else np.sqrt(1.0 - k * k * sn * sn)
    return sn, cn, dn


def ellipj_complex(t, k: float, kp: float | None = None):
    """Jacobi ``sn, cn, dn`` of complex argument via the addition theorem.

    Uses the values at ``Re t`` with modulus ``k`` and at ``Im t`` with the
    complementary modulus ``k'`` (Jacobi imaginary transformation).
    """
    kp = _kp(k, kp)
    t = np.asarray(t, dtype=complex)
    s, c, d = ellipj(t.real, k, kp)
    s1, c1, d1 = ellipj(t.imag, kp, k)
    den = c1 * c1 + (k * s * s1) ** 2
    sn = (s * d1 + 1j * c * d * s1 * c1) / den
    cn = (c * c1 - 1j * s * d * s1 * d1) / den
    dn = (d * c1 * d1 - 1j * k * k * s * c * s1) / den
    return sn, cn, dn
