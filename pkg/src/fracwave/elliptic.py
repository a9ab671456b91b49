"""Complete elliptic integrals, Jacobi dn, and the alpha = 2 speed/modulus map.

K and E use the arithmetic-geometric mean; dn uses the descending Landen
recursion (see :func:`fracwave.kernels.jacobi_dn_array`).
"""
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .kernels import jacobi_dn_array

PI2 = math.pi ** 2


def _check_modulus(kappa):
    kappa = float(kappa)
    if not (0.0 <= kappa < 1.0):
        raise ValueError("elliptic modulus must satisfy 0 <= kappa < 1, got %r" % kappa)
    return kappa


def _agm_KE(kappa):
    a, b = 1.0, math.sqrt(1.0 - kappa * kappa)
    c = kappa
    total = 0.5 * c * c
    scale = 0.5
    for _ in range(60):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        scale *= 2.0
        total += scale * c * c
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - total)


def complete_elliptic_K(kappa):
    """K(kappa) = integral_0^{pi/2} dtheta / sqrt(1 - kappa^2 sin^2 theta)."""
    return _agm_KE(_check_modulus(kappa))[0]


def complete_elliptic_E(kappa):
    """E(kappa) = integral_0^{pi/2} sqrt(1 - kappa^2 sin^2 theta) dtheta."""
    return _agm_KE(_check_modulus(kappa))[1]


def jacobi_dn(u, kappa):
    """Jacobi dn(u, kappa); scalar in, scalar out, arrays elementwise."""
    kappa = _check_modulus(kappa)
    arr = np.asarray(u, dtype=float)
    out = jacobi_dn_array(np.atleast_1d(arr), kappa)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def speed_denominator(kappa):
    """p(kappa) = (4 kappa^2 - 8) K^2 + 12 K E + pi^2."""
    K, E = _agm_KE(_check_modulus(kappa))
    return (4.0 * kappa * kappa - 8.0) * K * K + 12.0 * K * E + PI2


@lru_cache(maxsize=1)
def kappa_zero():
    """The unique zero of p on (0, 1), located by bisection on [0.99, 0.999]."""
    lo, hi = 0.99, 0.999
    plo = speed_denominator(lo)
    if plo <= 0.0 or speed_denominator(hi) >= 0.0:
        raise RuntimeError("p(kappa) does not change sign on [0.99, 0.999]")
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if speed_denominator(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_below_kappa_zero(kappa):
    kappa = _check_modulus(kappa)
    if kappa >= kappa_zero():
        raise ValueError(
            "kappa = %r is not below kappa_0 = %.12f; the speed relation is "
            "singular there" % (kappa, kappa_zero()))
    return kappa


def speed_from_modulus(kappa):
    """Wave speed of the dnoidal alpha = 2 wave with modulus ``kappa``."""
    kappa = _check_below_kappa_zero(kappa)
    p = speed_denominator(kappa)
    if p <= 0.0:
        raise ValueError("speed denominator p(%r) = %r is not positive" % (kappa, p))
    return PI2 / p


def modulus_from_speed(c):
    """Invert :func:`speed_from_modulus` for ``c > 1/2``."""
    c = float(c)
    if not c > 0.5:
        raise ValueError("dnoidal waves exist only for c > 1/2, got c = %r" % c)
    k0 = kappa_zero()
    gap = 1e-3
    while PI2 / speed_denominator(k0 - gap) <= c:
        gap *= 0.5
        if gap < 1e-13:
            raise ValueError("speed %r is beyond the resolvable dnoidal range" % c)
    f = lambda kap: speed_from_modulus(kap) - c
    return brentq(f, 0.0, k0 - gap, xtol=1e-300, rtol=1e-15, maxiter=500)


def integration_constant_alpha2(kappa):
    """A(c) of the dnoidal wave, as a function of the modulus."""
    kappa = _check_below_kappa_zero(kappa)
    K, E = _agm_KE(kappa)
    m = kappa * kappa
    num = (24.0 * m - 24.0) * K ** 4 + (96.0 - 48.0 * m) * E * K ** 3 - 72.0 * K * K * E * E
    den = (m - 2.0) * K * K + 3.0 * E * K + PI2 / 4.0
    return num / (16.0 * den * den)
