import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracwave import elliptic as el
from fracwave.oracles import dnoidal_profile
from fracwave.spectral import Grid, inner


def K_quad(k):
    return quad(lambda t: 1 / math.sqrt(1 - (k * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def E_quad(k):
    return quad(lambda t: math.sqrt(1 - (k * math.sin(t)) ** 2), 0, math.pi / 2, epsabs=1e-13, epsrel=1e-13, limit=200)[0]


def test_K_E_at_zero():
    assert el.complete_elliptic_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert el.complete_elliptic_E(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("k", [0.1, 0.5, 0.8, 0.95, 0.994])
def test_K_E_against_quadrature(k):
    assert abs(el.complete_elliptic_K(k) - K_quad(k)) <= 1e-11
    assert abs(el.complete_elliptic_E(k) - E_quad(k)) <= 1e-11


def test_E_tends_to_one():
    assert el.complete_elliptic_E(1 - 1e-12) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("k", [-0.1, 1.0, 1.5])
def test_modulus_range(k):
    with pytest.raises(ValueError):
        el.complete_elliptic_K(k)


@given(st.floats(0.0, 0.999))
def test_E_below_K(k):
    K, E = el.complete_elliptic_K(k), el.complete_elliptic_E(k)
    assert E <= K
    if k > 1e-4:
        assert E < K


def test_dn_examples():
    assert el.jacobi_dn(0.0, 0.7) == 1.0
    assert el.jacobi_dn(3.3, 0.0) == 1.0
    K = el.complete_elliptic_K(0.5)
    assert el.jacobi_dn(K, 0.5) == pytest.approx(math.sqrt(1 - 0.25), abs=1e-14)


@given(st.floats(-20, 20), st.floats(0.0, 0.999))
def test_dn_range(u, k):
    v = el.jacobi_dn(u, k)
    assert math.sqrt(1 - k * k) - 1e-14 <= v <= 1 + 1e-14


def test_kappa_zero():
    k0 = el.kappa_zero()
    assert abs(k0 - 0.994) < 1e-3
    assert abs(el.speed_denominator(k0)) < 1e-6


def test_speed_limits_and_monotonicity():
    assert el.speed_denominator(0.0) == pytest.approx(2 * math.pi ** 2, rel=1e-14)
    assert el.speed_from_modulus(1e-6) == pytest.approx(0.5, abs=1e-9)
    assert el.speed_from_modulus(el.kappa_zero() - 1e-9) > 1e3
    cs = [el.speed_from_modulus(k) for k in np.arange(0.1, 1.0, 0.1)]
    assert all(b > a for a, b in zip(cs, cs[1:]))


def test_modulus_from_speed():
    assert el.modulus_from_speed(0.5 + 1e-9) < 0.02
    assert el.modulus_from_speed(el.speed_from_modulus(0.7)) == pytest.approx(0.7, abs=1e-10)
    assert el.modulus_from_speed(1.2181) == pytest.approx(0.98515158, abs=1e-8)
    with pytest.raises(ValueError):
        el.modulus_from_speed(0.5)


@given(st.floats(0.01, 0.99))
def test_round_trip_property(k):
    # c - 1/2 ~ k^4 near 0, so the inverse loses digits like eps / k^3
    tol = 1e-10 + 1e-13 / k ** 3
    assert el.modulus_from_speed(el.speed_from_modulus(k)) == pytest.approx(k, abs=tol)


def test_integration_constant():
    assert el.integration_constant_alpha2(1e-6) < 1e-10
    ks = np.linspace(0.02, 0.99, 20)
    A = [el.integration_constant_alpha2(k) for k in ks]
    assert all(b > a for a, b in zip(A, A[1:]))
    c = el.speed_from_modulus(0.5)
    phi = dnoidal_profile(c, Grid(256)).field
    assert inner(phi, phi) / (4 * math.pi) == pytest.approx(el.integration_constant_alpha2(0.5), rel=1e-8)
