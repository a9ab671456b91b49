import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fracwave import spectral as sp
from fracwave.spectral import Grid, PeriodicField

G = Grid(64)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
fields = arrays(np.float64, 64, elements=finite).map(lambda s: PeriodicField.from_samples(G, s))
alphas = st.floats(0.05, 2.0)


def f(func, n=64):
    return PeriodicField.from_function(Grid(n), func)


@pytest.mark.parametrize("n", [3, 6, 100, 2])
def test_grid_rejects_non_power_of_two(n):
    with pytest.raises(ValueError):
        Grid(n)


def test_grid_spacing_and_nodes():
    g = Grid(512)
    assert g.spacing == 2 * math.pi / 512
    assert g.x[0] == -math.pi and np.allclose(np.diff(g.x), g.spacing)


@pytest.mark.parametrize("alpha", [0.0, -1.0, 2.5])
def test_alpha_range(alpha):
    with pytest.raises(ValueError):
        sp.check_alpha(alpha)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0])
def test_fractional_derivative_examples(alpha):
    assert np.allclose(sp.fractional_derivative(f(np.cos), alpha).samples, np.cos(G.x), atol=1e-13)
    assert np.allclose(sp.fractional_derivative(PeriodicField.constant(G, 5.0), alpha).samples, 0.0, atol=1e-13)
    u = f(lambda x: np.cos(2 * x))
    assert np.allclose(sp.fractional_derivative(u, 2.0).samples, 4 * np.cos(2 * G.x), atol=1e-12)


def test_zero_mean_project_examples():
    assert np.allclose(sp.zero_mean_project(f(lambda x: 1 + np.cos(x))).samples, np.cos(G.x), atol=1e-14)
    assert np.allclose(sp.zero_mean_project(PeriodicField.constant(G, 7.0)).samples, 0.0, atol=1e-14)
    assert np.allclose(sp.zero_mean_project(f(lambda x: np.cos(x) ** 2)).samples, np.cos(2 * G.x) / 2, atol=1e-14)


@pytest.mark.parametrize("alpha,c", [(0.5, 0.8), (1.0, 1.2), (2.0, 3.0)])
def test_b_functional_cosine(alpha, c):
    assert sp.b_functional(f(np.cos), c, alpha) == pytest.approx(math.pi * (2 * c - 1) / 2, rel=1e-13)
    assert sp.b_functional(PeriodicField.constant(G, 0.0), c, alpha) == 0.0


def test_b_functional_dnoidal_against_trapezoid():
    from fracwave import elliptic
    from fracwave.oracles import dnoidal_profile
    c = elliptic.speed_from_modulus(0.5)
    g = Grid(256)
    phi = dnoidal_profile(c, g).field
    dphi = sp.derivative(phi).samples
    integrand = 0.5 * (c * dphi ** 2 + (c - 1) * phi.samples ** 2)
    trap = g.spacing * float(np.sum(integrand))
    assert sp.b_functional(phi, c, 2.0) == pytest.approx(trap, rel=1e-10)


def test_conserved_quantities_examples():
    assert sp.conserved_quantities(PeriodicField.constant(G, 0.0), 1.0) == (0.0, 0.0, 0.0)
    E, P, M = sp.conserved_quantities(f(np.cos), 1.3)
    assert E == pytest.approx(math.pi / 2, rel=1e-13)
    assert P == pytest.approx(math.pi, rel=1e-13)
    assert abs(M) < 1e-14


def test_conserved_quantities_against_quadrature():
    from scipy.integrate import quad
    a, b = 0.3, 0.1
    u = f(lambda x: a * np.cos(x) + b * np.cos(2 * x), 256)
    # alpha = 1: D^{1/2} u has the same energy as |k|^{1/2} scaled modes
    half = lambda x: a * np.cos(x) + b * math.sqrt(2) * np.cos(2 * x)
    grad = quad(lambda x: half(x) ** 2, -math.pi, math.pi, epsabs=1e-14)[0]
    cube = quad(lambda x: (a * np.cos(x) + b * np.cos(2 * x)) ** 3, -math.pi, math.pi, epsabs=1e-14)[0]
    sq = quad(lambda x: (a * np.cos(x) + b * np.cos(2 * x)) ** 2, -math.pi, math.pi, epsabs=1e-14)[0]
    E, P, M = sp.conserved_quantities(u, 1.0)
    assert E == pytest.approx(0.5 * (grad - cube / 3), abs=1e-10)
    assert P == pytest.approx(0.5 * (grad + sq), abs=1e-10)
    assert abs(M) < 1e-12


@given(fields)
def test_round_trip(u):
    back = PeriodicField.from_coeffs(G, u.coeffs).samples
    assert np.max(np.abs(back - u.samples)) <= 1e-12 * max(1.0, u.sup())


@given(fields)
def test_parseval(u):
    trap = G.spacing * float(np.sum(u.samples ** 2))
    assert sp.inner(u, u) == pytest.approx(trap, rel=1e-10, abs=1e-12)


@given(fields, st.sampled_from([0.5, 1.0, 2.0]))
def test_semigroup(u, alpha):
    half = sp.fractional_derivative(sp.fractional_derivative(u, alpha / 2), alpha / 2)
    full = sp.fractional_derivative(u, alpha)
    assert np.max(np.abs(half.samples - full.samples)) <= 1e-12 * max(1.0, u.sup()) * G.n_points ** alpha


@given(fields, fields)
def test_projection_idempotent_and_self_adjoint(u, v):
    p = sp.zero_mean_project(u)
    assert np.array_equal(sp.zero_mean_project(p).coeffs, p.coeffs)
    lhs, rhs = sp.inner(p, v), sp.inner(u, sp.zero_mean_project(v))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(fields, alphas)
def test_derivative_commutes_with_grid_shift(u, alpha):
    rolled = PeriodicField.from_samples(G, np.roll(u.samples, 1))
    a = sp.fractional_derivative(rolled, alpha).samples
    b = np.roll(sp.fractional_derivative(u, alpha).samples, 1)
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, u.sup()) * G.n_points ** alpha


@given(st.floats(-4, 4))
def test_shift_is_translation(y):
    u = f(lambda x: np.cos(x) + 0.3 * np.sin(3 * x))
    assert np.allclose(sp.shift(u, y).samples, np.cos(G.x - y) + 0.3 * np.sin(3 * (G.x - y)), atol=1e-12)


def test_product_zeroes_nyquist_and_is_real():
    u = f(lambda x: np.cos(16 * x) + np.cos(x))
    p = sp.product(u, u)
    assert p.coeffs[-1] == 0.0
    assert np.isrealobj(p.samples)


def test_resample_preserves_band_limited_field():
    u = f(lambda x: np.cos(x) + 0.1 * np.cos(5 * x), 32)
    up = sp.resample(u, Grid(128))
    assert np.allclose(up.samples, np.cos(up.grid.x) + 0.1 * np.cos(5 * up.grid.x), atol=1e-13)


def test_sobolev_norm_weight():
    u = f(lambda x: np.cos(2 * x))
    assert sp.sobolev_norm(u, 1.0) == pytest.approx(math.sqrt(5 * math.pi), rel=1e-13)
