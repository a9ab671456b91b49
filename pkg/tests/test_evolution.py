import numpy as np
import pytest

from fracwave import evolution as ev
from fracwave.errors import BlowupDetected
from fracwave.petviashvili import SolverConfig, solve_wave_at_speed
from fracwave.spectral import Grid, PeriodicField, derivative, shift

G = Grid(64)


def test_rhs_zero():
    assert np.array_equal(ev.rhs(PeriodicField.constant(G, 0.0), 1.0).samples, np.zeros(64))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_rhs_two_mode_hand_value(alpha):
    # u + u^2/2 = 1/4 + cos x + cos(2x)/4 and -d/dx (1 + D^alpha)^{-1} maps cos kx to k sin kx / (1 + k^alpha)
    u = PeriodicField.from_function(G, np.cos)
    want = 0.5 * np.sin(G.x) + np.sin(2 * G.x) / (2 * (1 + 2 ** alpha))
    assert np.allclose(ev.rhs(u, alpha).samples, want, atol=1e-14)


def test_rhs_steady_in_moving_frame(small_wave):
    sol = small_wave
    r = ev.rhs(sol.phi, sol.alpha).samples + sol.c * derivative(sol.phi).samples
    assert np.max(np.abs(r)) <= 1e-7
    assert np.max(np.abs(r)) <= 1e-6 * sol.phi.sup()


def test_dt_bound():
    assert ev.max_stable_dt(G, 2.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ev.EvolutionState(PeriodicField.constant(G, 0.0), 0.0, 10.0, 2.0)
    with pytest.raises(ValueError):
        ev.EvolutionState(PeriodicField.constant(G, 0.0), 0.0, -1e-3, 2.0)


def test_zero_stays_zero():
    st = ev.EvolutionState(PeriodicField.constant(G, 0.0), 0.0, 1e-2, 1.0, stride=10)
    st = ev.evolve(st, 1.0)
    assert st.u.sup() == 0.0
    assert all(row[1:] == (0.0, 0.0, 0.0, 0.0) for row in st.ledger)
    assert st.t == pytest.approx(1.0)


def test_step_matches_evolve():
    u = PeriodicField.from_function(G, lambda x: 0.3 * np.cos(x))
    a = ev.EvolutionState(u, 0.0, 1e-2, 1.5, stride=5)
    for _ in range(10):
        a = ev.step_rk4(a)
    b = ev.evolve(ev.EvolutionState(u, 0.0, 1e-2, 1.5, stride=5), 0.1)
    assert np.max(np.abs(a.u.samples - b.u.samples)) <= 1e-15
    assert len(a.ledger) == len(b.ledger) == 3


def test_blowup_detected():
    u = PeriodicField.from_function(G, lambda x: 0.3 * np.cos(x))
    st = ev.EvolutionState(u, 0.0, 1e-2, 1.0, stride=1, sup0=1e-6)
    with pytest.raises(BlowupDetected):
        ev.step_rk4(st)


def test_transport_and_conservation(small_wave):
    err, st = ev.transport_error(small_wave, 10.0, 1e-3, stride=500)
    assert err <= 1e-5
    L = np.array(st.ledger)
    assert np.max(np.abs(L[:, 2] - L[0, 2])) / L[0, 2] <= 1e-8
    assert np.max(np.abs(L[:, 3] - L[0, 3])) <= 1e-10
    assert np.max(np.abs(L[:, 1] - L[0, 1])) / abs(L[0, 1]) <= 1e-6


def test_conservation_alpha1():
    sol = solve_wave_at_speed(0.9, 1.0, SolverConfig(n_points=256))
    u0 = PeriodicField.from_samples(sol.grid, sol.phi.samples + 0.05 * np.cos(3 * sol.grid.x))
    st = ev.evolve(ev.EvolutionState(u0, 0.0, 1e-3, 1.0, stride=500), 10.0)
    L = np.array(st.ledger)
    assert np.max(np.abs(L[:, 2] - L[0, 2])) / L[0, 2] <= 1e-8
    assert np.max(np.abs(L[:, 3] - L[0, 3])) <= 1e-10


def test_fourth_order(small_wave):
    errs = []
    for dt in (0.1, 0.05):
        st = ev.evolve(ev.EvolutionState(small_wave.phi, 0.0, dt, 2.0, stride=10**6), 1.0)
        exact = shift(small_wave.phi, small_wave.c * st.t)
        errs.append(np.max(np.abs(st.u.samples - exact.samples)))
    assert 14 <= errs[0] / errs[1] <= 18


def test_orbit_distance_finds_shift(small_wave):
    phi = small_wave.phi
    rho, y = ev.orbit_distance(shift(phi, 0.123), phi, 2.0)
    assert rho <= 1e-9
    assert abs(y + 0.123) <= 1e-8 or abs(abs(y + 0.123) - 2 * np.pi) <= 1e-8


def test_orbital_drift(small_wave):
    sol = small_wave
    rho, _ = ev.orbital_drift(sol.phi, sol, 2.0, 1e-3)
    assert rho <= 1e-5
    record = []
    u0 = PeriodicField.from_samples(sol.grid, 1.001 * sol.phi.samples)
    rho, st = ev.orbital_drift(u0, sol, 2.0, 1e-3, stride=200, record=record)
    assert rho <= 0.1
    assert len(record) == 11 and record[-1][0] == pytest.approx(2.0)


def test_orbital_drift_grid_mismatch(small_wave):
    with pytest.raises(ValueError):
        ev.orbital_drift(PeriodicField.constant(Grid(128), 0.0), small_wave, 1.0, 1e-3)
