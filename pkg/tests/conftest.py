import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def dnoidal_wave():
    from fracwave.petviashvili import SolverConfig, solve_wave_at_speed
    return solve_wave_at_speed(1.2181, 2.0, SolverConfig(n_points=4096))


@pytest.fixture(scope="session")
def rbo_wave():
    from fracwave.petviashvili import SolverConfig, solve_wave_at_speed
    return solve_wave_at_speed(1.2192, 1.0, SolverConfig(n_points=512))


@pytest.fixture(scope="session")
def small_wave():
    from fracwave.petviashvili import SolverConfig, solve_wave_at_speed
    return solve_wave_at_speed(1.2181, 2.0, SolverConfig(n_points=256))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
