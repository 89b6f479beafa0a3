import numpy as np
import pytest

from oscbath import superop as so
from oscbath.bath import BathSpec, SpectralFamily, spectral_density
from oscbath.coeffs import default_table_grid, tabulate
from oscbath.evolve import evolve_density
from oscbath.oracle import (RecurrenceError, discretize, exact_evolution, hamiltonian_matrix,
                            initial_covariance, is_physical, propagator, symplectic_form)

HARD = SpectralFamily("drude_hard", 1.0, 10.0)
SPEC = BathSpec(0.05, 1.0, HARD)


def test_flat_density_two_modes():
    bath = discretize(SPEC, 2, band=(0.0, 2.0), density=lambda w: np.ones_like(w))
    np.testing.assert_allclose(bath.omegas, [0.5, 1.5])
    assert bath.weights[0] == bath.weights[1] == 1.0


def test_moment_sum_matches_integral():
    from scipy.integrate import quad
    bath = discretize(SPEC, 300)
    ref = quad(lambda w: w * spectral_density(HARD, w), 0, 10, points=[1.0])[0]
    assert abs(np.sum(bath.omegas * bath.weights ** 2) / ref - 1) < 1e-3


def test_recurrence_time():
    bath = discretize(SPEC, 300, band=(0.0, 10.0))
    assert bath.recurrence_time == pytest.approx(2 * np.pi * 30)
    with pytest.raises(RecurrenceError):
        discretize(SPEC, 300, band=(0.0, 10.0), t_window=200.0)
    with pytest.raises(RecurrenceError):
        exact_evolution("fv", bath, 0.05, 1.0, np.linspace(0, 190, 11))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        discretize(SPEC, 1)
    with pytest.raises(ValueError):
        hamiltonian_matrix("fv_rwa", discretize(SPEC, 10), 0.1)


@pytest.mark.parametrize("kind", ["fv", "rw"])
def test_propagator_is_symplectic(kind):
    bath = discretize(SPEC, 40)
    S = propagator(kind, bath, 0.3, 0.7)
    omega = symplectic_form(S.shape[0] // 2)
    assert np.max(np.abs(S.T @ omega @ S - omega)) < 1e-10


@pytest.mark.parametrize("kind", ["fv", "rw"])
def test_energy_conservation(kind):
    bath = discretize(SPEC, 40)
    M = hamiltonian_matrix(kind, bath, 0.3)
    V = initial_covariance(bath)
    e0 = np.trace(M @ V)
    S = propagator(kind, bath, 0.3, 0.25)
    for _ in range(40):
        V = S @ V @ S.T
    assert abs(np.trace(M @ V) / e0 - 1) < 1e-9


def test_initial_state_physical():
    bath = discretize(BathSpec(0.05, 0.0, HARD), 20)
    assert is_physical(initial_covariance(bath))
    assert not is_physical(np.diag([0.1, 0.1, 0.5, 0.5]))


@pytest.mark.parametrize("kind", ["fv", "rw"])
def test_zero_coupling_is_exactly_zero(kind):
    bath = discretize(SPEC, 50)
    traj = exact_evolution(kind, bath, 0.0, 1.0, np.linspace(0, 10, 21))
    assert np.all(traj.n_mean == 0)


def test_mode_count_convergence():
    grid = np.linspace(0, 20, 101)
    a = exact_evolution("fv", discretize(SPEC, 300), 0.05, 1.0, grid).n_mean
    b = exact_evolution("fv", discretize(SPEC, 600), 0.05, 1.0, grid).n_mean
    assert np.max(np.abs(a - b)) / np.max(b) < 0.01


def test_cold_bath_short_time_channels():
    bath = discretize(BathSpec(0.05, 0.0, HARD), 300)
    grid = np.linspace(0, 0.02, 11)
    fv = exact_evolution("fv", bath, 0.05, 1.0, grid).n_mean[-1]
    rw = exact_evolution("rw", bath, 0.05, 1.0, grid).n_mean[-1]
    assert fv > 0 and abs(rw) < 1e-3 * fv


def test_rw_drude_against_master_equation():
    spec = BathSpec(0.05, 1.0, SpectralFamily("drude", 1.0))
    grid = np.linspace(0, 20, 201)
    exact = exact_evolution("rw", discretize(spec, 300, band=(0.0, 10.0)), 0.05, 1.0, grid)
    tab = tabulate(spec, 1.0, default_table_grid(20.0))
    me = evolve_density("rw", tab, so.fock_state(0, 30), grid)
    assert np.max(np.abs(me.n_mean - exact.n_mean)) / np.max(exact.n_mean) < 0.05
