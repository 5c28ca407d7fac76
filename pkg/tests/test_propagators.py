from functools import partial

import numpy as np
import pytest

from bellcav.config import BellKind, LaguerreConfig, ModelParams, TimeGrid
from bellcav.errors import IntegratorInstabilityError, PropagatorConvergenceError
from bellcav.hilbert import SpaceLayout, identity, sigma_z
from bellcav.metrics import concurrence
from bellcav.model import build_subsystem_hamiltonian, lindblad_rhs
from bellcav.propagators import (
    Trajectory,
    _rk4_samples,
    evolve_closed,
    evolve_lindblad,
    exact_propagator,
    laguerre_apply,
)
from bellcav.states import bell_projector
from bellcav.verify import random_hermitian

SHORT = TimeGrid(t_max=2.0)


def _random_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def test_laguerre_zero_hamiltonian_is_identity():
    v = _random_vector(np.random.default_rng(0), 6)
    assert np.allclose(laguerre_apply(np.zeros((6, 6)), 7.3, v), v, atol=1e-12)


def test_laguerre_phases_for_free_qubit():
    omega = 0.4
    h = 0.5 * omega * sigma_z()
    v = np.array([1, 1]) / np.sqrt(2)
    result = laguerre_apply(h, np.pi / omega, v)
    expected = np.array([np.exp(-0.5j * np.pi), np.exp(0.5j * np.pi)]) / np.sqrt(2)
    assert np.allclose(result, expected, atol=1e-10)


@pytest.mark.parametrize("alpha", [0.0, -0.5, 1.5])
def test_laguerre_matches_exact_propagator(alpha):
    rng = np.random.default_rng(1)
    h = random_hermitian(rng, 8)
    v = _random_vector(rng, 8)
    cfg = LaguerreConfig(alpha=alpha)
    error = laguerre_apply(h, 40.0, v, cfg) - exact_propagator(h, 40.0) @ v
    assert np.linalg.norm(error) < 1e-8


def test_laguerre_propagates_blocks():
    rng = np.random.default_rng(2)
    h = random_hermitian(rng, 5)
    block = np.linalg.qr(rng.normal(size=(5, 3)))[0]
    result = laguerre_apply(h, 3.0, block)
    assert np.allclose(result, exact_propagator(h, 3.0) @ block, atol=1e-10)


def test_laguerre_reports_non_convergence():
    h = random_hermitian(np.random.default_rng(3), 4)
    with pytest.raises(PropagatorConvergenceError) as excinfo:
        laguerre_apply(h, 1.0, np.eye(4)[0], LaguerreConfig(k_max=2))
    assert excinfo.value.order == 2
    assert excinfo.value.residual > 0


def test_laguerre_rejects_bad_input():
    with pytest.raises(ValueError, match="Hermitian"):
        laguerre_apply(np.array([[0, 1], [0, 0]]), 1.0, np.ones(2))
    with pytest.raises(ValueError, match="does not match"):
        laguerre_apply(identity(3), 1.0, np.ones(2))


def test_exact_propagator_group_property():
    h = random_hermitian(np.random.default_rng(4), 6)
    assert np.allclose(exact_propagator(h, 0.0), identity(6))
    combined = exact_propagator(h, 1.3) @ exact_propagator(h, 0.4)
    assert np.allclose(combined, exact_propagator(h, 1.7), atol=1e-10)


def test_trajectory_rejects_unordered_times():
    with pytest.raises(ValueError, match="increasing"):
        Trajectory(times=np.array([0.0, 0.0]), reduced_states=np.zeros((2, 4, 4)))


@pytest.mark.parametrize("kind", [BellKind.PHI_PLUS, BellKind.PSI_PLUS])
def test_closed_starts_from_bell_projector(kind):
    trajectory = evolve_closed(kind, ModelParams(n_max=4), SHORT)
    assert len(trajectory) == SHORT.count
    assert np.allclose(trajectory.reduced_states[0], bell_projector(kind), atol=1e-14)


def test_decoupled_atoms_stay_maximally_entangled():
    trajectory = evolve_closed(BellKind.PHI_PLUS, ModelParams(g=0.0, n_max=3), SHORT)
    for rho in trajectory.reduced_states:
        assert concurrence(rho) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("temperature", [0.0, 0.3])
def test_factorized_matches_full_space(temperature):
    params = ModelParams(n_max=3, temperature=temperature)
    product = evolve_closed(BellKind.PSI_PLUS, params, SHORT)
    full = evolve_closed(BellKind.PSI_PLUS, params, SHORT, factorized=False, workers=2)
    assert np.max(np.abs(product.reduced_states - full.reduced_states)) < 1e-8


def test_laguerre_and_exact_closed_paths_agree():
    params = ModelParams(n_max=8)
    grid = TimeGrid(t_max=8.0)
    laguerre = evolve_closed(BellKind.PHI_PLUS, params, grid, method="laguerre")
    exact = evolve_closed(BellKind.PHI_PLUS, params, grid, method="exact")
    assert np.max(np.abs(laguerre.reduced_states - exact.reduced_states)) < 1e-8


def test_closed_evolution_rejects_loss():
    with pytest.raises(ValueError, match="gamma"):
        evolve_closed(BellKind.PHI_PLUS, ModelParams(n_max=3, gamma=0.2), SHORT)


@pytest.mark.parametrize("stepper", ["rk4", "reference"])
def test_lossless_master_equation_matches_closed_evolution(stepper):
    params = ModelParams(n_max=3)
    closed = evolve_closed(BellKind.PHI_PLUS, params, SHORT)
    lindblad = evolve_lindblad(BellKind.PHI_PLUS, params, SHORT, stepper=stepper)
    assert np.max(np.abs(closed.reduced_states - lindblad.reduced_states)) < 1e-6


def test_joint_and_channel_steppers_agree():
    params = ModelParams(n_max=3, gamma=0.2)
    joint = evolve_lindblad(BellKind.PSI_PLUS, params, SHORT, stepper="rk4")
    channels = evolve_lindblad(BellKind.PSI_PLUS, params, SHORT, stepper="reference")
    assert np.max(np.abs(joint.reduced_states - channels.reduced_states)) < 1e-6


def test_decoupled_atoms_ignore_cavity_loss():
    params = ModelParams(g=0.0, n_max=3, gamma=0.8)
    trajectory = evolve_lindblad(BellKind.PHI_PLUS, params, SHORT)
    for rho in trajectory.reduced_states:
        assert concurrence(rho) == pytest.approx(1.0, abs=1e-8)


def test_lossy_trajectory_conserves_trace_and_positivity():
    params = ModelParams(n_max=4, gamma=0.8)
    trajectory = evolve_lindblad(
        BellKind.PHI_PLUS, params, TimeGrid(t_max=8.0), stepper="reference"
    )
    traces = np.real(np.trace(trajectory.reduced_states, axis1=1, axis2=2))
    assert np.max(np.abs(traces - 1.0)) < 1e-6
    lowest = min(np.linalg.eigvalsh(rho)[0] for rho in trajectory.reduced_states)
    assert lowest > -1e-6


def test_photon_number_decays_exponentially():
    n_max = 3
    layout = SpaceLayout.subsystem(n_max)
    params = ModelParams(n_max=n_max, gamma=0.5, g=0.0)
    h = build_subsystem_hamiltonian(1, params, layout)
    rhs = partial(lindblad_rhs, h=h, params=params, layout=layout, subsystem=1)
    rho = np.zeros((2 * n_max, 2 * n_max), dtype=complex)
    rho[1, 1] = 1.0
    samples = list(_rk4_samples(rhs, rho, 11, 0.2, 8))
    assert samples[-1][1, 1].real == pytest.approx(np.exp(-1.0), abs=1e-8)


def test_unstable_step_is_reported():
    params = ModelParams(n_max=3, gamma=200.0)
    with pytest.raises(IntegratorInstabilityError, match="smaller internal step"):
        evolve_lindblad(
            BellKind.PHI_PLUS,
            params,
            SHORT,
            stepper="reference",
            substeps=1,
            max_halvings=0,
        )


def test_lindblad_rejects_thermal_bath():
    with pytest.raises(ValueError, match="vacuum"):
        evolve_lindblad(BellKind.PHI_PLUS, ModelParams(n_max=3, temperature=0.1), SHORT)
