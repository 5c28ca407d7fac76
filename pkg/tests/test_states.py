import math

import numpy as np
import pytest

from bellcav.config import BellKind, ModelParams
from bellcav.hilbert import SpaceLayout, partial_trace
from bellcav.metrics import concurrence
from bellcav.states import (
    CUTOFF_FLOOR,
    bell_projector,
    bell_state,
    fock_cutoff,
    initial_density,
    mode_weights,
    scenario_cutoff,
    thermal_terms,
)


def test_bell_vectors():
    root = math.sqrt(2)
    assert np.allclose(bell_state(BellKind.PHI_PLUS), np.array([1, 0, 0, 1]) / root)
    assert np.allclose(bell_state(BellKind.PSI_PLUS), np.array([0, 1, 1, 0]) / root)


@pytest.mark.parametrize("kind", list(BellKind))
def test_bell_states_are_normalised_and_maximally_entangled(kind):
    assert np.linalg.norm(bell_state(kind)) == pytest.approx(1.0)
    assert concurrence(bell_projector(kind)) == pytest.approx(1.0, abs=1e-12)


def test_zero_temperature_has_single_vacuum_term():
    terms = thermal_terms(ModelParams(n_max=8))
    assert len(terms) == 1
    assert terms[0].occupations == (0, 0)
    assert terms[0].weight == 1.0


def test_thermal_weight_ratio():
    params = ModelParams(temperature=0.4, n_max=20)
    terms = {term.occupations: term for term in thermal_terms(params)}
    ratio = terms[(1, 0)].weight / terms[(0, 0)].weight
    assert ratio == pytest.approx(math.exp(-0.5))
    assert terms[(1, 2)].energy == pytest.approx(0.6)


@pytest.mark.parametrize("cutoff_weight", [1e-8, 1e-4, 1e-2])
def test_thermal_weights_are_normalised_and_ordered(cutoff_weight):
    terms = thermal_terms(ModelParams(temperature=0.4, n_max=12), cutoff_weight)
    assert sum(term.weight for term in terms) == pytest.approx(1.0, abs=1e-12)
    weights = [term.weight for term in terms]
    assert weights == sorted(weights, reverse=True)
    totals = [sum(term.occupations) for term in terms]
    assert totals == sorted(totals)


def test_cutoff_weight_drops_terms():
    params = ModelParams(temperature=0.4, n_max=12)
    assert len(thermal_terms(params, 1e-2)) < len(thermal_terms(params, 1e-8))


def test_thermal_terms_need_cutoff():
    with pytest.raises(ValueError, match="n_max"):
        thermal_terms(ModelParams(temperature=0.4))


def test_fock_cutoff_policy():
    assert fock_cutoff(ModelParams()) == CUTOFF_FLOOR
    assert fock_cutoff(ModelParams(temperature=0.1)) == CUTOFF_FLOOR
    hottest = fock_cutoff(ModelParams(temperature=0.4))
    assert hottest == 37
    assert math.exp(-0.5) ** hottest < 1e-8


def test_scenario_cutoff_sizes_thermal_runs_for_the_hottest_bath():
    assert scenario_cutoff(ModelParams()) == CUTOFF_FLOOR
    assert scenario_cutoff(ModelParams(temperature=0.1)) == 37
    assert scenario_cutoff(ModelParams(temperature=0.2)) == 37
    assert scenario_cutoff(ModelParams(temperature=0.8)) == 74


def test_mode_weights_sum_over_truncated_space():
    weights = mode_weights(ModelParams(temperature=0.4), 1, 5)
    assert weights.sum() == pytest.approx(1.0)
    assert weights[1] / weights[0] == pytest.approx(math.exp(-0.5))


def test_vacuum_initial_density_is_pure_bell_state():
    layout = SpaceLayout.composite(3)
    rho = initial_density(BellKind.PHI_PLUS, layout)
    assert np.trace(rho @ rho).real == pytest.approx(1.0)
    reduced = partial_trace(rho, (0, 1), layout)
    assert np.max(np.abs(reduced - bell_projector(BellKind.PHI_PLUS))) < 1e-12


def test_zero_temperature_thermal_matches_vacuum():
    layout = SpaceLayout.composite(3)
    thermal = initial_density(BellKind.PSI_PLUS, layout, ModelParams(n_max=3))
    assert np.array_equal(thermal, initial_density(BellKind.PSI_PLUS, layout))


def test_thermal_initial_density_purity():
    n_max = 6
    layout = SpaceLayout.composite(n_max)
    params = ModelParams(temperature=0.4, n_max=n_max)
    rho = initial_density(BellKind.PHI_PLUS, layout, params, cutoff_weight=1e-30)
    single = mode_weights(params, 1, n_max)
    assert np.trace(rho @ rho).real == pytest.approx(np.sum(single**2) ** 2)
    reduced = partial_trace(rho, (0, 1), layout)
    assert np.max(np.abs(reduced - bell_projector(BellKind.PHI_PLUS))) < 1e-12


def test_initial_density_rejects_mismatched_cutoff():
    with pytest.raises(ValueError, match="does not match"):
        initial_density(
            BellKind.PHI_PLUS,
            SpaceLayout.composite(3),
            ModelParams(temperature=0.4, n_max=4),
        )
