from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from bellcav.config import BellKind, ModelParams
from bellcav.hilbert import (
    ComplexArray,
    RealArray,
    SpaceLayout,
    kron,
    validate_density,
)

logger = logging.getLogger(__name__)

_BELL_AMPLITUDES: dict[BellKind, tuple[float, float, float, float]] = {
    BellKind.PHI_PLUS: (1.0, 0.0, 0.0, 1.0),
    BellKind.PSI_PLUS: (0.0, 1.0, 1.0, 0.0),
    BellKind.PHI_MINUS: (1.0, 0.0, 0.0, -1.0),
    BellKind.PSI_MINUS: (0.0, 1.0, -1.0, 0.0),
}

DEFAULT_CUTOFF_WEIGHT = 1e-8
DEFAULT_TAIL = 1e-8
CUTOFF_FLOOR = 16
# thermal runs are truncated at least as deep as a bath at this multiple of omega_1
REFERENCE_TEMPERATURE = 1.0


@dataclass(frozen=True)
class ThermalTerm:
    occupations: tuple[int, int]
    weight: float
    energy: float


def bell_state(kind: BellKind) -> ComplexArray:
    return np.array(_BELL_AMPLITUDES[kind], dtype=np.complex128) / math.sqrt(2.0)


def bell_coefficients(kind: BellKind) -> ComplexArray:
    """Amplitudes c_ab of sum_ab c_ab |a>|b> as a 2x2 array."""
    return bell_state(kind).reshape(2, 2)


def bell_projector(kind: BellKind) -> ComplexArray:
    psi = bell_state(kind)
    return np.outer(psi, psi.conj())


def fock_cutoff(
    params: ModelParams, tail: float = DEFAULT_TAIL, floor: int = CUTOFF_FLOOR
) -> int:
    """Smallest cutoff whose discarded single-mode Boltzmann tail is below ``tail``."""
    if params.temperature == 0:
        return floor
    lowest = min(params.mode_frequency(1), params.mode_frequency(2))
    ratio = math.exp(-lowest / params.temperature)
    needed = math.ceil(math.log(tail) / math.log(ratio))
    return max(floor, needed)


def scenario_cutoff(params: ModelParams) -> int:
    """Fock cutoff for a run: vacuum gets the floor, thermal baths are sized
    at ``REFERENCE_TEMPERATURE * omega_1`` or their own temperature if hotter."""
    if params.temperature == 0:
        return fock_cutoff(params)
    sizing = max(params.temperature, REFERENCE_TEMPERATURE * params.time_unit)
    return fock_cutoff(params.model_copy(update={"temperature": sizing}))


def mode_weights(params: ModelParams, j: int, n_max: int) -> RealArray:
    """Boltzmann weights of cavity ``j`` normalised over the truncated Fock space."""
    if params.temperature == 0:
        weights = np.zeros(n_max)
        weights[0] = 1.0
        return weights
    energies = params.mode_frequency(j) * np.arange(n_max)
    boltzmann = np.exp(-energies / params.temperature)
    return boltzmann / boltzmann.sum()


def thermal_terms(
    params: ModelParams, cutoff_weight: float = DEFAULT_CUTOFF_WEIGHT
) -> list[ThermalTerm]:
    if params.temperature == 0:
        return [ThermalTerm(occupations=(0, 0), weight=1.0, energy=0.0)]

    n_max = params.require_n_max()
    energies = [params.mode_frequency(j) * np.arange(n_max) for j in (1, 2)]
    weights = np.outer(mode_weights(params, 1, n_max), mode_weights(params, 2, n_max))
    kept = np.argwhere(weights >= cutoff_weight)
    total = float(weights[weights >= cutoff_weight].sum())

    terms = [
        ThermalTerm(
            occupations=(int(m), int(n)),
            weight=float(weights[m, n]) / total,
            energy=float(energies[0][m] + energies[1][n]),
        )
        for m, n in kept
    ]
    terms.sort(key=lambda term: (-term.weight, term.occupations))
    logger.debug(
        "Retained %d thermal terms (discarded weight %.2e)", len(terms), 1.0 - total
    )
    return terms


def initial_density(
    kind: BellKind,
    layout: SpaceLayout,
    thermal: ModelParams | None = None,
    cutoff_weight: float = DEFAULT_CUTOFF_WEIGHT,
) -> ComplexArray:
    """rho(0) = |psi><psi| (x) rho_b1 (x) rho_b2 on the composite layout.

    ``thermal`` selects a thermal bath at ``thermal.temperature``; ``None``
    or zero temperature gives the vacuum.
    """
    if not layout.is_composite:
        raise ValueError(f"Expected the composite layout, got {layout.factor_dims}")
    n_max = layout.n_max
    bath = np.zeros(n_max * n_max)
    if thermal is None or thermal.temperature == 0:
        bath[0] = 1.0
    else:
        if thermal.n_max is not None and thermal.n_max != n_max:
            raise ValueError(
                f"Thermal cutoff {thermal.n_max} does not match layout cutoff {n_max}"
            )
        terms = thermal_terms(
            thermal.model_copy(update={"n_max": n_max}), cutoff_weight
        )
        for term in terms:
            m, n = term.occupations
            bath[m * n_max + n] = term.weight
    return validate_density(kron(bell_projector(kind), np.diag(bath)))
