"""Concurrence, overlap fidelity and entropy exchange of the reduced qubit pair."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import linalg

from bellcav.config import BellKind, ModelParams
from bellcav.errors import InvalidStateError
from bellcav.hilbert import ComplexArray, RealArray, kron, sigma_y
from bellcav.model import build_free_qubit_hamiltonian
from bellcav.propagators import Trajectory, exact_propagator
from bellcav.schema import MetricField, MetricSample
from bellcav.states import bell_projector

SPIN_FLIP = kron(sigma_y(), sigma_y())
NEGATIVE_EIGENVALUE_LIMIT = 1e-6
ZERO_EIGENVALUE = 1e-12
SNAP_ATOL = 1e-12


@dataclass(frozen=True)
class MetricSeries:
    omega_t: RealArray
    concurrence: RealArray
    fidelity: RealArray
    entropy: RealArray

    def __len__(self) -> int:
        return len(self.omega_t)

    def field(self, name: MetricField) -> RealArray:
        return getattr(self, name)

    def sample(self, index: int) -> MetricSample:
        return MetricSample(
            omega_t=float(self.omega_t[index]),
            concurrence=float(self.concurrence[index]),
            fidelity=float(self.fidelity[index]),
            entropy=float(self.entropy[index]),
        )

    def max_difference(self, other: MetricSeries) -> float:
        if len(self) != len(other):
            raise ValueError("Series lengths differ")
        return float(
            max(
                np.max(np.abs(self.field(name) - other.field(name)), initial=0.0)
                for name in ("concurrence", "fidelity", "entropy")
            )
        )


def _as_two_qubit(rho: npt.ArrayLike) -> ComplexArray:
    matrix = np.asarray(rho, dtype=np.complex128)
    if matrix.shape != (4, 4):
        raise ValueError(f"Expected a 4x4 two-qubit state, got shape {matrix.shape}")
    return matrix


def _psd_sqrt(rho: ComplexArray) -> ComplexArray:
    eigenvalues, eigenvectors = linalg.eigh(0.5 * (rho + rho.conj().T))
    roots = np.sqrt(np.where(eigenvalues > ZERO_EIGENVALUE, eigenvalues, 0.0))
    return (eigenvectors * roots) @ eigenvectors.conj().T


def concurrence(
    rho: npt.ArrayLike, method: Literal["hermitian", "direct"] = "hermitian"
) -> float:
    """Wootters concurrence max(l1 - l2 - l3 - l4, 0).

    ``hermitian`` uses the Hermitian form sqrt(rho) R sqrt(rho), R the
    spin-flipped conjugate. Its square-rooted eigenvalues are taken as the
    singular values of sqrt(rho) Y sqrt(rho)*, so pure states do not pick up
    square-root noise. ``direct`` eigensolves rho R.
    """
    state = _as_two_qubit(rho)
    if method == "hermitian":
        root = _psd_sqrt(state)
        lambdas = linalg.svdvals(root @ SPIN_FLIP @ root.conj())
    else:
        flipped = SPIN_FLIP @ state.conj() @ SPIN_FLIP
        eigenvalues = np.real(linalg.eigvals(state @ flipped))
        lambdas = np.sort(np.sqrt(np.clip(eigenvalues, 0.0, None)))[::-1]
    value = float(lambdas[0] - np.sum(lambdas[1:]))
    return min(max(value, 0.0), 1.0)


def ideal_evolution(kind: BellKind, params: ModelParams, t: float) -> ComplexArray:
    """Bell projector evolved under the free-qubit Hamiltonian for physical time t."""
    unitary = exact_propagator(build_free_qubit_hamiltonian(params), t)
    return unitary @ bell_projector(kind) @ unitary.conj().T


def fidelity(rho_s: npt.ArrayLike, rho_ideal: npt.ArrayLike) -> float:
    """Overlap fidelity Tr[rho_ideal rho_s]."""
    overlap = float(
        np.real(np.trace(_as_two_qubit(rho_ideal) @ _as_two_qubit(rho_s)))
    )
    return min(max(overlap, 0.0), 1.0)


def entropy_exchange(rho_s: npt.ArrayLike) -> float:
    """Base-2 von Neumann entropy of the reduced qubit pair."""
    state = _as_two_qubit(rho_s)
    eigenvalues = linalg.eigvalsh(0.5 * (state + state.conj().T))
    if eigenvalues[0] < -NEGATIVE_EIGENVALUE_LIMIT:
        raise InvalidStateError(
            f"Reduced state has eigenvalue {eigenvalues[0]:.3e}; positivity lost upstream"
        )
    positive = eigenvalues[eigenvalues > ZERO_EIGENVALUE]
    value = float(-np.sum(positive * np.log2(positive)))
    return min(max(value, 0.0), 2.0)


def partial_transpose(rho: npt.ArrayLike) -> ComplexArray:
    """Transpose on the second qubit."""
    tensor = _as_two_qubit(rho).reshape(2, 2, 2, 2)
    return tensor.transpose(0, 3, 2, 1).reshape(4, 4)


def negativity(rho: npt.ArrayLike) -> float:
    pt = partial_transpose(rho)
    eigenvalues = linalg.eigvalsh(0.5 * (pt + pt.conj().T))
    return float(-np.sum(eigenvalues[eigenvalues < 0]))


def _snap(values: RealArray, lower: float, upper: float) -> RealArray:
    snapped = np.where(np.abs(values - lower) < SNAP_ATOL, lower, values)
    snapped = np.where(np.abs(snapped - upper) < SNAP_ATOL, upper, snapped)
    return np.clip(snapped, lower, upper)


def compute_metrics(
    trajectory: Trajectory, kind: BellKind, params: ModelParams
) -> MetricSeries:
    count = len(trajectory)
    values = np.empty((3, count))
    for index, (omega_t, rho) in enumerate(
        zip(trajectory.times, trajectory.reduced_states)
    ):
        ideal = ideal_evolution(kind, params, float(omega_t) / params.time_unit)
        values[0, index] = concurrence(rho)
        values[1, index] = fidelity(rho, ideal)
        values[2, index] = entropy_exchange(rho)
    return MetricSeries(
        omega_t=np.asarray(trajectory.times, dtype=np.float64),
        concurrence=_snap(values[0], 0.0, 1.0),
        fidelity=_snap(values[1], 0.0, 1.0),
        entropy=_snap(values[2], 0.0, 2.0),
    )
