from __future__ import annotations

from functools import lru_cache

import numpy as np
import numpy.typing as npt

from bellcav.config import ModelParams
from bellcav.hilbert import (
    ComplexArray,
    SpaceLayout,
    destroy,
    embed,
    identity,
    kron,
    number,
    sigma_x,
    sigma_z,
)


def _qubit_sigma_z(params: ModelParams) -> ComplexArray:
    sign = -1.0 if params.flip_qubit_basis else 1.0
    return sign * sigma_z()


def _check_layout(params: ModelParams, layout: SpaceLayout) -> None:
    if params.n_max is not None and params.n_max != layout.n_max:
        raise ValueError(
            f"Layout cutoff {layout.n_max} does not match n_max={params.n_max}"
        )


def _require_composite(layout: SpaceLayout) -> None:
    if not layout.is_composite:
        raise ValueError(f"Expected the composite layout, got {layout.factor_dims}")


def build_subsystem_hamiltonian(
    j: int, params: ModelParams, layout: SpaceLayout
) -> ComplexArray:
    """H_j for atom j and cavity j, counter-rotating terms included.

    On the composite layout the operator acts on factors ``j-1`` and ``j+1``;
    on a subsystem layout it acts on the single qubit/mode pair.
    """
    _check_layout(params, layout)
    omega = params.omega[j - 1]
    coupling = params.g[j - 1] * omega
    qubit = layout.qubit_factor(j)
    mode = layout.mode_factor(j)

    a = embed(destroy(layout.n_max), mode, layout)
    a_dag = a.conj().T
    sz = embed(_qubit_sigma_z(params), qubit, layout)
    sx = embed(sigma_x(), qubit, layout)
    return (
        0.5 * omega * sz
        + params.mode_frequency(j) * (a_dag @ a)
        + coupling * (a_dag + a) @ sx
    )


def build_total_hamiltonian(params: ModelParams, layout: SpaceLayout) -> ComplexArray:
    _require_composite(layout)
    return build_subsystem_hamiltonian(1, params, layout) + build_subsystem_hamiltonian(
        2, params, layout
    )


def build_bath_hamiltonian(params: ModelParams, layout: SpaceLayout) -> ComplexArray:
    _require_composite(layout)
    _check_layout(params, layout)
    bath = np.zeros((layout.total_dim, layout.total_dim), dtype=np.complex128)
    for j in (1, 2):
        bath += params.mode_frequency(j) * embed(
            number(layout.n_max), layout.mode_factor(j), layout
        )
    return bath


def build_free_qubit_hamiltonian(params: ModelParams) -> ComplexArray:
    """H_S = (w1/2) sz_1 + (w2/2) sz_2 on the bare qubit pair."""
    sz = _qubit_sigma_z(params)
    return 0.5 * params.omega[0] * kron(sz, identity(2)) + 0.5 * params.omega[
        1
    ] * kron(identity(2), sz)


@lru_cache(maxsize=16)
def _ladder_operators(
    layout: SpaceLayout,
) -> tuple[tuple[ComplexArray, ComplexArray, ComplexArray], ...]:
    operators = []
    for mode in layout.mode_factors:
        a = embed(destroy(layout.n_max), mode, layout)
        a_dag = np.ascontiguousarray(a.conj().T)
        occupation = a_dag @ a
        for op in (a, a_dag, occupation):
            op.setflags(write=False)
        operators.append((a, a_dag, occupation))
    return tuple(operators)


def lindblad_rhs(
    rho: npt.ArrayLike,
    h: npt.ArrayLike,
    params: ModelParams,
    layout: SpaceLayout,
    subsystem: int | None = None,
) -> ComplexArray:
    """drho/dt = -i[H, rho] + sum_j gamma_j D[a_j](rho).

    ``rho`` may be a stack of matrices; the generator is applied to each.
    On a subsystem layout ``subsystem`` selects which cavity's gamma applies.
    """
    state = np.asarray(rho, dtype=np.complex128)
    hamiltonian = np.asarray(h, dtype=np.complex128)
    if layout.is_composite:
        gammas: tuple[float, ...] = params.gamma
    else:
        if subsystem is None:
            raise ValueError("subsystem is required on a subsystem layout")
        gammas = (params.gamma[subsystem - 1],)

    derivative = -1j * (hamiltonian @ state - state @ hamiltonian)
    for gamma, (a, a_dag, occupation) in zip(gammas, _ladder_operators(layout)):
        if gamma == 0:
            continue
        derivative += gamma * (
            a @ state @ a_dag - 0.5 * (occupation @ state + state @ occupation)
        )
    return derivative
