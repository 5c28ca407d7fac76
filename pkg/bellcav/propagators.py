"""Time evolution: Laguerre series propagator, spectral propagator, RK4 master equation.

All evolution routines take a grid on the omega*t axis and convert it to
physical time with ``omega_1``. The propagator is ``U(t) = exp(-iHt)``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Literal

import numpy as np
import numpy.typing as npt
from scipy import linalg

from bellcav.config import BellKind, LaguerreConfig, ModelParams, TimeGrid
from bellcav.errors import IntegratorInstabilityError, PropagatorConvergenceError
from bellcav.hilbert import (
    ComplexArray,
    RealArray,
    SpaceLayout,
    basis,
    eig_hermitian,
    identity,
    is_hermitian,
    partial_trace,
    reduce_pure,
)
from bellcav.model import (
    build_subsystem_hamiltonian,
    build_total_hamiltonian,
    lindblad_rhs,
)
from bellcav.states import (
    DEFAULT_CUTOFF_WEIGHT,
    ThermalTerm,
    bell_coefficients,
    bell_state,
    initial_density,
    thermal_terms,
)

logger = logging.getLogger(__name__)

ClosedMethod = Literal["laguerre", "exact"]
LindbladStepper = Literal["rk4", "reference"]

UNITARITY_ATOL = 1e-8
TRACE_DRIFT_ATOL = 1e-6
POSITIVITY_ATOL = 1e-6


@dataclass(frozen=True)
class Trajectory:
    """Reduced two-qubit states sampled on the omega*t axis."""

    times: RealArray
    reduced_states: ComplexArray

    def __post_init__(self) -> None:
        if self.reduced_states.shape != (len(self.times), 4, 4):
            raise ValueError(
                f"Expected {len(self.times)} 4x4 states, got {self.reduced_states.shape}"
            )
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)


def _spectral_centre(h: ComplexArray) -> float:
    """Midpoint of the Gershgorin interval enclosing the spectrum."""
    diagonal = np.real(np.diag(h))
    radius = np.sum(np.abs(h), axis=1) - np.abs(np.diag(h))
    return float(0.5 * (np.min(diagonal - radius) + np.max(diagonal + radius)))


def _column_norm(block: ComplexArray) -> float:
    return float(np.max(np.linalg.norm(block.reshape(block.shape[0], -1), axis=0)))


def _laguerre_series(
    h: ComplexArray, tau: float, block: ComplexArray, cfg: LaguerreConfig
) -> ComplexArray:
    alpha = cfg.alpha
    z = 1j * tau / (1 + 1j * tau)
    previous = np.zeros_like(block)
    current = block
    total = np.zeros_like(block)
    power: complex = 1.0
    quiet = 0
    residual = math.inf
    for k in range(cfg.k_max + 1):
        term = power * current
        total += term
        residual = _column_norm(term)
        quiet = quiet + 1 if residual < cfg.tolerance else 0
        if quiet == 2:
            logger.debug("Laguerre series converged at order %d (tau=%.3g)", k, tau)
            break
        following = (
            (2 * k + 1 + alpha) * current - h @ current - (k + alpha) * previous
        ) / (k + 1)
        previous, current = current, following
        power *= z
    else:
        raise PropagatorConvergenceError(
            f"Laguerre series did not converge within k_max={cfg.k_max} "
            f"(tail norm {residual:.3e}); use a smaller step",
            residual=residual,
            order=cfg.k_max,
        )
    return total * (1 + 1j * tau) ** (-(alpha + 1))


def laguerre_apply(
    h: npt.ArrayLike,
    t: float,
    v: npt.ArrayLike,
    cfg: LaguerreConfig | None = None,
) -> ComplexArray:
    """Apply ``exp(-iHt)`` to a vector or a block of column vectors.

    The interval is split into slices no longer than ``cfg.step``; each slice
    sums the Laguerre series of a spectrum-centred copy of ``h``.
    """
    cfg = cfg or LaguerreConfig()
    hamiltonian = np.asarray(h, dtype=np.complex128)
    if not is_hermitian(hamiltonian):
        raise ValueError("laguerre_apply requires a Hermitian operator")
    block = np.array(v, dtype=np.complex128)
    if block.shape[0] != hamiltonian.shape[0]:
        raise ValueError(
            f"Vector length {block.shape[0]} does not match operator "
            f"dimension {hamiltonian.shape[0]}"
        )
    if t == 0:
        return block

    centre = _spectral_centre(hamiltonian)
    shifted = hamiltonian - centre * identity(hamiltonian.shape[0])
    slices = max(1, math.ceil(abs(t) / cfg.step - 1e-12))
    tau = t / slices
    result = block
    for _ in range(slices):
        result = _laguerre_series(shifted, tau, result, cfg)
    result = result * np.exp(-1j * centre * t)

    before = np.linalg.norm(block.reshape(block.shape[0], -1), axis=0)
    after = np.linalg.norm(result.reshape(result.shape[0], -1), axis=0)
    deviation = float(np.max(np.abs(after - before)))
    if deviation > UNITARITY_ATOL:
        raise PropagatorConvergenceError(
            f"Laguerre propagation lost unitarity (norm error {deviation:.3e}); "
            "use a smaller step",
            residual=deviation,
            order=cfg.k_max,
        )
    return result


def exact_propagator(h: npt.ArrayLike, t: float) -> ComplexArray:
    eigenvalues, eigenvectors = eig_hermitian(h)
    return (eigenvectors * np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T


def _grid_step(times: RealArray) -> float:
    return float(times[1] - times[0]) if len(times) > 1 else 0.0


def _propagators(
    h: ComplexArray,
    times: RealArray,
    method: ClosedMethod,
    cfg: LaguerreConfig,
) -> Iterator[ComplexArray]:
    """U(t_k) for every grid time, from one eigensolve or one Laguerre step."""
    if method == "exact":
        eigenvalues, eigenvectors = eig_hermitian(h)
        for t in times:
            yield (eigenvectors * np.exp(-1j * eigenvalues * t)) @ eigenvectors.conj().T
        return

    dim = h.shape[0]
    current = identity(dim)
    step = laguerre_apply(h, _grid_step(times), identity(dim), cfg)
    for index in range(len(times)):
        if index:
            current = step @ current
        yield current


def evolve_closed(
    kind: BellKind,
    params: ModelParams,
    grid: TimeGrid,
    method: ClosedMethod = "laguerre",
    laguerre: LaguerreConfig | None = None,
    cutoff_weight: float = DEFAULT_CUTOFF_WEIGHT,
    factorized: bool = True,
    workers: int = 1,
) -> Trajectory:
    """Unitary evolution of the Bell state with vacuum or thermal cavities.

    The thermal bath is expanded into weighted Fock product states; each is
    evolved as a pure state and the reduced states are summed with weights.
    """
    if params.is_leaky:
        raise ValueError("Closed evolution requires gamma = 0")
    base = laguerre or LaguerreConfig()
    # step is given on the omega*t axis
    cfg = base.model_copy(update={"step": base.step / params.time_unit})
    terms = thermal_terms(params, cutoff_weight)
    times = grid.physical_times(params)
    logger.debug(
        "Closed %s evolution of %s over %d samples with %d bath terms",
        method,
        kind.value,
        len(times),
        len(terms),
    )
    if factorized:
        states = _closed_factorized(kind, params, times, terms, method, cfg)
    else:
        states = _closed_full(kind, params, times, terms, method, cfg, workers)
    return Trajectory(times=grid.omega_times(), reduced_states=states)


def _closed_factorized(
    kind: BellKind,
    params: ModelParams,
    times: RealArray,
    terms: Sequence[ThermalTerm],
    method: ClosedMethod,
    cfg: LaguerreConfig,
) -> ComplexArray:
    n_max = params.require_n_max()
    layout = SpaceLayout.subsystem(n_max)
    coefficients = bell_coefficients(kind)
    first = np.array([term.occupations[0] for term in terms])
    second = np.array([term.occupations[1] for term in terms])
    weights = np.array([term.weight for term in terms])

    streams = [
        _propagators(build_subsystem_hamiltonian(j, params, layout), times, method, cfg)
        for j in (1, 2)
    ]
    states = np.empty((len(times), 4, 4), dtype=np.complex128)
    for index, (u1, u2) in enumerate(zip(*streams)):
        # u_j[(q, k), (a, m)]: amplitude of |q, k> in U_j |a, m>
        blocks1 = u1.reshape(2, n_max, 2, n_max)
        blocks2 = u2.reshape(2, n_max, 2, n_max)
        overlap1 = np.einsum("ikam,jkem->ijaem", blocks1, blocks1.conj())
        overlap2 = np.einsum("ikbn,jkfn->ijbfn", blocks2, blocks2.conj())
        rho = np.einsum(
            "ab,ef,ijaet,klbft,t->ikjl",
            coefficients,
            coefficients.conj(),
            overlap1[..., first],
            overlap2[..., second],
            weights,
            optimize=True,
        )
        states[index] = rho.reshape(4, 4)
    return states


def _closed_full(
    kind: BellKind,
    params: ModelParams,
    times: RealArray,
    terms: Sequence[ThermalTerm],
    method: ClosedMethod,
    cfg: LaguerreConfig,
    workers: int,
) -> ComplexArray:
    n_max = params.require_n_max()
    layout = SpaceLayout.composite(n_max)
    hamiltonian = build_total_hamiltonian(params, layout)
    psi_bell = bell_state(kind)
    spectrum = eig_hermitian(hamiltonian) if method == "exact" else None
    step = _grid_step(times)

    def evolve_term(term: ThermalTerm) -> ComplexArray:
        m, n = term.occupations
        psi = np.kron(psi_bell, np.kron(basis(n_max, m), basis(n_max, n)))
        reduced = np.empty((len(times), 4, 4), dtype=np.complex128)
        if spectrum is not None:
            eigenvalues, eigenvectors = spectrum
            amplitudes = eigenvectors.conj().T @ psi
            for index, t in enumerate(times):
                state = eigenvectors @ (np.exp(-1j * eigenvalues * t) * amplitudes)
                reduced[index] = reduce_pure(state, (0, 1), layout)
        else:
            for index in range(len(times)):
                if index:
                    psi = laguerre_apply(hamiltonian, step, psi, cfg)
                reduced[index] = reduce_pure(psi, (0, 1), layout)
        return term.weight * reduced

    with ThreadPoolExecutor(max_workers=max(workers, 1)) as pool:
        contributions = list(pool.map(evolve_term, terms))
    return np.sum(contributions, axis=0)


def _rk4_step(
    rhs: Callable[[ComplexArray], ComplexArray], y: ComplexArray, h: float
) -> ComplexArray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _rk4_samples(
    rhs: Callable[[ComplexArray], ComplexArray],
    y0: ComplexArray,
    count: int,
    grid_step: float,
    substeps: int,
) -> Iterator[ComplexArray]:
    h = grid_step / substeps
    y = y0
    yield y
    for _ in range(count - 1):
        for _ in range(substeps):
            y = _rk4_step(rhs, y, h)
        yield y


def _check_reduced(rho: ComplexArray, substeps: int, omega_t: float) -> None:
    drift = abs(float(np.real(np.trace(rho))) - 1.0)
    if drift > TRACE_DRIFT_ATOL:
        raise IntegratorInstabilityError(
            f"Trace drift {drift:.3e} at omega*t={omega_t:.3f}",
            drift=drift,
            substeps=substeps,
        )
    lowest = float(linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lowest < -POSITIVITY_ATOL:
        raise IntegratorInstabilityError(
            f"Negative eigenvalue {lowest:.3e} at omega*t={omega_t:.3f}",
            drift=-lowest,
            substeps=substeps,
        )


def evolve_lindblad(
    kind: BellKind,
    params: ModelParams,
    grid: TimeGrid,
    stepper: LindbladStepper = "rk4",
    substeps: int = 4,
    max_halvings: int = 3,
) -> Trajectory:
    """Integrate the master equation with RK4 from the vacuum cavities.

    ``rk4`` integrates the joint space; ``reference`` integrates each
    atom/cavity channel separately and recombines them on the Bell amplitudes.
    """
    if params.temperature != 0:
        raise ValueError("Lindblad evolution starts from vacuum cavities (T = 0)")
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    integrate = _lindblad_joint if stepper == "rk4" else _lindblad_reference
    omega_times = grid.omega_times()
    attempt_substeps = substeps
    for attempt in range(max_halvings + 1):
        try:
            states = integrate(kind, params, grid, attempt_substeps)
        except IntegratorInstabilityError as exc:
            if attempt == max_halvings:
                raise IntegratorInstabilityError(
                    f"{exc} after {max_halvings} step halvings; "
                    "use a smaller internal step",
                    drift=exc.drift,
                    substeps=attempt_substeps,
                ) from exc
            logger.warning(
                "%s with %d substeps per grid step; halving the internal step",
                exc,
                attempt_substeps,
            )
            attempt_substeps *= 2
            continue
        return Trajectory(times=omega_times, reduced_states=states)
    raise AssertionError("unreachable")


def _lindblad_joint(
    kind: BellKind, params: ModelParams, grid: TimeGrid, substeps: int
) -> ComplexArray:
    n_max = params.require_n_max()
    layout = SpaceLayout.composite(n_max)
    hamiltonian = build_total_hamiltonian(params, layout)
    rhs = partial(lindblad_rhs, h=hamiltonian, params=params, layout=layout)
    times = grid.physical_times(params)
    omega_times = grid.omega_times()
    logger.debug("Joint-space RK4 on dimension %d", layout.total_dim)

    states = np.empty((len(times), 4, 4), dtype=np.complex128)
    samples = _rk4_samples(
        rhs, initial_density(kind, layout), len(times), _grid_step(times), substeps
    )
    for index, rho in enumerate(samples):
        states[index] = partial_trace(rho, (0, 1), layout)
        _check_reduced(states[index], substeps, float(omega_times[index]))
    return states


def _channel_seeds(n_max: int) -> ComplexArray:
    """Stack of |a,0><a',0| on one atom/cavity pair, indexed [a, a']."""
    dim = 2 * n_max
    seeds = np.zeros((2, 2, dim, dim), dtype=np.complex128)
    for a in range(2):
        for a_prime in range(2):
            seeds[a, a_prime, a * n_max, a_prime * n_max] = 1.0
    return seeds


def _lindblad_reference(
    kind: BellKind, params: ModelParams, grid: TimeGrid, substeps: int
) -> ComplexArray:
    n_max = params.require_n_max()
    layout = SpaceLayout.subsystem(n_max)
    coefficients = bell_coefficients(kind)
    times = grid.physical_times(params)
    omega_times = grid.omega_times()

    streams = []
    for j in (1, 2):
        rhs = partial(
            lindblad_rhs,
            h=build_subsystem_hamiltonian(j, params, layout),
            params=params,
            layout=layout,
            subsystem=j,
        )
        streams.append(
            _rk4_samples(
                rhs, _channel_seeds(n_max), len(times), _grid_step(times), substeps
            )
        )

    states = np.empty((len(times), 4, 4), dtype=np.complex128)
    for index, (evolved1, evolved2) in enumerate(zip(*streams)):
        # trace out the cavity: [a, a', q, k, q', k] -> [a, a', q, q']
        qubit1 = np.einsum("xyikjk->xyij", evolved1.reshape(2, 2, 2, n_max, 2, n_max))
        qubit2 = np.einsum("xyikjk->xyij", evolved2.reshape(2, 2, 2, n_max, 2, n_max))
        rho = np.einsum(
            "ab,ef,aeij,bfkl->ikjl",
            coefficients,
            coefficients.conj(),
            qubit1,
            qubit2,
        )
        states[index] = rho.reshape(4, 4)
        _check_reduced(states[index], substeps, float(omega_times[index]))
    return states
