"""Dense tensor-product algebra over the atom/cavity Hilbert space.

Factor order is fixed as ``[s1, s2, mode1, mode2]`` with row-major index
arithmetic. Qubit index 0 is the state with ``sigma_z |0> = +|0>``.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from functools import reduce
from math import prod

import numpy as np
import numpy.typing as npt
from scipy import linalg

from bellcav.errors import InvalidStateError

ComplexArray = npt.NDArray[np.complex128]
RealArray = npt.NDArray[np.float64]

HERMITIAN_ATOL = 1e-10


@dataclass(frozen=True)
class SpaceLayout:
    """Ordered factor dimensions of a composite space.

    Two shapes are supported: the composite layout ``(2, 2, N, N)`` and the
    single atom/cavity subsystem layout ``(2, N)`` used by factorised paths.
    """

    factor_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(dim) for dim in self.factor_dims)
        object.__setattr__(self, "factor_dims", dims)
        if len(dims) not in (2, 4):
            raise ValueError(f"Layout must have 2 or 4 factors, got {len(dims)}")
        if any(dim < 2 for dim in dims):
            raise ValueError(f"Every factor dimension must be >= 2, got {dims}")
        if dims[0] != 2 or (len(dims) == 4 and dims[1] != 2):
            raise ValueError(f"Qubit factors must have dimension 2, got {dims}")
        if len(dims) == 4 and dims[2] != dims[3]:
            raise ValueError(f"Both cavity modes must share one cutoff, got {dims}")

    @classmethod
    def composite(cls, n_max: int) -> SpaceLayout:
        return cls((2, 2, n_max, n_max))

    @classmethod
    def subsystem(cls, n_max: int) -> SpaceLayout:
        return cls((2, n_max))

    @property
    def total_dim(self) -> int:
        return prod(self.factor_dims)

    @property
    def n_max(self) -> int:
        return self.factor_dims[-1]

    @property
    def is_composite(self) -> bool:
        return len(self.factor_dims) == 4

    @property
    def qubit_factors(self) -> tuple[int, ...]:
        return (0, 1) if self.is_composite else (0,)

    @property
    def mode_factors(self) -> tuple[int, ...]:
        return (2, 3) if self.is_composite else (1,)

    def qubit_factor(self, j: int) -> int:
        _check_subsystem_index(j)
        return j - 1 if self.is_composite else 0

    def mode_factor(self, j: int) -> int:
        _check_subsystem_index(j)
        return j + 1 if self.is_composite else 1


def _check_subsystem_index(j: int) -> None:
    if j not in (1, 2):
        raise ValueError(f"Subsystem index must be 1 or 2, got {j}")


def sigma_x() -> ComplexArray:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def sigma_y() -> ComplexArray:
    return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)


def sigma_z() -> ComplexArray:
    return np.array([[1, 0], [0, -1]], dtype=np.complex128)


def identity(dim: int) -> ComplexArray:
    return np.eye(dim, dtype=np.complex128)


def destroy(dim: int) -> ComplexArray:
    """Truncated annihilation operator, ``a[n-1, n] = sqrt(n)``."""
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(np.complex128)


def number(dim: int) -> ComplexArray:
    return np.diag(np.arange(dim)).astype(np.complex128)


def basis(dim: int, index: int) -> ComplexArray:
    if not 0 <= index < dim:
        raise ValueError(f"Basis index {index} out of range for dimension {dim}")
    vector = np.zeros(dim, dtype=np.complex128)
    vector[index] = 1.0
    return vector


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexArray:
    left = np.asarray(a, dtype=np.complex128)
    right = np.asarray(b, dtype=np.complex128)
    for name, op in (("a", left), ("b", right)):
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValueError(f"Operand {name} must be square, got shape {op.shape}")
    return np.kron(left, right)


def embed(op: npt.ArrayLike, factor_index: int, layout: SpaceLayout) -> ComplexArray:
    """Lift a factor-local operator to the full space of ``layout``."""
    local = np.asarray(op, dtype=np.complex128)
    dims = layout.factor_dims
    if not 0 <= factor_index < len(dims):
        raise ValueError(f"Factor index {factor_index} out of range for {dims}")
    if local.shape != (dims[factor_index], dims[factor_index]):
        raise ValueError(
            f"Operator shape {local.shape} does not match factor "
            f"{factor_index} of dimension {dims[factor_index]}"
        )
    factors = [
        local if index == factor_index else identity(dim)
        for index, dim in enumerate(dims)
    ]
    return reduce(np.kron, factors)


def partial_trace(
    rho: npt.ArrayLike, keep: Iterable[int], layout: SpaceLayout
) -> ComplexArray:
    matrix = np.asarray(rho, dtype=np.complex128)
    dims = layout.factor_dims
    count = len(dims)
    kept = sorted(set(keep))
    if not kept:
        raise ValueError("keep must name at least one factor")
    if kept[0] < 0 or kept[-1] >= count:
        raise ValueError(f"keep {kept} out of range for {count} factors")
    if matrix.shape != (layout.total_dim, layout.total_dim):
        raise ValueError(
            f"Density matrix shape {matrix.shape} does not match layout "
            f"dimension {layout.total_dim}"
        )

    rows = [chr(ord("a") + index) for index in range(count)]
    cols = [
        chr(ord("a") + count + index) if index in kept else rows[index]
        for index in range(count)
    ]
    out = [rows[index] for index in kept] + [cols[index] for index in kept]
    subscripts = "".join(rows) + "".join(cols) + "->" + "".join(out)
    kept_dim = prod(dims[index] for index in kept)
    reduced = np.einsum(subscripts, matrix.reshape(dims + dims))
    return reduced.reshape(kept_dim, kept_dim)


def reduce_pure(
    psi: npt.ArrayLike, keep: Iterable[int], layout: SpaceLayout
) -> ComplexArray:
    """Reduced density matrix of a pure state without forming |psi><psi|."""
    vector = np.asarray(psi, dtype=np.complex128)
    dims = layout.factor_dims
    kept = sorted(set(keep))
    if not kept:
        raise ValueError("keep must name at least one factor")
    if vector.shape[0] != layout.total_dim:
        raise ValueError(
            f"State length {vector.shape[0]} does not match layout "
            f"dimension {layout.total_dim}"
        )
    traced = [index for index in range(len(dims)) if index not in kept]
    tensor = vector.reshape(dims).transpose(kept + traced)
    kept_dim = prod(dims[index] for index in kept)
    block = tensor.reshape(kept_dim, -1)
    return block @ block.conj().T


def is_hermitian(a: npt.ArrayLike, atol: float = HERMITIAN_ATOL) -> bool:
    matrix = np.asarray(a)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) < atol)


def eig_hermitian(a: npt.ArrayLike) -> tuple[RealArray, ComplexArray]:
    """Ascending eigenvalues and unitary eigenvectors of a Hermitian operator."""
    matrix = np.asarray(a, dtype=np.complex128)
    if not is_hermitian(matrix):
        raise ValueError("eig_hermitian requires a Hermitian operator")
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    return eigenvalues.astype(np.float64), eigenvectors


def validate_density(
    rho: npt.ArrayLike,
    trace_atol: float = 1e-8,
    hermitian_atol: float = HERMITIAN_ATOL,
    min_eigenvalue: float = -1e-8,
) -> ComplexArray:
    matrix = np.asarray(rho, dtype=np.complex128)
    if not is_hermitian(matrix, atol=hermitian_atol):
        raise InvalidStateError("Density matrix is not Hermitian")
    trace = float(np.real(np.trace(matrix)))
    if abs(trace - 1.0) > trace_atol:
        raise InvalidStateError(f"Density matrix trace {trace:.3e} is not 1")
    lowest = float(linalg.eigvalsh(matrix)[0])
    if lowest < min_eigenvalue:
        raise InvalidStateError(
            f"Density matrix has negative eigenvalue {lowest:.3e}"
        )
    return matrix
