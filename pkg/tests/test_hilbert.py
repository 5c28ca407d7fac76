import numpy as np
import pytest

from bellcav.errors import InvalidStateError
from bellcav.hilbert import (
    SpaceLayout,
    basis,
    destroy,
    eig_hermitian,
    embed,
    identity,
    kron,
    partial_trace,
    reduce_pure,
    sigma_x,
    sigma_z,
    validate_density,
)


def _random_pure(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def _entropy(rho):
    values = np.linalg.eigvalsh(rho)
    values = values[values > 1e-14]
    return float(-np.sum(values * np.log2(values)))


def test_layout_dimensions():
    layout = SpaceLayout.composite(3)
    assert layout.total_dim == 36
    assert layout.n_max == 3
    assert layout.mode_factor(2) == 3
    assert SpaceLayout.subsystem(5).total_dim == 10


@pytest.mark.parametrize("dims", [(2, 2, 3), (2, 2, 3, 4), (2, 1), (3, 3)])
def test_layout_rejects_bad_dims(dims):
    with pytest.raises(ValueError):
        SpaceLayout(dims)


def test_kron_examples():
    assert np.allclose(kron(identity(2), identity(2)), identity(4))
    assert np.allclose(kron(sigma_z(), identity(2)), np.diag([1, 1, -1, -1]))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(kron(sigma_x(), sigma_x()) @ bell, bell)


def test_kron_is_associative():
    rng = np.random.default_rng(0)
    a, b, c = (rng.integers(-3, 4, size=(2, 2)) for _ in range(3))
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_kron_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        kron(np.ones((2, 3)), identity(2))


def test_embed_identity_and_commutation():
    layout = SpaceLayout.composite(2)
    assert np.allclose(embed(identity(2), 1, layout), identity(16))
    first = embed(sigma_z(), 0, layout)
    second = embed(sigma_x(), 1, layout)
    assert np.array_equal(first @ second, second @ first)


def test_embedded_annihilator_kills_empty_mode():
    layout = SpaceLayout.composite(3)
    a1 = embed(destroy(3), 2, layout)
    for s1 in range(2):
        for s2 in range(2):
            for n in range(3):
                state = np.kron(
                    np.kron(basis(2, s1), basis(2, s2)),
                    np.kron(basis(3, 0), basis(3, n)),
                )
                assert np.allclose(a1 @ state, 0)


def test_embed_rejects_dimension_mismatch():
    with pytest.raises(ValueError, match="does not match"):
        embed(destroy(4), 2, SpaceLayout.composite(3))


def test_partial_trace_of_product_state():
    layout = SpaceLayout.composite(2)
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    projector = np.outer(bell, bell)
    vacuum = np.zeros((4, 4))
    vacuum[0, 0] = 1.0
    reduced = partial_trace(np.kron(projector, vacuum), (0, 1), layout)
    assert np.allclose(reduced, projector)


def test_partial_trace_of_maximally_mixed_state():
    layout = SpaceLayout.composite(3)
    reduced = partial_trace(identity(36) / 36, (0, 1), layout)
    assert np.allclose(reduced, identity(4) / 4)


def test_schmidt_symmetry_of_random_pure_state():
    layout = SpaceLayout.composite(3)
    psi = _random_pure(np.random.default_rng(1), layout.total_dim)
    rho = np.outer(psi, psi.conj())
    qubits = partial_trace(rho, (0, 1), layout)
    modes = partial_trace(rho, (2, 3), layout)
    assert np.trace(qubits) == pytest.approx(1.0, abs=1e-12)
    assert _entropy(qubits) == pytest.approx(_entropy(modes), abs=1e-8)
    top_qubits = np.sort(np.linalg.eigvalsh(qubits))[-4:]
    top_modes = np.sort(np.linalg.eigvalsh(modes))[-4:]
    assert np.allclose(top_qubits, top_modes, atol=1e-10)


def test_reduce_pure_matches_partial_trace():
    layout = SpaceLayout.composite(3)
    psi = _random_pure(np.random.default_rng(2), layout.total_dim)
    expected = partial_trace(np.outer(psi, psi.conj()), (0, 2), layout)
    assert np.allclose(reduce_pure(psi, (0, 2), layout), expected)


@pytest.mark.parametrize("keep", [(), (4,), (-1, 0)])
def test_partial_trace_rejects_bad_keep(keep):
    with pytest.raises(ValueError):
        partial_trace(identity(16) / 16, keep, SpaceLayout.composite(2))


def test_eig_hermitian_pauli():
    values, vectors = eig_hermitian(sigma_z())
    assert np.allclose(values, [-1, 1])
    assert np.allclose(np.abs(vectors[:, 0]), [0, 1])
    values, _ = eig_hermitian(sigma_x())
    assert np.allclose(values, [-1, 1])


def test_eig_hermitian_reconstructs_random_matrix():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = a + a.conj().T
    values, vectors = eig_hermitian(h)
    assert np.all(np.diff(values) >= 0)
    assert np.allclose(vectors.conj().T @ vectors, identity(8), atol=1e-10)
    assert np.max(np.abs(h - (vectors * values) @ vectors.conj().T)) < 1e-10


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError, match="Hermitian"):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_validate_density():
    assert validate_density(identity(4) / 4).shape == (4, 4)
    with pytest.raises(InvalidStateError, match="trace"):
        validate_density(identity(4) / 2)
    with pytest.raises(InvalidStateError, match="negative"):
        validate_density(np.diag([1.5, -0.5]))
