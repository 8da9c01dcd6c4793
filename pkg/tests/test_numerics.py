import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tau2sov.numerics import (DimensionError, ShapeError, ToleranceProfile,
                              commutator_residual, determinant, general_eig, kernel_vector, kron,
                              kron_all, rel_diff, residual)


def cofactor_det(a):
    """Laplace expansion along the first row (independent oracle)."""
    n = a.shape[0]
    if n == 1:
        return a[0, 0]
    return sum((-1) ** j * a[0, j] * cofactor_det(np.delete(np.delete(a, 0, 0), j, 1)) for j in range(n))


def rand_c(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_tolerance_profile_defaults_and_validation():
    t = ToleranceProfile()
    assert (t.rtol_identity, t.rtol_spectral, t.rtol_functional) == (1e-10, 1e-8, 1e-6)
    with pytest.raises(ValueError):
        ToleranceProfile(rtol_identity=0.0)
    with pytest.raises(ValueError):
        ToleranceProfile(rtol_identity=1e-6, rtol_spectral=1e-8)


def test_kron_identities():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron(np.diag([1, 2]), np.eye(2)), np.diag([1, 1, 2, 2]))


def test_kron_explicit_index_convention(rng):
    a, b = rand_c(rng, 2, 3), rand_c(rng, 3, 2)
    k = kron(a, b)
    for i, j, r, s in itertools.product(range(2), range(3), range(3), range(2)):
        assert abs(k[i * 3 + r, j * 2 + s] - a[i, j] * b[r, s]) <= 1e-14 * abs(a[i, j] * b[r, s])


def test_kron_mixed_product(rng):
    a, b, c, d = (rand_c(rng, 2, 2) for _ in range(4))
    assert residual(kron(a, b) @ kron(c, d), kron(a @ c, b @ d)) <= 1e-10


def test_kron_dimension_cap_and_shape_errors():
    with pytest.raises(DimensionError):
        kron_all([np.eye(3)] * 8, max_dim=4096)
    with pytest.raises(ShapeError):
        kron(np.ones(3), np.eye(2))
    with pytest.raises(ValueError):
        kron(np.array([[np.nan]]), np.eye(2))


def test_determinant_trivial_cases():
    assert determinant(np.eye(3)) == pytest.approx(1)
    assert determinant(np.diag([2, 3, 4])) == pytest.approx(24)
    assert determinant(np.zeros((0, 0))) == 1
    with pytest.raises(ShapeError):
        determinant(np.ones((2, 3)))


def test_determinant_vs_cofactor(rng):
    for _ in range(5):
        a = rand_c(rng, 5, 5)
        assert rel_diff(determinant(a), cofactor_det(a)) <= 1e-10


def test_kernel_vector_cases(rng):
    k = kernel_vector(np.diag([0.0, 1.0, 2.0]))
    assert k.quality == 0
    assert abs(abs(k.vector[0]) - 1) < 1e-15
    assert kernel_vector(np.eye(3)).quality == pytest.approx(1)
    b = rand_c(rng, 4, 4)
    v = rand_c(rng, 4, 1)
    proj = np.eye(4) - v @ v.conj().T / (v.conj().T @ v)
    k = kernel_vector(b @ proj)
    assert k.quality < 1e-12
    assert k.second_quality > 1e-3
    assert 1 - abs(np.vdot(k.vector, v[:, 0])) / np.linalg.norm(v) < 1e-12


def test_general_eig_diagonal_and_defective():
    e = general_eig(np.diag([1.0, 2.0, 3.0]))
    assert np.allclose(np.sort(e.values.real), [1, 2, 3])
    for k in range(3):
        assert np.count_nonzero(np.abs(e.right[:, k]) > 1e-12) == 1
    assert not e.degenerate
    assert general_eig(np.array([[1.0, 1.0], [0.0, 1.0]])).degenerate   # Jordan block
    assert general_eig(np.eye(2)).degenerate


def test_general_eig_reconstruction(rng):
    a = rand_c(rng, 8, 8)
    e = general_eig(a)
    recon = sum(e.values[k] * np.outer(e.right[:, k], e.left[k]) for k in range(8))
    assert residual(recon, a) <= 1e-8
    assert residual(e.left @ e.right, np.eye(8)) <= 1e-8


def test_general_eig_dimension_cap():
    with pytest.raises(DimensionError):
        general_eig(np.eye(5), max_dim=4)


def test_residual_helpers():
    assert residual(np.zeros(3), np.zeros(3)) == 0
    assert residual([1.0, 0], [0, 0]) == 1
    assert rel_diff(2.0, 2.0) == 0
    assert rel_diff(0, 0) == 0
    assert commutator_residual(np.eye(2), np.diag([1, 2])) == 0
    assert commutator_residual(np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])) > 0.1


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0, max_value=2 ** 31))
def test_property_det_multiplicative(n, seed):
    rng = np.random.default_rng(seed)
    a, b = rand_c(rng, n, n), rand_c(rng, n, n)
    assert rel_diff(determinant(a @ b), determinant(a) * determinant(b)) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=7), st.integers(min_value=0, max_value=2 ** 31))
def test_property_eig_pairs(n, seed):
    rng = np.random.default_rng(seed)
    a = rand_c(rng, n, n)
    e = general_eig(a)
    assert residual(a @ e.right, e.right * e.values) <= 1e-8
    assert residual(e.left @ a, e.values[:, None] * e.left) <= 1e-8
