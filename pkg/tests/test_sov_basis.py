import numpy as np
import pytest

from tau2sov import sov_basis as sb
from tau2sov.boundary import u_minus_entry
from tau2sov.numerics import residual

from conftest import config, random_points


def sov(p=3, n=2, seed=1):
    return config(p, n, seed, mode="sov")


def test_labels_and_vandermonde():
    labels = sb.h_tuples(3, 2)
    assert [sb.h_index(h, 3) for h in labels] == list(range(9))
    assert labels[1] == (1, 0)       # first entry varies fastest
    assert sb.vandermonde([1.0, 3.0, 7.0]) == (3 - 1) * (7 - 1) * (7 - 3)
    assert sb.vandermonde([2.0]) == 1


def test_general_mode_is_rejected():
    with pytest.raises(sb.ModeError):
        sb.SovBasis(config(3, 2, 1, mode="general"))


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
def test_b_minus_spectrum_matches_formula(rng, p, n):
    # eigenvalues of the dense operator, independent of the ladder construction
    cfg = sov(p, n, 2)
    for lam in random_points(rng, 3):
        dense = np.linalg.eigvals(u_minus_entry(cfg, lam, 0, 1))
        formula = np.array([sb.b_eigenvalue(cfg, h, lam) for h in sb.h_tuples(p, n)])
        scale = np.abs(formula).max()
        for ev in formula:
            assert np.abs(dense - ev).min() <= 1e-8 * scale


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
def test_eigenbases(rng, p, n):
    basis = sb.SovBasis(sov(p, n, 2))
    res = basis.eigen_residuals(random_points(rng, 4))
    assert res["left"] <= 1e-9 and res["right"] <= 1e-9
    g = basis.gram_residuals()
    assert g["diag"] <= 1e-9 and g["offdiag"] <= 1e-9 and g["ratio_law"] <= 1e-9
    assert basis.identity_decomposition_residual() <= 1e-9
    assert basis.b_vanishing_residual() <= 1e-12


def test_single_site_gram_is_identity():
    basis = sb.SovBasis(sov(3, 1, 3))
    assert residual(basis.gram_matrix(), np.eye(3)) <= 1e-10


def test_reference_states(rng):
    cfg = sov(3, 2, 4)
    left, right = sb.reference_states(cfg)
    assert np.count_nonzero(left) == 1 and np.count_nonzero(right) == 1
    for lam in random_points(rng, 3):
        res = sb.reference_identity_residuals(cfg, lam)
        assert max(v for k, v in res.items() if not k.endswith("C_norm")) <= 1e-10
        assert min(res["left_C_norm"], res["right_C_norm"]) > 1e-6   # C does not annihilate them


def test_coinciding_point_weight_fails_for_two_sites():
    basis = sb.SovBasis(sov(3, 2, 1))
    assert basis.identity_decomposition_zero_weight_residual() >= 0.5


def test_grid_identities():
    basis = sb.SovBasis(sov(3, 2, 5))
    assert basis.qdet_grid_residual() <= 1e-10
    assert basis.kappa_product_residual() <= 1e-10
    assert basis.grid.min_separation() > 1e-8


@pytest.mark.parametrize("n", [1, 2])
def test_interpolation_of_a_and_d(rng, n):
    basis = sb.SovBasis(sov(3, n, 6))
    for lam in random_points(rng, 2):
        for h in basis.labels:
            assert basis.a_minus_interpolation_residual(h, lam) <= 1e-9
            assert basis.d_minus_interpolation_residual(h, lam) <= 1e-9


def test_separate_scalar_product_is_determinant(rng):
    basis = sb.SovBasis(sov(3, 2, 7))
    for _ in range(5):
        al = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        be = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
        left = sb.SeparateState(al, "left")
        right = sb.SeparateState(be, "right")
        lv = sb.separate_state_vector(basis, left)
        rv = sb.separate_state_vector(basis, right)
        # brute force over the Gram-diagonal basis: sum_h prod alpha beta V(X^(h))
        brute = sum(np.prod([al[a, h[a]] * be[a, h[a]] for a in range(2)]) * basis.vandermonde(h)
                    for h in basis.labels)
        assert abs(lv @ rv - brute) <= 1e-9 * abs(brute)
        assert abs(sb.separate_scalar_product(basis, left, right) - brute) <= 1e-9 * abs(brute)
