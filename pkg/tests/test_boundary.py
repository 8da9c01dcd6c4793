import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tau2sov import boundary as bd
from tau2sov.bulk import monodromy, qdet_scalar
from tau2sov.numerics import commutator_residual, rel_diff, residual
from tau2sov.representation import root_of_unity

from conftest import config, random_points
from test_bulk import r_explicit, two_aux

SY = np.array([[0, -1j], [1j, 0]])


def reflection_oracle(u1, u2, lam, mu, q):
    """R(l/m) U1(l) R(l m/q) U2(m) - U2(m) R(l m/q) U1(l) R(l/m), built densely."""
    m1, m2, d = two_aux(u1, u2)
    ra = np.kron(r_explicit(lam / mu, q), np.eye(d))
    rb = np.kron(r_explicit(lam * mu / q, q), np.eye(d))
    return residual(ra @ m1 @ rb @ m2, m2 @ rb @ m1 @ ra)


def scalar_aux(k):
    return k.reshape(2, 2, 1, 1)


def test_k_matrix_structure():
    q = root_of_unity(3, 2).q
    k = bd.k_matrix(1.2 + 0.1j, 1.5j + 0.3, 0.0, 0.2, q)
    assert k[0, 1] == 0 and k[1, 0] == 0
    k = bd.k_matrix(1.2 + 0.1j, 1.5j + 0.3, 0.7, 0.2, q, triangular=True)
    assert k[0, 1] == 0 and k[1, 0] != 0
    k = bd.k_matrix(1.2 + 0.1j, 1.5j + 0.3, 0.7, 0.2, q)
    assert k[0, 1] != 0 and k[1, 0] != 0
    with pytest.raises(ValueError):
        bd.k_matrix(0, 1.5, 1, 0, q)
    with pytest.raises(ValueError):
        bd.k_matrix(1.1, 1.0, 1, 0, q)


def test_k_minus_plus_arguments():
    cfg = config(3, 1, 1)
    b = cfg.boundary
    pair = (cfg.q, cfg.root.q_half)
    lam = 0.9 + 0.5j
    assert np.array_equal(bd.k_minus(cfg, lam), bd.k_matrix(lam, b.zeta_m, b.kappa_m, b.tau_m, pair))
    assert np.array_equal(bd.k_plus(cfg, lam), bd.k_matrix(lam * cfg.q, b.zeta_p, b.kappa_p, b.tau_p, pair, True))
    assert bd.k_plus(cfg, lam)[0, 1] == 0   # triangular plus boundary: b_+ = 0


def test_scalar_k_solves_reflection(rng):
    cfg = config(3, 1, 1)
    b = cfg.boundary
    pair = (cfg.q, cfg.root.q_half)
    for lam, mu in zip(random_points(rng, 5), random_points(rng, 5)):
        k1 = bd.k_matrix(lam, b.zeta_m, b.kappa_m, b.tau_m, pair)
        k2 = bd.k_matrix(mu, b.zeta_m, b.kappa_m, b.tau_m, pair)
        assert reflection_oracle(scalar_aux(k1), scalar_aux(k2), lam, mu, cfg.q) <= 1e-12


def test_hat_monodromy_single_site_sigma_y():
    cfg = config(3, 1, 2)
    lam = 1.1 * cmath.exp(0.8j)
    m = monodromy(cfg, 1 / lam)
    mt = m.transpose(1, 0, 2, 3)
    expect = -np.einsum("ia,abxy,bj->ijxy", SY, mt, SY)    # (-1)^N with N = 1
    assert residual(bd.hat_monodromy(cfg, lam), expect) <= 1e-15


@pytest.mark.parametrize("n_sites", [1, 2])
@pytest.mark.parametrize("fn", [bd.u_minus, bd.v_plus])
def test_reflection_equation(rng, n_sites, fn):
    cfg = config(3, n_sites, 3, triangular_plus=False)
    for lam, mu in zip(random_points(rng, 5), random_points(rng, 5)):
        assert bd.reflection_residual(cfg, fn, lam, mu) <= 1e-10
        assert reflection_oracle(fn(cfg, lam), fn(cfg, mu), lam, mu, cfg.q) <= 1e-10


def test_negated_plus_monodromy_is_not_a_solution():
    cfg = config(3, 1, 3, triangular_plus=False)
    assert bd.reflection_residual(cfg, bd.v_plus_negated, 0.9 + 0.3j, 1.1 - 0.4j) > 1e-3


@pytest.mark.parametrize("n_sites", [1, 2])
def test_transfer_commuting_and_forms(rng, n_sites):
    cfg = config(3, n_sites, 4, triangular_plus=False)
    for lam, mu in zip(random_points(rng, 5), random_points(rng, 5)):
        t = bd.transfer(cfg, lam)
        assert commutator_residual(t, bd.transfer(cfg, mu)) <= 1e-10
        assert residual(t, bd.transfer_alt(cfg, lam)) <= 1e-10
        assert residual(bd.transfer(cfg, 1 / lam), t) <= 1e-10
        assert residual(bd.transfer(cfg, -lam), t) <= 1e-10


def test_triangular_transfer_decomposition():
    cfg = config(3, 2, 4)
    lam = 0.95 * cmath.exp(0.6j)
    u = bd.u_minus(cfg, lam)
    c_plus = bd.k_plus(cfg, lam)[1, 0]
    assert residual(bd.transfer(cfg, lam), bd.diagonal_transfer(cfg, lam) + c_plus * u[0, 1]) <= 1e-12
    diag = cfg.with_boundary(kappa_p=0)
    assert np.array_equal(bd.transfer(diag, lam), bd.diagonal_transfer(diag, lam))


def test_u_minus_symmetries(rng):
    cfg = config(3, 2, 5)
    q = cfg.q
    for lam in random_points(rng, 5):
        u, ui = bd.u_minus(cfg, lam), bd.u_minus(cfg, 1 / lam)
        den = lam ** 2 - lam ** -2
        d_expect = (lam ** 2 / q - q / lam ** 2) / den * ui[0, 0] + (q - 1 / q) / den * u[0, 0]
        assert residual(u[1, 1], d_expect) <= 1e-10
        f = -(lam ** 2 * q - 1 / (q * lam ** 2)) / (lam ** 2 / q - q / lam ** 2)
        assert residual(ui[0, 1], f * u[0, 1]) <= 1e-10
        assert residual(ui[1, 0], f * u[1, 0]) <= 1e-10
        assert residual(bd.u_minus_entry(cfg, lam, 0, 1), u[0, 1]) <= 1e-14


@pytest.mark.parametrize("n_sites", [1, 2])
def test_boundary_quantum_determinant(rng, n_sites):
    cfg = config(3, n_sites, 6)
    eye = np.eye(cfg.dim)
    for lam, mu in zip(random_points(rng, 5), random_points(rng, 5)):
        op1, op2, scalar = bd.boundary_qdet(cfg, lam)
        assert residual(op1, scalar * eye) <= 1e-10
        assert residual(op2, scalar * eye) <= 1e-10
        assert residual(op1, op2) <= 1e-10
        u = bd.u_minus(cfg, mu)
        assert max(commutator_residual(op1, u[i, j]) for i in range(2) for j in range(2)) <= 1e-10


@pytest.mark.parametrize("n_sites", [1, 2, 3])
def test_special_values(n_sites):
    cfg = config(3, n_sites, 7)
    sv = bd.special_values(cfg)
    assert max(sv["residuals"].values()) <= 1e-10
    X = cfg.q + 1 / cfg.q
    assert rel_diff(sv["values"]["T(q^1/2)"], (-1) ** n_sites * X * qdet_scalar(cfg, 1.0)) == 0


def test_transfer_vanishes_at_i_q_half_for_zeta_plus_i():
    cfg = config(3, 2, 7).with_boundary(zeta_p=1j)
    t = bd.transfer(cfg, 1j * cfg.root.q_half)
    assert np.linalg.norm(t) <= 1e-12 * np.linalg.norm(bd.transfer(cfg, 1.1j * cfg.root.q_half))


def test_a_plus_at_q_half():
    cfg = config(3, 1, 1)
    f = bd.boundary_scalar_fns(cfg)
    assert rel_diff(f.a_plus(cfg.root.q_half), cfg.q + 1 / cfg.q) <= 1e-14


@pytest.mark.parametrize("triangular", [True, False])
@pytest.mark.parametrize("n_sites", [1, 2])
def test_tau_infinity(triangular, n_sites):
    cfg = config(3, n_sites, 8, triangular_plus=triangular)
    expect = bd.tau_infinity(cfg)
    for val, res in bd.tau_infinity_numeric(cfg):
        assert rel_diff(val, expect) <= 1e-8
        assert res <= 1e-8


def test_tau_infinity_without_sign_factor_odd_n():
    cfg = config(3, 1, 8)
    val = bd.tau_infinity_numeric(cfg)[0][0]
    assert rel_diff(val, bd.tau_infinity_signed_triangular(cfg)) > 1.0


@pytest.mark.parametrize("n_sites", [1, 2])
def test_exchange_relation_and_diagonal_forms(rng, n_sites):
    cfg = config(3, n_sites, 9)
    for lam, mu in zip(random_points(rng, 5), random_points(rng, 5)):
        assert bd.exchange_relation_residual(cfg, lam, mu) <= 1e-10
        res_ad, res_direct = bd.t_diag_forms(cfg, lam)
        assert res_ad <= 1e-10 and res_direct <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.69, 0.69), st.floats(0, 2 * np.pi))
def test_property_transfer_symmetry(r, t):
    lam = cmath.exp(r + 1j * t)
    cfg = config(3, 2, 4, triangular_plus=False)
    tl = bd.transfer(cfg, lam)
    assert residual(bd.transfer(cfg, 1 / lam), tl) <= 1e-10
    assert residual(bd.transfer(cfg, -lam), tl) <= 1e-10
