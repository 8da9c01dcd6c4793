import numpy as np
import pytest

from tau2sov import spectrum as sp
from tau2sov import tq
from tau2sov.numerics import ToleranceProfile

from conftest import config

RTOL = ToleranceProfile().rtol_functional


def double(n=2, seed=1):
    return config(3, n, seed, mode="sov_double")


@pytest.fixture(scope="module", params=[1, 2])
def chain(request):
    cfg = double(request.param)
    setup = sp.SpectralSetup(cfg)
    rep = sp.ed_spectrum(cfg, setup)
    qps = [tq.q_polynomial_from_tau(setup, t) for t in rep.eigenvalues]
    return cfg, setup, rep, qps


def test_sov_mode_without_double_nilpotency_is_rejected():
    with pytest.raises(Exception):
        tq.require_double(config(3, 2, 1, mode="sov"))


def test_z_function():
    p = 3
    lam = 0.9 * np.exp(0.4j)
    assert tq.Z_fn(lam, p) == pytest.approx(tq.Z_fn(1 / lam, p))
    assert tq.Z_fn(lam, p) == pytest.approx(tq.Z_fn(lam * np.exp(1j * np.pi / p), p))


def test_functional_equation(chain):
    cfg, setup, rep, _ = chain
    for k, t in enumerate(rep.eigenvalues):
        fc = tq.dbar_det_in_Z(setup, t, np.random.default_rng(k))
        assert fc.ok, (fc.fit_residual, fc.equation_residual, fc.leading_residual, fc.asymptote_residual)


def test_asymptote_numeric(chain):
    cfg, setup, *_ = chain
    exact = tq.abar_inf(cfg)
    assert abs(tq.abar_inf_numeric(setup) - exact) <= 1e-5 * abs(exact)


def test_q_polynomial_degree_and_routes(chain):
    cfg, setup, rep, qps = chain
    for qp in qps:
        assert qp.degree == (cfg.root.p - 1) * cfg.N
        for lam in (0.9 * np.exp(0.3j), 1.1 * np.exp(2.1j)):
            Lam = lam ** 2 + lam ** -2
            assert abs(qp.of_Lambda(Lam) - qp.interpolate(Lam)) <= 1e-8 * abs(qp.of_Lambda(Lam))
        for r in qp.lambda_roots():
            assert abs(qp(r)) <= 1e-8 * np.abs(qp.coefficients).sum()


def test_inhomogeneous_baxter_equation(chain):
    cfg, setup, rep, qps = chain
    for t, qp in zip(rep.eigenvalues, qps):
        assert tq.tq_residual(setup, t, qp) <= RTOL


def test_perturbed_tau_violates_baxter_equation(chain):
    cfg, setup, rep, qps = chain
    t, qp = rep.eigenvalues[0], qps[0]
    bad = t.with_values(t.values * (1 + 1e-3))
    assert tq.tq_residual(setup, bad, qp) >= 1e3 * RTOL


def test_bethe_states_reproduce_ed_eigenvectors(chain):
    cfg, setup, rep, qps = chain
    for k, qp in enumerate(qps):
        right = tq.bethe_state(setup, qp, "right")
        left = tq.bethe_state(setup, qp, "left")
        v, w = rep.eig.right[:, k], rep.eig.left[k]
        assert 1 - abs(np.vdot(v, right)) / (np.linalg.norm(v) * np.linalg.norm(right)) <= 1e-8
        assert 1 - abs(w @ left.conj()) / (np.linalg.norm(w) * np.linalg.norm(left)) <= 1e-8


def test_b_hat_polynomial_matches_direct_evaluation():
    cfg = double(2)
    bh = tq.BHatPolynomial(cfg)
    lam = 0.95 * np.exp(0.7j)
    direct = tq.b_hat(cfg, lam)
    assert np.linalg.norm(bh(lam ** 2 + lam ** -2) - direct) <= 1e-9 * np.linalg.norm(direct)


def test_homogeneous_case_even_chain():
    h = tq.homogeneous_case(double(2))
    assert h["leading_term"] <= 1e-10
    assert h["g_max"] <= RTOL and h["tq_residual"] <= RTOL and h["bethe_residual"] <= RTOL
    assert h["a_at_iq"] <= 1e-10


def test_homogeneous_case_odd_chain_keeps_q_half_obstruction():
    # for odd N the q^{1/2} term of G survives the homogeneous choice of boundary
    h = tq.homogeneous_case(double(1))
    assert h["leading_term"] <= 1e-10
    assert h["q_half_term"] > 1e-3
    assert h["g_max"] > RTOL and h["tq_residual"] > 1e3 * RTOL


def test_homogeneous_config_sign_choice():
    cfg = double(2)
    assert tq.leading_term_residual(tq.homogeneous_config(cfg)) <= 1e-10
    assert tq.leading_term_residual(tq.homogeneous_config(cfg, unsigned_power=True)) > 1e-3
    with pytest.raises(Exception):
        tq.homogeneous_config(cfg, z_plus=2)
