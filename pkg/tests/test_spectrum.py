import numpy as np
import pytest

from tau2sov import spectrum as sp
from tau2sov.boundary import transfer
from tau2sov.representation import random_generic_config

from conftest import config, random_points


def sov(p=3, n=2, seed=1):
    return config(p, n, seed, mode="sov")


@pytest.fixture(scope="module")
def two_site():
    cfg = sov(3, 2, 1)
    setup = sp.SpectralSetup(cfg)
    return cfg, setup, sp.ed_spectrum(cfg, setup)


@pytest.mark.parametrize("n,count", [(1, 3), (2, 9)])
def test_ed_counts_and_certificates(n, count):
    cfg = sov(3, n, 1)
    rep = sp.ed_spectrum(cfg)
    assert rep.count == count and rep.simple
    assert rep.worst("interp") <= 1e-8
    assert rep.worst("even") <= 1e-8
    assert rep.worst("det") <= 1e-8


def test_frozen_single_site_eigenvalues():
    cfg, _ = random_generic_config(3, 2, 1, 5, mode="sov")
    rep = sp.ed_spectrum(cfg)
    got = sorted((t.values[0] for t in rep.eigenvalues), key=lambda z: z.real)
    expect = [-6.889386e+00 + 8.004967e+00j, 1.522279e+00 - 5.415174e+00j, 3.832301e+00 + 4.152394e+00j]
    for g, e in zip(got, expect):
        assert abs(g - e) <= 2e-6 * abs(e)


def test_tau_polynomial_matches_dense_transfer(rng, two_site):
    # independent route: eigenvalues of T(lam) at fresh points contain every tau(lam)
    cfg, _, rep = two_site
    for lam in random_points(rng, 3):
        dense = np.linalg.eigvals(transfer(cfg, lam))
        scale = np.abs(dense).max()
        for tau in rep.eigenvalues:
            assert np.abs(dense - tau(lam)).min() <= 1e-8 * scale
            assert abs(tau(-lam) - tau(lam)) <= 1e-10 * scale
            assert abs(tau(1 / lam) - tau(lam)) <= 1e-10 * scale


def test_tau_polynomial_structure(two_site):
    cfg, _, rep = two_site
    tau = rep.eigenvalues[0]
    c = tau.coefficients()
    assert len(c) == cfg.N + 3
    assert abs(c[0] - tau.tau_inf) <= 1e-8 * abs(tau.tau_inf)
    assert abs(tau.of_Lambda(tau.X) - tau.X * tau.center_plus) <= 1e-10 * abs(tau.X * tau.center_plus)
    with pytest.raises(Exception):
        sp.tau_from_values(cfg, [1.0])


def test_q_tables_and_eigenstates(rng, two_site):
    cfg, setup, rep = two_site
    lams = random_points(rng, 2)
    for k, tau in enumerate(rep.eigenvalues):
        kq = sp.q_table_from_kernel(setup, tau)
        kh = sp.q_table_from_kernel(setup, tau, hat=True)
        rq = sp.q_table_from_recursion(setup, tau)
        rh = sp.q_table_from_recursion(setup, tau, hat=True)
        assert np.max(np.abs(kq.q - rq.q) / np.abs(rq.q)) <= 1e-8
        assert np.max(np.abs(kh.q - rh.q) / np.abs(rh.q)) <= 1e-8
        right = sp.right_eigenstate(setup, kq)
        left = sp.left_eigenstate(setup, kh)
        assert sp.eigenstate_residual(cfg, tau, right, lams, "right") <= 1e-9
        assert sp.eigenstate_residual(cfg, tau, left, lams, "left") <= 1e-9
        assert sp.wave_function_residual(setup, tau, right) <= 1e-9
        v = rep.eig.right[:, k]
        assert 1 - abs(np.vdot(v, right)) / (np.linalg.norm(v) * np.linalg.norm(right)) <= 1e-9


def test_orthogonality_of_distinct_eigenvalues(two_site):
    cfg, setup, rep = two_site
    t0, t1 = rep.eigenvalues[:2]
    o = sp.orthogonality_relation(setup, t0, t1, sp.q_table_from_kernel(setup, t0, hat=True),
                                  sp.q_table_from_kernel(setup, t1))
    assert o["Mx"] <= 1e-9 and o["overlap"] <= 1e-9 and o["remainder"] <= 1e-9
    assert o["scalar_product_formula"] <= 1e-9
    with pytest.raises(sp.DegenerateInputError):
        sp.lambda_coefficients(t0, t0)


def test_coefficient_identities(rng):
    cfg = sov(3, 2, 3)
    setup = sp.SpectralSetup(cfg)
    assert sp.recursion_bracket_residuals(setup) <= 1e-10
    for lam in random_points(rng, 3):
        assert max(sp.gauge_residuals(cfg, lam).values()) <= 1e-10


def test_perturbed_eigenvalues_violate_determinant_conditions(two_site):
    cfg, setup, rep = two_site
    margin = sp.perturbation_margin(setup, rep.eigenvalues, np.random.default_rng(0))
    assert margin >= 1e-3
    assert rep.worst("det") <= 1e-3 * margin


def test_newton_recovers_ed_spectrum(two_site):
    cfg, setup, rep = two_site
    ed = np.array([t.values for t in rep.eigenvalues])
    rng = np.random.default_rng(3)
    seeds = [e * (1 + 1e-2 * np.exp(2j * np.pi * rng.uniform(size=cfg.N))) for e in ed]
    roots = sp.newton_solve(setup, seeds)
    assert len(roots) == len(ed)
    scale = np.abs(ed).max()
    for r, _ in roots:
        assert np.abs(ed - r.values).max(axis=1).min() <= 1e-8 * scale


def test_newton_from_random_seeds_finds_only_eigenvalues(two_site):
    cfg, setup, rep = two_site
    ed = np.array([t.values for t in rep.eigenvalues])
    scale = np.abs(ed).max()
    rng = np.random.default_rng(11)
    seeds = [scale * (rng.normal(size=cfg.N) + 1j * rng.normal(size=cfg.N)) for _ in range(15)]
    for r, _ in sp.newton_solve(setup, seeds):
        assert np.abs(ed - r.values).max(axis=1).min() <= 1e-6 * scale


def test_non_triangular_boundary_is_rejected():
    with pytest.raises(Exception):
        sp.SpectralSetup(config(3, 2, 1, mode="sov", triangular_plus=False))
