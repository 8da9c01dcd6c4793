import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tau2sov import reductions as rd
from tau2sov.representation import boundary_params
from tau2sov.representation import random_generic_config, root_of_unity

from conftest import random_points

ROOT = root_of_unity(3, 2)


def random_boundary(rng):
    z = [complex(np.exp(rng.uniform(np.log(0.5), np.log(2.0))) * cmath.exp(2j * np.pi * rng.uniform()))
         for _ in range(6)]
    return boundary_params(*z)


def test_p_power_matches_repeated_product():
    z = 0.7 + 0.4j
    assert abs(rd.p_power(z, 5) - z * z * z * z * z) <= 1e-15
    assert abs(rd.p_power(z, -3) - 1 / z ** 3) <= 1e-14


@pytest.mark.parametrize("n_sites", [1, 2, 3])
def test_sine_gordon_monodromy_and_boundary(rng, n_sites):
    sgp = rd.random_sine_gordon_params(n_sites, 10 + n_sites)
    assert sgp.x == n_sites % 2
    lams = random_points(rng, 3)
    mono = rd.sg_monodromy_identity(sgp, ROOT, lams)
    assert max(mono.values()) <= 1e-12
    bd = rd.sg_boundary_identity(sgp, ROOT, random_boundary(rng), lams)
    assert bd["u_minus"] <= 1e-12 and bd["transfer"] <= 1e-12
    if sgp.x == 1:
        # the overall sign of the mapped boundary objects is not optional for odd N
        assert bd["transfer_unsigned"] > 1e-3


def test_sine_gordon_single_site(rng):
    for lam in random_points(rng, 4):
        assert rd.sg_single_site_residual(ROOT, 1.2 + 0.3j, 0.8j, 1.1, 0.9 - 0.2j, lam) <= 1e-12


def test_sine_gordon_parameter_validation():
    with pytest.raises(Exception):
        rd.SineGordonParams((1.0,), (1.0, 2.0), (1.0,), (1.0,))
    with pytest.raises(Exception):
        rd.SineGordonParams((0.0,), (1.0,), (1.0,), (1.0,))


@pytest.mark.parametrize("p", [3, 5])
def test_xxz_identification(rng, p):
    r = rd.xxz_lax_identity(p, random_points(rng, 4))
    assert max(r[k] for k in ("lax", "spin_plus", "spin_minus", "spin_z", "commutation")) <= 1e-12
    assert sorted(r["sz_spectrum"]) == pytest.approx(list(range(-(p - 1), p, 2)))


def test_chiral_potts_restriction():
    k, c0 = 0.6 * cmath.exp(0.9j), 1.1 * cmath.exp(2.0j)
    cfg = rd.chiral_potts_config(3, 2, 4, c0, k)
    pts = [rd.curve_point(k, 0.9 * cmath.exp(0.5j), 3, c=cmath.exp(1.3j), x_branch=b) for b in range(3)]
    rep = rd.chiral_potts_constraints(cfg, c0, k, pts)
    assert rep.max_constraint_residual() <= 1e-10
    assert rep.max_point_residual() <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 0.9), st.floats(0, 2 * np.pi), st.floats(-0.3, 0.3), st.floats(0, 2 * np.pi),
       st.integers(0, 2), st.integers(0, 2))
def test_property_curve_points_and_automorphism(km, kp, sr, sp, xb, yb):
    k = km * cmath.exp(1j * kp)
    pt = rd.curve_point(k, cmath.exp(sr + 1j * sp), 3, x_branch=xb, y_branch=yb)
    assert max(rd.curve_residuals(pt, k, 3)) <= 1e-10
    swapped = rd.delta_automorphism(pt)
    assert max(rd.curve_residuals(swapped, k, 3)) <= 1e-10
    assert rd.delta_automorphism(swapped) == pt


@pytest.mark.parametrize("mode", ["general", "sov"])
def test_b_minus_without_nilpotency(mode):
    cfg, _ = random_generic_config(3, 2, 2, 1, mode=mode)
    rep = rd.b_minus_general_diag(cfg)
    assert rep.simple and rep.ok()
    assert len(rep.zeros) == cfg.dim and all(len(z) == cfg.N for z in rep.zeros)
    if mode == "sov":
        assert rep.power_match <= 1e-8
    else:
        assert rep.power_match is None
