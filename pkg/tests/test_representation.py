import cmath
import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tau2sov.numerics import DimensionError, residual
from tau2sov.representation import (ConfigError, GenericityError, ParameterError, basis_vector,
                                    boundary_params, config_from_json, config_to_json, derive_site,
                                    embed, genericity_report, random_generic_config, root_of_unity,
                                    sov_a0, weyl_pair)

from conftest import config


def test_root_of_unity_values():
    r = root_of_unity(3, 2)
    assert abs(r.q - cmath.exp(-2j * cmath.pi / 3)) < 1e-15
    assert abs(r.q ** 3 - 1) < 1e-14
    assert abs(root_of_unity(5, 2).q ** 5 - 1) < 1e-14
    assert abs(r.q_half ** 2 - r.q) < 1e-15
    assert list(r.labels()) == [-1, 0, 1]
    assert r.l == 1


@pytest.mark.parametrize("p, pp", [(4, 2), (1, 2), (3, 1), (3, 0), (3, 6), (5, 10)])
def test_root_of_unity_rejects(p, pp):
    with pytest.raises(ParameterError):
        root_of_unity(p, pp)


def test_negative_p_prime_conjugates_q():
    assert abs(root_of_unity(3, -2).q - root_of_unity(3, 2).q.conjugate()) < 1e-15


def test_weyl_pair_p3_explicit():
    r = root_of_unity(3, 2)
    u, v = weyl_pair(r)
    q = r.q
    assert np.allclose(np.diag(v), [1 / q, 1, q])
    assert np.allclose(np.linalg.matrix_power(u, 3), np.eye(3), atol=0)
    assert np.allclose(np.linalg.matrix_power(v, 3), np.eye(3), atol=1e-14)
    # u|k> = |k-1>
    assert np.allclose(u @ basis_vector(r, 1), basis_vector(r, 0))
    assert np.allclose(u @ basis_vector(r, -1), basis_vector(r, 1))


@pytest.mark.parametrize("p, pp", [(3, 2), (5, 2), (5, 4), (7, 6)])
def test_weyl_relation(p, pp):
    r = root_of_unity(p, pp)
    u, v = weyl_pair(r)
    assert residual(u @ v, r.q * v @ u) <= 1e-10
    assert residual(np.linalg.matrix_power(u, p), np.eye(p)) == 0


def test_embed_structure():
    r = root_of_unity(3, 2)
    u, v = weyl_pair(r)
    assert np.array_equal(embed(np.eye(3), 2, 3), np.eye(27))
    assert residual(embed(v, 1, 2) @ embed(u, 2, 2), embed(u, 2, 2) @ embed(v, 1, 2)) == 0
    e = embed(u, 1, 2)
    assert all(np.count_nonzero(row) == 1 for row in e)
    # site 1 is the rightmost factor
    assert np.array_equal(e, np.kron(np.eye(3), u))
    with pytest.raises(ParameterError):
        embed(u, 3, 2)
    with pytest.raises(DimensionError):
        embed(u, 1, 9)


def test_derive_site_symmetric_point():
    s = derive_site(1, 1, 1, 1, 1, 1)
    q = root_of_unity(3, 2).q
    assert s.gamma == 1 and s.delta == 1 and s.k_site == 1
    assert abs(s.mu_plus ** 2 + q) < 1e-15 and abs(s.mu_minus ** 2 + q) < 1e-15


def test_derive_site_rejects_zero():
    with pytest.raises(ParameterError):
        derive_site(0, 1, 1, 1, 1, 1)
    with pytest.raises(ParameterError):
        derive_site(1, 1, 1, float("inf"), 1, 1)


def test_boundary_reparametrization(rng):
    for _ in range(10):
        z, k, zp, kp = (complex(x) for x in rng.normal(size=4) + 1j * rng.normal(size=4))
        b = boundary_params(z, k, 0.1j, zp, kp, 0.2)
        assert b.reparam_residual() <= 1e-12
    assert boundary_params(1.5, 0, 0, 1.2, 1, 0).alpha_m is None
    with pytest.raises(ParameterError):
        boundary_params(1.0, 1, 0, 1.2, 1, 0)


def test_generic_config_frozen_margins():
    cfg, rep = random_generic_config(3, 2, 2, 1, "sov")
    assert rep.ok
    assert min(rep.margins["esov"], rep.margins["sov2"], rep.margins["simple"]) >= 1e-2
    # values frozen from the first run of the sampler
    assert rep.margins["sov2"] == pytest.approx(0.0203171104696288, rel=1e-10)
    assert rep.margins["simple"] == pytest.approx(0.8426899469702642, rel=1e-10)
    assert cfg.j == (1, 1)
    assert cfg.sov_residual() <= 1e-14


def test_generic_config_modes():
    cfg, _ = random_generic_config(3, 2, 1, 7, "general")
    assert cfg.N == 1 and cfg.j is None and cfg.mode == "general"
    d, _ = random_generic_config(3, 2, 2, 3, "sov_double")
    assert d.double_sov_residual() <= 1e-14
    with pytest.raises(ParameterError):
        random_generic_config(3, 2, 2, 3, "bogus")


def test_generic_config_deterministic():
    a, _ = random_generic_config(5, 2, 2, 11, "sov")
    b, _ = random_generic_config(5, 2, 2, 11, "sov")
    assert a == b
    assert config_to_json(a) == config_to_json(b)


def test_genericity_report_flags_collision():
    cfg = config(3, 2, 4, "sov")
    j = (cfg.j[0], cfg.j[0])
    bad = replace(cfg, sites=(cfg.sites[0], cfg.sites[0]), j=j, a0=sov_a0(cfg.root, j))
    rep = genericity_report(bad)
    assert not rep.esov_ok and not rep.ok


def test_genericity_error_names_condition():
    err = GenericityError("x", "esov")
    assert err.condition == "esov"


def test_config_round_trip_byte_identical():
    for mode in ("general", "sov", "sov_double"):
        cfg = config(3, 2, 2, mode)
        text = config_to_json(cfg)
        back = config_from_json(text)
        assert config_to_json(back) == text
        assert back.sites == cfg.sites and back.a0 == cfg.a0 and back.j == cfg.j


def test_config_missing_key_named():
    doc = json.loads(config_to_json(config(3, 1, 1, "sov")))
    del doc["boundary"]["kappa_p"]
    with pytest.raises(ConfigError, match="kappa_p"):
        config_from_json(json.dumps(doc))
    doc = json.loads(config_to_json(config(3, 1, 1, "sov")))
    del doc["sites"]
    with pytest.raises(ConfigError, match="sites"):
        config_from_json(json.dumps(doc))


def test_config_unknown_key_rejected():
    doc = json.loads(config_to_json(config(3, 1, 1)))
    doc["sites"][0]["gamma"] = "1.0,0.0"
    with pytest.raises(ConfigError, match="gamma"):
        config_from_json(json.dumps(doc))


def test_config_parse_error_position():
    text = config_to_json(config(3, 1, 1))
    with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
        config_from_json(text[:40])
    doc = json.loads(text)
    doc["a0"] = "1.0"
    with pytest.raises(ConfigError, match="a0"):
        config_from_json(json.dumps(doc))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3, allow_nan=False), st.floats(-1e3, 1e3, allow_nan=False))
                .filter(lambda t: abs(complex(*t)) > 1e-6), min_size=6, max_size=6))
def test_property_site_roundtrip_exact(vals):
    """Any finite nonzero couplings survive save/load bit-for-bit."""
    base = config(3, 1, 1)
    site = derive_site(*(complex(*t) for t in vals), root=base.root)
    cfg = replace(base, sites=(site,))
    assert config_from_json(config_to_json(cfg)).sites == cfg.sites
