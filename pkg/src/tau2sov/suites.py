"""Verification suites: named numerical checks grouped by subject.

Every check is identified by the equation label it certifies (with a ``:``
suffix when one label yields several checks) and returns a normalized
residual that is compared with a tolerance from the active
:class:`~tau2sov.numerics.ToleranceProfile`.  Checks with a boolean outcome
(simplicity of a spectrum, number of eigenvalues) report a residual of 0 or 1
against tolerance 0.5; "at least" criteria are turned into residuals by
taking ratios (e.g. ``1e-3 / margin`` against tolerance 1).

Each check draws its random points from its own generator
``default_rng([seed, crc32(id)])`` so results do not depend on the order or
the thread in which checks run.  Checks may run on a thread pool (size from
the ``TAU2SOV_WORKERS`` environment variable, default 1); records are always
returned in declaration order.
"""

from __future__ import annotations

import cmath
import math
import os
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import boundary as bd
from . import bulk as bk
from .numerics import ToleranceProfile, commutator_residual, rel_diff, residual
from .report import CheckRecord
from .representation import (ChainConfig, GenericityError, ParameterError, boundary_params,
                             genericity_report, random_generic_config, root_of_unity)

__all__ = [
    "SUITES", "DEFAULT_MODE", "UsageError", "RunSpec", "Check", "validate_spec", "build_checks",
    "run_checks", "run", "check_rng", "screen_config", "MAX_DEFAULT_DIM",
]

SUITES = ("bulk", "boundary", "sov", "spectrum", "tq", "reductions")
MODES = ("general", "sov", "sov_double")
DEFAULT_MODE = {"bulk": "general", "boundary": "general", "sov": "sov", "spectrum": "sov",
                "tq": "sov_double", "reductions": "general"}
ALLOWED_MODES = {"bulk": MODES, "boundary": MODES, "sov": ("sov", "sov_double"),
                 "spectrum": ("sov", "sov_double"), "tq": ("sov_double",), "reductions": MODES}
MAX_DEFAULT_DIM = 243
N_POINTS = 10


class UsageError(ValueError):
    """Invalid run specification (command-line exit code 2)."""


@dataclass(frozen=True)
class RunSpec:
    """What to verify and on which configuration.

    ``mode=None`` picks each suite's default mode; an explicit mode must be
    admissible for every selected suite.  ``config`` replaces the generated
    configuration (its ``mode`` field then plays the role of ``mode``).
    """

    suite: str
    p: int = 3
    p_prime: int = 2
    N: int = 2
    seed: int = 1
    mode: Optional[str] = None
    tol: ToleranceProfile = field(default_factory=ToleranceProfile)
    allow_large: bool = False
    config: Optional[ChainConfig] = None

    @property
    def suites(self) -> tuple:
        return SUITES if self.suite == "all" else (self.suite,)


@dataclass
class Check:
    id: str
    tolerance: float
    fn: Callable    # rng -> (residual, context)


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(check_id.encode())])


def validate_spec(spec: RunSpec) -> RunSpec:
    """Reject inconsistent specifications before any heavy computation."""
    if spec.suite not in SUITES + ("all",):
        raise UsageError(f"unknown suite {spec.suite!r}")
    if spec.config is not None:
        cfg = spec.config
        spec = replace(spec, p=cfg.root.p, p_prime=cfg.root.p_prime, N=cfg.N,
                       mode=spec.mode or cfg.mode,
                       seed=spec.seed if cfg.seed is None else cfg.seed)
        if spec.mode != cfg.mode:
            raise UsageError(f"--mode {spec.mode} contradicts the configuration file (mode {cfg.mode})")
    if not isinstance(spec.p, int) or spec.p < 3 or spec.p % 2 == 0:
        raise UsageError(f"p must be an odd integer >= 3, got {spec.p}")
    if spec.p_prime % 2 != 0 or spec.p_prime == 0:
        raise UsageError(f"p' must be a non-zero even integer, got {spec.p_prime}")
    if math.gcd(spec.p_prime // 2, spec.p) != 1:
        raise UsageError(f"q = exp(-i pi p'/p) must be a primitive p-th root of unity (p={spec.p}, p'={spec.p_prime})")
    if spec.N < 1:
        raise UsageError(f"N must be >= 1, got {spec.N}")
    if spec.p ** spec.N > MAX_DEFAULT_DIM and not spec.allow_large:
        raise UsageError(f"dimension p^N = {spec.p ** spec.N} exceeds {MAX_DEFAULT_DIM}; pass --allow-large")
    if spec.mode is not None:
        if spec.mode not in MODES:
            raise UsageError(f"unknown mode {spec.mode!r}")
        for s in spec.suites:
            if spec.mode not in ALLOWED_MODES[s]:
                raise UsageError(f"suite {s} requires mode in {ALLOWED_MODES[s]}, got {spec.mode}")
    return spec


def screen_config(cfg: ChainConfig) -> None:
    """Raise :class:`GenericityError` naming the first excluded equality ``cfg`` comes close to."""
    rep = genericity_report(cfg)
    for name, ok in (("esov", rep.esov_ok), ("sov2", rep.sov2_ok), ("simple", rep.simple_ok)):
        if not ok:
            raise GenericityError(f"relative margin {rep.margins[name]:.2e} below 1e-2", name)


class _Context:
    """Configurations per mode, generated on first use."""

    def __init__(self, spec: RunSpec):
        self.spec = spec
        self.tol = spec.tol
        self._cfgs = {}
        self.genericity = {}

    def config(self, suite: str) -> ChainConfig:
        if self.spec.config is not None:
            if suite in ("sov", "spectrum", "tq"):
                screen_config(self.spec.config)
            return self.spec.config
        mode = self.spec.mode or DEFAULT_MODE[suite]
        if mode not in self._cfgs:
            cfg, rep = random_generic_config(self.spec.p, self.spec.p_prime, self.spec.N,
                                             self.spec.seed, mode=mode)
            self._cfgs[mode] = cfg
            self.genericity[mode] = rep
        return self._cfgs[mode]


def _points(rng, n, lo=0.8, hi=1.25):
    """``n`` points on the annulus ``lo <= |lam| <= hi`` with uniform phases."""
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    return [complex(z) for z in r * np.exp(2j * np.pi * rng.uniform(size=n))]


def _ctx_points(pts):
    return [complex(z) for z in pts]


def _flag(ok: bool) -> float:
    return 0.0 if ok else 1.0


# ---------------------------------------------------------------------------
# bulk
# ---------------------------------------------------------------------------

def bulk_checks(ctx: _Context) -> list:
    cfg = ctx.config("bulk")
    t = ctx.tol.rtol_identity
    eye = np.eye(cfg.dim)

    def ybe(rng):
        pairs = list(zip(_points(rng, N_POINTS), _points(rng, N_POINTS)))
        return max(bk.ybe_residual(cfg, l, m) for l, m in pairs), {"points": len(pairs)}

    def r_ybe(rng):
        pairs = list(zip(_points(rng, N_POINTS), _points(rng, N_POINTS)))
        return max(bk.r_matrix_ybe_residual(l, m, cfg.q) for l, m in pairs), {"points": len(pairs)}

    def qdet(fn):
        def check(rng):
            lams = _points(rng, N_POINTS)
            return max(residual(fn(cfg, l), bk.qdet_scalar(cfg, l) * eye) for l in lams), {"points": len(lams)}
        return check

    def qdet_forms(rng):
        worst = 0.0
        for lam in _points(rng, 20):
            forms = list(bk.qdet_scalar_forms(cfg, lam).values())
            worst = max(worst, max(rel_diff(f, forms[0]) for f in forms))
        return worst, {"points": 20}

    def qdet_central(rng):
        worst = 0.0
        for lam, mu in zip(_points(rng, 3), _points(rng, 3)):
            op = bk.qdet_operator(cfg, lam)
            m = bk.monodromy(cfg, mu)
            worst = max(worst, max(commutator_residual(op, m[i, j]) for i in range(2) for j in range(2)))
        return worst, {"points": 3}

    def commute(rng):
        pairs = list(zip(_points(rng, 5), _points(rng, 5)))
        return max(commutator_residual(bk.bulk_transfer(cfg, l), bk.bulk_transfer(cfg, m))
                   for l, m in pairs), {"points": len(pairs)}

    def theta(rng):
        th = bk.theta_operator(cfg)
        return max(commutator_residual(bk.bulk_transfer(cfg, l), th) for l in _points(rng, 5)), {"points": 5}

    return [
        Check("YBdef", t, ybe),
        Check("Rlsg:YBE", t, r_ybe),
        Check("q-detM:AD-BC", t, qdet(bk.qdet_operator)),
        Check("q-detM:DA-CB", t, qdet(bk.qdet_operator_alt)),
        Check("q-detM:scalar-forms", t, qdet_forms),
        Check("q-detM:central", t, qdet_central),
        Check("YB-monodromy:commuting-tau2", t, commute),
        Check("YB-monodromy:Theta", t, theta),
    ]


# ---------------------------------------------------------------------------
# boundary
# ---------------------------------------------------------------------------

def boundary_checks(ctx: _Context) -> list:
    cfg = ctx.config("boundary")
    t = ctx.tol.rtol_identity
    eye = np.eye(cfg.dim)
    q = cfg.q

    def reflection(fn):
        def check(rng):
            pairs = list(zip(_points(rng, N_POINTS), _points(rng, N_POINTS)))
            return max(bd.reflection_residual(cfg, fn, l, m) for l, m in pairs), {"points": len(pairs)}
        return check

    def commute(rng):
        pairs = list(zip(_points(rng, N_POINTS), _points(rng, N_POINTS)))
        return max(commutator_residual(bd.transfer(cfg, l), bd.transfer(cfg, m)) for l, m in pairs), \
            {"points": len(pairs)}

    def transfer_forms(rng):
        return max(residual(bd.transfer(cfg, l), bd.transfer_alt(cfg, l)) for l in _points(rng, N_POINTS)), \
            {"points": N_POINTS}

    def symmetry(rng):
        worst = 0.0
        for lam in _points(rng, N_POINTS):
            tl = bd.transfer(cfg, lam)
            worst = max(worst, residual(bd.transfer(cfg, 1 / lam), tl), residual(bd.transfer(cfg, -lam), tl))
        return worst, {"points": N_POINTS}

    def sym_ad(rng):
        worst = 0.0
        for lam in _points(rng, N_POINTS):
            den = lam ** 2 - lam ** -2
            a_inv = bd.u_minus_entry(cfg, 1 / lam, 0, 0)
            a = bd.u_minus_entry(cfg, lam, 0, 0)
            rhs = (lam ** 2 / q - q / lam ** 2) / den * a_inv + (q - 1 / q) / den * a
            worst = max(worst, residual(bd.u_minus_entry(cfg, lam, 1, 1), rhs))
        return worst, {"points": N_POINTS}

    def sym_bc(rng):
        worst = 0.0
        for lam in _points(rng, N_POINTS):
            f = -(lam ** 2 * q - 1 / (q * lam ** 2)) / (lam ** 2 / q - q / lam ** 2)
            u, ui = bd.u_minus(cfg, lam), bd.u_minus(cfg, 1 / lam)
            worst = max(worst, residual(ui[0, 1], f * u[0, 1]), residual(ui[1, 0], f * u[1, 0]))
        return worst, {"points": N_POINTS}

    def qdet(which):
        def check(rng):
            worst = 0.0
            for lam in _points(rng, N_POINTS):
                ops = bd.boundary_qdet(cfg, lam)
                worst = max(worst, residual(ops[which], ops[2] * eye))
            return worst, {"points": N_POINTS}
        return check

    def qdet_central(rng):
        worst = 0.0
        for lam, mu in zip(_points(rng, 3), _points(rng, 3)):
            op = bd.boundary_qdet(cfg, lam)[0]
            u = bd.u_minus(cfg, mu)
            worst = max(worst, max(commutator_residual(op, u[i, j]) for i in range(2) for j in range(2)),
                        commutator_residual(op, bd.transfer(cfg, mu)))
        return worst, {"points": 3}

    def special(keys):
        def check(rng):
            res = bd.special_values(cfg)["residuals"]
            return max(res[k] for k in keys), {k: res[k] for k in keys}
        return check

    def tau_inf(rng):
        expect = bd.tau_infinity(cfg)
        vals = bd.tau_infinity_numeric(cfg)
        worst = max(max(rel_diff(v, expect), r) for v, r in vals)
        return worst, {"tau_inf": expect}

    def exchange(rng):
        pairs = list(zip(_points(rng, N_POINTS), _points(rng, N_POINTS)))
        return max(bd.exchange_relation_residual(cfg, l, m) for l, m in pairs), {"points": len(pairs)}

    def t_diag(rng):
        worst = 0.0
        for lam in _points(rng, N_POINTS):
            worst = max(worst, bd.t_diag_forms(cfg, lam)[0])
        return worst, {"points": N_POINTS}

    checks = [
        Check("bYB:U-", t, reflection(bd.u_minus)),
        Check("bYB:V+", t, reflection(bd.v_plus)),
        Check("OpenCytransfer:commuting", t, commute),
        Check("OpenCytransfer:expanded", t, transfer_forms),
        Check("symmetry-transfer", t, symmetry),
        Check("Sym-A-D-", t, sym_ad),
        Check("Sym-B-C-", t, sym_bc),
        Check("Bound-q-detU_1", t, qdet(0)),
        Check("Bound-q-detU_2", t, qdet(1)),
        Check("B-q-detU_-exp:central", t, qdet_central),
        Check("OpenCyU-identities:U", t, special(("U(q^1/2)", "U(iq^1/2)"))),
        Check("OpenCyU-identities:T", t, special(("T(q^1/2)", "T(-q^1/2)", "T(iq^1/2)", "T(-iq^1/2)"))),
        Check("asymp-T", ctx.tol.rtol_spectral, tau_inf),
        Check("OpenCybYB-AB", t, exchange),
        Check("T-diag-A:T-diag-D", t, t_diag),
    ]
    return checks


# ---------------------------------------------------------------------------
# SoV basis
# ---------------------------------------------------------------------------

def sov_checks(ctx: _Context) -> list:
    from .sov_basis import SeparateState, SovBasis, separate_scalar_product, separate_state_vector
    cfg = ctx.config("sov")
    t = ctx.tol.rtol_spectral
    basis = SovBasis(cfg, ctx.tol)
    gram = {}

    def gram_res(key):
        def check(rng):
            if not gram:
                gram.update(basis.gram_residuals())
            return gram[key], {}
        return check

    def eigen(side):
        def check(rng):
            lams = _points(rng, 4)
            return basis.eigen_residuals(lams)[side], {"points": _ctx_points(lams)}
        return check

    def scalar_product(rng):
        worst = 0.0
        shape = (cfg.N, cfg.root.p)
        for _ in range(20):
            al = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            be = rng.normal(size=shape) + 1j * rng.normal(size=shape)
            lv = separate_state_vector(basis, SeparateState(al, "left"))
            rv = separate_state_vector(basis, SeparateState(be, "right"))
            sp = separate_scalar_product(basis, SeparateState(al, "left"), SeparateState(be, "right"))
            worst = max(worst, abs(sp - lv @ rv) / (np.linalg.norm(lv) * np.linalg.norm(rv)))
        return float(worst), {"tables": 20}

    def interpolation(fn):
        def check(rng):
            lams = _points(rng, 3)
            return max(fn(h, lam) for h in basis.labels for lam in lams), {"points": _ctx_points(lams)}
        return check

    def b_vanishing(rng):
        # operator and eigenvalue formula both vanish at q^{1/2}
        qh = cfg.root.q_half
        ev = max(abs(basis.b_eigenvalue(h, qh)) / abs(basis.b_eigenvalue(h, 1.3 * qh)) for h in basis.labels)
        return max(basis.b_vanishing_residual(), ev), {}

    return [
        Check("EigenValue-B_:left", t, eigen("left")),
        Check("EigenValue-B_:right", t, eigen("right")),
        Check("T2M_jj", t, gram_res("diag")),
        Check("T2M_jj:offdiag", t, gram_res("offdiag")),
        Check("T2F1", t, gram_res("ratio_law")),
        Check("Decmp-Id", t, lambda rng: (basis.identity_decomposition_residual(), {})),
        Check("T2-Sov-Sc-p1", t, scalar_product),
        Check("Left-B-eigenstates:A-interpolation", t, interpolation(basis.a_minus_interpolation_residual)),
        Check("OpenCyD-right-eigenstates:D-interpolation", t, interpolation(basis.d_minus_interpolation_residual)),
        Check("Bound-q-detU_1:grid", t, lambda rng: (basis.qdet_grid_residual(), {})),
        Check("E-SOV:kappa-product", t, lambda rng: (basis.kappa_product_residual(), {})),
        Check("OpenCyU-identities:B-vanishing", t, b_vanishing),
    ]


# ---------------------------------------------------------------------------
# spectrum
# ---------------------------------------------------------------------------

def _overlap_defect(u, v) -> float:
    """``1 - |<u, v>| / (|u| |v|)``."""
    return float(1 - abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))


def spectrum_checks(ctx: _Context) -> list:
    from . import spectrum as sp
    cfg = ctx.config("spectrum")
    tol = ctx.tol
    setup = sp.SpectralSetup(cfg, tol)
    rep = sp.ed_spectrum(cfg, setup)
    dim = cfg.dim
    state = {}

    def tables():
        if not state:
            state["kq"] = [sp.q_table_from_kernel(setup, t) for t in rep.eigenvalues]
            state["kh"] = [sp.q_table_from_kernel(setup, t, hat=True) for t in rep.eigenvalues]
            state["right"] = [sp.right_eigenstate(setup, k) for k in state["kq"]]
            state["left"] = [sp.left_eigenstate(setup, k) for k in state["kh"]]
        return state

    def count(rng):
        return _flag(rep.count == dim), {"count": rep.count, "expected": dim}

    def simple(rng):
        return _flag(rep.simple), {"clusters": len(rep.eig.clusters)}

    def margin(rng):
        m = sp.perturbation_margin(setup, rep.eigenvalues, rng)
        return 1e-3 / m if m > 0 else math.inf, {"margin": m, "relative_perturbation": 1e-2}

    def overlap(rng):
        st = tables()
        worst = max(_overlap_defect(rep.eig.right[:, k], st["right"][k]) for k in range(rep.count))
        return worst, {}

    def overlap_left(rng):
        st = tables()
        worst = max(_overlap_defect(rep.eig.left[k].conj(), st["left"][k].conj()) for k in range(rep.count))
        return worst, {}

    def recursion(hat):
        def check(rng):
            st = tables()
            worst = 0.0
            for k, t in enumerate(rep.eigenvalues):
                rq = sp.q_table_from_recursion(setup, t, hat=hat)
                kq = st["kh" if hat else "kq"][k]
                worst = max(worst, float(np.max(np.abs(kq.q - rq.q) / np.abs(rq.q))))
            return worst, {}
        return check

    orth = {}

    def orthogonality(key):
        def check(rng):
            if not orth:
                st = tables()
                mx = ov = 0.0
                for i, ti in enumerate(rep.eigenvalues):
                    for j, tj in enumerate(rep.eigenvalues):
                        if i != j:
                            o = sp.orthogonality_relation(setup, ti, tj, st["kh"][i], st["kq"][j])
                            mx, ov = max(mx, o["Mx"]), max(ov, o["overlap"])
                orth.update(Mx=mx, overlap=ov)
            return orth[key], {}
        return check

    def eigenstates(side):
        def check(rng):
            st = tables()
            lams = _points(rng, 3)
            return max(sp.eigenstate_residual(cfg, t, st[side][k], lams, side=side)
                       for k, t in enumerate(rep.eigenvalues)), {"points": _ctx_points(lams)}
        return check

    def wave(rng):
        st = tables()
        return max(sp.wave_function_residual(setup, t, st["right"][k])
                   for k, t in enumerate(rep.eigenvalues)), {}

    def newton(rng):
        ed = np.array([t.values for t in rep.eigenvalues])
        scale = float(np.abs(ed).max())
        seeds = [e * (1 + 1e-2 * np.exp(2j * np.pi * rng.uniform(size=cfg.N))) for e in ed]
        roots = sp.newton_solve(setup, seeds)
        if len(roots) != len(ed):
            return math.inf, {"roots": len(roots), "expected": len(ed)}
        found = np.array([r.values for r, _ in roots])
        dist = max(float(np.abs(ed - f).max(axis=1).min()) for f in found) / scale
        return dist, {"roots": len(roots)}

    return [
        Check("ED-certified:count", 0.5, count),
        Check("ED-certified:simple", 0.5, simple),
        Check("set-tau:interpolation", tol.rtol_spectral, lambda rng: (rep.worst("interp"), {})),
        Check("symmetry-transfer:tau-even", tol.rtol_spectral, lambda rng: (rep.worst("even"), {})),
        Check("FrbtD-matrix:det", tol.rtol_functional, lambda rng: (rep.worst("det"), {})),
        Check("FrbtD-matrix:perturbation-margin", 1.0, margin),
        Check("OpenCyt-Q-relation:overlap-right", tol.rtol_spectral, overlap),
        Check("OpenCyt-Q-relation:overlap-left", tol.rtol_spectral, overlap_left),
        Check("OpenCyeigenT-r-D", tol.rtol_functional, eigenstates("right")),
        Check("OpenCyeigenT-l-D", tol.rtol_functional, eigenstates("left")),
        Check("coeff-recurrence", tol.rtol_functional, recursion(False)),
        Check("coeff-recurrence:hat", tol.rtol_functional, recursion(True)),
        Check("SOVBax1", tol.rtol_functional, wave),
        Check("Deg-sp-cond", tol.rtol_functional, orthogonality("Mx")),
        Check("Deg-sp-cond:cross-orthogonality", tol.rtol_functional, orthogonality("overlap")),
        Check("OpenCyI-Functional-eq:newton", tol.rtol_functional, newton),
    ]


# ---------------------------------------------------------------------------
# TQ
# ---------------------------------------------------------------------------

def tq_checks(ctx: _Context) -> list:
    from . import spectrum as sp
    from . import tq
    cfg = ctx.config("tq")
    tol = ctx.tol
    setup = sp.SpectralSetup(cfg, tol)
    rep = sp.ed_spectrum(cfg, setup)
    p, n = cfg.root.p, cfg.N
    state = {}

    def functional(attr):
        def check(rng):
            if "fc" not in state:
                state["fc"] = [tq.dbar_det_in_Z(setup, t, np.random.default_rng([ctx.spec.seed, k]))
                               for k, t in enumerate(rep.eigenvalues)]
            return max(getattr(f, attr) for f in state["fc"]), {"degree": state["fc"][0].degree}
        return check

    def qpolys():
        if "qp" not in state:
            state["qp"] = [tq.q_polynomial_from_tau(setup, t) for t in rep.eigenvalues]
        return state["qp"]

    def inhomogeneous(rng):
        return max(tq.tq_residual(setup, t, qp, rng=rng) for t, qp in zip(rep.eigenvalues, qpolys())), {}

    def degree(rng):
        degs = [qp.degree for qp in qpolys()]
        return float(max(abs(d - (p - 1) * n) for d in degs)), {"degrees": degs}

    def bethe(side):
        def check(rng):
            worst = 0.0
            for k, qp in enumerate(qpolys()):
                vec = tq.bethe_state(setup, qp, side)
                ref = rep.eig.right[:, k] if side == "right" else rep.eig.left[k].conj()
                worst = max(worst, _overlap_defect(ref, vec if side == "right" else vec.conj()))
            return worst, {}
        return check

    def homogeneous(key):
        def check(rng):
            if "hom" not in state:
                state["hom"] = tq.homogeneous_case(cfg)
            h = state["hom"]
            return h[key], {"degrees": h["degrees"], "q_half_term": h["q_half_term"]}
        return check

    t = tol.rtol_functional
    return [
        Check("Func-EQ-1:fit", t, functional("fit_residual")),
        Check("Func-EQ-1:equation", t, functional("equation_residual")),
        Check("Func-EQ-1:leading", t, functional("leading_residual")),
        Check("Func-EQ-1:asymptote", t, functional("asymptote_residual")),
        Check("Inho-Baxter-EQ", t, inhomogeneous),
        Check("Q-form:degree", 0.5, degree),
        Check("Bethe-like-eigenstates:right", tol.rtol_spectral, bethe("right")),
        Check("Bethe-like-eigenstates:left", tol.rtol_spectral, bethe("left")),
        Check("Condition-global-boundary:G", t, homogeneous("g_max")),
        Check("Condition-global-boundary:TQ", t, homogeneous("tq_residual")),
        Check("Condition-global-boundary:Bethe-equations", t, homogeneous("bethe_residual")),
    ]


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

def _random_boundary(rng, triangular_plus=False):
    z = [complex(np.exp(rng.uniform(np.log(0.5), np.log(2.0))) * cmath.exp(2j * np.pi * rng.uniform()))
         for _ in range(6)]
    return boundary_params(*z, triangular_plus=triangular_plus)


def reductions_checks(ctx: _Context) -> list:
    from . import reductions as rd
    spec = ctx.spec
    p, seed = spec.p, spec.seed
    root = root_of_unity(p, spec.p_prime)
    t_exact = 1e-12
    checks = []
    for n_sites in sorted({1, 2, spec.N}):
        if p ** n_sites > MAX_DEFAULT_DIM and not spec.allow_large:
            continue
        sgp = rd.random_sine_gordon_params(n_sites, seed + 100 * n_sites)

        def mono(rng, sgp=sgp):
            r = rd.sg_monodromy_identity(sgp, root, _points(rng, 5))
            return max(r.values()), {"x": sgp.x, **r}

        def bound(rng, sgp=sgp):
            r = rd.sg_boundary_identity(sgp, root, _random_boundary(rng), _points(rng, 5))
            return max(r["u_minus"], r["transfer"]), {"x": sgp.x, "sign": r["sign"],
                                                      "unsigned": max(r["u_minus_unsigned"], r["transfer_unsigned"])}

        checks += [Check(f"YB-monodromy-sG-t2[N={n_sites}]", t_exact, mono),
                   Check(f"Baundary-identities-sG-t2[N={n_sites}]", t_exact, bound)]

    def single_site(rng):
        k, r, s, xi = (complex(np.exp(rng.uniform(-0.5, 0.5)) * cmath.exp(2j * np.pi * rng.uniform()))
                       for _ in range(4))
        return max(rd.sg_single_site_residual(root, k, r, s, xi, lam) for lam in _points(rng, 5)), {}

    def xxz(keys):
        def check(rng):
            r = rd.xxz_lax_identity(p, _points(rng, 5), spec.p_prime)
            return max(r[k] for k in keys), {k: r[k] for k in keys}
        return check

    def chiral_potts():
        cache = {}

        def build(_):
            if not cache:
                rng = check_rng(seed, "chiral-potts-parameters")
                k = complex(0.6 * cmath.exp(2j * np.pi * rng.uniform()))
                c0 = complex(np.exp(rng.uniform(-0.3, 0.3)) * cmath.exp(2j * np.pi * rng.uniform()))
                cfg = rd.chiral_potts_config(p, spec.N, seed, c0, k, spec.p_prime)
                pts = [rd.curve_point(k, complex(np.exp(rng.uniform(-0.3, 0.3)) * cmath.exp(2j * np.pi * rng.uniform())),
                                      p, c=complex(cmath.exp(2j * np.pi * rng.uniform())), x_branch=b)
                       for b in range(3)]
                cache["report"] = rd.chiral_potts_constraints(cfg, c0, k, pts)
            return cache["report"]

        return (lambda rng: (build(rng).max_constraint_residual(), {}),
                lambda rng: (build(rng).max_point_residual(), {}))

    cp_constraints, cp_points = chiral_potts()
    checks += [
        Check("local-op-id-sG-t2", t_exact, single_site),
        Check("corrisp:XXZ-Lax", t_exact, xxz(("lax",))),
        Check("S_+-u-v-identification", t_exact, xxz(("spin_plus", "spin_minus", "commutation"))),
        Check("S_z-v-identification", t_exact, xxz(("spin_z",))),
        Check("restriction1-chP", 1e-10, cp_constraints),
        Check("chPFaxVcurve-eq", 1e-10, cp_points),
    ]

    for mode in ("general", "sov"):
        cache = {}

        def bminus(mode=mode, cache=cache):
            if not cache:
                cfg, _ = random_generic_config(p, spec.p_prime, spec.N, seed, mode=mode)
                cache["r"] = rd.b_minus_general_diag(cfg, tol=ctx.tol)
            return cache["r"]

        checks += [
            Check(f"B-non-nilpotent[{mode}]:simple", 0.5,
                  lambda rng, b=bminus: (_flag(b().simple), {"separation": b().separation})),
            Check(f"B-non-nilpotent[{mode}]:diagonalization", ctx.tol.rtol_spectral,
                  lambda rng, b=bminus: (b().diagonalization, {})),
            Check(f"B-non-nilpotent[{mode}]:fit", ctx.tol.rtol_spectral,
                  lambda rng, b=bminus: (max(b().fit_residual, b().leading_ratio), {})),
            Check(f"B-non-nilpotent[{mode}]:centrality", ctx.tol.rtol_spectral,
                  lambda rng, b=bminus: (max(b().centrality, b().average_scalar), {})),
        ]
        if mode == "sov":
            checks.append(Check("B-non-nilpotent[sov]:power", ctx.tol.rtol_spectral,
                                lambda rng, b=bminus: (b().power_match, {})))
    return checks


SUITE_BUILDERS = {
    "bulk": bulk_checks, "boundary": boundary_checks, "sov": sov_checks,
    "spectrum": spectrum_checks, "tq": tq_checks, "reductions": reductions_checks,
}


def build_checks(spec: RunSpec) -> list:
    """Checks of every selected suite, ids prefixed by the suite name."""
    ctx = _Context(spec)
    out = []
    for s in spec.suites:
        for c in SUITE_BUILDERS[s](ctx):
            out.append(replace(c, id=f"{s}/{c.id}"))
    return out


def _run_one(check: Check, seed: int) -> CheckRecord:
    rng = check_rng(seed, check.id)
    t0 = time.perf_counter()
    try:
        value, context = check.fn(rng)
    except (ArithmeticError, np.linalg.LinAlgError, ParameterError) as exc:
        value, context = math.nan, {"error": f"{type(exc).__name__}: {exc}"}
    elapsed = int(round(1000 * (time.perf_counter() - t0)))
    value = float(value) if value is not None else math.nan
    return CheckRecord(check.id, value, check.tolerance, elapsed, context)


def run_checks(checks, seed: int, workers: Optional[int] = None) -> list:
    """Evaluate ``checks``; records come back in the order of ``checks``."""
    workers = workers or int(os.environ.get("TAU2SOV_WORKERS", "1") or 1)
    if workers <= 1:
        return [_run_one(c, seed) for c in checks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: _run_one(c, seed), checks))


def run(spec: RunSpec, workers: Optional[int] = None):
    """Validate, build and evaluate; returns ``(spec, records)``."""
    spec = validate_spec(spec)
    checks = build_checks(spec)
    return spec, run_checks(checks, spec.seed, workers)
