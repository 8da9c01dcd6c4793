"""Root-of-unity arithmetic, local Weyl pairs and chain parameter sets.

The local quantum space of every site is the p-dimensional cyclic
representation of the Weyl algebra ``u v = q v u`` with ``u^p = v^p = 1``.
Basis vectors are labelled by ``k = -l, ..., l`` (``p = 2l + 1``), stored in
that order, and labels are understood modulo ``p``.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .numerics import MAX_DIM, DimensionError, kron_all

__all__ = [
    "ParameterError", "GenericityError", "RootOfUnity", "root_of_unity",
    "weyl_pair", "basis_index", "basis_vector", "embed", "SiteParams",
    "derive_site", "BoundaryParams", "boundary_params", "ChainConfig",
    "GenericityReport", "genericity_report", "random_generic_config",
    "config_to_json", "config_from_json", "ConfigError",
]


class ParameterError(ValueError):
    """Invalid model parameters (parity, zero couplings, poles, ...)."""


class GenericityError(RuntimeError):
    """The sampler could not avoid an excluded parameter set."""

    def __init__(self, msg, condition=None):
        super().__init__(msg)
        self.condition = condition


# ---------------------------------------------------------------------------
# root of unity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootOfUnity:
    """``q = exp(-i pi p'/p)`` with ``p = 2l + 1`` odd and ``p'`` even."""

    p: int
    p_prime: int

    def __post_init__(self):
        p, pp = self.p, self.p_prime
        if not isinstance(p, (int, np.integer)) or not isinstance(pp, (int, np.integer)):
            raise ParameterError("p and p' must be integers")
        if p < 3 or p % 2 == 0:
            raise ParameterError(f"p must be odd and >= 3, got {p}")
        if pp == 0 or pp % 2 != 0:
            raise ParameterError(f"p' must be a nonzero even integer, got {pp}")
        if math.gcd(p, pp) != 1:
            raise ParameterError(f"p={p} and p'={pp} are not coprime")

    @property
    def l(self) -> int:
        return (self.p - 1) // 2

    @property
    def q(self) -> complex:
        return cmath.exp(-1j * math.pi * self.p_prime / self.p)

    @property
    def q_half(self) -> complex:
        """Principal square root ``exp(-i pi p'/(2p))``."""
        return cmath.exp(-0.5j * math.pi * self.p_prime / self.p)

    def power(self, k) -> complex:
        """``q**k`` evaluated from the phase (exact to roundoff for any integer k)."""
        return cmath.exp(-1j * math.pi * self.p_prime * k / self.p)

    def labels(self) -> np.ndarray:
        return np.arange(-self.l, self.l + 1)


def root_of_unity(p: int, p_prime: int) -> RootOfUnity:
    return RootOfUnity(int(p), int(p_prime))


def basis_index(root: RootOfUnity, k: int) -> int:
    """Position of the label ``k`` (mod p) inside the ordered basis ``-l..l``."""
    return int((k + root.l) % root.p)


def basis_vector(root: RootOfUnity, k: int) -> np.ndarray:
    e = np.zeros(root.p, dtype=complex)
    e[basis_index(root, k)] = 1.0
    return e


def weyl_pair(root: RootOfUnity):
    """Return ``(u, v)`` with ``v|k> = q^k|k>`` and ``u|k> = |k-1>``.

    The shift direction is the one for which ``u v = q v u``.
    """
    p = root.p
    v = np.diag([root.power(k) for k in root.labels()]).astype(complex)
    u = np.zeros((p, p), dtype=complex)
    for k in root.labels():
        u[basis_index(root, k - 1), basis_index(root, k)] = 1.0
    return u, v


def embed(op, site: int, n_sites: int, max_dim: int = MAX_DIM) -> np.ndarray:
    """``I x ... x op x ... x I`` with site 1 the rightmost tensor factor."""
    op = np.asarray(op, dtype=complex)
    if not 1 <= site <= n_sites:
        raise ParameterError(f"site {site} out of range 1..{n_sites}")
    d = op.shape[0]
    if d ** n_sites > max_dim:
        raise DimensionError(f"dimension {d}**{n_sites} exceeds cap {max_dim}")
    eye = np.eye(d, dtype=complex)
    factors = [eye] * n_sites
    factors[n_sites - site] = op
    return kron_all(factors, max_dim=max_dim)


# ---------------------------------------------------------------------------
# per-site couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SiteParams:
    """Lax couplings of one site and the quantities derived from them."""

    alpha: complex
    beta: complex
    a: complex
    b: complex
    c: complex
    d: complex
    gamma: complex
    delta: complex
    mu_plus: complex
    mu_minus: complex
    k_site: complex


def derive_site(alpha, beta, a, b, c, d, root: Optional[RootOfUnity] = None) -> SiteParams:
    """Fill in ``gamma = a c/alpha``, ``delta = b d/beta`` and the branch-fixed roots.

    ``mu_plus = i q^{1/2} sqrt(a beta/(alpha b))``,
    ``mu_minus = i q^{1/2} sqrt(c beta/(alpha d))`` and
    ``k_site = sqrt(a b c d)``, all square roots on the principal branch.
    ``root`` defaults to ``p = 3, p' = 2``; only ``q^{1/2}`` is used.
    """
    vals = [complex(x) for x in (alpha, beta, a, b, c, d)]
    names = ("alpha", "beta", "a", "b", "c", "d")
    for name, x in zip(names, vals):
        if x == 0 or not cmath.isfinite(x):
            raise ParameterError(f"coupling {name} must be finite and nonzero, got {x}")
    alpha, beta, a, b, c, d = vals
    root = root if root is not None else RootOfUnity(3, 2)
    qh = root.q_half
    mu_p = 1j * qh * cmath.sqrt(a * beta / (alpha * b))
    mu_m = 1j * qh * cmath.sqrt(c * beta / (alpha * d))
    k = cmath.sqrt(a * b * c * d)
    if abs(k * k - a * b * c * d) > 1e-10 * abs(a * b * c * d):
        raise ParameterError("k_site branch self-check failed")
    return SiteParams(alpha, beta, a, b, c, d, a * c / alpha, b * d / beta, mu_p, mu_m, k)


# ---------------------------------------------------------------------------
# boundary couplings
# ---------------------------------------------------------------------------

def _solve_alpha_beta(zeta: complex, kappa: complex):
    """Invert the (zeta, kappa) -> (alpha, beta) re-parametrization of the minus boundary.

    With ``S1 = (zeta - 1/zeta)/kappa`` and ``S2 = (zeta + 1/zeta)/kappa`` the
    sum and difference of the two defining relations give
    ``P - 1/P = (S1 + S2)/2`` for ``P = alpha beta`` and
    ``R - 1/R = (S1 - S2)/2`` for ``R = alpha/beta``; both are quadratics.
    """
    s1 = (zeta - 1 / zeta) / kappa
    s2 = (zeta + 1 / zeta) / kappa

    def root_of(x):  # y - 1/y = x  ->  y^2 - x y - 1 = 0
        return (x + cmath.sqrt(x * x + 4)) / 2

    prod = root_of((s1 + s2) / 2)
    ratio = root_of((s1 - s2) / 2)
    alpha = cmath.sqrt(prod * ratio)
    beta = prod / alpha
    return alpha, beta


@dataclass(frozen=True)
class BoundaryParams:
    """Parameters of the two scalar reflection matrices.

    ``alpha_m``/``beta_m`` are derived from ``(zeta_m, kappa_m)``; with
    ``kappa_m = 0`` they are undefined and left as ``None``.
    """

    zeta_m: complex
    kappa_m: complex
    tau_m: complex
    zeta_p: complex
    kappa_p: complex
    tau_p: complex
    triangular_plus: bool = True
    alpha_m: Optional[complex] = None
    beta_m: Optional[complex] = None

    def reparam_residual(self) -> float:
        """Residual of the two defining relations of ``(alpha_m, beta_m)``."""
        am, bm, z, k = self.alpha_m, self.beta_m, self.zeta_m, self.kappa_m
        r1 = (am - 1 / am) * (bm + 1 / bm) - (z - 1 / z) / k
        r2 = (am + 1 / am) * (bm - 1 / bm) - (z + 1 / z) / k
        scale = max(abs((z - 1 / z) / k), abs((z + 1 / z) / k))
        return float(max(abs(r1), abs(r2)) / scale)


def boundary_params(zeta_m, kappa_m, tau_m, zeta_p, kappa_p, tau_p,
                    triangular_plus: bool = True) -> BoundaryParams:
    zeta_m, kappa_m, tau_m = complex(zeta_m), complex(kappa_m), complex(tau_m)
    zeta_p, kappa_p, tau_p = complex(zeta_p), complex(kappa_p), complex(tau_p)
    for name, z in (("zeta_m", zeta_m), ("zeta_p", zeta_p)):
        if z == 0 or abs(z * z - 1) < 1e-14:
            raise ParameterError(f"{name} must avoid 0 and +-1, got {z}")
    am = bm = None
    if kappa_m != 0:
        am, bm = _solve_alpha_beta(zeta_m, kappa_m)
    return BoundaryParams(zeta_m, kappa_m, tau_m, zeta_p, kappa_p, tau_p,
                          bool(triangular_plus), am, bm)


# ---------------------------------------------------------------------------
# chain configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainConfig:
    root: RootOfUnity
    sites: tuple
    boundary: BoundaryParams
    j: Optional[tuple] = None      # SoV exponents, None when unconstrained
    a0: complex = 1.0
    seed: Optional[int] = None
    mode: str = "general"

    def __post_init__(self):
        if self.a0 == 0:
            raise ParameterError("a0 must be nonzero")
        if self.j is not None and len(self.j) != len(self.sites):
            raise ParameterError("need one SoV exponent per site")

    @property
    def N(self) -> int:
        return len(self.sites)

    @property
    def dim(self) -> int:
        return self.root.p ** self.N

    @property
    def q(self) -> complex:
        return self.root.q

    @property
    def sov(self) -> bool:
        return self.j is not None

    def sov_residual(self) -> float:
        """How well the SoV constraint (``b_n = -q^{2j_n-1} a_n`` and ``a0``) holds."""
        if self.j is None:
            return float("inf")
        r = 0.0
        for s, jn in zip(self.sites, self.j):
            r = max(r, abs(s.b + self.root.power(2 * jn - 1) * s.a) / abs(s.b))
        a0 = sov_a0(self.root, self.j)
        return max(r, abs(self.a0 - a0) / abs(a0))

    def double_sov_residual(self) -> float:
        if self.j is None:
            return float("inf")
        r = self.sov_residual()
        for s, jn in zip(self.sites, self.j):
            r = max(r, abs(s.d + self.root.power(2 * jn - 1) * s.c) / abs(s.d))
        return r

    def with_boundary(self, **changes) -> "ChainConfig":
        b = self.boundary
        fields_ = dict(zeta_m=b.zeta_m, kappa_m=b.kappa_m, tau_m=b.tau_m, zeta_p=b.zeta_p,
                       kappa_p=b.kappa_p, tau_p=b.tau_p, triangular_plus=b.triangular_plus)
        fields_.update(changes)
        return replace(self, boundary=boundary_params(**fields_))


def sov_a0(root: RootOfUnity, j: Sequence[int]) -> complex:
    """Normalization ``a0 = (-q)^N prod_n q^{-j_n}`` used with the SoV constraint."""
    return (-root.q) ** len(j) * root.power(-sum(int(x) for x in j))


# ---------------------------------------------------------------------------
# genericity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenericityReport:
    esov_ok: bool
    sov2_ok: bool
    simple_ok: bool
    global_ok: bool
    margins: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.esov_ok and self.sov2_ok and self.simple_ok


def _rel(x, y) -> float:
    s = max(abs(x), abs(y))
    return float(abs(x - y) / s) if s > 0 else 0.0


def global_condition_residual(cfg: ChainConfig, epsilon: int = 1) -> float:
    """Relative residual of the global boundary condition used by the homogeneous TQ case."""
    b = cfg.boundary
    zp = b.zeta_p
    lhs = b.kappa_p * cmath.exp(epsilon * (b.tau_m - b.tau_p)) / (zp * b.alpha_m * b.beta_m)
    rhs = cfg.q ** (1 + cfg.N)
    for s in cfg.sites:
        rhs *= s.b * s.c / (s.alpha * s.beta)
    return _rel(lhs, rhs)


def genericity_report(cfg: ChainConfig) -> GenericityReport:
    """Evaluate every excluded equality and return the minimum relative margins."""
    root, sites, b = cfg.root, cfg.sites, cfg.boundary
    p, q = root.p, root.q
    mup = [s.mu_plus for s in sites]
    mum = [s.mu_minus for s in sites]
    inf = float("inf")

    m_esov = inf
    for n in range(len(sites)):
        for m in range(n + 1, len(sites)):
            m_esov = min(m_esov, _rel(mup[n] ** p, mup[m] ** p))

    m_sov2 = inf
    forced = cfg.mode == "sov_double"
    for n, mu in enumerate(mup):
        m_sov2 = min(m_sov2, _rel(mu ** (2 * p), 1), _rel(mu ** (2 * p), -1))
        for h in range(1, p):
            for eps in (1, -1):
                if b.alpha_m is not None:
                    m_sov2 = min(m_sov2, _rel(mu ** 2, q ** (-2 * h) * b.alpha_m ** (2 * eps)))
                    m_sov2 = min(m_sov2, _rel(mu ** 2, -q ** (-2 * h) * b.beta_m ** (2 * eps)))
                for m, mm in enumerate(mum):
                    if forced and m == n and eps == 1 and h == p - 1:
                        # mu_{n,+} = mu_{n,-} under double nilpotency: this instance
                        # only says A_-(1/xi_n^(p-1)) = 0, which closes the ladder
                        continue
                    m_sov2 = min(m_sov2, _rel(mu ** 2, q ** (-2 * eps - 2 * h) * mm ** (2 * eps)))

    m_simple = inf
    for mu in mup:
        for h in range(1, p):
            for eps in (1, -1):
                m_simple = min(m_simple, _rel(mu ** 2, q ** (-2 * h) * b.zeta_p ** (2 * eps)))

    boundary_ok = b.kappa_m != 0 and b.alpha_m is not None
    glob = global_condition_residual(cfg) if boundary_ok else inf
    margins = {"esov": m_esov, "sov2": m_sov2, "simple": m_simple, "global": glob}
    thr = MARGIN
    return GenericityReport(m_esov >= thr, m_sov2 >= thr and boundary_ok, m_simple >= thr,
                            glob <= 1e-10, margins)


MARGIN = 1e-2
ANNULUS = (0.5, 2.0)
MAX_DRAWS = 1000


def _annulus(rng: np.random.Generator) -> complex:
    r = math.exp(rng.uniform(math.log(ANNULUS[0]), math.log(ANNULUS[1])))
    return complex(r * cmath.exp(2j * math.pi * rng.uniform()))


def _draw(root: RootOfUnity, n_sites: int, rng: np.random.Generator, mode: str) -> ChainConfig:
    js = None
    if mode in ("sov", "sov_double"):
        js = tuple(int(x) for x in rng.integers(0, root.p, size=n_sites))
    sites = []
    for n in range(n_sites):
        alpha, beta, a, b, c, d = (_annulus(rng) for _ in range(6))
        if js is not None:
            b = -root.power(2 * js[n] - 1) * a
            if mode == "sov_double":
                d = -root.power(2 * js[n] - 1) * c
        sites.append(derive_site(alpha, beta, a, b, c, d, root))
    zeta_m, kappa_m, zeta_p, kappa_p = (_annulus(rng) for _ in range(4))
    tau_m = complex(rng.uniform(-0.5, 0.5), rng.uniform(-math.pi, math.pi))
    tau_p = complex(rng.uniform(-0.5, 0.5), rng.uniform(-math.pi, math.pi))
    a0 = sov_a0(root, js) if js is not None else _annulus(rng)
    bnd = boundary_params(zeta_m, kappa_m, tau_m, zeta_p, kappa_p, tau_p, triangular_plus=True)
    return ChainConfig(root, tuple(sites), bnd, js, a0, None, mode)


def _zeta_ok(z: complex) -> bool:
    return min(_rel(z, 1), _rel(z, -1), _rel(z * z, -1)) >= MARGIN and abs(z - 1 / z) >= 0.1


def random_generic_config(p: int, p_prime: int, n_sites: int, seed: int,
                          mode: str = "general", triangular_plus: bool = True):
    """Draw a chain configuration avoiding all excluded parameter sets.

    Every coupling is drawn from the annulus ``0.5 <= |z| <= 2`` with a
    uniform phase; draws are repeated (up to 1000 times) until all excluded
    equalities are missed by a relative margin of at least ``1e-2``.

    Parameters
    ----------
    mode : {"general", "sov", "sov_double"}
        ``sov`` imposes ``b_n = -q^{2 j_n - 1} a_n`` with random ``j_n`` and
        the matching ``a0``; ``sov_double`` also imposes
        ``d_n = -q^{2 j_n - 1} c_n``.

    Returns
    -------
    (ChainConfig, GenericityReport)
    """
    if mode not in ("general", "sov", "sov_double"):
        raise ParameterError(f"unknown mode {mode!r}")
    if n_sites < 1:
        raise ParameterError("need at least one site")
    root = root_of_unity(p, p_prime)
    rng = np.random.default_rng(seed)
    last = None
    for _ in range(MAX_DRAWS):
        cfg = _draw(root, n_sites, rng, mode)
        b = cfg.boundary
        if not (_zeta_ok(b.zeta_m) and _zeta_ok(b.zeta_p)):
            last = "boundary-zeta"
            continue
        if not triangular_plus:
            cfg = cfg.with_boundary(triangular_plus=False)
        rep = genericity_report(cfg)
        if rep.ok:
            return replace(cfg, seed=seed), rep
        last = next(k for k, ok in (("esov", rep.esov_ok), ("sov2", rep.sov2_ok),
                                    ("simple", rep.simple_ok)) if not ok)
    raise GenericityError(f"no generic configuration in {MAX_DRAWS} draws "
                          f"(last failing condition: {last})", last)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _c2s(z) -> str:
    z = complex(z)
    return f"{z.real!r},{z.imag!r}"


class ConfigError(ParameterError):
    """Malformed configuration document."""


def _s2c(s: str, where: str = "value") -> complex:
    if not isinstance(s, str) or s.count(",") != 1:
        raise ConfigError(f"{where}: expected a complex pair 're,im', got {s!r}")
    re, im = s.split(",")
    try:
        return complex(float(re), float(im))
    except ValueError as exc:
        raise ConfigError(f"{where}: cannot parse {s!r} as 're,im'") from exc


_SITE_KEYS = ("alpha", "beta", "a", "b", "c", "d")
_BOUNDARY_KEYS = ("zeta_m", "kappa_m", "tau_m", "zeta_p", "kappa_p", "tau_p")
_TOP_REQUIRED = ("p", "p_prime", "N", "sites", "boundary", "a0")
_TOP_OPTIONAL = ("j", "seed", "mode")


def _check_keys(doc, required, optional, where):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in required:
        if key not in doc:
            raise ConfigError(f"{where}: missing required key {key!r}")
    for key in doc:
        if key not in required and key not in optional:
            raise ConfigError(f"{where}: unknown key {key!r}")


def config_to_json(cfg: ChainConfig) -> str:
    b = cfg.boundary
    doc = {
        "p": cfg.root.p, "p_prime": cfg.root.p_prime, "N": cfg.N,
        "sites": [{k: _c2s(getattr(s, k)) for k in ("alpha", "beta", "a", "b", "c", "d")}
                  for s in cfg.sites],
        "boundary": {k: _c2s(getattr(b, k)) for k in
                     ("zeta_m", "kappa_m", "tau_m", "zeta_p", "kappa_p", "tau_p")}
        | {"triangular_plus": b.triangular_plus},
        "j": list(cfg.j) if cfg.j is not None else None,
        "a0": _c2s(cfg.a0),
        "seed": cfg.seed,
        "mode": cfg.mode,
    }
    return json.dumps(doc, indent=2)


def config_from_json(text: str) -> ChainConfig:
    """Parse a configuration document written by :func:`config_to_json`.

    Raises
    ------
    ConfigError
        On malformed JSON (with line and column), missing or unknown keys and
        unparsable complex pairs.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    _check_keys(doc, _TOP_REQUIRED, _TOP_OPTIONAL, "config")
    root = root_of_unity(doc["p"], doc["p_prime"])
    if not isinstance(doc["sites"], list):
        raise ConfigError("config: 'sites' must be a list")
    sites = []
    for n, s in enumerate(doc["sites"], start=1):
        _check_keys(s, _SITE_KEYS, (), f"site {n}")
        sites.append(derive_site(*(_s2c(s[k], f"site {n} {k}") for k in _SITE_KEYS), root=root))
    if len(sites) != doc["N"]:
        raise ConfigError("site list length does not match N")
    bd = doc["boundary"]
    _check_keys(bd, _BOUNDARY_KEYS, ("triangular_plus",), "boundary")
    bnd = boundary_params(*(_s2c(bd[k], f"boundary {k}") for k in _BOUNDARY_KEYS),
                          triangular_plus=bd.get("triangular_plus", True))
    j = tuple(doc["j"]) if doc.get("j") is not None else None
    return ChainConfig(root, tuple(sites), bnd, j, _s2c(doc["a0"], "a0"), doc.get("seed"),
                       doc.get("mode", "general"))
