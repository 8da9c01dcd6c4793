"""Dictionaries to related models and the unconstrained ``B_-`` family.

* lattice sine-Gordon: a Lax operator in its own Weyl generators whose
  monodromy and boundary transfer matrix coincide with those of a mapped
  chain configuration;
* spin-``s`` XXZ at ``p = 2s + 1``: the fixed couplings for which the cyclic
  Lax operator is the XXZ Lax operator in the canonical spin basis;
* chiral Potts: restricted couplings whose curve coordinates lie on the
  modulus-``k`` curve, with the discrete swap automorphism of the curve;
* ``B_-`` without nilpotency constraints: simple spectrum, factorized
  eigenvalue functions and a central average value.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boundary import hat_monodromy, k_matrix, transfer, u_minus
from .bulk import aux_mul, local_lax, monodromy
from .numerics import ToleranceProfile, general_eig, residual
from .representation import (BoundaryParams, ChainConfig, ParameterError, RootOfUnity,
                             SiteParams, basis_index, boundary_params, derive_site, embed,
                             root_of_unity, sov_a0, weyl_pair)

__all__ = [
    "SIGMA_X", "SineGordonParams", "random_sine_gordon_params", "sg_lax", "sg_site_operators",
    "sg_site_params", "sg_single_site_residual", "sg_chain_config", "map_sg_boundary",
    "sg_monodromy", "sg_hat_monodromy", "sg_u_minus", "sg_transfer",
    "sg_monodromy_identity", "sg_boundary_identity",
    "xxz_root", "xxz_site_params", "xxz_spin_operators", "xxz_basis_permutation",
    "xxz_lax", "xxz_lax_identity",
    "p_power", "CurvePoint", "complementary_modulus", "curve_residuals", "delta_automorphism",
    "curve_point", "restricted_site", "chiral_potts_config", "curve_coordinates",
    "ChiralPottsReport", "chiral_potts_constraints",
    "BMinusReport", "b_minus_operator", "b_minus_general_diag",
]

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _nonzero(name, values):
    out = []
    for v in values:
        v = complex(v)
        if v == 0 or not cmath.isfinite(v):
            raise ParameterError(f"{name} must be finite and nonzero, got {v}")
        out.append(v)
    return tuple(out)


def _aux_left(m, x):
    """``m @ X`` where ``m`` is a scalar 2x2 matrix acting on the auxiliary space."""
    return np.einsum("ik,kjab->ijab", m, x)


def _aux_right(x, m):
    return np.einsum("ikab,kj->ijab", x, m)


def _max_residual(pairs) -> float:
    return max((residual(a, b) for a, b in pairs), default=0.0)


# ---------------------------------------------------------------------------
# lattice sine-Gordon
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SineGordonParams:
    """Per-site sine-Gordon couplings ``kappa_n, r_n, s_n`` and inhomogeneities ``xi_n``."""

    kappa: tuple
    r: tuple
    s: tuple
    xi: tuple

    def __post_init__(self):
        n = len(self.kappa)
        if n < 1 or not (len(self.r) == len(self.s) == len(self.xi) == n):
            raise ParameterError("need the same positive number of kappa, r, s and xi values")
        for name in ("kappa", "r", "s", "xi"):
            object.__setattr__(self, name, _nonzero(name, getattr(self, name)))

    @property
    def N(self) -> int:
        return len(self.kappa)

    @property
    def x(self) -> int:
        """Chain parity ``N mod 2``."""
        return self.N % 2

    def exponent(self, n: int) -> int:
        """``(1 - 2x)(1 - 2y)`` with ``y = n mod 2`` for the 1-based site ``n``."""
        return (1 - 2 * self.x) * (1 - 2 * (n % 2))


def random_sine_gordon_params(n_sites: int, seed: int) -> SineGordonParams:
    """Couplings drawn from the annulus ``0.5 <= |z| <= 2`` with uniform phases."""
    rng = np.random.default_rng(seed)

    def draw():
        return tuple(complex(np.exp(rng.uniform(np.log(0.5), np.log(2.0)))
                             * cmath.exp(2j * np.pi * rng.uniform())) for _ in range(n_sites))

    return SineGordonParams(draw(), draw(), draw(), draw())


def sg_lax(lam, U, V, kappa, r, s, q_half) -> np.ndarray:
    """Sine-Gordon Lax operator in the Weyl generators ``U``, ``V`` (shape ``(2, 2, d, d)``)."""
    lam = complex(lam)
    if lam == 0:
        raise ParameterError("spectral parameter 0 is a pole")
    Ui = np.linalg.inv(U)
    Vi = np.linalg.inv(V)
    qh = q_half
    out = np.empty((2, 2) + U.shape, dtype=complex)
    out[0, 0] = U @ (kappa ** 2 * r * s / qh * V + qh * s / r * Vi)
    out[0, 1] = kappa / 1j * (lam * r * V - Vi / (lam * r))
    out[1, 0] = kappa / 1j * (lam / r * Vi - r * V / lam)
    out[1, 1] = Ui @ (qh * r / s * V + kappa ** 2 / (qh * s * r) * Vi)
    return out


def sg_site_operators(sgp: SineGordonParams, root: RootOfUnity):
    """Sine-Gordon generators ``(U_n, V_n) = (u_n^e, v_n^e)``, ``e = (1-2x)(1-2y)``, embedded in the chain."""
    u, v = weyl_pair(root)
    ops = []
    for n in range(1, sgp.N + 1):
        if sgp.exponent(n) > 0:
            un, vn = u, v
        else:
            un, vn = np.linalg.inv(u), np.linalg.inv(v)
        ops.append((embed(un, n, sgp.N), embed(vn, n, sgp.N)))
    return ops


def sg_site_params(sgp: SineGordonParams, root: RootOfUnity) -> tuple:
    """Chain couplings of every site, with ``r_n, s_n`` raised to the parity exponent."""
    sites = []
    for n in range(1, sgp.N + 1):
        e = sgp.exponent(n)
        k, xi = sgp.kappa[n - 1], sgp.xi[n - 1]
        r, s = sgp.r[n - 1] ** e, sgp.s[n - 1] ** e
        sites.append(derive_site(k * r / (1j * xi), k * xi / (1j * r),
                                 k ** 2 * r * s, s / r, r / s, k ** 2 / (r * s), root))
    return tuple(sites)


def sg_single_site_residual(root: RootOfUnity, kappa, r, s, xi, lam) -> float:
    """``L^sG(lam/xi | u, v) - L(lam) sigma^x`` for one site with the direct parametrization."""
    kappa, r, s, xi = _nonzero("sine-Gordon coupling", (kappa, r, s, xi))
    site = derive_site(-1j * kappa * r / xi, -1j * kappa * xi / r,
                       kappa ** 2 * r * s, s / r, r / s, kappa ** 2 / (r * s), root)
    u, v = weyl_pair(root)
    lhs = sg_lax(lam / xi, u, v, kappa, r, s, root.q_half)
    rhs = _aux_right(local_lax(lam, site, root), SIGMA_X)
    return residual(lhs, rhs)


def map_sg_boundary(boundary_sg: BoundaryParams, x: int) -> BoundaryParams:
    """``tau_e = e^x tau_e^sG``, ``kappa_e = e^x kappa_e^sG``, ``zeta_e = (zeta_e^sG)^(e^x)``."""
    b = boundary_sg
    sign = -1 if x % 2 else 1
    zeta_m = b.zeta_m ** sign
    return boundary_params(zeta_m, sign * b.kappa_m, sign * b.tau_m,
                           b.zeta_p, b.kappa_p, b.tau_p, b.triangular_plus)


def sg_chain_config(sgp: SineGordonParams, root: RootOfUnity,
                    boundary_sg: Optional[BoundaryParams] = None) -> ChainConfig:
    """Chain configuration with mapped couplings (and mapped boundary, if given)."""
    if boundary_sg is None:
        bnd = boundary_params(1.3 + 0.4j, 0.8 - 0.3j, 0.2 + 0.5j, 0.7 + 0.9j, 1.1 + 0.2j, -0.3 + 0.1j)
    else:
        bnd = map_sg_boundary(boundary_sg, sgp.x)
    return ChainConfig(root, sg_site_params(sgp, root), bnd)


def sg_monodromy(sgp: SineGordonParams, root: RootOfUnity, lam, ops=None) -> np.ndarray:
    """``M^sG(lam) = L^sG_N(lam q^{-1/2}/xi_N) ... L^sG_1(lam q^{-1/2}/xi_1)``."""
    ops = sg_site_operators(sgp, root) if ops is None else ops
    mu = complex(lam) / root.q_half

    def site(n):
        return sg_lax(mu / sgp.xi[n - 1], *ops[n - 1], sgp.kappa[n - 1], sgp.r[n - 1],
                      sgp.s[n - 1], root.q_half)

    out = site(sgp.N)
    for n in range(sgp.N - 1, 0, -1):
        out = aux_mul(out, site(n))
    return out


def sg_hat_monodromy(sgp: SineGordonParams, root: RootOfUnity, lam, ops=None) -> np.ndarray:
    """``(-1)^N sigma^y (M^sG(1/lam))^t sigma^y`` with the auxiliary transpose."""
    m = sg_monodromy(sgp, root, 1 / complex(lam), ops)
    sign = (-1) ** sgp.N
    out = np.empty_like(m)
    out[0, 0] = sign * m[1, 1]
    out[0, 1] = -sign * m[0, 1]
    out[1, 0] = -sign * m[1, 0]
    out[1, 1] = sign * m[0, 0]
    return out


def _qpair(root):
    return (root.q, root.q_half)


def sg_u_minus(sgp, root, boundary_sg: BoundaryParams, lam, ops=None) -> np.ndarray:
    """``U^sG_-(lam) = M^sG(lam) K_-(lam | sG params) Mhat^sG(lam)``."""
    b = boundary_sg
    km = k_matrix(lam, b.zeta_m, b.kappa_m, b.tau_m, _qpair(root))
    return np.einsum("ikab,kl,ljbc->ijac", sg_monodromy(sgp, root, lam, ops), km,
                     sg_hat_monodromy(sgp, root, lam, ops))


def sg_transfer(sgp, root, boundary_sg: BoundaryParams, lam, ops=None) -> np.ndarray:
    """``tr_a K_+(lam | sG params) U^sG_-(lam)``."""
    b = boundary_sg
    kp = k_matrix(complex(lam) * root.q, b.zeta_p, b.kappa_p, b.tau_p, _qpair(root),
                  b.triangular_plus)
    return np.einsum("ij,jiab->ab", kp, sg_u_minus(sgp, root, boundary_sg, lam, ops))


def sg_monodromy_identity(sgp: SineGordonParams, root: RootOfUnity, lams: Sequence) -> dict:
    """Residuals of ``M^sG(lam) = M(lam) (sigma^x)^x`` and of the hat relation.

    Returns
    -------
    dict with ``monodromy`` (max over ``lams``) and ``hat`` for
    ``Mhat^sG(lam) = (-sigma^x)^x Mhat(lam)``.
    """
    cfg = sg_chain_config(sgp, root)
    ops = sg_site_operators(sgp, root)
    flip = np.linalg.matrix_power(SIGMA_X, sgp.x)
    mono, hat = [], []
    for lam in lams:
        mono.append((sg_monodromy(sgp, root, lam, ops), _aux_right(monodromy(cfg, lam), flip)))
        hat.append((sg_hat_monodromy(sgp, root, lam, ops),
                    _aux_left(np.linalg.matrix_power(-SIGMA_X, sgp.x), hat_monodromy(cfg, lam))))
    return {"monodromy": _max_residual(mono), "hat": _max_residual(hat)}


def sg_boundary_identity(sgp: SineGordonParams, root: RootOfUnity,
                         boundary_sg: BoundaryParams, lams: Sequence) -> dict:
    """Compare the boundary monodromy and transfer matrix with the mapped chain.

    Under the boundary map the two models agree up to the overall sign
    ``(-1)^x``: ``U_-(lam) = (-1)^x U^sG_-(lam)`` and ``T(lam) = (-1)^x T^sG(lam)``.
    Both the signed residuals (``u_minus``, ``transfer``) and the unsigned
    ones (``u_minus_unsigned``, ``transfer_unsigned``) are returned.
    """
    cfg = sg_chain_config(sgp, root, boundary_sg)
    ops = sg_site_operators(sgp, root)
    sign = (-1) ** sgp.x
    um, tr, um0, tr0 = [], [], [], []
    for lam in lams:
        u_sg = sg_u_minus(sgp, root, boundary_sg, lam, ops)
        t_sg = sg_transfer(sgp, root, boundary_sg, lam, ops)
        u = u_minus(cfg, lam)
        t = transfer(cfg, lam)
        um.append((u, sign * u_sg))
        tr.append((t, sign * t_sg))
        um0.append((u, u_sg))
        tr0.append((t, t_sg))
    return {"u_minus": _max_residual(um), "transfer": _max_residual(tr),
            "u_minus_unsigned": _max_residual(um0), "transfer_unsigned": _max_residual(tr0),
            "sign": sign}


# ---------------------------------------------------------------------------
# spin-s XXZ
# ---------------------------------------------------------------------------

def xxz_root(p: int, p_prime: int = 2) -> RootOfUnity:
    """Root of unity ``q = exp(+i pi p'/p)`` (the XXZ sign), i.e. ``RootOfUnity(p, -p')``."""
    return root_of_unity(p, -p_prime)


def xxz_site_params(root: RootOfUnity) -> SiteParams:
    """``alpha = beta = 1/2``, ``a = c = q^{-1/2}/2i``, ``b = d = i q^{1/2}/2``."""
    qh = root.q_half
    a = 1 / (2j * qh)
    b = 1j * qh / 2
    return derive_site(0.5, 0.5, a, b, a, b, root)


def xxz_spin_operators(root: RootOfUnity):
    """``(S^z, S^+, S^-)`` of spin ``s = (p-1)/2`` in the canonical basis.

    ``S^z = diag(2s, ..., -2s)``; ``S^+`` has ``f(1), ..., f(2s)`` on the
    superdiagonal and ``S^- = (S^+)^t``, with ``f(j) = i (q^j - q^{-j})/2``.
    """
    p = root.p
    s = (p - 1) // 2
    sz = np.diag([2.0 * (s - a) for a in range(p)]).astype(complex)
    sp = np.zeros((p, p), dtype=complex)
    for j in range(1, p):
        sp[j - 1, j] = 1j * (root.power(j) - root.power(-j)) / 2
    return sz, sp, sp.T.copy()


def xxz_basis_permutation(root: RootOfUnity) -> np.ndarray:
    """``P`` with column ``a`` the ``v``-eigenvector of label ``p - a`` (canonical vector ``a + 1``)."""
    p = root.p
    perm = np.zeros((p, p))
    for a in range(p):
        perm[basis_index(root, p - a), a] = 1.0
    return perm


def xxz_lax(lam, root: RootOfUnity) -> np.ndarray:
    """XXZ Lax operator ``[[(lam q^{s+S^z/2} - ...)/2, S^-], [S^+, (lam q^{s-S^z/2} - ...)/2]]``."""
    p = root.p
    s = (p - 1) // 2
    sz, sp, sm = xxz_spin_operators(root)
    lam = complex(lam)
    out = np.empty((2, 2, p, p), dtype=complex)
    for row, sign in ((0, 1), (1, -1)):
        w = np.array([root.power(s + sign * int(round(z.real)) // 2) for z in np.diag(sz)])
        out[row, row] = np.diag((lam * w - 1 / (lam * w)) / 2)
    out[0, 1] = sm
    out[1, 0] = sp
    return out


def xxz_lax_identity(p: int, lams: Sequence, p_prime: int = 2, xxz_sign: bool = True) -> dict:
    """Residuals of ``L^XXZ(lam) = L(lam/q)`` and of the generator identification.

    Parameters
    ----------
    xxz_sign : bool
        ``True`` uses ``q = exp(+i pi p'/p)``; ``False`` the chain convention
        ``q = exp(-i pi p'/p)``.

    Returns
    -------
    dict with ``lax`` (max over ``lams``), ``spin_plus``/``spin_minus`` for
    ``S^+ = u^{-1}(v - 1/v)/2i`` and ``S^- = u(v/q - q/v)/2i``, ``spin_z``
    for ``v = q^{(S^z + p + 1)/2}``, ``commutation`` for
    ``[S^z, S^+-] = +-2 S^+-`` and ``sz_spectrum``.
    """
    root = xxz_root(p, p_prime) if xxz_sign else root_of_unity(p, p_prime)
    site = xxz_site_params(root)
    perm = xxz_basis_permutation(root)
    q = root.q

    def canon(op):
        return perm.T @ op @ perm

    pairs = []
    for lam in lams:
        lax_c = np.einsum("ab,ijbc,cd->ijad", perm.T, local_lax(complex(lam) / q, site, root), perm)
        pairs.append((xxz_lax(lam, root), lax_c))
    sz, sp, sm = xxz_spin_operators(root)
    u, v = weyl_pair(root)
    ui, vi = np.linalg.inv(u), np.linalg.inv(v)
    v_from_sz = np.diag([root.power(int(round((z.real + p + 1))) / 2) for z in np.diag(sz)])
    return {
        "lax": _max_residual(pairs),
        "spin_plus": residual(sp, canon(ui @ (v - vi) / 2j)),
        "spin_minus": residual(sm, canon(u @ (v / q - q * vi) / 2j)),
        "spin_z": residual(v_from_sz, canon(v)),
        "commutation": max(residual(sz @ sp - sp @ sz, 2 * sp), residual(sz @ sm - sm @ sz, -2 * sm)),
        "sz_spectrum": [float(z.real) for z in np.diag(sz)],
        "q": q,
    }


# ---------------------------------------------------------------------------
# chiral Potts
# ---------------------------------------------------------------------------

POWER_GUARD = 1e150


def p_power(z, p: int) -> complex:
    """``z**p`` by repeated squaring, refusing results beyond ``1e150`` in magnitude."""
    z = complex(z)
    if p < 0:
        if z == 0:
            raise ParameterError("negative power of zero")
        return p_power(1 / z, -p)
    out = 1 + 0j
    base = z
    n = int(p)
    while n:
        if n & 1:
            out *= base
        n >>= 1
        if n:
            base *= base
        if not (abs(out) < POWER_GUARD and abs(base) < POWER_GUARD):
            raise OverflowError(f"|{z}|**{p} exceeds {POWER_GUARD:.0e}")
    return out


def _normalized(terms, lhs_minus_rhs) -> float:
    scale = max(abs(t) for t in terms)
    return float(abs(lhs_minus_rhs) / scale) if scale > 0 else 0.0


@dataclass(frozen=True)
class CurvePoint:
    """Point ``(a, b, c, d)`` with ``x = a/d``, ``y = b/c``, ``s = d/c``, ``t = x y``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, _nonzero(name, (getattr(self, name),))[0])

    @property
    def x(self) -> complex:
        return self.a / self.d

    @property
    def y(self) -> complex:
        return self.b / self.c

    @property
    def s(self) -> complex:
        return self.d / self.c

    @property
    def t(self) -> complex:
        return self.x * self.y


def complementary_modulus(k) -> complex:
    """Principal ``k' = sqrt(1 - k^2)``."""
    return cmath.sqrt(1 - complex(k) ** 2)


def curve_residuals(pt: CurvePoint, k, p: int, k_prime=None) -> tuple:
    """Normalized residuals of the three curve equations of modulus ``k``.

    Each residual is divided by the largest term magnitude of its equation.
    """
    k = complex(k)
    kp = complementary_modulus(k) if k_prime is None else complex(k_prime)
    xp, yp, sp = p_power(pt.x, p), p_power(pt.y, p), p_power(pt.s, p)
    r1 = _normalized((xp, yp, k, k * xp * yp), xp + yp - k * (1 + xp * yp))
    r2 = _normalized((k * xp, 1, kp / sp), k * xp - (1 - kp / sp))
    r3 = _normalized((k * yp, 1, kp * sp), k * yp - (1 - kp * sp))
    return (r1, r2, r3)


def delta_automorphism(pt: CurvePoint) -> CurvePoint:
    """``(a, b, c, d) -> (b, a, d, c)``: ``x <-> y`` and ``s -> 1/s``."""
    return CurvePoint(pt.b, pt.a, pt.d, pt.c)


def curve_point(k, s, p: int, c=1.0, x_branch: int = 0, y_branch: int = 0) -> CurvePoint:
    """Point of the modulus-``k`` curve with given ``s`` (and ``c``), solving for ``x``, ``y``.

    ``x^p = (1 - k' s^{-p})/k`` and ``y^p = (1 - k' s^p)/k``; the ``p``-th
    roots are taken on the principal branch times ``exp(2 pi i branch/p)``.
    """
    k = complex(k)
    if k == 0:
        raise ParameterError("modulus k must be nonzero")
    kp = complementary_modulus(k)
    sp = p_power(s, p)
    xp = (1 - kp / sp) / k
    yp = (1 - kp * sp) / k
    x = xp ** (1 / p) * cmath.exp(2j * np.pi * x_branch / p)
    y = yp ** (1 / p) * cmath.exp(2j * np.pi * y_branch / p)
    c = complex(c)
    d = s * c
    return CurvePoint(x * d, y * c, c, d)


def restricted_site(a, c, c0, k, root: RootOfUnity, branch: int = 0, root_choice: int = 0) -> SiteParams:
    """Couplings with ``b = -a/q``, ``d = -c/q`` satisfying both curve constraints.

    With ``w = alpha^p`` the second constraint is the quadratic
    ``k C w^2 - B w + k = 0`` with ``B = (c0/(q^{1/2} a))^p + (q^{1/2} c0/c)^p``
    and ``C = (c0^2/(c a))^p``; ``alpha`` is a ``p``-th root of ``w`` and
    ``beta = a c/alpha``.
    """
    a, c, c0, k = _nonzero("chiral Potts parameter", (a, c, c0, k))
    p, qh, q = root.p, root.q_half, root.q
    bb = p_power(c0 / (qh * a), p) + p_power(qh * c0 / c, p)
    cc = p_power(c0 * c0 / (c * a), p)
    disc = cmath.sqrt(bb * bb - 4 * k * k * cc)
    w = (bb + disc) / (2 * k * cc) if root_choice == 0 else (bb - disc) / (2 * k * cc)
    alpha = w ** (1 / p) * cmath.exp(2j * np.pi * branch / p)
    beta = a * c / alpha
    return derive_site(alpha, beta, a, -a / q, c, -c / q, root)


def chiral_potts_config(p: int, n_sites: int, seed: int, c0, k, p_prime: int = 2) -> ChainConfig:
    """Restricted configuration (``j_n = 0`` double nilpotency) meeting the curve constraints."""
    root = root_of_unity(p, p_prime)
    rng = np.random.default_rng(seed)

    def draw():
        return complex(np.exp(rng.uniform(np.log(0.5), np.log(2.0))) * cmath.exp(2j * np.pi * rng.uniform()))

    sites = tuple(restricted_site(draw(), draw(), c0, k, root) for _ in range(n_sites))
    bnd = boundary_params(draw(), draw(), complex(0.1, rng.uniform(-3, 3)),
                          draw(), draw(), complex(-0.2, rng.uniform(-3, 3)))
    js = (0,) * n_sites
    return ChainConfig(root, sites, bnd, js, sov_a0(root, js), seed, "sov_double")


def curve_coordinates(site: SiteParams, c0, root: RootOfUnity) -> tuple:
    """``(x, y) = (c0 alpha/(q^{1/2} a), q^{1/2} c0 alpha/c)`` of one site."""
    qh = root.q_half
    return (c0 * site.alpha / (qh * site.a), qh * c0 * site.alpha / site.c)


@dataclass
class ChiralPottsReport:
    restriction: list
    alpha_beta: list
    curve_constraint: list
    superintegrable_distance: list
    point_residuals: list = field(default_factory=list)
    delta_residuals: list = field(default_factory=list)
    delta_involution: list = field(default_factory=list)

    def max_constraint_residual(self) -> float:
        vals = self.restriction + self.alpha_beta + self.curve_constraint
        return float(max(vals, default=0.0))

    def max_point_residual(self) -> float:
        vals = [max(r) for r in self.point_residuals + self.delta_residuals]
        return float(max(vals + self.delta_involution, default=0.0))


def chiral_potts_constraints(cfg: ChainConfig, c0, k, points: Sequence[CurvePoint] = ()) -> ChiralPottsReport:
    """Per-site constraint residuals and curve checks for supplied points.

    Residuals: the restriction ``b = -a/q``, ``d = -c/q``; ``alpha beta = a c``;
    the curve equation ``x^p + y^p = k(1 + x^p y^p)`` at the site
    coordinates of :func:`curve_coordinates`.  The superintegrable distance
    is ``|x^p - (1 + k')/k|``.  Every supplied point is checked on the curve,
    its image under the swap automorphism too, and the swap is checked to be
    an involution.
    """
    root = cfg.root
    p, q = root.p, root.q
    k = complex(k)
    kp = complementary_modulus(k)
    restr, ab, cons, dist = [], [], [], []
    for s in cfg.sites:
        restr.append(max(abs(s.b + s.a / q) / abs(s.b), abs(s.d + s.c / q) / abs(s.d)))
        ab.append(abs(s.alpha * s.beta - s.a * s.c) / abs(s.a * s.c))
        x, y = curve_coordinates(s, c0, root)
        xp, yp = p_power(x, p), p_power(y, p)
        cons.append(_normalized((xp, yp, k, k * xp * yp), xp + yp - k * (1 + xp * yp)))
        dist.append(abs(xp - (1 + kp) / k))
    rep = ChiralPottsReport(restr, ab, cons, dist)
    for pt in points:
        rep.point_residuals.append(curve_residuals(pt, k, p, kp))
        image = delta_automorphism(pt)
        rep.delta_residuals.append(curve_residuals(image, k, p, kp))
        back = delta_automorphism(image)
        rep.delta_involution.append(float(max(abs(back.a - pt.a), abs(back.b - pt.b),
                                              abs(back.c - pt.c), abs(back.d - pt.d))))
    return rep


# ---------------------------------------------------------------------------
# B_- without nilpotency constraints
# ---------------------------------------------------------------------------

def b_minus_operator(cfg: ChainConfig, lam) -> np.ndarray:
    return u_minus(cfg, lam)[0, 1]


def _b_minus_constant(cfg: ChainConfig) -> complex:
    """``kappa_- e^{tau_-} prod alpha_n beta_n / (zeta_- - 1/zeta_-)``."""
    b = cfg.boundary
    out = b.kappa_m * cmath.exp(b.tau_m) / (b.zeta_m - 1 / b.zeta_m)
    for s in cfg.sites:
        out *= s.alpha * s.beta
    return out


@dataclass
class BMinusReport:
    eigenvalues: np.ndarray
    separation: float             # min eigenvalue gap / max |eigenvalue| at lam_ref
    simple: bool
    diagonalization: float        # off-diagonal part of V^{-1} B_-(lam) V at other lam
    fit_residual: float
    leading_ratio: float          # max |fitted constant / expected constant - 1|
    leading_ratio_signed: float  # same with the extra (-1)^N of the product display
    zeros: list                   # per eigenvector, the N values B_a
    power_separation: float       # min over states and a != b of |B_a^p - B_b^p| (mod B -> +-1/B)
    centrality: float
    average_scalar: float
    power_match: Optional[float] = None
    degenerate: bool = False

    def ok(self, tol: Optional[ToleranceProfile] = None) -> bool:
        tol = tol or ToleranceProfile()
        vals = [self.diagonalization, self.fit_residual, self.leading_ratio,
                self.centrality, self.average_scalar]
        if self.power_match is not None:
            vals.append(self.power_match)
        return self.simple and max(vals) <= tol.rtol_spectral


def _power_invariant(z, p):
    """``z^{2p} + z^{-2p}``: invariant under ``z -> -z`` and ``z -> 1/z``."""
    w = p_power(z, 2 * p)
    return w + 1 / w


def _match_residual(found, target) -> float:
    """Greedy matching of two small multisets, relative max mismatch."""
    left = list(target)
    worst = 0.0
    for f in found:
        j = int(np.argmin([abs(f - t) for t in left]))
        worst = max(worst, abs(f - left[j]) / max(abs(left[j]), abs(f)))
        left.pop(j)
    return worst


def b_minus_general_diag(cfg: ChainConfig, lam_ref=0.9 * cmath.exp(0.7j),
                         tol: Optional[ToleranceProfile] = None, n_extra: int = 3) -> BMinusReport:
    """Spectral checks of ``B_-(lam)`` for a configuration without nilpotency constraints.

    * ED at ``lam_ref`` (simplicity, eigenvector matrix ``V``);
    * ``V`` diagonalizes ``B_-(lam)`` at ``N + 1 + n_extra`` further points;
    * each eigenvalue function divided by ``(lam^2/q - q/lam^2)`` is fitted as
      ``b_- prod_a (Lambda - B_a^2 - B_a^{-2})`` in ``Lambda = lam^2 + lam^{-2}``;
    * ``prod_{a=1}^p B_-(lam q^a)`` is a multiple of the identity and the
      multiple equals the ``p``-th power product formula with the fitted ``B_a``;
    * for SoV-constrained configurations ``B_a^p = q^{p/2} mu_{a,+}^p``
      (compared modulo the symmetry ``B -> +-1/B`` of the factorized form).
    """
    tol = tol or ToleranceProfile()
    N, p, q = cfg.N, cfg.root.p, cfg.q
    const = _b_minus_constant(cfg)
    if const == 0 or not cmath.isfinite(const):
        raise ParameterError("B_- leading constant vanishes: kappa_- e^{tau_-} prod alpha beta = 0")
    eig = general_eig(b_minus_operator(cfg, lam_ref))
    vals = eig.values
    scale = float(np.abs(vals).max())
    gaps = [abs(vals[i] - vals[j]) for i in range(len(vals)) for j in range(i)]
    separation = float(min(gaps) / scale) if gaps else 1.0
    vecs = eig.right
    inv = eig.left
    lams = [1.1 * cmath.exp(1j * t) for t in np.linspace(0.3, 2.8, N + 1 + n_extra)]
    diag_res = 0.0
    samples = []
    for lam in lams:
        d = inv @ b_minus_operator(cfg, lam) @ vecs
        dd = np.diag(d)
        diag_res = max(diag_res, float(np.abs(d - np.diag(dd)).max() / np.abs(dd).max()))
        samples.append(dd)
    samples = np.array(samples)
    big_l = np.array([lam ** 2 + lam ** -2 for lam in lams])
    pre = np.array([lam ** 2 / q - q / lam ** 2 for lam in lams])
    fit_res, lead, lead_signed, zeros = 0.0, 0.0, 0.0, []
    for col in range(samples.shape[1]):
        y = samples[:, col] / pre
        coeffs = np.polyfit(big_l, y, N)
        fit_res = max(fit_res, float(np.abs(np.polyval(coeffs, big_l) - y).max() / np.abs(y).max()))
        lead = max(lead, abs(coeffs[0] / const - 1))
        lead_signed = max(lead_signed, abs(coeffs[0] / ((-1) ** N * const) - 1))
        xs = np.roots(coeffs)
        zeros.append([cmath.sqrt((x + cmath.sqrt(x * x - 4)) / 2) for x in xs])
    pow_sep = float("inf")
    for zs in zeros:
        inv_vals = [_power_invariant(z, p) for z in zs]
        for i in range(len(inv_vals)):
            for j in range(i):
                pow_sep = min(pow_sep, abs(inv_vals[i] - inv_vals[j]) / max(abs(inv_vals[i]), abs(inv_vals[j])))
    # average value
    lam = 0.8 * cmath.exp(0.4j)
    prod = np.eye(cfg.dim, dtype=complex)
    for a in range(1, p + 1):
        prod = prod @ b_minus_operator(cfg, lam * cfg.root.power(a))
    scalar = np.trace(prod) / cfg.dim
    centrality = residual(prod, scalar * np.eye(cfg.dim))
    lp = p_power(lam, p)
    avg = 0.0
    for zs in zeros:
        expect = p_power(const, p) * (lp * lp - 1 / (lp * lp))
        for z in zs:
            zp = p_power(z, p)
            expect *= (lp / zp - zp / lp) * (lp * zp - 1 / (lp * zp))
        avg = max(avg, abs(expect - scalar) / abs(scalar))
    power_match = None
    if cfg.sov:
        target = [_power_invariant(cfg.root.q_half * s.mu_plus, p) for s in cfg.sites]
        power_match = max(_match_residual([_power_invariant(z, p) for z in zs], target) for zs in zeros)
    simple = separation > tol.rtol_spectral and not eig.degenerate
    return BMinusReport(vals, separation, simple, diag_res, fit_res, float(lead), float(lead_signed),
                        zeros, pow_sep, centrality, float(avg), power_match, eig.degenerate)
