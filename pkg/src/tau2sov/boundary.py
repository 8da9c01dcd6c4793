"""Reflection matrices, boundary monodromy and the open-chain transfer matrix.

The minus-boundary monodromy is ``U_-(lam) = M(lam) K_-(lam) Mhat(lam)`` with
entries ``A_-, B_-, C_-, D_-`` (stored as ``U[0,0], U[0,1], U[1,0], U[1,1]``).
The open transfer matrix is ``T(lam) = tr K_+(lam) U_-(lam)``.
"""
from __future__ import annotations

import cmath

import numpy as np

from .bulk import (_aux_swap, a_fn, aux_mul, aux_to_matrix, d_fn, monodromy,
                   qdet_scalar, r_matrix)
from .numerics import kron, residual
from .representation import BoundaryParams, ChainConfig, ParameterError

__all__ = [
    "k_matrix", "k_minus", "k_plus", "hat_monodromy", "u_minus", "u_plus_t",
    "v_plus", "v_plus_negated", "d_tilde", "d_tilde_coefficients", "transfer", "transfer_alt", "diagonal_transfer",
    "reflection_residual", "BoundaryScalarFns", "boundary_scalar_fns",
    "boundary_qdet", "t_diag_forms", "tau_infinity", "tau_infinity_signed_triangular", "tau_infinity_numeric",
    "special_values", "u_minus_entry", "exchange_relation_residual", "calibrate_d_tilde",
]

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def k_matrix(lam, zeta, kappa, tau, q, triangular: bool = False) -> np.ndarray:
    """Scalar solution of the reflection equation.

    With ``triangular=True`` the upper off-diagonal entry is set to exactly 0.
    """
    lam = complex(lam)
    if lam == 0:
        raise ParameterError("spectral parameter 0 is a pole")
    zeta = complex(zeta)
    if zeta == 0 or abs(zeta * zeta - 1) < 1e-14:
        raise ParameterError(f"zeta={zeta} is a pole of the reflection matrix")
    qh = cmath.sqrt(q) if not isinstance(q, tuple) else q[1]
    q = q if not isinstance(q, tuple) else q[0]
    pref = 1 / (zeta - 1 / zeta)
    off = lam ** 2 / q - q / lam ** 2
    return pref * np.array([
        [lam * zeta / qh - qh / (lam * zeta), 0.0 if triangular else kappa * cmath.exp(tau) * off],
        [kappa * cmath.exp(-tau) * off, qh * zeta / lam - lam / (zeta * qh)],
    ], dtype=complex)


def _qpair(cfg):
    return (cfg.q, cfg.root.q_half)


def k_minus(cfg: ChainConfig, lam) -> np.ndarray:
    b = cfg.boundary
    return k_matrix(lam, b.zeta_m, b.kappa_m, b.tau_m, _qpair(cfg))


def k_plus(cfg: ChainConfig, lam) -> np.ndarray:
    b = cfg.boundary
    return k_matrix(lam * cfg.q, b.zeta_p, b.kappa_p, b.tau_p, _qpair(cfg), b.triangular_plus)


def hat_monodromy(cfg: ChainConfig, lam, m_inv=None) -> np.ndarray:
    """``(-1)^N sigma^y M^t(1/lam) sigma^y`` written out blockwise."""
    m = monodromy(cfg, 1 / lam) if m_inv is None else m_inv
    s = (-1) ** cfg.N
    out = np.empty_like(m)
    out[0, 0] = s * m[1, 1]
    out[0, 1] = -s * m[0, 1]
    out[1, 0] = -s * m[1, 0]
    out[1, 1] = s * m[0, 0]
    return out


def _scalar_aux(k, dim):
    out = np.zeros((2, 2, dim, dim), dtype=complex)
    eye = np.eye(dim)
    for i in range(2):
        for j in range(2):
            out[i, j] = k[i, j] * eye
    return out


def _sandwich(m, k, mh):
    """``M K Mhat`` with a scalar middle factor (cheaper than two aux products)."""
    out = np.zeros_like(m)
    for i in range(2):
        for j in range(2):
            acc = 0
            for a in range(2):
                for b in range(2):
                    if k[a, b] != 0:
                        acc = acc + k[a, b] * (m[i, a] @ mh[b, j])
            out[i, j] = acc
    return out


def u_minus(cfg: ChainConfig, lam) -> np.ndarray:
    """Boundary monodromy ``M(lam) K_-(lam) Mhat(lam)``."""
    return _sandwich(monodromy(cfg, lam), k_minus(cfg, lam), hat_monodromy(cfg, lam))


def u_plus_t(cfg: ChainConfig, lam) -> np.ndarray:
    """``M^t(lam) K_+^t(lam) Mhat^t(lam)`` (auxiliary transposes, quantum order kept)."""
    m = monodromy(cfg, lam).transpose(1, 0, 2, 3)
    mh = hat_monodromy(cfg, lam).transpose(1, 0, 2, 3)
    return _sandwich(m, k_plus(cfg, lam).T, mh)


def v_plus(cfg: ChainConfig, lam) -> np.ndarray:
    """``V_+(lam) = U_+^t(1/lam)``, the plus-boundary solution of the reflection equation.

    The inversion ``lam -> 1/lam`` is the multiplicative form of the crossing
    ``lam -> -lam`` of additive conventions; already for an empty chain
    ``K_+(-lam)`` is not a solution while ``K_+(1/lam)`` is.
    """
    return u_plus_t(cfg, 1 / lam)


def v_plus_negated(cfg: ChainConfig, lam) -> np.ndarray:
    """``U_+^t(-lam)``; kept as a diagnostic, it does not solve the reflection equation."""
    return u_plus_t(cfg, -lam)


def transfer(cfg: ChainConfig, lam) -> np.ndarray:
    """Open-chain transfer matrix ``a_+ A_- + b_+ C_- + c_+ B_- + d_+ D_-``."""
    u = u_minus(cfg, lam)
    k = k_plus(cfg, lam)
    return k[0, 0] * u[0, 0] + k[0, 1] * u[1, 0] + k[1, 0] * u[0, 1] + k[1, 1] * u[1, 1]


def transfer_alt(cfg: ChainConfig, lam) -> np.ndarray:
    """Same transfer matrix as the trace of ``K_+ M K_- Mhat`` multiplied in that order."""
    dim = cfg.dim
    kp = _scalar_aux(k_plus(cfg, lam), dim)
    km = _scalar_aux(k_minus(cfg, lam), dim)
    prod = aux_mul(aux_mul(aux_mul(kp, monodromy(cfg, lam)), km), hat_monodromy(cfg, lam))
    return prod[0, 0] + prod[1, 1]


def diagonal_transfer(cfg: ChainConfig, lam) -> np.ndarray:
    u = u_minus(cfg, lam)
    k = k_plus(cfg, lam)
    return k[0, 0] * u[0, 0] + k[1, 1] * u[1, 1]


def reflection_residual(cfg: ChainConfig, fn, lam, mu) -> float:
    """Residual of ``R(l/m) U1(l) R(l m/q) U2(m) = U2(m) R(l m/q) U1(l) R(l/m)``."""
    dim = cfg.dim
    cap = 8 * dim
    sw = _aux_swap(dim)
    u1 = sw @ kron(np.eye(2), aux_to_matrix(fn(cfg, lam)), max_dim=cap) @ sw
    u2 = kron(np.eye(2), aux_to_matrix(fn(cfg, mu)), max_dim=cap)
    ra = kron(r_matrix(lam / mu, cfg.q), np.eye(dim), max_dim=cap)
    rb = kron(r_matrix(lam * mu / cfg.q, cfg.q), np.eye(dim), max_dim=cap)
    return residual(ra @ u1 @ rb @ u2, u2 @ rb @ u1 @ ra)


# ---------------------------------------------------------------------------
# scalar functions attached to the boundary
# ---------------------------------------------------------------------------

class BoundaryScalarFns:
    """Closures for the boundary coefficient functions of a configuration.

    ``A_minus`` is the eigenvalue function of ``A_-`` on the reference state,
    ``a_plus``/``d_plus`` the symmetrized plus-boundary coefficients and
    ``D_minus(lam) = k(lam) A_minus(q/lam)``.
    """

    def __init__(self, cfg: ChainConfig):
        self.cfg = cfg
        b = cfg.boundary
        self.q = cfg.q
        self.qh = cfg.root.q_half
        self.alpha_m = b.alpha_m
        self.beta_m = b.beta_m
        self.zeta_p = b.zeta_p

    def g_minus(self, lam):
        am, bm, qh = self.alpha_m, self.beta_m, self.qh
        return ((lam * am / qh - qh / (lam * am)) * (lam * bm / qh + qh / (lam * bm))
                / ((am - 1 / am) * (bm + 1 / bm)))

    def A_minus(self, lam):
        qh = self.qh
        return self.g_minus(lam) * a_fn(self.cfg, lam / qh) * d_fn(self.cfg, 1 / (qh * lam))

    def k_fn(self, lam):
        q = self.q
        return (lam ** 2 - lam ** -2) / (lam ** 2 / q ** 2 - q ** 2 / lam ** 2)

    def D_minus(self, lam):
        return self.k_fn(lam) * self.A_minus(self.q / lam)

    def a_plus(self, lam):
        q, qh, z = self.q, self.qh, self.zeta_p
        return ((lam ** 2 * q - 1 / (q * lam ** 2)) * (lam * z / qh - qh / (lam * z))
                / ((lam ** 2 - lam ** -2) * (z - 1 / z)))

    def d_plus(self, lam):
        q, qh, z = self.q, self.qh, self.zeta_p
        return ((lam ** 2 * q - 1 / (q * lam ** 2)) * (z * qh / lam - lam / (qh * z))
                / ((lam ** 2 - lam ** -2) * (z - 1 / z)))

    def a_coef(self, lam):
        """``a_plus(lam) A_minus(lam)``, the coefficient of the SoV Baxter equation."""
        return self.a_plus(lam) * self.A_minus(lam)

    def boundary_qdet(self, lam):
        q, qh = self.q, self.qh
        return (lam ** 2 / q ** 2 - q ** 2 / lam ** 2) * self.A_minus(lam * qh) * self.A_minus(qh / lam)


def boundary_scalar_fns(cfg: ChainConfig) -> BoundaryScalarFns:
    if cfg.boundary.alpha_m is None:
        raise ParameterError("boundary scalar functions need kappa_- != 0")
    return BoundaryScalarFns(cfg)


def boundary_qdet(cfg: ChainConfig, lam):
    """Both operator forms of the boundary quantum determinant and its scalar value."""
    q, qh = cfg.q, cfg.root.q_half
    up = u_minus(cfg, lam * qh)
    dn = u_minus(cfg, qh / lam)
    pref = (lam / q) ** 2 - (q / lam) ** 2
    op1 = pref * (up[0, 0] @ dn[0, 0] + up[0, 1] @ dn[1, 0])
    op2 = pref * (up[1, 1] @ dn[1, 1] + up[1, 0] @ dn[0, 1])
    return op1, op2, boundary_scalar_fns(cfg).boundary_qdet(lam)


def t_diag_forms(cfg: ChainConfig, lam):
    """Residuals of the two symmetric forms of the diagonal transfer matrix."""
    f = boundary_scalar_fns(cfg)
    u = u_minus(cfg, lam)
    ui = u_minus(cfg, 1 / lam)
    form_a = f.a_plus(lam) * u[0, 0] + f.a_plus(1 / lam) * ui[0, 0]
    form_d = f.d_plus(lam) * u[1, 1] + f.d_plus(1 / lam) * ui[1, 1]
    k = k_plus(cfg, lam)
    direct = k[0, 0] * u[0, 0] + k[1, 1] * u[1, 1]
    return residual(form_a, form_d), residual(direct, form_a)


def tau_infinity(cfg: ChainConfig) -> complex:
    """Leading coefficient of ``T(lam)`` in ``lam^{2(N+2)}`` (times the identity).

    For a triangular plus boundary only the ``e^{tau_- - tau_+}`` term of the
    general expression survives; its sign carries no ``(-1)^N``.
    """
    b = cfg.boundary
    prod_ab = np.prod([s.alpha * s.beta for s in cfg.sites])
    den = (b.zeta_p - 1 / b.zeta_p) * (b.zeta_m - 1 / b.zeta_m)
    lower = b.kappa_p * b.kappa_m * cmath.exp(b.tau_m - b.tau_p) * prod_ab / den
    if b.triangular_plus:
        return complex(lower)
    prod_dg = np.prod([s.delta * s.gamma for s in cfg.sites])
    upper = b.kappa_p * b.kappa_m * cmath.exp(b.tau_p - b.tau_m) * prod_dg / den
    return complex(upper + lower)


def tau_infinity_signed_triangular(cfg: ChainConfig) -> complex:
    """Triangular-boundary asymptote with an extra ``(-1)^N``; fails for odd N (diagnostic)."""
    b = cfg.boundary
    prod_ab = np.prod([s.alpha * s.beta for s in cfg.sites])
    den = (b.zeta_p - 1 / b.zeta_p) * (b.zeta_m - 1 / b.zeta_m)
    return complex((-1) ** cfg.N * b.kappa_p * b.kappa_m * cmath.exp(b.tau_m - b.tau_p) * prod_ab / den)


def tau_infinity_numeric(cfg: ChainConfig, radius: float = 1e4, phase: float = 0.37):
    """Asymptote of ``T`` from large and small ``|lam|``.

    ``lam^{-2(N+2)} T(lam)`` has corrections in powers of ``lam^{-2}``; two radii
    ``R`` and ``2R`` remove the first one (Richardson).  Returns, for
    ``|lam| -> infinity`` and ``|lam| -> 0``, the scalar estimate (mean
    diagonal) and the distance of the extrapolated operator from that scalar
    times the identity.
    """
    out = []
    e = cmath.exp(1j * phase)
    for big in (True, False):
        ests = []
        for r in (radius, 2 * radius):
            lam = r * e if big else e / r
            s = lam ** (-2 * (cfg.N + 2)) if big else lam ** (2 * (cfg.N + 2))
            ests.append(s * transfer(cfg, lam))
        t = (4 * ests[1] - ests[0]) / 3
        val = np.trace(t) / cfg.dim
        out.append((complex(val), residual(t, val * np.eye(cfg.dim))))
    return out


def special_values(cfg: ChainConfig) -> dict:
    """Closed forms of ``U_-`` and ``T`` at ``q^{1/2}`` and ``i q^{1/2}`` with residuals."""
    qh = cfg.root.q_half
    b = cfg.boundary
    n = cfg.N
    X = cfg.q + 1 / cfg.q
    eye = np.eye(cfg.dim)
    rz_m = (b.zeta_m + 1 / b.zeta_m) / (b.zeta_m - 1 / b.zeta_m)
    rz_p = (b.zeta_p + 1 / b.zeta_p) / (b.zeta_p - 1 / b.zeta_p)
    det1 = qdet_scalar(cfg, 1.0)
    deti = qdet_scalar(cfg, 1j)

    u1 = u_minus(cfg, qh)
    expect1 = (-1) ** n * det1
    res_u1 = max(residual(u1[0, 0], expect1 * eye), residual(u1[1, 1], expect1 * eye),
                 float(np.linalg.norm(u1[0, 1]) + np.linalg.norm(u1[1, 0])) / (abs(expect1) * np.sqrt(cfg.dim)))
    ui = u_minus(cfg, 1j * qh)
    # sign fixed by direct evaluation: no (-1)^N dependence survives at i q^{1/2}
    expecti = 1j * rz_m * deti
    res_ui = max(residual(ui[0, 0], expecti * eye), residual(ui[1, 1], -expecti * eye),
                 float(np.linalg.norm(ui[0, 1]) + np.linalg.norm(ui[1, 0])) / (abs(expecti) * np.sqrt(cfg.dim)))
    t_half = (-1) ** n * X * det1
    t_i = -X * rz_p * rz_m * deti
    vals = {"T(q^1/2)": t_half, "T(-q^1/2)": t_half, "T(iq^1/2)": t_i, "T(-iq^1/2)": t_i}
    res = {"U(q^1/2)": res_u1, "U(iq^1/2)": res_ui}
    for key, lam in (("T(q^1/2)", qh), ("T(-q^1/2)", -qh), ("T(iq^1/2)", 1j * qh), ("T(-iq^1/2)", -1j * qh)):
        t = transfer(cfg, lam)
        expect = vals[key] * eye
        if abs(vals[key]) > 1e-14 * abs(t_half):
            res[key] = residual(t, expect)
        else:
            res[key] = float(np.linalg.norm(t) / max(np.linalg.norm(transfer(cfg, 1.3 * lam)), 1e-300))
    return {"values": vals, "residuals": res}


# ---------------------------------------------------------------------------
# exchange relation between A_- and B_-
# ---------------------------------------------------------------------------

def _exchange_parts(cfg, l1, l2):
    q = cfg.q
    u1 = u_minus(cfg, l1)
    u2 = u_minus(cfg, l2)
    c1 = ((l1 * q / l2 - l2 / (l1 * q)) * (l1 * l2 / q - q / (l1 * l2))
          / ((l1 / l2 - l2 / l1) * (l1 * l2 - 1 / (l1 * l2))))
    c2 = ((l1 ** 2 / q - q / l1 ** 2) * (q - 1 / q)
          / ((l2 / l1 - l1 / l2) * (l1 ** 2 - l1 ** -2)))
    c3 = -(q - 1 / q) / ((l1 ** 2 - l1 ** -2) * (l1 * l2 - 1 / (l1 * l2)))
    lhs = u2[0, 0] @ u1[0, 1]
    known = c1 * u1[0, 1] @ u2[0, 0] + c2 * u2[0, 1] @ u1[0, 0]
    return lhs, known, c3, u1, u2


def d_tilde(cfg: ChainConfig, lam, coeffs=None):
    """Combination ``x(lam) D_-(lam) + y(lam) A_-(lam)`` entering the A-B exchange relation.

    ``coeffs`` defaults to the calibrated closed form
    ``x = lam^2 - 1/lam^2``, ``y = -(q - 1/q)`` (see :func:`calibrate_d_tilde`).
    """
    u = u_minus(cfg, lam)
    x, y = coeffs if coeffs is not None else d_tilde_coefficients(cfg.q, lam)
    return x * u[1, 1] + y * u[0, 0]


def d_tilde_coefficients(q, lam):
    """Coefficients fixed once by :func:`calibrate_d_tilde` on generic configurations."""
    return lam ** 2 - lam ** -2, -(q - 1 / q)


def calibrate_d_tilde(cfg: ChainConfig, l1, l2):
    """Least-squares fit of ``(x, y)`` so that the exchange relation closes.

    The unknown operator is modelled as ``x D_-(l1) + y A_-(l1)``; the returned
    residual tells whether such a combination exists at all.
    """
    lhs, known, c3, u1, u2 = _exchange_parts(cfg, l1, l2)
    target = (lhs - known).ravel()
    cols = np.stack([(c3 * u2[0, 1] @ u1[1, 1]).ravel(), (c3 * u2[0, 1] @ u1[0, 0]).ravel()], axis=1)
    sol, *_ = np.linalg.lstsq(cols, target, rcond=None)
    res = float(np.linalg.norm(cols @ sol - target) / max(np.linalg.norm(lhs), 1e-300))
    return complex(sol[0]), complex(sol[1]), res


def exchange_relation_residual(cfg: ChainConfig, l1, l2) -> float:
    lhs, known, c3, u1, u2 = _exchange_parts(cfg, l1, l2)
    x, y = d_tilde_coefficients(cfg.q, l1)
    rhs = known + c3 * u2[0, 1] @ (x * u1[1, 1] + y * u1[0, 0])
    return residual(lhs, rhs)


def u_minus_entry(cfg: ChainConfig, lam, i: int, j: int) -> np.ndarray:
    """Single entry ``U_-(lam)[i, j]`` without forming the other three."""
    m = monodromy(cfg, lam)
    mh = hat_monodromy(cfg, lam)
    k = k_minus(cfg, lam)
    acc = 0
    for a in range(2):
        for b in range(2):
            if k[a, b] != 0:
                acc = acc + k[a, b] * (m[i, a] @ mh[b, j])
    return acc
