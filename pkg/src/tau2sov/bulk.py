"""Six-vertex R-matrix, the cyclic Lax operator and the bulk monodromy.

Auxiliary-space objects are stored as arrays of shape ``(2, 2, dim, dim)``:
``X[i, j]`` is the quantum-space operator in row ``i``/column ``j`` of the
2x2 auxiliary matrix.  Products of such objects multiply the auxiliary indices
as matrices and the quantum-space blocks in the order written.
"""
from __future__ import annotations

import numpy as np

from .numerics import kron
from .representation import ChainConfig, ParameterError, embed, weyl_pair

__all__ = [
    "aux_mul", "aux_to_matrix", "aux_identity", "r_matrix", "local_lax", "lax",
    "monodromy", "bulk_transfer", "theta_operator", "qdet_operator",
    "qdet_operator_alt", "k_mu_branch_sign", "qdet_scalar", "qdet_scalar_forms", "a_fn", "d_fn",
    "a_site", "d_site", "BulkScalarFns", "bulk_scalar_fns", "ybe_residual",
    "r_matrix_ybe_residual",
]


def _check_spectral(lam):
    lam = complex(lam)
    if lam == 0:
        raise ParameterError("spectral parameter 0 is a pole")
    return lam


def aux_mul(x, y):
    """Auxiliary-matrix product ``(XY)_{ij} = sum_k X_{ik} Y_{kj}``."""
    return np.einsum("ikab,kjbc->ijac", x, y)


def aux_identity(dim: int):
    out = np.zeros((2, 2, dim, dim), dtype=complex)
    out[0, 0] = out[1, 1] = np.eye(dim)
    return out


def aux_to_matrix(x):
    """Flatten ``(2, 2, d, d)`` into the ``2d x 2d`` matrix on ``C^2 (x) H``."""
    d = x.shape[-1]
    return x.transpose(0, 2, 1, 3).reshape(2 * d, 2 * d)


def r_matrix(lam, q) -> np.ndarray:
    """Trigonometric six-vertex R-matrix on ``C^2 (x) C^2``."""
    lam = _check_spectral(lam)
    corner = q * lam - 1 / (q * lam)
    mid = lam - 1 / lam
    off = q - 1 / q
    return np.array([[corner, 0, 0, 0],
                     [0, mid, off, 0],
                     [0, off, mid, 0],
                     [0, 0, 0, corner]], dtype=complex)


def r_matrix_ybe_residual(lam, mu, q) -> float:
    """``R12(l/m) R13(l) R23(m) - R23(m) R13(l) R12(l/m)`` on ``(C^2)^3``."""
    i2 = np.eye(2)
    perm23 = np.kron(i2, _swap())
    r12 = np.kron(r_matrix(lam / mu, q), i2)
    r23 = np.kron(i2, r_matrix(mu, q))
    r13 = perm23 @ np.kron(r_matrix(lam, q), i2) @ perm23
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.linalg.norm(rhs)))


def _swap():
    s = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            s[2 * i + j, 2 * j + i] = 1
    return s


def local_lax(lam, site, root) -> np.ndarray:
    """Lax operator of one site as a ``(2, 2, p, p)`` array.

    ``site`` is a :class:`SiteParams`.
    """
    lam = _check_spectral(lam)
    u, v = weyl_pair(root)
    vi = np.linalg.inv(v)
    ui = u.conj().T
    qh = root.q_half
    s = site
    out = np.empty((2, 2, root.p, root.p), dtype=complex)
    out[0, 0] = lam * s.alpha * v - s.beta / lam * vi
    out[0, 1] = u @ (s.a / qh * v + qh * s.b * vi)
    out[1, 0] = ui @ (qh * s.c * v + s.d / qh * vi)
    out[1, 1] = s.gamma * v / lam - s.delta * lam * vi
    return out


def lax(cfg: ChainConfig, lam, n: int) -> np.ndarray:
    """Lax operator of site ``n`` (1-based) embedded in the full quantum space."""
    loc = local_lax(lam, cfg.sites[n - 1], cfg.root)
    out = np.empty((2, 2, cfg.dim, cfg.dim), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i, j] = embed(loc[i, j], n, cfg.N)
    return out


def monodromy(cfg: ChainConfig, lam) -> np.ndarray:
    """``M(lam) = L_N(lam q^{-1/2}) ... L_1(lam q^{-1/2})``."""
    lam = _check_spectral(lam)
    mu = lam / cfg.root.q_half
    out = lax(cfg, mu, cfg.N)
    for n in range(cfg.N - 1, 0, -1):
        out = aux_mul(out, lax(cfg, mu, n))
    return out


def bulk_transfer(cfg: ChainConfig, lam) -> np.ndarray:
    m = monodromy(cfg, lam)
    return m[0, 0] + m[1, 1]


def theta_operator(cfg: ChainConfig) -> np.ndarray:
    """``Theta = prod_n v_n``, the charge commuting with the bulk transfer matrix."""
    _, v = weyl_pair(cfg.root)
    out = np.eye(cfg.dim, dtype=complex)
    for n in range(1, cfg.N + 1):
        out = out @ embed(v, n, cfg.N)
    return out


def qdet_operator(cfg: ChainConfig, lam) -> np.ndarray:
    """``A(lam q^{1/2}) D(lam q^{-1/2}) - B(lam q^{1/2}) C(lam q^{-1/2})``."""
    qh = cfg.root.q_half
    up = monodromy(cfg, lam * qh)
    dn = monodromy(cfg, lam / qh)
    return up[0, 0] @ dn[1, 1] - up[0, 1] @ dn[1, 0]


def qdet_operator_alt(cfg: ChainConfig, lam) -> np.ndarray:
    """``D(lam q^{1/2}) A(lam q^{-1/2}) - C(lam q^{1/2}) B(lam q^{-1/2})``."""
    qh = cfg.root.q_half
    up = monodromy(cfg, lam * qh)
    dn = monodromy(cfg, lam / qh)
    return up[1, 1] @ dn[0, 0] - up[1, 0] @ dn[0, 1]


def a_fn(cfg: ChainConfig, lam) -> complex:
    q = cfg.q
    out = complex(cfg.a0)
    for s in cfg.sites:
        out *= s.beta / lam + s.b * s.alpha / (q * s.a) * lam
    return out


def d_fn(cfg: ChainConfig, lam) -> complex:
    q = cfg.q
    out = (-1) ** cfg.N / complex(cfg.a0)
    for s in cfg.sites:
        out *= s.a * s.c / s.alpha * (1 / lam + q * s.d * s.alpha / (s.c * s.beta) * lam)
    return out


def a_site(site, lam) -> complex:
    """Local diagonal eigenvalue ``alpha lam - beta/lam``."""
    return site.alpha * lam - site.beta / lam


def d_site(site, lam) -> complex:
    """Local diagonal eigenvalue ``gamma/lam - delta lam``."""
    return site.gamma / lam - site.delta * lam


def k_mu_branch_sign(site, q) -> int:
    """Sign making ``k mu_+ mu_-`` equal ``-q beta a c/alpha`` on the principal branches.

    ``k``, ``mu_+`` and ``mu_-`` are square roots, so the factorized form of the
    local quantum determinant only fixes their product up to a sign.
    """
    ratio = site.k_site * site.mu_plus * site.mu_minus / (-q * site.beta * site.a * site.c / site.alpha)
    return 1 if ratio.real > 0 else -1


def qdet_scalar_forms(cfg: ChainConfig, lam) -> dict:
    """The three closed forms of the bulk quantum determinant."""
    q = cfg.q
    k_mu = 1.0 + 0j
    prod = (-q) ** cfg.N
    for s in cfg.sites:
        k_mu *= k_mu_branch_sign(s, q) * s.k_site * (lam / s.mu_plus - s.mu_plus / lam) * (lam / s.mu_minus - s.mu_minus / lam)
        prod *= (s.beta * s.a * s.c / s.alpha
                 * (1 / lam + s.b * s.alpha / (q * s.a * s.beta) * lam)
                 * (1 / lam + s.d * s.alpha / (q * s.c * s.beta) * lam))
    return {"k_mu": complex(k_mu), "product": complex(prod),
            "a_d": a_fn(cfg, lam) * d_fn(cfg, lam / q)}


def qdet_scalar(cfg: ChainConfig, lam) -> complex:
    return qdet_scalar_forms(cfg, lam)["a_d"]


class BulkScalarFns:
    """Closures ``a(lam)``, ``d(lam)`` and ``det_q M(lam)`` bound to a configuration."""

    def __init__(self, cfg: ChainConfig):
        self.cfg = cfg

    def a(self, lam):
        return a_fn(self.cfg, lam)

    def d(self, lam):
        return d_fn(self.cfg, lam)

    def qdet(self, lam):
        return qdet_scalar(self.cfg, lam)


def bulk_scalar_fns(cfg: ChainConfig) -> BulkScalarFns:
    return BulkScalarFns(cfg)


def ybe_residual(cfg: ChainConfig, lam, mu) -> float:
    """Residual of ``R12(l/m) M1(l) M2(m) = M2(m) M1(l) R12(l/m)``.

    Built on ``C^2 (x) C^2 (x) H`` with auxiliary spaces ordered 1, 2.
    """
    dim = cfg.dim
    m1 = aux_to_matrix(monodromy(cfg, lam))          # on C^2 (x) H
    m2 = aux_to_matrix(monodromy(cfg, mu))
    i2 = np.eye(2)
    big1 = kron(i2, m1, max_dim=8 * dim)             # space 1 -> slot 2 after swap
    big1 = _aux_swap(dim) @ big1 @ _aux_swap(dim)
    big2 = kron(i2, m2, max_dim=8 * dim)
    r = kron(r_matrix(lam / mu, cfg.q), np.eye(dim), max_dim=8 * dim)
    lhs = r @ big1 @ big2
    rhs = big2 @ big1 @ r
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(lhs), np.linalg.norm(rhs)))


def _aux_swap(dim):
    return np.kron(_swap(), np.eye(dim))
