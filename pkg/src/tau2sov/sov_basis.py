"""Left and right eigenbases of the boundary operator family ``B_-(lam)``.

Requires a configuration in SoV mode (``cfg.j`` set, ``b_n = -q^{2 j_n - 1} a_n``).
States are labelled by tuples ``h = (h_1, ..., h_N)`` with ``h_n`` in
``0..p-1`` and enumerated by ``index(h) = sum_a p^{a-1} h_a``.
Left states are stored as rows, right states as columns.
"""
from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boundary import BoundaryScalarFns, boundary_scalar_fns, u_minus, u_minus_entry
from .bulk import a_fn, d_fn, monodromy, qdet_scalar
from .numerics import ToleranceProfile, determinant, kron_all, residual
from .representation import ChainConfig, GenericityError, ParameterError, basis_vector

__all__ = [
    "ModeError", "SovGrid", "sov_grid", "h_tuples", "h_index", "vandermonde",
    "a_h", "b_eigenvalue", "reference_states", "reference_identity_residuals",
    "SovBasis", "SeparateState", "separate_state_vector", "separate_scalar_product",
]


class ModeError(ValueError):
    """The configuration is not in the required (SoV) mode."""


def _require_sov(cfg: ChainConfig):
    if cfg.j is None:
        raise ModeError("configuration has no SoV exponents j_n")
    if cfg.sov_residual() > 1e-12:
        raise ModeError("configuration violates the SoV constraint on b_n / a0")
    if cfg.boundary.alpha_m is None:
        raise ModeError("SoV basis needs kappa_- != 0")


def h_tuples(p: int, n_sites: int):
    """All labels ordered by their enumeration index (first entry fastest)."""
    return [tuple(reversed(t)) for t in itertools.product(range(p), repeat=n_sites)]


def h_index(h, p: int) -> int:
    return int(sum(x * p ** a for a, x in enumerate(h)))


def vandermonde(xs) -> complex:
    """``prod_{b < a} (x_a - x_b)``."""
    out = 1.0 + 0j
    for a in range(len(xs)):
        for b in range(a):
            out *= xs[a] - xs[b]
    return out


@dataclass(frozen=True)
class SovGrid:
    """Shifted points ``xi[n, h] = mu_{n,+} q^{h + 1/2}`` and derived coordinates.

    ``zeta`` has ``2N`` rows: ``xi`` followed by ``1/xi``.  ``X = zeta^2 + zeta^-2``.
    """

    xi: np.ndarray       # (N, p)
    zeta: np.ndarray     # (2N, p)
    X: np.ndarray        # (2N, p)
    X_const: complex

    def X_of(self, h) -> np.ndarray:
        return np.array([self.X[a, hh] for a, hh in enumerate(h)])

    def min_separation(self) -> float:
        n = self.xi.shape[0]
        vals = self.X[:n].ravel()
        d = np.abs(vals[:, None] - vals[None, :])
        np.fill_diagonal(d, np.inf)
        return float(d.min() / np.abs(vals).max())


def sov_grid(cfg: ChainConfig) -> SovGrid:
    root = cfg.root
    hs = np.arange(root.p)
    xi = np.array([[s.mu_plus * root.power(h) * root.q_half for h in hs] for s in cfg.sites])
    zeta = np.vstack([xi, 1 / xi])
    X = zeta ** 2 + zeta ** -2
    return SovGrid(xi, zeta, X, cfg.q + 1 / cfg.q)


def a_h(cfg: ChainConfig, grid: SovGrid, h, lam) -> complex:
    out = (-1) ** cfg.N + 0j
    for n, s in enumerate(cfg.sites):
        x = grid.xi[n, h[n]]
        out *= cmath.sqrt(s.alpha * s.beta) * (lam / x - x / lam)
    return out


def b_eigenvalue(cfg: ChainConfig, h, lam, grid: Optional[SovGrid] = None) -> complex:
    """Eigenvalue of ``B_-(lam)`` on the states labelled by ``h``.

    ``(-1)^N kappa_- e^{tau_-} (lam^2/q - q/lam^2)/(zeta_- - 1/zeta_-) a_h(lam) a_h(1/lam)``;
    the ``(-1)^N`` is the overall sign of ``B_-`` in terms of the bulk generators.
    """
    grid = grid if grid is not None else sov_grid(cfg)
    b = cfg.boundary
    q = cfg.q
    return ((-1) ** cfg.N * b.kappa_m * cmath.exp(b.tau_m) * (lam ** 2 / q - q / lam ** 2) / (b.zeta_m - 1 / b.zeta_m)
            * a_h(cfg, grid, h, lam) * a_h(cfg, grid, h, 1 / lam))


def reference_states(cfg: ChainConfig):
    """``<Omega| = (x)_n <j_n - 1|`` and ``|Omega_bar> = (x)_n |j_n>`` (site 1 rightmost)."""
    if cfg.j is None:
        raise ModeError("reference states need SoV exponents j_n")
    left = kron_all([basis_vector(cfg.root, cfg.j[n] - 1)[None, :] for n in reversed(range(cfg.N))])[0]
    right = kron_all([basis_vector(cfg.root, cfg.j[n])[:, None] for n in reversed(range(cfg.N))])[:, 0]
    return left, right


def reference_identity_residuals(cfg: ChainConfig, lam) -> dict:
    """Actions of the bulk monodromy entries on the two reference states."""
    left, right = reference_states(cfg)
    qh = cfg.root.q_half
    m_up = monodromy(cfg, lam * qh)
    m = monodromy(cfg, lam)
    scale = lambda op, v: max(np.linalg.norm(op), 1e-300) * np.linalg.norm(v)
    return {
        "left_A": residual(left @ m_up[0, 0], a_fn(cfg, lam) * left),
        "left_D": residual(left @ m_up[1, 1], d_fn(cfg, lam) * left),
        "left_B": float(np.linalg.norm(left @ m[0, 1]) / scale(m[0, 1], left)),
        "left_C_norm": float(np.linalg.norm(left @ m[1, 0]) / scale(m[1, 0], left)),
        "right_A": residual(m_up[0, 0] @ right, a_fn(cfg, lam * cfg.q) * right),
        "right_D": residual(m_up[1, 1] @ right, d_fn(cfg, lam / cfg.q) * right),
        "right_B": float(np.linalg.norm(m[0, 1] @ right) / scale(m[0, 1], right)),
        "right_C_norm": float(np.linalg.norm(m[1, 0] @ right) / scale(m[1, 0], right)),
    }


class SovBasis:
    """Left/right ``B_-`` eigenbases built by ladders of ``A_-`` and ``D_-``.

    Parameters
    ----------
    cfg : ChainConfig
        Configuration in SoV mode.
    tol : ToleranceProfile, optional
        ``svd_gap_min`` bounds the condition number of the stacked bases.
    """

    def __init__(self, cfg: ChainConfig, tol: Optional[ToleranceProfile] = None):
        _require_sov(cfg)
        self.cfg = cfg
        self.tol = tol or ToleranceProfile()
        self.p = cfg.root.p
        self.N = cfg.N
        self.grid = sov_grid(cfg)
        if self.grid.min_separation() < 1e-8:
            raise GenericityError("SoV grid has colliding X coordinates", "esov")
        self.fns: BoundaryScalarFns = boundary_scalar_fns(cfg)
        self.labels = h_tuples(self.p, self.N)
        self._build()

    # -- construction -----------------------------------------------------
    def _build(self):
        cfg, p, n_sites, g, f = self.cfg, self.p, self.N, self.grid, self.fns
        # raising operators A_-(1/xi_n^(k)) / A(1/xi_n^(k)) and lowering ones
        # D_-(xi_n^(k)) / (kappa_n^(k) A(1/xi_n^(k-1)))
        self.raise_ops = [[u_minus_entry(cfg, 1 / g.xi[n, k], 0, 0) / f.A_minus(1 / g.xi[n, k])
                           for k in range(p)] for n in range(n_sites)]
        self.lower_ops = [[u_minus_entry(cfg, g.xi[n, k], 1, 1)
                           / (f.k_fn(g.xi[n, k]) * f.A_minus(1 / g.xi[n, k - 1]))
                           for k in range(p)] for n in range(n_sites)]
        omega, omega_bar = reference_states(cfg)
        left = {}
        for h in sorted(self.labels, key=sum):
            if sum(h) == 0:
                left[h] = omega.copy()
                continue
            n = next(i for i, x in enumerate(h) if x > 0)
            prev = h[:n] + (h[n] - 1,) + h[n + 1:]
            left[h] = left[prev] @ self.raise_ops[n][h[n] - 1]
        right = {}
        top = (p - 1,) * n_sites
        for h in sorted(self.labels, key=lambda t: -sum(t)):
            if h == top:
                right[h] = omega_bar.copy()
                continue
            n = next(i for i, x in enumerate(h) if x < p - 1)
            prev = h[:n] + (h[n] + 1,) + h[n + 1:]
            right[h] = self.lower_ops[n][h[n] + 1] @ right[prev]
        v_top = vandermonde(g.X_of(top))
        self.norm = cmath.sqrt(v_top * (left[top] @ right[top]))
        if self.norm == 0:
            raise GenericityError("vanishing SoV normalization", "sov2")
        self.left = np.array([left[h] for h in self.labels]) / self.norm
        self.right = np.array([right[h] for h in self.labels]).T / self.norm
        for name, mat in (("left", self.left), ("right", self.right)):
            s = np.linalg.svd(mat, compute_uv=False)
            if s[-1] == 0 or s[0] / s[-1] > self.tol.svd_gap_min ** 2:
                raise GenericityError(f"{name} SoV basis is numerically singular "
                                      f"(condition {s[0] / max(s[-1], 1e-300):.3e})", "sov2")

    # -- access ------------------------------------------------------------
    def index(self, h) -> int:
        return h_index(h, self.p)

    def left_state(self, h) -> np.ndarray:
        return self.left[self.index(h)]

    def right_state(self, h) -> np.ndarray:
        return self.right[:, self.index(h)]

    def vandermonde(self, h) -> complex:
        return vandermonde(self.grid.X_of(h))

    def b_eigenvalue(self, h, lam) -> complex:
        return b_eigenvalue(self.cfg, h, lam, self.grid)

    # -- verification --------------------------------------------------------
    def eigen_residuals(self, lams) -> dict:
        """Worst left/right ``B_-`` eigen-residuals over all states and the given points."""
        worst_l = worst_r = 0.0
        for lam in lams:
            b = u_minus_entry(self.cfg, lam, 0, 1)
            for h in self.labels:
                ev = self.b_eigenvalue(h, lam)
                lv, rv = self.left_state(h), self.right_state(h)
                lb, br = lv @ b, b @ rv
                worst_l = max(worst_l, residual(lb, ev * lv) if np.linalg.norm(lb) + abs(ev) > 0 else 0.0)
                worst_r = max(worst_r, residual(br, ev * rv) if np.linalg.norm(br) + abs(ev) > 0 else 0.0)
        return {"left": worst_l, "right": worst_r}

    def b_vanishing_residual(self) -> float:
        """``B_-(q^{1/2})`` vanishes identically."""
        qh = self.cfg.root.q_half
        b = u_minus_entry(self.cfg, qh, 0, 1)
        ref = u_minus_entry(self.cfg, 1.3 * qh, 0, 1)
        return float(np.linalg.norm(b) / np.linalg.norm(ref))

    def gram_matrix(self) -> np.ndarray:
        return self.left @ self.right

    def gram_expected_diagonal(self) -> np.ndarray:
        return np.array([1 / self.vandermonde(h) for h in self.labels])

    def gram_residuals(self) -> dict:
        g = self.gram_matrix()
        diag = np.diag(g)
        expect = self.gram_expected_diagonal()
        # off-diagonal overlaps as cosines between the unit-normalized states
        norms = np.outer(np.linalg.norm(self.left, axis=1), np.linalg.norm(self.right, axis=0))
        off = (g - np.diag(diag)) / norms
        ratio = 0.0
        X = self.grid.X
        for h in self.labels:
            for a in range(self.N):
                if h[a] == self.p - 1:
                    continue
                hp = h[:a] + (h[a] + 1,) + h[a + 1:]
                lhs = diag[self.index(hp)] / diag[self.index(h)]
                rhs = 1.0 + 0j
                for b in range(self.N):
                    if b != a:
                        rhs *= (X[a, h[a]] - X[b, h[b]]) / (X[a, h[a] + 1] - X[b, h[b]])
                ratio = max(ratio, abs(lhs - rhs) / abs(rhs))
        return {
            "offdiag": float(np.abs(off).max()),
            "diag": float(np.max(np.abs(diag - expect) / np.abs(expect))),
            "ratio_law": float(ratio),
        }

    def identity_decomposition(self) -> np.ndarray:
        w = np.array([self.vandermonde(h) for h in self.labels])
        return (self.right * w) @ self.left

    def identity_decomposition_residual(self) -> float:
        return residual(self.identity_decomposition(), np.eye(self.cfg.dim))

    def holonomies(self):
        """Factors by which the ladders fail to close after ``p`` steps.

        ``<h| A_-(1/xi_n^(p-1))/A(1/xi_n^(p-1)) = c_n <h with h_n = 0|`` for
        ``h_n = p - 1`` and ``D_-(xi_n^(0))/(k A(1/xi_n^(p-1))) |h with h_n = 0> =
        c'_n |h with h_n = p - 1>``.  Both are independent of the state
        normalization; returns ``(c, c')``.
        """
        p = self.p
        cl, cr = [], []
        for n in range(self.N):
            h = tuple(p - 1 if i == n else 0 for i in range(self.N))
            h0 = (0,) * self.N
            v = self.left_state(h) @ self.raise_ops[n][p - 1]
            w = self.left_state(h0)
            cl.append(complex(v @ w.conj() / (w @ w.conj())))
            v = self.lower_ops[n][0] @ self.right_state(h0)
            w = self.right_state(h)
            cr.append(complex(w.conj() @ v / (w.conj() @ w)))
        return np.array(cl), np.array(cr)

    def identity_decomposition_zero_weight_residual(self) -> float:
        """Same sum with the weight ``prod (X_a - X_a)``, which vanishes for N >= 2."""
        w = np.array([0.0 if self.N >= 2 else 1.0 for _ in self.labels])
        return residual((self.right * w) @ self.left, np.eye(self.cfg.dim))

    def qdet_grid_residual(self) -> float:
        """``A(xi^(h+1)) A(1/xi^(h))`` against the boundary quantum determinant on the grid.

        The denominator is ``(xi^(h-1/2))^2 - (xi^(h-1/2))^-2``.  Since
        ``A(xi^(0)) = 0`` both sides vanish at ``h = p - 1``; residuals are
        therefore measured against the largest right-hand side over the grid.
        """
        f, g, qh = self.fns, self.grid, self.cfg.root.q_half
        diffs, scale = [], 0.0
        for n in range(self.N):
            for h in range(self.p):
                x_half = g.xi[n, h] * qh        # xi^(h + 1/2)
                x_mhalf = g.xi[n, h] / qh       # xi^(h - 1/2)
                rhs = f.boundary_qdet(x_half) / (x_mhalf ** 2 - x_mhalf ** -2)
                lhs = f.A_minus(g.xi[n, (h + 1) % self.p]) * f.A_minus(1 / g.xi[n, h])
                d1 = f.D_minus(g.xi[n, (h + 1) % self.p]) * f.D_minus(1 / g.xi[n, h])
                diffs += [abs(lhs - rhs), abs(d1 - rhs)]
                scale = max(scale, abs(rhs))
        return float(max(diffs) / scale)

    def kappa_product_residual(self) -> float:
        f, g = self.fns, self.grid
        worst = 0.0
        for a in range(self.N):
            for h in range(self.p):
                k1 = f.k_fn(g.zeta[a, (h + 1) % self.p])
                k2 = f.k_fn(g.zeta[a + self.N, h])
                worst = max(worst, abs(k1 * k2 - 1))
        return float(worst)

    # -- interpolation of A_- / D_- actions ----------------------------------
    def _interp_terms(self, h, lam):
        """Shift coefficients of the left ``A_-`` / right ``D_-`` actions at ``lam``."""
        q, g = self.cfg.q, self.grid
        lam2 = lam ** 2
        Lam = lam2 + 1 / lam2
        Xh = g.X_of(h)
        terms = []
        for a in range(2 * self.N):
            site = a % self.N
            z = g.zeta[a, h[site]]
            coef = ((lam2 / q - q / lam2) * (lam * z - 1 / (z * lam))
                    / ((z ** 2 / q - q / z ** 2) * (z ** 2 - z ** -2)))
            for b in range(self.N):
                if b != site:
                    coef *= (Lam - Xh[b]) / (g.X[a, h[site]] - Xh[b])
            shift = -1 if a < self.N else 1
            terms.append((site, shift, z, coef))
        qh = self.cfg.root.q_half
        X = g.X_const
        p1 = np.prod([(Lam - x) / (X - x) for x in Xh])
        p2 = np.prod([(Lam - x) / (X + x) for x in Xh])
        b = self.cfg.boundary
        rz = (b.zeta_m + 1 / b.zeta_m) / (b.zeta_m - 1 / b.zeta_m)
        c1 = (-1) ** self.N * qdet_scalar(self.cfg, 1.0) * (lam / qh + qh / lam) / 2 * p1
        c2 = rz * qdet_scalar(self.cfg, 1j) * (lam / qh - qh / lam) / 2 * p2
        return terms, c1, c2

    def _shifted(self, h, site, shift):
        hh = list(h)
        hh[site] = (hh[site] + shift) % self.p
        return tuple(hh)

    def _wrap(self, h, site, shift, side):
        """Holonomy factor picked up when a shift leaves ``0..p-1`` (1 otherwise)."""
        if not hasattr(self, "_hol"):
            self._hol = self.holonomies()
        new = h[site] + shift
        if 0 <= new < self.p:
            return 1.0
        cl, cr = self._hol
        if side == "left":
            return cl[site] if new == self.p else 1 / cl[site]
        return cr[site] if new < 0 else 1 / cr[site]

    def a_minus_interpolation_residual(self, h, lam) -> float:
        """Dense ``<h| A_-(lam)`` against its interpolation over the 2N shifted states."""
        direct = self.left_state(h) @ u_minus_entry(self.cfg, lam, 0, 0)
        terms, c1, c2 = self._interp_terms(h, lam)
        approx = (c1 + (-1) ** self.N * c2) * self.left_state(h)
        for site, shift, z, coef in terms:
            approx = approx + (coef * self.fns.A_minus(z) * self._wrap(h, site, shift, "left")
                               * self.left_state(self._shifted(h, site, shift)))
        return residual(direct, approx)

    def d_minus_interpolation_residual(self, h, lam) -> float:
        """Dense ``D_-(lam) |h>`` against its interpolation; ``D(zeta) = k(zeta) A(q/zeta)``."""
        direct = u_minus_entry(self.cfg, lam, 1, 1) @ self.right_state(h)
        terms, c1, c2 = self._interp_terms(h, lam)
        approx = (c1 - (-1) ** self.N * c2) * self.right_state(h)
        for site, shift, z, coef in terms:
            approx = approx + (coef * self.fns.D_minus(z) * self._wrap(h, site, shift, "right")
                               * self.right_state(self._shifted(h, site, shift)))
        return residual(direct, approx)

    def wraparound_factors(self) -> np.ndarray:
        """``<Omega| prod_{k=0}^{p-1} A_-(1/xi_n^(k))/A(1/xi_n^(k)) = c_n <Omega|``: returns ``c_n``.

        ``c_n = 1`` means the left ladder closes cyclically with the same normalization.
        """
        omega, _ = reference_states(self.cfg)
        out = []
        for n in range(self.N):
            v = omega.copy()
            for k in range(self.p):
                v = v @ self.raise_ops[n][k]
            out.append(complex(v @ omega.conj() / (omega @ omega.conj())))
        return np.array(out)


@dataclass
class SeparateState:
    """Factorized SoV coefficients ``coeff[a, h]`` of a separate (co)vector."""

    coeff: np.ndarray
    side: str = "left"


def separate_state_vector(basis: SovBasis, state: SeparateState) -> np.ndarray:
    """Assemble ``sum_h prod_a coeff[a, h_a] V(X^(h)) <h|`` (or the ket analogue)."""
    c = np.asarray(state.coeff)
    w = np.array([np.prod([c[a, h[a]] for a in range(basis.N)]) * basis.vandermonde(h)
                  for h in basis.labels])
    if state.side == "left":
        return w @ basis.left
    return basis.right @ w


def separate_scalar_product(basis: SovBasis, left: SeparateState, right: SeparateState) -> complex:
    """``det_N M`` with ``M[a, b] = sum_h alpha_a^(h) beta_a^(h) (X_a^(h))^b``."""
    al, be = np.asarray(left.coeff), np.asarray(right.coeff)
    n = basis.N
    X = basis.grid.X[:n]
    m = np.array([[np.sum(al[a] * be[a] * X[a] ** b) for b in range(n)] for a in range(n)])
    return determinant(m)
