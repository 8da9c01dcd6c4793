"""Functional equations for the transfer-matrix spectrum under double nilpotency.

With ``b_n = -q^{2 j_n - 1} a_n`` and ``d_n = -q^{2 j_n - 1} c_n`` the
determinant of the matrix ``Dbar_tau(lam)`` (``D_tau`` with the coefficient
``abar(lam) = lam q^{-1/2} a(lam)``) is a polynomial of degree ``N + 2`` in
``Z = lam^{2p} + lam^{-2p}`` fixed by its asymptote and by its finite values
at ``q^{1/2}`` and ``i q^{1/2}``.  Each eigenvalue admits a polynomial
``Q(Lambda)`` of degree ``(p - 1) N`` solving an inhomogeneous Baxter
equation; the zeros of ``Q`` generate the eigenstates from reference states
through the normalized ``B_-`` operator.  When ``zeta_+ = +-i`` and the
boundary couplings satisfy a global condition, the inhomogeneous term
vanishes and ``Q`` solves the ordinary Baxter equation.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import u_minus
from .numerics import ToleranceProfile, determinant
from .representation import ChainConfig, GenericityError, ParameterError
from .sov_basis import vandermonde
from .spectrum import SpectralSetup, TauPolynomial, d_tau_matrix

__all__ = [
    "QPolynomial", "FunctionalCheck", "abar", "xbar", "abar_inf", "abar_inf_numeric", "F_fn", "Z_fn",
    "dbar_det", "dbar_limit", "dbar_det_in_Z", "q_polynomial_from_tau", "g_inhomogeneous",
    "g_inhomogeneous_iq_form",
    "tq_residual", "tq_rhs", "b_hat", "BHatPolynomial", "abar_gauge", "reference_vectors", "bethe_state", "homogeneous_config",
    "homogeneous_case", "require_double", "leading_term_residual", "bethe_equation_residual",
]


def require_double(cfg: ChainConfig, tol: float = 1e-10) -> None:
    """Raise unless both nilpotency constraints hold."""
    if cfg.j is None or cfg.double_sov_residual() > tol:
        raise ParameterError("the functional equations need d_n = -q^{2 j_n - 1} c_n "
                             "on top of the SoV constraint (mode 'sov_double')")


# ---------------------------------------------------------------------------
# scalar functions
# ---------------------------------------------------------------------------

def abar(setup: SpectralSetup, lam) -> complex:
    """``abar(lam) = lam q^{-1/2} a(lam)``."""
    return lam / setup.cfg.root.q_half * setup.a(lam)


def xbar(setup: SpectralSetup, lam) -> complex:
    """``xbar(lam) = (lam^2 - lam^-2) abar(lam)``."""
    return (lam ** 2 - lam ** -2) * abar(setup, lam)


def abar_inf(cfg: ChainConfig) -> complex:
    """Leading coefficient of ``abar`` in ``lam^{2(N+2)}``."""
    b = cfg.boundary
    n = cfg.N
    prod_bc = np.prod([s.b * s.c for s in cfg.sites])
    return complex((-1) ** n * b.alpha_m * b.beta_m * b.zeta_p * b.kappa_m * prod_bc
                   / (cfg.q ** (1 + n) * (b.zeta_p - 1 / b.zeta_p) * (b.zeta_m - 1 / b.zeta_m)))


def abar_inf_numeric(setup: SpectralSetup, radius: float = 1e3, phase: float = 0.37) -> complex:
    """``lim lam^{-2(N+2)} abar(lam)``: radii ``R, 2R`` and one Richardson step in ``lam^-2``."""
    e = cmath.exp(1j * phase)
    n = setup.N
    ests = [(r * e) ** (-2 * (n + 2)) * abar(setup, r * e) for r in (radius, 2 * radius)]
    return complex((4 * ests[1] - ests[0]) / 3)


def F_fn(setup: SpectralSetup, lam) -> complex:
    """``F(lam) = prod_b (lam^p / zeta_b^p - zeta_b^p / lam^p)`` over the ``2N`` points ``zeta_b^(0)``."""
    p = setup.p
    zp = setup.grid.zeta[:, 0] ** p
    return complex(np.prod(lam ** p / zp - zp / lam ** p))


def Z_fn(lam, p: int) -> complex:
    """``Z = lam^{2p} + lam^{-2p}``."""
    return lam ** (2 * p) + lam ** (-2 * p)


# ---------------------------------------------------------------------------
# det Dbar_tau as a polynomial in Z
# ---------------------------------------------------------------------------

def dbar_det(setup: SpectralSetup, tau: TauPolynomial, lam) -> complex:
    return determinant(d_tau_matrix(setup.cfg, lam, tau, lambda x: abar(setup, x)))


def dbar_limit(setup: SpectralSetup, tau: TauPolynomial, point, eps=(1e-4, 1e-5, 1e-6)):
    """Finite value of ``det Dbar_tau`` at a point where two entries diverge.

    Evaluates along ``lam = (1 + eps) point`` and extrapolates to ``eps = 0``
    with the interpolating polynomial through the samples (Neville).  Returns
    ``(value, error)`` where the error compares with the extrapolation from
    the first two samples only.
    """
    eps = np.asarray(eps, dtype=float)
    vals = np.array([dbar_det(setup, tau, (1 + e) * point) for e in eps])

    def extrapolate(xs, ys):
        # Lagrange polynomial through (xs, ys) evaluated at 0
        out = 0j
        for i in range(len(xs)):
            w = 1.0
            for j in range(len(xs)):
                if j != i:
                    w *= xs[j] / (xs[j] - xs[i])
            out += w * ys[i]
        return out

    full = extrapolate(eps, vals)
    partial = extrapolate(eps[1:], vals[1:])
    return complex(full), float(abs(full - partial))


@dataclass
class FunctionalCheck:
    """Fit of ``det Dbar_tau`` in ``Z`` and the checks of its functional equation."""

    z_points: np.ndarray
    coefficients: np.ndarray          # highest power first
    fit_residual: float
    equation_residual: float
    asymptote: complex                # tau_inf^p - abar_inf^p
    leading_residual: float           # leading fitted coefficient vs asymptote
    asymptote_residual: float         # numerical large/small-lam limits vs asymptote
    limit_values: tuple = ()
    limit_errors: tuple = ()
    degree: int = 0

    @property
    def ok(self) -> bool:
        return max(self.fit_residual, self.equation_residual, self.leading_residual,
                   self.asymptote_residual) <= ToleranceProfile().rtol_functional


def _unit_points(rng: np.random.Generator, n: int, spread: float = 0.15):
    return np.exp(rng.uniform(-spread, spread, size=n) + 2j * np.pi * rng.uniform(size=n))


def dbar_det_in_Z(setup: SpectralSetup, tau: TauPolynomial, rng: Optional[np.random.Generator] = None,
                  n_check: int = 10, n_holdout: int = 5) -> FunctionalCheck:
    """Verify that ``det Dbar_tau`` is a degree ``N + 2`` polynomial in ``Z`` obeying its functional equation.

    (i) ``N + 4`` samples fitted by least squares, checked at ``n_holdout``
    further points; (ii) the interpolation through ``q^{1/2}``, ``i q^{1/2}`` and
    the asymptote at ``n_check`` random points; (iii) the asymptote
    ``tau_inf^p - abar_inf^p`` against the leading coefficient and against
    ``lam^{-+2p(N+2)} det Dbar_tau(lam)`` at large and small ``|lam|``.
    """
    require_double(setup.cfg)
    rng = rng if rng is not None else np.random.default_rng(0)
    n, p = setup.N, setup.p
    qh = setup.cfg.root.q_half
    deg = n + 2

    lams = _unit_points(rng, deg + 2 + n_holdout)
    zs = np.array([Z_fn(x, p) for x in lams])
    dets = np.array([dbar_det(setup, tau, x) for x in lams])
    fit_z, fit_d = zs[:deg + 2], dets[:deg + 2]
    coeffs = np.linalg.lstsq(np.vander(fit_z, deg + 1), fit_d, rcond=None)[0]
    scale = np.abs(dets).max()
    fit_res = float(np.abs(np.polyval(coeffs, zs[deg + 2:]) - dets[deg + 2:]).max() / scale)

    asym = complex(tau.tau_inf ** p - abar_inf(setup.cfg) ** p)
    lead_res = float(abs(coeffs[0] - asym) / abs(asym))
    e = cmath.exp(0.37j)
    asym_res = 0.0
    for big in (True, False):
        ests = []
        for r in (30.0, 60.0):
            lam = r * e if big else e / r
            ests.append(dbar_det(setup, tau, lam) * lam ** ((-1 if big else 1) * 2 * p * deg))
        est = (4 ** p * ests[1] - ests[0]) / (4 ** p - 1)  # first correction ~ lam^{-2p}
        asym_res = max(asym_res, float(abs(est - asym) / abs(asym)))

    d0, e0 = dbar_limit(setup, tau, qh)
    d1, e1 = dbar_limit(setup, tau, 1j * qh)
    f_special = (F_fn(setup, qh), F_fn(setup, 1j * qh))
    eq_res = 0.0
    for lam in _unit_points(rng, n_check):
        f = F_fn(setup, lam)
        det = dbar_det(setup, tau, lam)
        interp = f * sum(dv * (lam ** p + (-1) ** a / lam ** p) ** 2 / (4 * (-1) ** a * f_special[a])
                         for a, dv in enumerate((d0, d1)))
        rhs = asym * f * (lam ** (2 * p) - lam ** (-2 * p)) ** 2
        eq_res = max(eq_res, float(abs(det - interp - rhs) / max(abs(det), abs(interp), abs(rhs))))
    return FunctionalCheck(zs, coeffs, fit_res, eq_res, asym, lead_res, asym_res,
                           (d0, d1), (e0, e1), deg)


# ---------------------------------------------------------------------------
# Q polynomial
# ---------------------------------------------------------------------------

@dataclass
class QPolynomial:
    """``Q(Lambda)`` of degree at most ``(p - 1) N``.

    ``coefficients`` are in ``Lambda`` with the highest power first;
    ``nodes``/``node_values`` the interpolation data it was built from.
    """

    coefficients: np.ndarray
    nodes: np.ndarray
    node_values: np.ndarray
    q_inf: complex
    q_0: complex
    q_half: complex = 0j
    system_condition: float = 0.0
    exceptional: bool = False
    grid_values: Optional[np.ndarray] = None   # Q(xi_a^(h)), shape (N, p)
    roots: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    @property
    def degree(self) -> int:
        c = np.asarray(self.coefficients)
        big = np.abs(c) > 1e-10 * np.abs(c).max()
        return int(len(c) - 1 - np.argmax(big))

    def of_Lambda(self, Lam) -> complex:
        return complex(np.polyval(self.coefficients, Lam))

    def __call__(self, lam) -> complex:
        return self.of_Lambda(lam ** 2 + lam ** -2)

    def interpolate(self, Lam) -> complex:
        """Lagrange form through the stored nodes (second evaluation route)."""
        w = self.nodes
        out = 0j
        for a in range(len(w)):
            others = np.delete(w, a)
            out += self.node_values[a] * np.prod((Lam - others) / (w[a] - others))
        return complex(out)

    def lambda_roots(self) -> np.ndarray:
        """Representatives ``lam_b`` with ``lam_b^2 + lam_b^-2 = Lambda_b``."""
        out = []
        for r in self.roots:
            s = (r + cmath.sqrt(r * r - 4)) / 2      # lam^2
            out.append(cmath.sqrt(s))
        return np.array(out)


def _lagrange_row(w: np.ndarray, x) -> np.ndarray:
    """Lagrange basis polynomials of nodes ``w`` evaluated at ``x``."""
    m = len(w)
    out = np.empty(m, dtype=complex)
    for a in range(m):
        others = np.delete(w, a)
        out[a] = np.prod((x - others) / (w[a] - others))
    return out


def q_polynomial_from_tau(setup: SpectralSetup, tau: TauPolynomial, free_node: Optional[complex] = None,
                          free_value: complex = 1.0) -> QPolynomial:
    """Build ``Q(Lambda)`` of degree ``(p - 1) N`` for an eigenvalue ``tau``.

    Nodes are ``Lambda`` at ``xi_n^(h)``, ``h = 0..p-2``, plus a free node
    ``xi_free`` where ``Q`` is normalized to ``free_value``.  The values on each
    ladder follow from the first ``p - 1`` rows of ``Dbar_tau(xi_a^(0))``,
    ``Q(xi_a^(h)) = C[a, h] Q(xi_a^(0))`` with ``C[a, 0] = 1``,
    ``C[a, 1] = tau(xi^(0))/abar(1/xi^(0))`` and
    ``C[a, h+1] = (tau(xi^(h)) C[a, h] - abar(xi^(h)) C[a, h-1]) / abar(1/xi^(h))``.
    Requiring the interpolant to reproduce ``Q(xi_a^(p-1)) = C[a, p-1] Q(xi_a^(0))``
    gives ``N`` linear equations for the ``Q(xi_a^(0))``.

    A near-singular ``N x N`` system (reciprocal condition below
    ``rtol_functional``) flags the exceptional case in which ``Q`` may have
    degree ``(p - 1) N - 1`` only.
    """
    require_double(setup.cfg)
    n, p = setup.N, setup.p
    xi = setup.grid.xi
    X = xi ** 2 + xi ** -2
    C = np.zeros((n, p), dtype=complex)
    for a in range(n):
        C[a, 0] = 1.0
        for h in range(0, p - 1):
            x = xi[a, h]
            prev = abar(setup, x) * C[a, h - 1] if h >= 1 else 0.0
            den = abar(setup, 1 / x)
            if den == 0:
                raise GenericityError(f"vanishing coefficient abar(1/xi_{a + 1}^({h}))", "sov2")
            C[a, h + 1] = (tau(x) * C[a, h] - prev) / den
    if free_node is None:
        free_node = 0.83 * cmath.exp(0.61j)
    w_free = free_node ** 2 + free_node ** -2
    w = np.concatenate([X[:, :p - 1].ravel(), [w_free]])   # s(n, h) ordering
    # D[b, m] = sum_h L_{s(m,h)}(X_b^(p-1)) C[m, h]
    lhs = np.zeros((n, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)
    for b in range(n):
        row = _lagrange_row(w, X[b, p - 1])
        for m in range(n):
            lhs[b, m] = -np.dot(row[m * (p - 1):(m + 1) * (p - 1)], C[m, :p - 1])
        lhs[b, b] += C[b, p - 1]
        rhs[b] = row[-1] * free_value
    s = np.linalg.svd(lhs, compute_uv=False)
    cond = float(s[-1] / s[0]) if s[0] > 0 else 0.0
    exceptional = cond < setup.tol.rtol_functional
    q0 = np.linalg.solve(lhs, rhs) if not exceptional else np.linalg.lstsq(lhs, rhs, rcond=None)[0]
    grid = C * q0[:, None]
    node_values = np.concatenate([grid[:, :p - 1].ravel(), [free_value]])
    coeffs = _newton_coefficients(w, node_values)
    lead = coeffs[0]
    roots = np.roots(coeffs) if abs(lead) > 0 else np.zeros(0, dtype=complex)
    qh = setup.cfg.root.q_half
    qpoly = QPolynomial(coeffs, w, node_values, complex(lead), 0j, 0j, cond, exceptional, grid, roots)
    qpoly.q_0 = qpoly(1j * qh)
    qpoly.q_half = qpoly(qh)
    return qpoly


def _newton_coefficients(w: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Monomial coefficients (highest first) of the interpolant, via divided differences."""
    m = len(w)
    dd = np.array(values, dtype=complex)
    for k in range(1, m):
        dd[k:] = (dd[k:] - dd[k - 1:-1]) / (w[k:] - w[:m - k])
    coeffs = np.array([dd[-1]], dtype=complex)
    for k in range(m - 2, -1, -1):
        # coeffs * (x - w[k]) + dd[k]
        coeffs = np.concatenate([coeffs, [0]]) - w[k] * np.concatenate([[0], coeffs])
        coeffs[-1] += dd[k]
    return coeffs


# ---------------------------------------------------------------------------
# inhomogeneous Baxter equation
# ---------------------------------------------------------------------------

def _special_abar(setup: SpectralSetup, point) -> complex:
    """``abar`` at ``q^{1/2}`` or ``i q^{1/2}``, by symmetric approach if the closed form is singular."""
    with np.errstate(all="ignore"):
        val = abar(setup, point)
    if np.isfinite(val):
        return complex(val)
    return complex((abar(setup, point * (1 + 1e-7)) + abar(setup, point * (1 - 1e-7))) / 2)


def g_inhomogeneous(setup: SpectralSetup, tau: TauPolynomial, lam, x, y, z) -> complex:
    """Inhomogeneous term ``G(lam | x, y, z)`` of the Baxter equation.

    ``G / F`` is the quadratic in ``Lambda`` with leading coefficient
    ``(tau_inf - q^{-2(p-1)N} abar_inf) x`` that takes the values
    ``z (tau - abar)(q^{1/2}) / F(q^{1/2})`` at ``Lambda = X`` and
    ``y (tau - abar)(i q^{1/2}) / F(i q^{1/2})`` at ``Lambda = -X``.  With
    ``x = q_inf``, ``y = Q(i q^{1/2})`` and ``z = Q(q^{1/2})`` it is what the
    Baxter terms leave over.  Since ``tau(q^{1/2}) = (-1)^N abar(q^{1/2})`` and
    ``tau(i q^{1/2}) = -(-1)^N abar(i q^{1/2})``, only the ``z`` term survives for
    odd ``N`` and only the ``y`` term for even ``N``.
    """
    cfg = setup.cfg
    n, p = setup.N, setup.p
    q, qh = cfg.q, cfg.root.q_half
    X = q + 1 / q
    Lam = lam ** 2 + lam ** -2
    lead = (tau.tau_inf - q ** (-2 * (p - 1) * n) * abar_inf(cfg)) * x
    r_plus = z * (tau(qh) - _special_abar(setup, qh)) / F_fn(setup, qh)
    r_minus = y * (tau(1j * qh) - _special_abar(setup, 1j * qh)) / F_fn(setup, 1j * qh)
    poly = lead * (Lam ** 2 - X ** 2) + r_plus * (Lam + X) / (2 * X) - r_minus * (Lam - X) / (2 * X)
    return complex(F_fn(setup, lam) * poly)


def g_inhomogeneous_iq_form(setup: SpectralSetup, tau: TauPolynomial, lam, x, y) -> complex:
    """Closed form with the ``(i - 1) a(i q^{1/2}) / (4 F(i q^{1/2}))`` second term (comparison only).

    Agrees with :func:`g_inhomogeneous` in its ``x`` term; the ``y`` term differs
    and the ``Q(q^{1/2})`` term is absent.
    """
    cfg = setup.cfg
    n, p = setup.N, setup.p
    q, qh = cfg.q, cfg.root.q_half
    f = F_fn(setup, lam)
    first = (tau.tau_inf - q ** (-2 * (p - 1) * n) * abar_inf(cfg)) * x
    for a in range(2):
        c = 1j ** a * qh
        first *= (lam / c - c / lam) * (c * lam - 1 / (c * lam))
    second = (1j - 1) * y * setup.a(1j * qh) / (4 * F_fn(setup, 1j * qh))
    for a in range(2):
        c = qh ** (1 - 2 * a)
        second *= lam * c - 1 / (lam * c)
    return complex(f * (first + second))


def tq_rhs(setup: SpectralSetup, qpoly: QPolynomial, lam) -> tuple:
    """The two Baxter terms ``abar(lam) Q(lam/q)`` and ``abar(1/lam) Q(lam q)``."""
    q = setup.cfg.q
    return abar(setup, lam) * qpoly(lam / q), abar(setup, 1 / lam) * qpoly(lam * q)


def tq_residual(setup: SpectralSetup, tau: TauPolynomial, qpoly: QPolynomial,
                rng: Optional[np.random.Generator] = None, n_points: int = 20,
                homogeneous: bool = False) -> float:
    """Max relative residual of ``tau Q = abar Q(lam/q) + abar(1/lam) Q(lam q) + G``.

    Normalized by the largest term at each point; ``homogeneous=True`` drops ``G``.
    """
    rng = rng if rng is not None else np.random.default_rng(1)
    worst = 0.0
    count = 0
    while count < n_points:
        lam = _unit_points(rng, 1)[0]
        t1, t2 = tq_rhs(setup, qpoly, lam)
        lhs = tau(lam) * qpoly(lam)
        g = 0j if homogeneous else g_inhomogeneous(setup, tau, lam, qpoly.q_inf, qpoly.q_0, qpoly.q_half)
        terms = [lhs, t1, t2, g]
        if not all(np.isfinite(t) for t in terms):
            continue
        count += 1
        worst = max(worst, float(abs(lhs - t1 - t2 - g) / max(abs(t) for t in terms)))
    return worst


# ---------------------------------------------------------------------------
# Bethe-like eigenstates
# ---------------------------------------------------------------------------

def b_hat(cfg: ChainConfig, lam) -> np.ndarray:
    """``B_-(lam)`` times ``(zeta_- - 1/zeta_-) / (kappa_- e^{tau_-} (lam^2/q - q/lam^2) prod alpha_n beta_n)``.

    Direct evaluation; 0/0 at ``lam^2 = q`` and ``lam^2 = -q``, where
    :class:`BHatPolynomial` should be used instead.
    """
    b = cfg.boundary
    q = cfg.q
    norm = (b.zeta_m - 1 / b.zeta_m) / (b.kappa_m * cmath.exp(b.tau_m) * (lam ** 2 / q - q / lam ** 2)
                                       * np.prod([s.alpha * s.beta for s in cfg.sites]))
    return norm * u_minus(cfg, lam)[0, 1]


class BHatPolynomial:
    """The normalized ``B_-`` as a matrix polynomial of degree ``N`` in ``Lambda``.

    Sampled at ``N + 1`` generic points on the unit circle and evaluated by
    Lagrange interpolation; ``degree_residual`` compares the interpolant with a
    direct evaluation at two further points.
    """

    def __init__(self, cfg: ChainConfig, phases=None):
        n = cfg.N
        phases = np.linspace(0.23, 0.23 + np.pi / 2, n + 3, endpoint=False) if phases is None else phases
        lams = np.exp(1j * np.asarray(phases)) * 1.05
        self.nodes = lams[:n + 1] ** 2 + lams[:n + 1] ** -2
        self.samples = [b_hat(cfg, x) for x in lams[:n + 1]]
        worst = 0.0
        for x in lams[n + 1:]:
            direct = b_hat(cfg, x)
            worst = max(worst, float(np.abs(self(x ** 2 + x ** -2) - direct).max() / np.abs(direct).max()))
        self.degree_residual = worst

    def __call__(self, Lam) -> np.ndarray:
        weights = _lagrange_row(self.nodes, Lam)
        return sum(w * m for w, m in zip(weights, self.samples))


def abar_gauge(setup: SpectralSetup, h) -> complex:
    """``prod_a g(xi_a^(0), h_a)`` with ``g(xi, h) = prod_{k<h} q^{k+1/2} xi = xi^h q^{h^2/2}``.

    Kernel vectors of ``D_tau`` and of ``Dbar_tau`` on the same ladder differ by
    ``g``: ``Qbar(xi^(h)) = g(xi, h) Q(xi^(h))``.
    """
    qh = setup.cfg.root.q_half
    out = 1.0 + 0j
    for a, ha in enumerate(h):
        out *= setup.grid.xi[a, 0] ** ha * qh ** (ha * ha)
    return complex(out)


def reference_vectors(setup: SpectralSetup, gauge: bool = True):
    """``<omega|`` and ``|omega_bar>`` in terms of the SoV basis.

    ``|omega_bar> = sum_h V(X^(h)) |h>'`` and
    ``<omega| = sum_h prod_a prod_{k<h_a} (a/d)(1/zeta_a^(k)) V(X^(h)) <h|'``, where
    the primed states are the SoV states divided by :func:`abar_gauge`, i.e.
    normalized so that eigenvectors have wavefunctions ``prod_a Q(X_a^(h_a))``
    for the polynomial ``Q`` of the ``abar`` Baxter equation.  ``gauge=False``
    uses the unprimed states (comparison only).
    """
    basis = setup.basis
    n = setup.N
    z = setup.grid.zeta
    wl = np.empty(len(basis.labels), dtype=complex)
    wr = np.empty(len(basis.labels), dtype=complex)
    for i, h in enumerate(basis.labels):
        v = vandermonde(setup.grid.X_of(h))
        if gauge:
            v /= abar_gauge(setup, h)
        pref = 1.0 + 0j
        for a in range(n):
            for k in range(h[a]):
                pref *= setup.a(1 / z[a, k]) / setup.d(1 / z[a, k])
        wl[i] = pref * v
        wr[i] = v
    return wl @ basis.left, basis.right @ wr


def bethe_state(setup: SpectralSetup, qpoly: QPolynomial, side: str = "right",
                lams: Optional[np.ndarray] = None, gauge: bool = True) -> np.ndarray:
    """``prod_b Bhat(lam_b) |omega_bar>`` (or ``<omega| prod_b Bhat(lam_b)``) over the zeros of ``Q``."""
    if setup.basis is None:
        raise ParameterError("Bethe-like states need a configuration in SoV mode")
    lams = qpoly.lambda_roots() if lams is None else lams
    coeffs = np.asarray(qpoly.coefficients)
    resid = max((abs(np.polyval(coeffs, r)) for r in qpoly.roots), default=0.0)
    if resid > setup.tol.rtol_functional * np.abs(coeffs).sum():
        raise GenericityError(f"Q roots not certified (|Q(root)| = {resid:.2e}, "
                              f"coefficient norm {np.abs(coeffs).sum():.2e})", "roots")
    left, right = reference_vectors(setup, gauge)
    vec = left if side == "left" else right
    bh = BHatPolynomial(setup.cfg)
    for lam in lams:
        op = bh(lam ** 2 + lam ** -2)
        vec = vec @ op if side == "left" else op @ vec
    return vec


# ---------------------------------------------------------------------------
# homogeneous case
# ---------------------------------------------------------------------------

def homogeneous_config(cfg: ChainConfig, z_plus: int = 1, unsigned_power: bool = False) -> ChainConfig:
    """Set ``zeta_+ = i z_plus`` and fix ``kappa_+`` so that the leading term of ``G`` vanishes.

    The leading coefficient ``tau_inf - q^{-2(p-1)N} abar_inf`` vanishes when
    ``kappa_+ e^{tau_- - tau_+} / (i z_plus alpha_- beta_-) = (-1)^N q^{N-1} prod b_n c_n / (alpha_n beta_n)``.
    ``unsigned_power=True`` uses ``q^{1+N}`` without the sign instead (comparison only).
    """
    if z_plus not in (1, -1):
        raise ParameterError("z_plus must be +1 or -1")
    b = cfg.boundary
    n = cfg.N
    zp = 1j * z_plus
    ratio = np.prod([s.b * s.c / (s.alpha * s.beta) for s in cfg.sites])
    ratio *= cfg.q ** (1 + n) if unsigned_power else (-1) ** n * cfg.q ** (n - 1)
    kappa_p = ratio * zp * b.alpha_m * b.beta_m / cmath.exp(b.tau_m - b.tau_p)
    return cfg.with_boundary(zeta_p=zp, kappa_p=complex(kappa_p))


def leading_term_residual(cfg: ChainConfig) -> float:
    """``|tau_inf - q^{-2(p-1)N} abar_inf| / |tau_inf|``: zero when the leading term of ``G`` vanishes."""
    from .boundary import tau_infinity
    t_inf = tau_infinity(cfg)
    p, n = cfg.root.p, cfg.N
    return float(abs(t_inf - cfg.q ** (-2 * (p - 1) * n) * abar_inf(cfg)) / abs(t_inf))


def bethe_equation_residual(setup: SpectralSetup, qpoly: QPolynomial, ref_points: int = 20) -> float:
    """Max over the zeros ``lam_b`` of ``|abar(lam_b) Q(lam_b/q) + abar(1/lam_b) Q(lam_b q)|``.

    Normalized by the larger of the two terms, floored at their typical size on
    the unit circle (both terms vanish at roots sitting on ``i q^{1/2}``).
    """
    rng = np.random.default_rng(11)
    floor = max(max(abs(t) for t in tq_rhs(setup, qpoly, lam)) for lam in _unit_points(rng, ref_points))
    worst = 0.0
    for lam in qpoly.lambda_roots():
        with np.errstate(all="ignore"):
            t1, t2 = tq_rhs(setup, qpoly, lam)
        if not (np.isfinite(t1) and np.isfinite(t2)):
            raise GenericityError(f"Baxter coefficients singular at the Q zero lam = {lam}", "roots")
        worst = max(worst, float(abs(t1 + t2) / max(abs(t1), abs(t2), floor)))
    return worst


def homogeneous_case(cfg: ChainConfig, z_plus: int = 1, n_g: int = 5) -> dict:
    """Checks of the homogeneous Baxter equation on a configuration built by :func:`homogeneous_config`.

    Returns the constructed configuration and its ED spectrum together with
    ``a(i q^{1/2})``, ``max |tau(i q^{1/2})|``, the leading-term residual, the
    largest relative ``|G|`` for random arguments, the homogeneous TQ and
    Bethe-equation residuals over all eigenvalues, the degrees of ``Q`` and
    ``q_half_term``: the largest ``|Q(q^{1/2}) (tau - abar)(q^{1/2})|`` relative to
    ``|tau(q^{1/2}) Q(q^{1/2})|``, the obstruction that survives for odd ``N``.
    """
    from .spectrum import ed_spectrum
    require_double(cfg)
    hcfg = homogeneous_config(cfg, z_plus)
    setup = SpectralSetup(hcfg)
    qh = hcfg.root.q_half
    X = hcfg.q + 1 / hcfg.q
    rep = ed_spectrum(hcfg, setup)
    rng = np.random.default_rng(7)
    abar_q = _special_abar(setup, qh)
    g_max = 0.0
    for t in rep.eigenvalues:
        for _ in range(n_g):
            lam = _unit_points(rng, 1)[0]
            x, y, z = rng.normal(size=3) + 1j * rng.normal(size=3)
            Lam = lam ** 2 + lam ** -2
            f = abs(F_fn(setup, lam))
            scale = f * (abs(t.tau_inf * x * (Lam ** 2 - X ** 2))
                         + abs(z * t(qh) / F_fn(setup, qh) * (Lam + X))
                         + abs(y * abar_q / F_fn(setup, 1j * qh) * (Lam - X)))
            g_max = max(g_max, abs(g_inhomogeneous(setup, t, lam, x, y, z)) / scale)
    tq, bethe, half, degrees, qpolys = 0.0, 0.0, 0.0, [], []
    for t in rep.eigenvalues:
        qp = q_polynomial_from_tau(setup, t)
        qpolys.append(qp)
        degrees.append(qp.degree)
        tq = max(tq, tq_residual(setup, t, qp, homogeneous=True))
        bethe = max(bethe, bethe_equation_residual(setup, qp))
        half = max(half, float(abs(qp.q_half * (t(qh) - abar_q)) / abs(t(qh) * qp.q_half)))
    return {"config": hcfg, "spectrum": rep, "q_polynomials": qpolys,
            "a_at_iq": float(abs(setup.a(1j * qh))),
            "tau_at_iq": float(max(abs(t(1j * qh)) for t in rep.eigenvalues)),
            "leading_term": leading_term_residual(hcfg), "g_max": float(g_max),
            "tq_residual": tq, "bethe_residual": bethe, "q_half_term": half, "degrees": degrees}
