"""Transfer-matrix spectrum in the SoV basis, certified by exact diagonalization.

The eigenvalues of ``T(lam)`` are even Laurent polynomials in ``lam`` that
depend on ``lam`` only through ``Lambda = lam^2 + lam^-2``.  They are fixed by
their values at the ``N`` points ``zeta_a^(0)`` (see :class:`TauPolynomial`).
Eigenvalues are characterised by the vanishing of the determinants of the
cyclic tridiagonal ``p x p`` matrices ``D_tau(zeta_a^(0))`` and the
eigenvectors are separate states whose factors span the kernels of these
matrices.

Ladder holonomy
---------------
Under the single nilpotency constraint ``b_n = -q^{2 j_n - 1} a_n`` the
``A_-`` ladder that generates the SoV basis does not close: stepping past
``h_n = p - 1`` returns ``c_n <h_n = 0|`` with ``c_n != 1``.  The SoV Baxter
equation at ``h_n = p - 1`` therefore carries ``c_n`` on its wrapping term, and
so does the corner entry ``D_tau[p - 1, 0]`` at ``lam = zeta_n^(0)``.  When
``d_n = -q^{2 j_n - 1} c_n`` as well, that corner coefficient vanishes and the
factor is immaterial.  :func:`d_tau_matrix` builds the plain matrix; the
characterization routines pass the holonomy in explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boundary import BoundaryScalarFns, boundary_scalar_fns, tau_infinity, transfer
from .bulk import qdet_scalar
from .numerics import (EigResult, ToleranceProfile, determinant, general_eig,
                       kernel_vector)
from .representation import ChainConfig, GenericityError, ParameterError
from .sov_basis import (SeparateState, SovBasis, sov_grid, separate_scalar_product,
                        separate_state_vector)

__all__ = [
    "TauPolynomial", "QTable", "SpectrumReport", "SpectralSetup", "DegenerateInputError",
    "coeff_a", "coeff_d", "gauge_alpha", "tau_from_values", "d_tau_matrix", "det_d_tau",
    "normalized_det", "ed_spectrum", "q_table_from_kernel", "q_table_from_recursion",
    "q_hat_forward_recursion", "right_eigenstate", "left_eigenstate", "eigenstate_residual", "wave_function_residual",
    "orthogonality_relation", "newton_solve", "perturbation_margin", "lambda_coefficients", "rayleigh_values", "gauge_residuals", "recursion_bracket_residuals",
]


class DegenerateInputError(ValueError):
    """Two identical eigenvalues were passed where distinct ones are required."""


# ---------------------------------------------------------------------------
# scalar coefficients
# ---------------------------------------------------------------------------

def coeff_a(cfg: ChainConfig, lam, fns: Optional[BoundaryScalarFns] = None) -> complex:
    """``a(lam) = a_+(lam) A_-(lam)``, coefficient of the SoV Baxter equation."""
    fns = fns or boundary_scalar_fns(cfg)
    return fns.a_plus(lam) * fns.A_minus(lam)


def coeff_d(cfg: ChainConfig, lam, fns: Optional[BoundaryScalarFns] = None) -> complex:
    """``d(lam) = d_+(lam) D_-(lam)``, coefficient of the left-state Baxter equation."""
    fns = fns or boundary_scalar_fns(cfg)
    return fns.d_plus(lam) * fns.D_minus(lam)


def gauge_alpha(cfg: ChainConfig, lam) -> complex:
    """``alpha(lam) = s(lam) k(lam) / s(q/lam)`` relating ``d(lam) = alpha(lam) a(q/lam)``."""
    q = cfg.q

    def s(x):
        return (x ** 2 * q - 1 / (q * x ** 2)) / (x ** 2 - x ** -2)

    k = (lam ** 2 - lam ** -2) / (lam ** 2 / q ** 2 - q ** 2 / lam ** 2)
    return s(lam) * k / s(q / lam)


def gauge_residuals(cfg: ChainConfig, lam) -> dict:
    """Residuals of ``d = alpha a(q/.)``, ``alpha(1/l) alpha(q l) = 1`` and ``prod_k alpha(l q^k) = 1``."""
    fns = boundary_scalar_fns(cfg)
    q, p = cfg.q, cfg.root.p
    d = coeff_d(cfg, lam, fns)
    ad = gauge_alpha(cfg, lam) * coeff_a(cfg, q / lam, fns)
    prod = np.prod([gauge_alpha(cfg, lam * q ** k) for k in range(p)])
    return {
        "d_equals_alpha_a": abs(d - ad) / max(abs(d), abs(ad)),
        "inversion": abs(gauge_alpha(cfg, 1 / lam) * gauge_alpha(cfg, q * lam) - 1),
        "cycle_product": abs(prod - 1),
    }


# ---------------------------------------------------------------------------
# eigenvalue polynomials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TauPolynomial:
    """Eigenvalue candidate fixed by its values at the points ``zeta_a^(0)``.

    ``tau(lam)`` is the unique function of ``Lambda = lam^2 + lam^-2`` of degree
    ``N + 2`` with the prescribed values at ``X_a^(0)``, the central values at
    ``lam = q^{1/2}`` (``Lambda = X``) and ``lam = i q^{1/2}`` (``Lambda = -X``)
    and leading coefficient ``tau_inf``.

    Attributes
    ----------
    values : ndarray (N,)
        ``tau(zeta_a^(0))``.
    nodes : ndarray (N,)
        ``X_a^(0)``.
    X : complex
        ``q + 1/q``.
    center_plus, center_minus : complex
        ``T(q^{1/2}) / X`` and ``T(i q^{1/2}) / X``, i.e. ``(-1)^N det_q M(1)``
        and ``-(zeta ratios) det_q M(i)``.
    tau_inf : complex
    """

    values: np.ndarray
    nodes: np.ndarray
    X: complex
    center_plus: complex
    center_minus: complex
    tau_inf: complex

    @property
    def N(self) -> int:
        return len(self.nodes)

    def of_Lambda(self, Lam) -> complex:
        X, x0 = self.X, self.nodes
        out = 0j
        for a in range(self.N):
            c = (Lam ** 2 - X ** 2) / (x0[a] ** 2 - X ** 2)
            for b in range(self.N):
                if b != a:
                    c *= (Lam - x0[b]) / (x0[a] - x0[b])
            out += c * self.values[a]
        out += (Lam + X) / 2 * np.prod((Lam - x0) / (X - x0)) * self.center_plus
        out += -(Lam - X) / 2 * np.prod((Lam - x0) / (-X - x0)) * self.center_minus
        out += (Lam ** 2 - X ** 2) * self.tau_inf * np.prod(Lam - x0)
        return complex(out)

    def __call__(self, lam) -> complex:
        return self.of_Lambda(lam ** 2 + lam ** -2)

    def coefficients(self) -> np.ndarray:
        """Coefficients in ``Lambda``, highest power first (``numpy.polyval`` order)."""
        n = self.N + 3
        nodes = np.exp(2j * np.pi * np.arange(n) / n) * (1 + np.abs(self.nodes).max())
        vals = np.array([self.of_Lambda(z) for z in nodes])
        return np.linalg.solve(np.vander(nodes, n), vals)

    def with_values(self, values) -> "TauPolynomial":
        return TauPolynomial(np.asarray(values, dtype=complex), self.nodes, self.X,
                             self.center_plus, self.center_minus, self.tau_inf)


def tau_from_values(cfg: ChainConfig, values) -> TauPolynomial:
    """Interpolating eigenvalue polynomial with prescribed values at ``zeta_a^(0)``.

    The ``i q^{1/2}`` term enters with ``+(-1)^N`` relative to the structure
    ``(Lambda - X)/2 prod (Lambda - X_b)/(X + X_b)``, consistent with the
    directly evaluated ``T(i q^{1/2})``.
    """
    values = np.asarray(values, dtype=complex)
    if values.shape != (cfg.N,):
        raise ParameterError(f"need {cfg.N} values, got shape {values.shape}")
    g = sov_grid(cfg)
    b = cfg.boundary
    rz = ((b.zeta_p + 1 / b.zeta_p) / (b.zeta_p - 1 / b.zeta_p)
          * (b.zeta_m + 1 / b.zeta_m) / (b.zeta_m - 1 / b.zeta_m))
    center_plus = (-1) ** cfg.N * qdet_scalar(cfg, 1.0)
    center_minus = -rz * qdet_scalar(cfg, 1j)
    return TauPolynomial(values, g.X[:cfg.N, 0].copy(), g.X_const, complex(center_plus),
                         complex(center_minus), tau_infinity(cfg))


# ---------------------------------------------------------------------------
# D_tau matrices
# ---------------------------------------------------------------------------

def d_tau_matrix(cfg: ChainConfig, lam, tau, coef=None, wrap: complex = 1.0,
                 wrap_low: complex = 1.0) -> np.ndarray:
    """Cyclic tridiagonal matrix ``D_tau(lam)``.

    Row ``k`` holds ``tau(q^k lam)`` on the diagonal, ``-coef(q^k lam)`` in
    column ``k - 1`` and ``-coef(1/(q^k lam))`` in column ``k + 1`` (indices mod
    ``p``).  ``coef`` defaults to :func:`coeff_a`; ``wrap`` multiplies the
    corner entry ``[p - 1, 0]`` and ``wrap_low`` the corner ``[0, p - 1]``.
    """
    p, q = cfg.root.p, cfg.q
    if coef is None:
        fns = boundary_scalar_fns(cfg)
        coef = lambda x: coeff_a(cfg, x, fns)  # noqa: E731
    d = np.zeros((p, p), dtype=complex)
    for k in range(p):
        x = lam * q ** k
        d[k, k] += tau(x)
        d[k, (k - 1) % p] += -coef(x) * (wrap_low if k == 0 else 1.0)
        d[k, (k + 1) % p] += -coef(1 / x) * (wrap if k == p - 1 else 1.0)
    if not np.all(np.isfinite(d)):
        raise ZeroDivisionError(f"D_tau has a pole at lam = {lam}")
    return d


def det_d_tau(cfg: ChainConfig, lam, tau, coef=None, wrap: complex = 1.0,
              wrap_low: complex = 1.0) -> complex:
    return determinant(d_tau_matrix(cfg, lam, tau, coef, wrap, wrap_low))


def normalized_det(d: np.ndarray) -> float:
    """``|det D| / prod_k max_j |D[k, j]|``."""
    scale = np.prod(np.abs(d).max(axis=1))
    return float(abs(determinant(d)) / scale) if scale > 0 else 0.0


# ---------------------------------------------------------------------------
# spectral setup
# ---------------------------------------------------------------------------

class SpectralSetup:
    """Everything shared by the eigenvalues of one configuration.

    Holds the SoV grid, the scalar coefficient closures, the SoV basis (SoV
    modes only) and the ladder holonomies used in the wrapping corner of
    ``D_tau(zeta_a^(0))`` (left, ``a``-coefficients) and ``D_hat``
    (right, ``d``-coefficients).
    """

    def __init__(self, cfg: ChainConfig, tol: Optional[ToleranceProfile] = None,
                 basis: Optional[SovBasis] = None):
        if not cfg.boundary.triangular_plus:
            raise ParameterError("the SoV characterization needs a triangular plus boundary")
        self.cfg = cfg
        self.tol = tol or ToleranceProfile()
        self.p, self.N = cfg.root.p, cfg.N
        self.grid = sov_grid(cfg)
        self.fns = boundary_scalar_fns(cfg)
        self.basis = basis if basis is not None else (SovBasis(cfg, self.tol) if cfg.j is not None else None)
        self.wrap_left = np.ones(self.N, dtype=complex)
        self.wrap_right = np.ones(self.N, dtype=complex)
        if self.basis is not None:
            for n in range(self.N):
                corner = self.fns.A_minus(1 / self.grid.xi[n, self.p - 1])
                ref = max(abs(self.fns.A_minus(1 / x)) for x in self.grid.xi[n])
                if abs(corner) > 1e-10 * ref:
                    cl, cr = self.basis.holonomies()
                    self.wrap_left[n], self.wrap_right[n] = cl[n], cr[n]

    def a(self, lam) -> complex:
        return coeff_a(self.cfg, lam, self.fns)

    def d(self, lam) -> complex:
        return coeff_d(self.cfg, lam, self.fns)

    def zeta0(self, a: int) -> complex:
        return self.grid.zeta[a, 0]

    def d_tau(self, tau: TauPolynomial, a: int, hat: bool = False, holonomy: bool = True) -> np.ndarray:
        """``D_tau(zeta_a^(0))`` (``hat=True``: ``d``-coefficients), holonomy in the corner."""
        wrap = wrap_low = 1.0
        if holonomy and a < self.N:
            if hat:
                wrap_low = self.wrap_right[a]
            else:
                wrap = self.wrap_left[a]
        return d_tau_matrix(self.cfg, self.zeta0(a), tau, self.d if hat else self.a, wrap, wrap_low)

    def det_conditions(self, tau: TauPolynomial, holonomy: bool = True, points: int = None) -> np.ndarray:
        """Normalized ``|det D_tau(zeta_a^(0))|`` for ``a = 1..N`` (``points=2N`` adds ``1/xi``)."""
        points = points or self.N
        return np.array([normalized_det(self.d_tau(tau, a, holonomy=holonomy)) for a in range(points)])


# ---------------------------------------------------------------------------
# exact diagonalization oracle
# ---------------------------------------------------------------------------

@dataclass
class SpectrumReport:
    """Eigenvalues of ``T`` obtained by exact diagonalization and their SoV certificates.

    ``residuals[k]`` holds, for eigenvalue ``k``: ``interp`` (interpolation
    against Rayleigh quotients at fresh points), ``even`` (``tau(-lam)``),
    ``det`` (N normalized determinant conditions with holonomy) and
    ``det_plain`` (same without it).
    """

    cfg: ChainConfig
    lam_ref: complex
    eig: EigResult
    eigenvalues: list
    residuals: list
    simple: bool
    count: int
    check_points: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def worst(self, key: str) -> float:
        return float(max(np.max(r[key]) for r in self.residuals)) if self.residuals else 0.0


def _random_points(rng, n, lo=0.8, hi=1.25):
    r = np.exp(rng.uniform(np.log(lo), np.log(hi), size=n))
    return r * np.exp(2j * np.pi * rng.uniform(size=n))


def rayleigh_values(cfg: ChainConfig, eig: EigResult, lams) -> np.ndarray:
    """``w_k T(lam) v_k / (w_k v_k)`` for every eigenpair ``k`` (rows) and point (columns)."""
    ov = np.einsum("ki,ik->k", eig.left, eig.right)
    out = np.empty((len(eig.values), len(lams)), dtype=complex)
    for j, lam in enumerate(lams):
        t = transfer(cfg, lam)
        out[:, j] = np.einsum("ki,ij,jk->k", eig.left, t, eig.right) / ov
    return out


def ed_spectrum(cfg: ChainConfig, setup: Optional[SpectralSetup] = None, lam_ref=None,
                seed: Optional[int] = None, n_check: int = 5, retries: int = 5) -> SpectrumReport:
    """Diagonalize ``T(lam_ref)`` and certify every eigenvalue in the SoV form.

    ``lam_ref`` is drawn on ``0.8 <= |lam| <= 1.25`` (redrawn up to ``retries``
    times if the spectrum looks degenerate).  Each eigenpair yields a
    :class:`TauPolynomial` from Rayleigh quotients at ``zeta_a^(0)``; it is
    checked against Rayleigh quotients at ``n_check`` fresh points and at
    ``-lam``, and its determinant conditions are evaluated.
    """
    setup = setup or SpectralSetup(cfg)
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    eig = None
    for _ in range(retries):
        lam = lam_ref if lam_ref is not None else complex(_random_points(rng, 1)[0])
        eig = general_eig(transfer(cfg, lam), rtol=setup.tol.rtol_spectral)
        if not eig.degenerate or lam_ref is not None:
            break
    check = _random_points(rng, n_check)
    zetas = np.array([setup.zeta0(a) for a in range(cfg.N)])
    samples = rayleigh_values(cfg, eig, np.concatenate([zetas, check, -check[:1]]))
    taus, res = [], []
    for k in range(len(eig.values)):
        tau = tau_from_values(cfg, samples[k, :cfg.N])
        pred = np.array([tau(x) for x in check])
        direct = samples[k, cfg.N:cfg.N + n_check]
        interp = float(np.max(np.abs(pred - direct) / np.maximum(np.abs(direct), 1e-300)))
        even = float(abs(samples[k, -1] - direct[0]) / max(abs(direct[0]), 1e-300))
        res.append({
            "interp": interp,
            "even": even,
            "det": setup.det_conditions(tau),
            "det_plain": setup.det_conditions(tau, holonomy=False),
        })
        taus.append(tau)
    return SpectrumReport(cfg, complex(lam), eig, taus, res, not eig.degenerate, len(taus), check)


# ---------------------------------------------------------------------------
# Q tables
# ---------------------------------------------------------------------------

@dataclass
class QTable:
    """Per-site kernel data ``q[a, h]`` with ``q[a, 0] = 1``.

    ``quality[a]`` is ``sigma_min / sigma_max`` of the defining matrix (kernel
    route) or 0 (recursion route); ``gap[a]`` the second-smallest ratio.
    """

    q: np.ndarray
    quality: np.ndarray
    gap: np.ndarray
    hat: bool = False


def q_table_from_kernel(setup: SpectralSetup, tau: TauPolynomial, hat: bool = False) -> QTable:
    """Kernel vectors of ``D_tau(zeta_a^(0))`` (``hat=True``: of ``D_hat``), one row per site."""
    n, p = setup.N, setup.p
    qs = np.empty((n, p), dtype=complex)
    qual, gap = np.empty(n), np.empty(n)
    for a in range(n):
        kr = kernel_vector(setup.d_tau(tau, a, hat=hat))
        if kr.second_quality < setup.tol.rtol_functional:
            raise GenericityError(f"kernel of D_tau(zeta_{a + 1}^(0)) is not one-dimensional "
                                  f"(second singular ratio {kr.second_quality:.2e})", "simple")
        if abs(kr.vector[0]) < 1e-14 * np.linalg.norm(kr.vector):
            raise GenericityError("kernel vector has vanishing first component", "simple")
        qs[a] = kr.vector / kr.vector[0]
        qual[a], gap[a] = kr.quality, kr.second_quality
    return QTable(qs, qual, gap, hat)


def q_table_from_recursion(setup: SpectralSetup, tau: TauPolynomial, hat: bool = False) -> QTable:
    """Q table from the three-term recursion of the SoV Baxter equation.

    Right table: ``t^(h) = tau(zeta^(h-1)) t^(h-1) - a(zeta^(h-1)) a(1/zeta^(h-2)) t^(h-2)``
    with ``t^(-1) = 0``, ``t^(0) = 1`` and ``Q^(h)/Q^(0) = t^(h) / prod_{b<h} a(1/zeta^(b))``;
    it starts from row 0 of ``D_tau`` where ``a(zeta^(0)) = 0``.

    Hat table: ``d(1/zeta^(p-1)) = 0`` always, so the ``D_hat`` system is solved
    from its last row downwards,
    ``Qhat^(h-1) = (tau(zeta^(h)) Qhat^(h) - d(1/zeta^(h)) Qhat^(h+1)) / d(zeta^(h))``.
    (The forward form with ``d`` in place of ``a`` needs ``d(zeta^(0)) = 0``, which
    holds only under double nilpotency; see :func:`q_hat_forward_recursion`.)
    Neither route touches the wrapping corner, so no holonomy enters.
    """
    n, p = setup.N, setup.p
    z = setup.grid.zeta
    qs = np.empty((n, p), dtype=complex)
    for a in range(n):
        if hat:
            nxt, cur = 0j, 1.0 + 0j
            qs[a, p - 1] = cur
            for h in range(p - 1, 0, -1):
                d = setup.d(z[a, h])
                if abs(d) < 1e-300:
                    raise GenericityError(f"vanishing coefficient d(zeta_{a + 1}^({h}))", "sov2")
                nxt, cur = cur, (tau(z[a, h]) * cur - setup.d(1 / z[a, h]) * nxt) / d
                qs[a, h - 1] = cur
            qs[a] /= qs[a, 0]
            continue
        t_prev, t = 0j, 1.0 + 0j
        qs[a, 0] = 1.0
        den = 1.0 + 0j
        for h in range(1, p):
            bracket = setup.a(z[a, h - 1]) * setup.a(1 / z[a, (h - 2) % p]) if h >= 2 else 0.0
            t_prev, t = t, tau(z[a, h - 1]) * t - bracket * t_prev
            d = setup.a(1 / z[a, h - 1])
            if abs(d) < 1e-300:
                raise GenericityError(f"vanishing coefficient a(1/zeta_{a + 1}^({h - 1}))", "sov2")
            den *= d
            qs[a, h] = t / den
    return QTable(qs, np.zeros(n), np.ones(n), hat)


def q_hat_forward_recursion(setup: SpectralSetup, tau: TauPolynomial, table: Optional[QTable] = None) -> QTable:
    """``Qhat^(h)/Qhat^(h-1) = (a/d)(1/zeta^(h-1)) Q^(h)/Q^(h-1)`` from the right table.

    Agrees with the kernel of ``D_hat`` only when ``d(zeta_a^(0)) = 0``.
    """
    table = table or q_table_from_recursion(setup, tau)
    z = setup.grid.zeta
    qs = np.ones_like(table.q)
    for a in range(setup.N):
        for h in range(1, setup.p):
            x = 1 / z[a, h - 1]
            qs[a, h] = qs[a, h - 1] * setup.a(x) / setup.d(x) * table.q[a, h] / table.q[a, h - 1]
    return QTable(qs, np.zeros(setup.N), np.ones(setup.N), True)


def recursion_bracket_residuals(setup: SpectralSetup) -> float:
    """``d(zeta^(x)) d(1/zeta^(x-1)) = a(zeta^(x)) a(1/zeta^(x-1))`` for ``x = 1..p-1``."""
    z = setup.grid.zeta
    worst = 0.0
    for a in range(setup.N):
        for x in range(1, setup.p):
            lhs = setup.d(z[a, x]) * setup.d(1 / z[a, x - 1])
            rhs = setup.a(z[a, x]) * setup.a(1 / z[a, x - 1])
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return float(worst)


# ---------------------------------------------------------------------------
# eigenstates
# ---------------------------------------------------------------------------

def _need_basis(setup: SpectralSetup) -> SovBasis:
    if setup.basis is None:
        raise ParameterError("eigenstate reconstruction needs a configuration in SoV mode")
    return setup.basis


def right_eigenstate(setup: SpectralSetup, table: QTable) -> np.ndarray:
    """``|tau> = sum_h prod_a Q_a^(h_a) V(X^(h)) |h>``."""
    return separate_state_vector(_need_basis(setup), SeparateState(table.q, "right"))


def left_eigenstate(setup: SpectralSetup, table: QTable) -> np.ndarray:
    """``<tau| = sum_h prod_a Qhat_a^(h_a) V(X^(h)) <h|``."""
    return separate_state_vector(_need_basis(setup), SeparateState(table.q, "left"))


def eigenstate_residual(cfg: ChainConfig, tau: TauPolynomial, vec: np.ndarray, lams, side: str = "right") -> float:
    """``max ||T v - tau v|| / (||T|| ||v||)`` over the given points."""
    worst = 0.0
    for lam in lams:
        t = transfer(cfg, lam)
        tv = t @ vec if side == "right" else vec @ t
        worst = max(worst, float(np.linalg.norm(tv - tau(lam) * vec)
                                 / (np.linalg.norm(t, 2) * np.linalg.norm(vec))))
    return worst


def wave_function_residual(setup: SpectralSetup, tau: TauPolynomial, vec: np.ndarray) -> float:
    """SoV Baxter system for ``Psi(h) = <h|tau>`` over all labels and sites.

    ``tau(xi_n^(h_n)) Psi(h) = a(xi_n^(h_n)) Psi(T_n^- h) + a(1/xi_n^(h_n)) Psi(T_n^+ h)``,
    the wrapping shift ``h_n = p - 1 -> 0`` carrying the holonomy.  Normalized
    by the largest term of each equation.
    """
    basis = _need_basis(setup)
    p = setup.p
    psi = {h: basis.left_state(h) @ vec for h in basis.labels}
    worst = 0.0
    for h in basis.labels:
        for n in range(setup.N):
            x = setup.grid.xi[n, h[n]]
            hm = h[:n] + ((h[n] - 1) % p,) + h[n + 1:]
            hp = h[:n] + ((h[n] + 1) % p,) + h[n + 1:]
            wrap = setup.wrap_left[n] if h[n] == p - 1 else 1.0
            terms = [tau(x) * psi[h], setup.a(x) * psi[hm], wrap * setup.a(1 / x) * psi[hp]]
            scale = max(abs(t) for t in terms)
            if scale > 0:
                worst = max(worst, abs(terms[0] - terms[1] - terms[2]) / scale)
    return float(worst)


def lambda_coefficients(tau: TauPolynomial, other: TauPolynomial):
    """``x_b`` with ``tau - other = (Lambda^2 - X^2) sum_b x_b Lambda^(b-1)``.

    Returns ``(x, remainder_norm, degree)``: the division remainder (relative to
    the difference) and the numerical degree of the difference in ``Lambda``.
    """
    diff = tau.coefficients() - other.coefficients()
    scale = np.abs(diff).max()
    if scale == 0:
        raise DegenerateInputError("identical eigenvalue polynomials")
    nz = np.nonzero(np.abs(diff) > 1e-10 * scale)[0]
    degree = len(diff) - 1 - nz[0]
    quot, rem = np.polydiv(diff, np.array([1.0, 0.0, -tau.X ** 2]))
    quot = quot[-tau.N:] if len(quot) >= tau.N else np.concatenate([np.zeros(tau.N - len(quot)), quot])
    return quot[::-1], float(np.abs(rem).max() / scale), int(degree)


def orthogonality_relation(setup: SpectralSetup, tau: TauPolynomial, other: TauPolynomial,
                           left_table: QTable, right_table: QTable) -> dict:
    """``sum_b M_ab x_b = 0`` with ``M_ab = sum_h Qhat_a^(h)(tau) Q_a^(h)(other) (X_a^(h))^(b-1)``.

    Returns the normalized ``||M x||``, the normalized ``|<tau|other>|``, the
    division remainder and the degree of ``tau - other`` in ``Lambda``.
    """
    basis = _need_basis(setup)
    x, rem, degree = lambda_coefficients(tau, other)
    n = setup.N
    X = setup.grid.X[:n]
    m = np.array([[np.sum(left_table.q[a] * right_table.q[a] * X[a] ** b) for b in range(n)]
                  for a in range(n)])
    # scale: the same sums with every term replaced by its modulus
    m_abs = np.array([[np.sum(np.abs(left_table.q[a] * right_table.q[a] * X[a] ** b)) for b in range(n)]
                      for a in range(n)])
    mx = float(np.linalg.norm(m @ x) / (np.linalg.norm(m_abs @ np.abs(x))))
    lv = left_eigenstate(setup, left_table)
    rv = right_eigenstate(setup, right_table)
    overlap = float(abs(lv @ rv) / (np.linalg.norm(lv) * np.linalg.norm(rv)))
    sp = separate_scalar_product(basis, SeparateState(left_table.q, "left"),
                                 SeparateState(right_table.q, "right"))
    return {"Mx": mx, "overlap": overlap, "remainder": rem, "degree": degree,
            "scalar_product_formula": abs(sp - lv @ rv) / max(np.linalg.norm(lv) * np.linalg.norm(rv), 1e-300)}


# ---------------------------------------------------------------------------
# Newton solver for the determinant conditions
# ---------------------------------------------------------------------------

def _conditions(setup: SpectralSetup, template: TauPolynomial, vals) -> np.ndarray:
    tau = template.with_values(vals)
    return np.array([det_d_tau(setup.cfg, setup.zeta0(a), tau, setup.a, setup.wrap_left[a])
                     for a in range(setup.N)])


def _normalized_conditions(setup: SpectralSetup, template: TauPolynomial, vals) -> float:
    return float(setup.det_conditions(template.with_values(vals)).max())


def newton_solve(setup: SpectralSetup, seeds, max_iter: int = 100, step_tol: float = 1e-10,
                 det_tol: float = 1e-13, dedup: float = 1e-6) -> list:
    """Solve ``det D_tau(zeta_a^(0)) = 0`` for the ``N`` values ``tau(zeta_a^(0))``.

    Newton iteration with a central finite-difference Jacobian (step ``1e-6``
    times the scale of the iterate).  The conditions are holomorphic in the
    unknowns, so real difference steps give the complex derivative.  An
    iterate is accepted once the Newton step falls below ``step_tol`` (relative)
    or the normalized determinants below ``det_tol``; seeds that do not converge
    in ``max_iter`` steps are dropped.  Roots closer than ``dedup`` (relative)
    are merged.

    Returns
    -------
    list of (TauPolynomial, iterations)
    """
    template = tau_from_values(setup.cfg, np.zeros(setup.N))
    n = setup.N
    roots = []
    for seed in seeds:
        v = np.asarray(seed, dtype=complex).copy()
        converged, its = False, 0
        for its in range(1, max_iter + 1):
            scale = max(np.abs(v).max(), 1.0)
            f = _conditions(setup, template, v)
            h = 1e-6 * scale
            jac = np.empty((n, n), dtype=complex)
            for b in range(n):
                e = np.zeros(n, dtype=complex)
                e[b] = h
                jac[:, b] = (_conditions(setup, template, v + e) - _conditions(setup, template, v - e)) / (2 * h)
            try:
                dv = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                break
            if not np.all(np.isfinite(dv)):
                break
            v = v + dv
            if (np.abs(dv).max() <= step_tol * scale
                    or _normalized_conditions(setup, template, v) <= det_tol):
                converged = True
                break
        if not converged:
            continue
        if all(np.abs(v - r.values).max() > dedup * max(np.abs(v).max(), 1.0) for r, _ in roots):
            roots.append((template.with_values(v), its))
    return roots


def perturbation_margin(setup: SpectralSetup, eigenvalues, rng: np.random.Generator,
                        rel: float = 1e-2, samples: int = 5) -> float:
    """Smallest violation of the determinant conditions by perturbed eigenvalues.

    Each eigenvalue ``tau`` is replaced by ``tau_a (1 + rel e^{i phi_a})`` with
    independent uniform phases; the violation of one sample is the largest
    normalized determinant over the ``N`` conditions.  A characterization that
    singles out the spectrum keeps this margin well above the residual of the
    true eigenvalues.
    """
    worst = np.inf
    n = setup.N
    for tau in eigenvalues:
        for _ in range(samples):
            phase = np.exp(2j * np.pi * rng.uniform(size=n))
            pert = tau.with_values(tau.values * (1 + rel * phase))
            worst = min(worst, float(setup.det_conditions(pert).max()))
    return worst
