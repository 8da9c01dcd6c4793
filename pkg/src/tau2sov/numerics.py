"""Dense complex linear algebra used throughout the package.

Everything here is a thin, explicit layer over numpy/LAPACK.  Residuals are
Frobenius norms normalized by the largest operand so that pass/fail decisions
do not depend on the overall scale of the operators involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as la

__all__ = [
    "MAX_DIM", "ToleranceProfile", "DimensionError", "ShapeError",
    "ConvergenceError", "as_matrix", "kron", "kron_all", "determinant",
    "KernelResult", "kernel_vector", "EigResult", "general_eig",
    "residual", "rel_diff", "commutator_residual",
]

MAX_DIM = 4096


class DimensionError(ValueError):
    """Raised when an operator would exceed the configured dimension cap."""


class ShapeError(ValueError):
    """Raised for non-square input where a square matrix is required."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative eigen-solve does not converge."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


@dataclass(frozen=True)
class ToleranceProfile:
    rtol_identity: float = 1e-10
    rtol_spectral: float = 1e-8
    rtol_functional: float = 1e-6
    svd_gap_min: float = 1e6

    def __post_init__(self):
        vals = (self.rtol_identity, self.rtol_spectral, self.rtol_functional, self.svd_gap_min)
        if any(not np.isfinite(v) or v <= 0 for v in vals):
            raise ValueError("tolerances must be finite and strictly positive")
        if not (self.rtol_identity <= self.rtol_spectral <= self.rtol_functional):
            raise ValueError("need rtol_identity <= rtol_spectral <= rtol_functional")


def as_matrix(a) -> np.ndarray:
    """Return `a` as a finite complex 2D array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``K[i*rB + k, j*cB + l] = A[i, j] * B[k, l]``."""
    a = as_matrix(a)
    b = as_matrix(b)
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise DimensionError(f"kron result {rows}x{cols} exceeds cap {max_dim}")
    return np.kron(a, b)


def kron_all(mats, max_dim: int = MAX_DIM) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = kron(out, m, max_dim=max_dim)
    return out


def determinant(a) -> complex:
    """Determinant by LU factorization with partial pivoting."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"determinant of non-square {a.shape} matrix")
    if a.shape[0] == 0:
        return 1.0 + 0j
    lu, piv = la.lu_factor(a, check_finite=False)
    sign = (-1) ** int(np.count_nonzero(piv != np.arange(len(piv))))
    return complex(sign * np.prod(np.diag(lu)))


class KernelResult(NamedTuple):
    vector: np.ndarray
    quality: float        # sigma_min / sigma_max
    second_quality: float  # sigma_{n-1} / sigma_max; large means a 1D kernel
    singular_values: np.ndarray


def kernel_vector(a) -> KernelResult:
    """Right singular vector of the smallest singular value of a square matrix."""
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"kernel of non-square {a.shape} matrix")
    _, s, vh = la.svd(a)
    smax = s[0] if s[0] > 0 else 1.0
    second = s[-2] / smax if len(s) > 1 else 1.0
    return KernelResult(vh[-1].conj(), float(s[-1] / smax), float(second), s)


class EigResult(NamedTuple):
    values: np.ndarray
    right: np.ndarray   # columns v_k with A v_k = lambda_k v_k
    left: np.ndarray    # rows w_k with w_k A = lambda_k w_k, w_j . v_k = delta_jk
    clusters: list      # groups of indices whose eigenvalues are numerically equal
    residual: float

    @property
    def degenerate(self) -> bool:
        return any(len(c) > 1 for c in self.clusters)


def _clusters(values, tol):
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def general_eig(a, max_dim: int = MAX_DIM, rtol: float = 1e-8, cluster_rtol: float = 1e-7) -> EigResult:
    """Eigen-decomposition of a general complex matrix with biorthogonal left vectors.

    LAPACK ``zgeev`` (Hessenberg reduction followed by shifted QR) does the work.
    Eigenvalues closer than ``cluster_rtol * ||A||`` are grouped into clusters;
    inside a cluster the left/right pairing is not meaningful and the
    ``degenerate`` flag is raised instead of guessing.
    """
    a = as_matrix(a)
    n = a.shape[0]
    if n != a.shape[1]:
        raise ShapeError(f"eigen-decomposition of non-square {a.shape} matrix")
    if n > max_dim:
        raise DimensionError(f"dimension {n} exceeds cap {max_dim}")
    vals, vl, vr = la.eig(a, left=True, right=True)
    w = vl.conj().T
    scale = max(np.linalg.norm(a), 1e-300)
    clusters = _clusters(vals, cluster_rtol * scale)
    for k in range(n):
        ov = w[k] @ vr[:, k]
        if abs(ov) > 1e-14 * np.linalg.norm(w[k]) * np.linalg.norm(vr[:, k]):
            w[k] = w[k] / ov
    res_r = np.linalg.norm(a @ vr - vr * vals) / (scale * max(np.linalg.norm(vr), 1e-300))
    res_l = np.linalg.norm(w @ a - vals[:, None] * w) / (scale * max(np.linalg.norm(w), 1e-300))
    res = float(max(res_r, res_l))
    if not np.isfinite(res) or res_r > rtol:
        raise ConvergenceError(f"eigen-decomposition residual {res:.3e} above {rtol:.1e}",
                               residuals={"right": float(res_r), "left": float(res_l)})
    return EigResult(vals, vr, w, clusters, res)


def residual(lhs, rhs) -> float:
    """``||lhs - rhs||_F / max(||lhs||_F, ||rhs||_F)`` (0 when both vanish)."""
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / scale)


def rel_diff(x, y, scale=None) -> float:
    """Scalar version of :func:`residual` with an optional explicit scale."""
    if scale is None:
        scale = max(abs(x), abs(y))
    if scale == 0:
        return 0.0
    return float(abs(x - y) / scale)


def commutator_residual(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(a @ b - b @ a) / scale)
