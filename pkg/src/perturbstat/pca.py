"""Principal components of a perturbed residual covariance.

``Sigma_hat(eps) = Y^T P(eps) Y`` is expanded as ``S_0 + eps S_1 + ...``
(no degrees-of-freedom divisor), and eigenpairs are expanded to first order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DimensionError
from .linmodel import PerturbedDesign, projection_series
from .numerics import as_matrix, max_abs, sym_eigen


@dataclass(frozen=True)
class CovarianceSeries:
    coefficients: tuple[np.ndarray, ...]

    def __post_init__(self):
        coeffs = tuple(as_matrix(c, f"S_{k}") for k, c in enumerate(self.coefficients))
        if not coeffs:
            raise DimensionError("empty covariance series")
        p = coeffs[0].shape[0]
        for k, c in enumerate(coeffs):
            if c.shape != (p, p):
                raise DimensionError(f"S_{k} has shape {c.shape}, expected {(p, p)}")
            if max_abs(c - c.T) > 1e-9 * max(1.0, max_abs(c)):
                raise ValueError(f"S_{k} is not symmetric")
        if p and sym_eigen(0.5 * (coeffs[0] + coeffs[0].T))[0][-1] < -1e-9 * max(1.0, max_abs(coeffs[0])):
            raise ValueError("S_0 is not positive semidefinite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def evaluate(self, eps: float) -> np.ndarray:
        return sum((eps ** k) * c for k, c in enumerate(self.coefficients))


def covariance_series(design: PerturbedDesign, y, order: int, tol: float = 0.0) -> CovarianceSeries:
    y = as_matrix(y, "Y")
    if y.shape[0] != design.n:
        raise DimensionError(f"Y has {y.shape[0]} rows, design has n={design.n}")
    ps = projection_series(design, order, tol)
    # symmetrize to remove rounding asymmetry from the triple products
    return CovarianceSeries(tuple(0.5 * (s + s.T) for s in (y.T @ p @ y for p in ps)))


def degeneracy_tol(s0) -> float:
    return 1e-8 * float(np.linalg.norm(np.asarray(s0, dtype=float), np.inf))


def eigen_gap_2x2(s0, s1, tol: float | None = None) -> tuple[float, float]:
    """First-order expansion of lambda_1(eps) - lambda_2(eps) for 2 x 2 S_0 + eps S_1.

    Returns ``(A, g)`` with ``A = sqrt((s0_11 - s0_22)^2 + 4 s0_12^2)`` and
    ``g = [(s1_11 - s1_22)(s0_11 - s0_22) + 4 s0_12 s1_12] / A``.
    """
    s0, s1 = as_matrix(s0), as_matrix(s1)
    if s0.shape != (2, 2) or s1.shape != (2, 2):
        raise DimensionError("eigen_gap_2x2 is for 2 x 2 matrices")
    tol = degeneracy_tol(s0) if tol is None else tol
    d0 = s0[0, 0] - s0[1, 1]
    d1 = s1[0, 0] - s1[1, 1]
    gap = math.hypot(d0, 2.0 * s0[0, 1])
    if gap <= tol:
        raise DegenerateError(f"eigenvalue gap {gap:.3g} is below {tol:.3g}")
    return gap, (d1 * d0 + 4.0 * s0[0, 1] * s1[0, 1]) / gap


@dataclass(frozen=True)
class EigenExpansion:
    index: int
    lambda0: float
    lambda1: float
    d0: np.ndarray
    d1: np.ndarray

    def value(self, eps: float) -> float:
        return self.lambda0 + eps * self.lambda1

    def vector(self, eps: float) -> np.ndarray:
        return self.d0 + eps * self.d1


def eigen_pair_series(s0, s1, index: int, tol: float | None = None) -> EigenExpansion:
    """First-order expansion of the ``index``-th eigenpair (descending order).

    lambda_1 = d0^T S_1 d0; d1 solves (S_0 - lambda_0 I) d1 = (lambda_1 I - S_1) d0
    with the gauge d0^T d1 = 0.
    """
    s0, s1 = as_matrix(s0), as_matrix(s1)
    p = s0.shape[0]
    if s0.shape != (p, p) or s1.shape != (p, p):
        raise DimensionError("S_0 and S_1 must be square and the same size")
    if not 0 <= index < p:
        raise IndexError(f"eigen index {index} out of range for p={p}")
    tol = degeneracy_tol(s0) if tol is None else tol
    vals, vecs = sym_eigen(s0)
    lam0, d0 = vals[index], vecs[:, index]
    others = [j for j in range(p) if j != index]
    if others and min(abs(lam0 - vals[j]) for j in others) <= tol:
        raise DegenerateError(f"eigenvalue {index} of S_0 is not simple")
    s1 = 0.5 * (s1 + s1.T)
    lam1 = float(d0 @ s1 @ d0)
    d1 = np.zeros(p)
    for j in others:
        dj = vecs[:, j]
        d1 += (dj @ s1 @ d0) / (lam0 - vals[j]) * dj
    return EigenExpansion(index, float(lam0), lam1, d0, d1)


def eigen_expansions(s0, s1, tol: float | None = None) -> list[EigenExpansion | None]:
    """All eigenpair expansions; ``None`` marks a degenerate eigenvalue."""
    p = as_matrix(s0).shape[0]
    out: list[EigenExpansion | None] = []
    for i in range(p):
        try:
            out.append(eigen_pair_series(s0, s1, i, tol))
        except DegenerateError:
            out.append(None)
    return out
