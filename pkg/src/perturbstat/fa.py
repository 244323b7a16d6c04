"""Factor-analysis covariance with a perturbed latent covariance.

``Sigma(eps) = Gamma Phi(eps) Gamma^T + Psi`` with ``Phi(eps) = I + eps Phi_1 + ...``.
Provides the series of Sigma, its inverse, ln det Sigma and the Gaussian
log-likelihood kernel.  No estimation is done here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NotPositiveDefiniteError
from .laurent import AnalyticMatrixSeries, LaurentSeries, invert_series, series_multiply
from .numerics import as_matrix, cholesky, max_abs, solve_spd
from .pca import CovarianceSeries


@dataclass(frozen=True)
class FaModel:
    """Loadings (p x k), residual variances (length p) and Phi_1, Phi_2, ... (k x k)."""

    loadings: np.ndarray
    residual_variances: np.ndarray
    phi: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        gamma = as_matrix(self.loadings, "loadings")
        psi = np.asarray(self.residual_variances, dtype=float).ravel()
        p, k = gamma.shape
        if psi.shape != (p,):
            raise DimensionError(f"need {p} residual variances, got {psi.size}")
        if np.any(psi <= 0) or not np.all(np.isfinite(psi)):
            raise NotPositiveDefiniteError("residual variances must be positive")
        phi = tuple(as_matrix(f, f"Phi_{j + 1}") for j, f in enumerate(self.phi))
        for j, f in enumerate(phi):
            if f.shape != (k, k):
                raise DimensionError(f"Phi_{j + 1} must be {k}x{k}, got {f.shape}")
            if max_abs(f - f.T) > 1e-10 * max(1.0, max_abs(f)):
                raise ValueError(f"Phi_{j + 1} is not symmetric")
        object.__setattr__(self, "loadings", gamma)
        object.__setattr__(self, "residual_variances", psi)
        object.__setattr__(self, "phi", phi)

    @property
    def p(self) -> int:
        return self.loadings.shape[0]

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    @property
    def phi_series(self) -> tuple[np.ndarray, ...]:
        return (np.eye(self.k),) + self.phi


def sigma_series(model: FaModel, order: int) -> CovarianceSeries:
    g = model.loadings
    coeffs = [g @ g.T + np.diag(model.residual_variances)]
    for j in range(1, order + 1):
        coeffs.append(g @ model.phi[j - 1] @ g.T if j <= len(model.phi) else np.zeros((model.p, model.p)))
    return CovarianceSeries(tuple(coeffs))


def _analytic(model: FaModel) -> AnalyticMatrixSeries:
    return AnalyticMatrixSeries(sigma_series(model, len(model.phi)).coefficients)


def sigma_inverse_series(model: FaModel, order: int) -> LaurentSeries:
    series = _analytic(model)
    cholesky(series.coefficients[0])  # raises unless Sigma_0 is positive definite
    return invert_series(series, order)


@dataclass(frozen=True)
class LogDetSeries:
    coefficients: tuple[float, ...]

    def evaluate(self, eps: float) -> float:
        return sum(c * eps ** k for k, c in enumerate(self.coefficients))


def logdet_of_series(series: AnalyticMatrixSeries, order: int) -> LogDetSeries:
    """ln det A(eps) for A(0) positive definite, from d/deps ln det A = tr(A^{-1} A').

    With ``tr(A^{-1}(eps) A'(eps)) = sum_k t_k eps^k`` the coefficients are
    c_0 = ln det A_0 and c_{k+1} = t_k / (k + 1).
    """
    low = cholesky(series.coefficients[0])
    c0 = 2.0 * float(np.sum(np.log(np.diag(low))))
    coeffs = [c0]
    if order >= 1:
        inv = invert_series(series, order - 1)
        g = series_multiply(inv, series.derivative(), order - 1)
        coeffs += [float(np.trace(g.coefficient(k))) / (k + 1) for k in range(order)]
    return LogDetSeries(tuple(coeffs))


def logdet_series(model: FaModel, order: int) -> LogDetSeries:
    return logdet_of_series(_analytic(model), order)


def loglik_terms(model: FaModel, sample_cov, order: int) -> list[float]:
    """Series of -[ln det Sigma(eps) + tr(S Sigma^{-1}(eps))]."""
    s = as_matrix(sample_cov, "S")
    if s.shape != (model.p, model.p):
        raise DimensionError(f"S must be {model.p}x{model.p}, got {s.shape}")
    if max_abs(s - s.T) > 1e-9 * max(1.0, max_abs(s)):
        raise ValueError("S is not symmetric")
    ld = logdet_series(model, order).coefficients
    inv = sigma_inverse_series(model, order)
    return [-(ld[k] + float(np.sum(s * inv.coefficient(k).T))) for k in range(order + 1)]


def loglik_exact(model: FaModel, sample_cov, eps: float) -> float:
    """-[ln det Sigma(eps) + tr(S Sigma(eps)^{-1})] evaluated directly at ``eps``."""
    sigma = sigma_series(model, len(model.phi)).evaluate(eps)
    low = cholesky(sigma)
    ld = 2.0 * float(np.sum(np.log(np.diag(low))))
    return -(ld + float(np.trace(solve_spd(sigma, as_matrix(sample_cov, "S")))))
