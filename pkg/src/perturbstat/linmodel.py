"""Least squares under an analytically perturbed design.

The model is ``y = X(eps)^T beta + noise`` with ``X(eps) = X_0 + eps X_1 + ...``
an m x n matrix (parameters by observations).  Everything here is assembled
from two series: the Gram series ``B(eps) = X(eps) X(eps)^T`` and its Laurent
inverse ``C(eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (DegenerateError, DimensionError, NumericalBreakdownError,
                     SingularPerturbationError, ValidityDiscError)
from .laurent import (AnalyticMatrixSeries, LaurentSeries, identity_series, invert_series,
                      series_add, series_multiply)
from .numerics import f_quantile, max_abs, numeric_rank, solve_spd, svd_jacobi

MAX_COND = 1e12


@dataclass(frozen=True)
class PerturbedDesign:
    """Components X_0, X_1, ... of X(eps), each m x n with n > m."""

    components: tuple[np.ndarray, ...]

    def __post_init__(self):
        series = AnalyticMatrixSeries(tuple(self.components))
        m, n = series.shape
        if not n > m >= 1:
            raise DimensionError(f"need n > m >= 1, got m={m}, n={n}")
        object.__setattr__(self, "components", series.coefficients)

    @classmethod
    def of(cls, *components) -> "PerturbedDesign":
        return cls(tuple(components))

    @property
    def m(self) -> int:
        return self.components[0].shape[0]

    @property
    def n(self) -> int:
        return self.components[0].shape[1]

    @property
    def series(self) -> AnalyticMatrixSeries:
        return AnalyticMatrixSeries(self.components)

    def evaluate(self, eps: float) -> np.ndarray:
        return self.series.evaluate(eps)


@dataclass(frozen=True)
class RegressionExpansion:
    gram: AnalyticMatrixSeries
    inverse: LaurentSeries

    @property
    def pole_order(self) -> int:
        return self.inverse.pole_order

    @property
    def B(self) -> tuple[np.ndarray, ...]:
        return self.gram.coefficients

    @property
    def C(self) -> tuple[np.ndarray, ...]:
        return self.inverse.coefficients


def _vector(y, n: int, name: str = "y") -> np.ndarray:
    v = np.asarray(y, dtype=float).ravel()
    if v.shape != (n,):
        raise DimensionError(f"{name} must have length {n}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def gram_series(design: PerturbedDesign) -> AnalyticMatrixSeries:
    """B_k = sum_{i+j=k} X_i X_j^T, exact."""
    x = design.series
    prod = series_multiply(x, x.transpose())
    return AnalyticMatrixSeries(prod.coefficients)


def expand_gram(design: PerturbedDesign, order: int, tol: float = 0.0,
                max_t: int | None = None) -> RegressionExpansion:
    gram = gram_series(design)
    return RegressionExpansion(gram, invert_series(gram, order, max_t, tol))


def _require_regular(exp: RegressionExpansion) -> None:
    if exp.pole_order:
        raise SingularPerturbationError(
            f"B_0 is singular (pole order {exp.pole_order}); use fit_singular")


def _column(y: np.ndarray) -> AnalyticMatrixSeries:
    return AnalyticMatrixSeries((y.reshape(-1, 1),))


def beta_series(design: PerturbedDesign, y, order: int, tol: float = 0.0) -> list[np.ndarray]:
    """Coefficients of beta_hat(eps) = C(eps) X(eps) y through eps**order."""
    y = _vector(y, design.n)
    exp = expand_gram(design, order, tol)
    _require_regular(exp)
    prod = series_multiply(series_multiply(exp.inverse, design.series), _column(y), order)
    return [prod.coefficient(k).ravel() for k in range(order + 1)]


def projection_laurent(design: PerturbedDesign, order: int, tol: float = 0.0) -> LaurentSeries:
    """I - X^T(eps) C(eps) X(eps) before the negative powers are discarded."""
    exp = expand_gram(design, order, tol)
    x = design.series
    hat = series_multiply(series_multiply(x.transpose(), exp.inverse), x, order)
    return series_add(identity_series(design.n), hat.map(np.negative))


def projection_series(design: PerturbedDesign, order: int, tol: float = 0.0) -> list[np.ndarray]:
    """Maclaurin coefficients P_0, ..., P_order of the residual projector P(eps).

    The Laurent product can carry negative powers in the singular case; they
    must cancel, and a residue above 1e-8 (relative to the largest
    coefficient) is reported as a numerical breakdown.
    """
    p = projection_laurent(design, order, tol)
    scale = max(1.0, max(max_abs(c) for c in p.coefficients))
    for k in range(1, p.pole_order + 1):
        if max_abs(p.coefficient(-k)) > 1e-8 * scale:
            raise NumericalBreakdownError(
                f"eps^-{k} coefficient of P(eps) is {max_abs(p.coefficient(-k)):.3g}, expected 0")
    return [p.coefficient(k) for k in range(order + 1)]


def sse_series(design: PerturbedDesign, y, order: int, tol: float = 0.0) -> list[float]:
    """Coefficients of SSE(eps) = y^T P(eps) y."""
    y = _vector(y, design.n)
    return [float(y @ pk @ y) for pk in projection_series(design, order, tol)]


def _quadratic(design: PerturbedDesign, y, tol: float) -> tuple[float, float, float]:
    s0, s1, s2 = sse_series(design, y, 2, tol)
    if abs(s2) < 1e-12 * max(1.0, abs(s0)):
        raise DegenerateError("SSE(eps) has no quadratic term; eps is not identifiable")
    return s0, s1, s2


def sse_stationary_point(design: PerturbedDesign, y, tol: float = 0.0) -> float:
    """Stationary point -s1 / (2 s2) of the quadratic truncation s0 + s1 eps + s2 eps^2."""
    _, s1, s2 = _quadratic(design, y, tol)
    return -s1 / (2.0 * s2)


def epsilon_hat(design: PerturbedDesign, y, tol: float = 0.0) -> float:
    """Closed-form estimate of eps from the order-2 SSE expansion.

    Ratio of the eps bracket to twice the eps^2 bracket, with both brackets
    taken as they appear in ``X^T C X`` (i.e. ``-s1`` and ``-s2``), giving
    ``s1 / (2 s2)``.  This is the convention behind the published estimates
    for the Gallant example.  Note that it is the *negative* of
    :func:`sse_stationary_point`; the minimizer of the quadratic
    truncation is the latter.
    """
    _, s1, s2 = _quadratic(design, y, tol)
    return s1 / (2.0 * s2)


def _sum_series(coeffs: Sequence, eps: float, order: int):
    return sum((eps ** k) * coeffs[k] for k in range(order + 1))


def _exact_gram(design: PerturbedDesign, eps: float) -> tuple[np.ndarray, np.ndarray]:
    x = design.evaluate(eps)
    _, sv, _ = svd_jacobi(x)
    if sv[-1] == 0.0 or (sv[0] / sv[-1]) ** 2 > MAX_COND:
        raise ValidityDiscError(f"Gram matrix condition number exceeds {MAX_COND:g} at eps={eps}")
    return x, x @ x.T


def beta_exact(design: PerturbedDesign, y, eps: float) -> np.ndarray:
    y = _vector(y, design.n)
    x, b = _exact_gram(design, eps)
    return solve_spd(b, x @ y)


def sse_exact(design: PerturbedDesign, y, eps: float) -> float:
    y = _vector(y, design.n)
    x, b = _exact_gram(design, eps)
    r = y - x.T @ solve_spd(b, x @ y)
    return float(r @ r)


def projection_exact(design: PerturbedDesign, eps: float) -> np.ndarray:
    x, b = _exact_gram(design, eps)
    return np.eye(design.n) - x.T @ solve_spd(b, x)


def f_series(design: PerturbedDesign, y, beta0, order: int, tol: float = 0.0) -> list[float]:
    """Coefficients of F(eps) for H0: beta = beta0, from the beta, Gram and SSE series.

    F = [(n - m)/m] N(eps) / D(eps) with N = d^T B d, d = beta_hat(eps) - beta0,
    and D = SSE(eps); the quotient is expanded by power-series division.
    """
    y = _vector(y, design.n)
    beta0 = _vector(beta0, design.m, "beta0")
    m, n = design.m, design.n
    betas = beta_series(design, y, order, tol)
    betas[0] = betas[0] - beta0
    d = LaurentSeries(tuple(b.reshape(-1, 1) for b in betas), 0, order)
    num = series_multiply(series_multiply(d.transpose(), gram_series(design)), d, order)
    num_c = [float(num.coefficient(k)[0, 0]) for k in range(order + 1)]
    den = sse_series(design, y, order, tol)
    if den[0] <= 0.0:
        raise ValidityDiscError("SSE at eps=0 is not positive; F is undefined")
    q: list[float] = []
    for k in range(order + 1):
        acc = num_c[k] - sum(den[i] * q[k - i] for i in range(1, k + 1))
        q.append(acc / den[0])
    scale = (n - m) / m
    return [scale * c for c in q]


def f_statistic(design: PerturbedDesign, y, beta0, eps: float, order: int | None = None,
                tol: float = 0.0) -> float:
    """F(eps) for H0: beta = beta0.

    ``order=None`` evaluates the statistic exactly at ``eps``; an integer
    sums the F series through that power.
    """
    if order is not None:
        return float(_sum_series(f_series(design, y, beta0, order, tol), eps, order))
    y = _vector(y, design.n)
    beta0 = _vector(beta0, design.m, "beta0")
    m, n = design.m, design.n
    x, b = _exact_gram(design, eps)
    beta = solve_spd(b, x @ y)
    r = y - x.T @ beta
    sse = float(r @ r)
    if sse <= 0.0:
        raise ValidityDiscError("SSE(eps) is not positive; F is undefined")
    d = beta - beta0
    return float(d @ b @ d / m / (sse / (n - m)))


def standard_errors(design: PerturbedDesign, y, eps: float, order: int | None = None,
                    tol: float = 0.0) -> np.ndarray:
    """sqrt(diag(SSE(eps)/(n - m) * C(eps))), exact or with series summed to ``order``."""
    y = _vector(y, design.n)
    m, n = design.m, design.n
    if order is None:
        x, b = _exact_gram(design, eps)
        cov = solve_spd(b, np.eye(m))
        sse = sse_exact(design, y, eps)
    else:
        exp = expand_gram(design, order, tol)
        _require_regular(exp)
        cov = _sum_series(exp.C, eps, order)
        sse = float(_sum_series(sse_series(design, y, order, tol), eps, order))
    if sse < 0.0:
        raise ValidityDiscError(f"SSE({eps}) = {sse:.4g} is negative")
    var = sse / (n - m) * np.diag(cov)
    if np.any(var < 0.0):
        raise ValidityDiscError(f"negative variance at eps={eps}; outside the series radius")
    return np.sqrt(var)


@dataclass(frozen=True)
class ConfidenceSetEval:
    alpha: float
    threshold: float
    f_value: float
    contained: bool


@dataclass(frozen=True)
class ConfidenceSet:
    """{beta : F(eps) <= F_{alpha; m, n-m}} with F built for H0: beta."""

    design: PerturbedDesign
    y: np.ndarray
    alpha: float
    eps: float
    order: int | None
    threshold: float
    tol: float = 0.0

    def f_value_at(self, beta) -> float:
        return f_statistic(self.design, self.y, beta, self.eps, self.order, self.tol)

    def evaluate(self, beta) -> ConfidenceSetEval:
        f = self.f_value_at(beta)
        return ConfidenceSetEval(self.alpha, self.threshold, f, f <= self.threshold)

    def __contains__(self, beta) -> bool:
        return self.evaluate(beta).contained


def confidence_set(design: PerturbedDesign, y, alpha: float, eps: float = 0.0,
                   order: int | None = None, tol: float = 0.0) -> ConfidenceSet:
    y = _vector(y, design.n)
    thr = f_quantile(alpha, design.m, design.n - design.m)
    return ConfidenceSet(design, y, alpha, eps, order, thr, tol)


@dataclass(frozen=True)
class FitResult:
    beta_series: tuple[np.ndarray, ...]
    sse_series: tuple[float, ...]
    f_series: tuple[float, ...] | None
    epsilon_hat: float | None
    sse_stationary_point: float | None
    sigma2_hat: float
    eps: float
    beta: np.ndarray
    stderr: np.ndarray
    f_value: float | None
    pole_order: int = 0


def fit(design: PerturbedDesign, y, order: int = 2, eps: float | None = None,
        estimate_eps: bool = False, beta0=None, exact: bool = False,
        tol: float = 0.0) -> FitResult:
    """One-stop regular-case fit.

    With ``estimate_eps`` the reporting point is :func:`epsilon_hat`; otherwise
    ``eps`` (default 0).  Quantities at the reporting point use the series
    summed through ``min(order, 1)`` for the F statistic and ``order`` for the
    rest, unless ``exact`` asks for direct evaluation.
    """
    y = _vector(y, design.n)
    K = max(order, 2)
    betas = beta_series(design, y, K, tol)
    sses = sse_series(design, y, K, tol)
    e_hat = stat = None
    try:
        e_hat = epsilon_hat(design, y, tol)
        stat = sse_stationary_point(design, y, tol)
    except DegenerateError:
        if estimate_eps:
            raise
    at = e_hat if estimate_eps else (0.0 if eps is None else eps)
    if exact:
        beta = beta_exact(design, y, at)
        sse_at = sse_exact(design, y, at)
        se = standard_errors(design, y, at, None, tol)
    else:
        beta = _sum_series(betas, at, order)
        sse_at = float(_sum_series(sses, at, order))
        se = standard_errors(design, y, at, order, tol)
    fs = fval = None
    if beta0 is not None:
        fs = tuple(f_series(design, y, beta0, 1, tol))
        fval = (f_statistic(design, y, beta0, at, None, tol) if exact
                else float(_sum_series(fs, at, min(order, 1))))
    return FitResult(tuple(betas[:order + 1]), tuple(sses[:order + 1]), fs, e_hat, stat,
                     sse_at / (design.n - design.m), at, np.asarray(beta), se, fval)


# ---------------------------------------------------------------------------
# singular case


@dataclass(frozen=True)
class SingularFit:
    b0_ginv: np.ndarray
    beta_tilde: np.ndarray
    r: int
    nu: int
    d0: np.ndarray
    sse_limit: float
    f_tilde: float
    f0: float
    f_ratio: float
    pole_order: int
    maclaurin: bool
    sse_projection_limit: float


def fit_singular(design: PerturbedDesign, y, beta0=None, tol: float = 0.0) -> SingularFit:
    """Limits as eps -> 0 when B_0 = X_0 X_0^T is singular.

    The generalized inverse of B_0 is the Moore-Penrose one, built from the
    SVD of X_0 (``U diag(1/s^2) U^T`` over the kept singular values) so the
    rank decision is made on X_0 rather than on its squared Gram matrix.
    ``maclaurin`` reports whether C(eps) X(eps) is free of negative powers.
    Only then does D_0 equal P(0+), so ``sse_limit`` (built from D_0) and
    ``sse_projection_limit`` (the eps -> 0 limit of y^T P(eps) y) can differ.
    """
    y = _vector(y, design.n)
    m, n = design.m, design.n
    beta0 = np.zeros(m) if beta0 is None else _vector(beta0, m, "beta0")
    x0 = design.components[0]
    u, sv, _ = svd_jacobi(x0)
    r = numeric_rank(x0, tol)
    ur = u[:, :r]
    b0_ginv = (ur / sv[:r] ** 2) @ ur.T
    b0 = x0 @ x0.T
    beta_t = b0_ginv @ (x0 @ y)
    d0 = np.eye(n) - x0.T @ b0_ginv @ x0
    sse = float(y @ d0 @ y)
    d = beta_t - beta0
    q = float(d @ b0 @ d)
    if sse > 0.0:
        f_t = q / m / (sse / (n - m))
        f0 = q / r / (sse / (n - r)) if r else float("nan")
    else:
        f_t = f0 = float("inf") if q > 0 else float("nan")
    ratio = r * (n - m) / (m * (n - r))

    exp = expand_gram(design, 1, tol)
    cx = series_multiply(exp.inverse, design.series, 0)
    scale = max(1.0, max(max_abs(c) for c in cx.coefficients))
    maclaurin = all(max_abs(cx.coefficient(-k)) <= 1e-8 * scale
                    for k in range(1, cx.pole_order + 1))
    p0 = projection_series(design, 0, tol)[0]
    return SingularFit(b0_ginv, beta_t, r, n - r, d0, sse, f_t, f0, ratio,
                       exp.pole_order, maclaurin, float(y @ p0 @ y))
