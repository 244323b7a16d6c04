"""Laurent inversion of analytically perturbed matrices.

For ``A(eps) = A_0 + eps A_1 + ... + eps^T A_T`` the inverse, where it exists
on a punctured disc, is ``sum_{k >= -s} eps^k Y_k``.  The pole order ``s`` is
found from rank increments of the block lower-triangular augmented matrices,
and the coefficients follow from the first block row of the pseudoinverse of
the order-``s`` augmented matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, NoPoleFoundError
from .numerics import as_matrix, max_abs, numeric_rank, pinv


@dataclass(frozen=True)
class AnalyticMatrixSeries:
    """Polynomial matrix ``sum_k eps^k A_k``; coefficients past the end are zero."""

    coefficients: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise DimensionError("a series needs at least one coefficient")
        coeffs = tuple(as_matrix(c, f"A_{k}") for k, c in enumerate(self.coefficients))
        if len({c.shape for c in coeffs}) != 1:
            raise DimensionError("all coefficients must share one shape")
        for c in coeffs:
            c.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def of(cls, *coefficients) -> "AnalyticMatrixSeries":
        return cls(tuple(coefficients))

    @property
    def shape(self) -> tuple[int, int]:
        return self.coefficients[0].shape

    @property
    def truncation_order(self) -> int:
        return len(self.coefficients) - 1

    def coefficient(self, k: int) -> np.ndarray:
        if 0 <= k < len(self.coefficients):
            return self.coefficients[k]
        return np.zeros(self.shape)

    def evaluate(self, eps: float) -> np.ndarray:
        out = np.zeros(self.shape)
        for c in reversed(self.coefficients):
            out = out * eps + c
        return out

    def transpose(self) -> "AnalyticMatrixSeries":
        return AnalyticMatrixSeries(tuple(c.T for c in self.coefficients))

    def derivative(self) -> "AnalyticMatrixSeries":
        if len(self.coefficients) == 1:
            return AnalyticMatrixSeries((np.zeros(self.shape),))
        return AnalyticMatrixSeries(tuple(k * c for k, c in enumerate(self.coefficients) if k))

    def as_laurent(self) -> "LaurentSeries":
        return LaurentSeries(self.coefficients, 0, self.truncation_order, exact=True)


@dataclass(frozen=True)
class LaurentSeries:
    """Coefficients ``Y_{-s}, ..., Y_K`` of a (possibly truncated) Laurent series.

    ``order`` is the highest power whose coefficient is known.  With
    ``exact=True`` the series is a Laurent polynomial: every coefficient past
    ``order`` is known to be zero.
    """

    coefficients: tuple[np.ndarray, ...]
    pole_order: int
    order: int
    exact: bool = False
    shape: tuple[int, int] = field(init=False)

    def __post_init__(self):
        coeffs = tuple(np.asarray(c, dtype=float) for c in self.coefficients)
        if len(coeffs) != self.pole_order + self.order + 1:
            raise DimensionError(
                f"expected {self.pole_order + self.order + 1} coefficients, got {len(coeffs)}")
        if len({c.shape for c in coeffs}) != 1:
            raise DimensionError("all coefficients must share one shape")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "shape", coeffs[0].shape)

    @property
    def valid_order(self) -> float:
        return math.inf if self.exact else self.order

    def coefficient(self, k: int) -> np.ndarray:
        """Coefficient of eps**k (zero below the pole and past an exact end)."""
        if k > self.order and not self.exact:
            raise IndexError(f"coefficient {k} lies beyond the computed order {self.order}")
        i = k + self.pole_order
        if 0 <= i < len(self.coefficients):
            return self.coefficients[i]
        return np.zeros(self.shape)

    @property
    def singular_part(self) -> tuple[np.ndarray, ...]:
        return self.coefficients[:self.pole_order]

    @property
    def regular_part(self) -> tuple[np.ndarray, ...]:
        return self.coefficients[self.pole_order:]

    def evaluate(self, eps: float) -> np.ndarray:
        return sum((eps ** k) * self.coefficient(k) for k in range(-self.pole_order, self.order + 1))

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.order and not self.exact:
            raise ValueError("cannot extend a truncated series")
        coeffs = [self.coefficient(k) for k in range(-self.pole_order, order + 1)]
        return LaurentSeries(tuple(coeffs), self.pole_order, order, exact=self.exact and order >= self.order)

    def trim(self, tol: float = 0.0) -> "LaurentSeries":
        """Drop leading negative-power coefficients with max-abs <= tol."""
        s = self.pole_order
        while s > 0 and max_abs(self.coefficient(-s)) <= tol:
            s -= 1
        coeffs = self.coefficients[self.pole_order - s:]
        return LaurentSeries(coeffs, s, self.order, exact=self.exact)

    def transpose(self) -> "LaurentSeries":
        return LaurentSeries(tuple(c.T for c in self.coefficients), self.pole_order, self.order, self.exact)

    def map(self, fn) -> "LaurentSeries":
        return LaurentSeries(tuple(fn(c) for c in self.coefficients), self.pole_order, self.order, self.exact)


SeriesLike = Union[AnalyticMatrixSeries, LaurentSeries]


def _as_laurent(x: SeriesLike) -> LaurentSeries:
    return x.as_laurent() if isinstance(x, AnalyticMatrixSeries) else x


def series_multiply(a: SeriesLike, b: SeriesLike, order: int | None = None) -> LaurentSeries:
    """Cauchy product, truncated at the highest power both factors determine.

    If ``a`` is known through power ``Ka`` with pole ``sa`` (likewise ``b``),
    the product is known through ``min(Ka - sb, Kb - sa)``.  ``order`` caps
    the result further.
    """
    a, b = _as_laurent(a), _as_laurent(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply series of shapes {a.shape} and {b.shape}")
    valid = min(a.valid_order - b.pole_order, b.valid_order - a.pole_order)
    exact = math.isinf(valid)
    if exact:
        valid = a.order + b.order
    if order is not None:
        if order < valid:
            exact = False
        valid = min(valid, order)
    valid = int(valid)
    low = -(a.pole_order + b.pole_order)
    shape = (a.shape[0], b.shape[1])
    coeffs = []
    for k in range(low, valid + 1):
        acc = np.zeros(shape)
        for i in range(-a.pole_order, k + b.pole_order + 1):
            if i > a.order and a.exact:
                break
            j = k - i
            if j > b.order and b.exact:
                continue
            acc = acc + a.coefficient(i) @ b.coefficient(j)
        coeffs.append(acc)
    return LaurentSeries(tuple(coeffs), -low, valid, exact=exact)


def series_add(a: SeriesLike, b: SeriesLike) -> LaurentSeries:
    a, b = _as_laurent(a), _as_laurent(b)
    if a.shape != b.shape:
        raise DimensionError("shape mismatch")
    s = max(a.pole_order, b.pole_order)
    valid = min(a.valid_order, b.valid_order)
    exact = math.isinf(valid)
    top = max(a.order, b.order) if exact else int(valid)
    coeffs = tuple(a.coefficient(k) + b.coefficient(k) for k in range(-s, top + 1))
    return LaurentSeries(coeffs, s, top, exact=exact)


def identity_series(n: int) -> AnalyticMatrixSeries:
    return AnalyticMatrixSeries((np.eye(n),))


# ---------------------------------------------------------------------------
# augmented systems and pole order


@dataclass(frozen=True)
class AugmentedSystem:
    t: int
    n: int
    block: np.ndarray
    top_row_blocks: tuple[np.ndarray, ...] = ()


def _require_square(series: AnalyticMatrixSeries) -> int:
    rows, cols = series.shape
    if rows != cols:
        raise DimensionError(f"series must be square, got {rows}x{cols}")
    return rows


def build_augmented(series: AnalyticMatrixSeries, t: int, with_inverse: bool = False,
                    tol: float = 0.0) -> AugmentedSystem:
    """Block lower-triangular matrix with A_{i-j} in block (i, j), i >= j."""
    n = _require_square(series)
    if t < 0:
        raise ValueError("t must be >= 0")
    big = np.zeros(((t + 1) * n, (t + 1) * n))
    for i in range(t + 1):
        for j in range(i + 1):
            big[i * n:(i + 1) * n, j * n:(j + 1) * n] = series.coefficient(i - j)
    top: tuple[np.ndarray, ...] = ()
    if with_inverse:
        g = pinv(big, tol)
        top = tuple(g[:n, j * n:(j + 1) * n] for j in range(t + 1))
    return AugmentedSystem(t, n, big, top)


def pole_order(series: AnalyticMatrixSeries, max_t: int | None = None, tol: float = 0.0) -> int:
    """Smallest t with rank(aug_t) = rank(aug_{t-1}) + n, where rank(aug_{-1}) = 0."""
    n = _require_square(series)
    max_t = 2 * n if max_t is None else max_t
    prev = 0
    for t in range(max_t + 1):
        r = numeric_rank(build_augmented(series, t).block, tol)
        if r == prev + n:
            return t
        prev = r
    raise NoPoleFoundError(f"no pole found with order <= {max_t}; A(eps) may be singular for all eps")


def _recursion(series: AnalyticMatrixSeries, s: int, count: int, tol: float) -> list[np.ndarray]:
    aug = build_augmented(series, s, with_inverse=True, tol=tol)
    g = aug.top_row_blocks
    n = aug.n
    eye = np.eye(n)
    xs = [g[s]]
    for k in range(1, count):
        acc = np.zeros((n, n))
        for j in range(s + 1):
            rhs = eye.copy() if j + k == s else np.zeros((n, n))
            for i in range(1, k + 1):
                rhs -= series.coefficient(i + j) @ xs[k - i]
            acc += g[j] @ rhs
        xs.append(acc)
    return xs


def invert_series(series: AnalyticMatrixSeries, order: int, max_t: int | None = None,
                  tol: float = 0.0) -> LaurentSeries:
    """Laurent coefficients Y_{-s}, ..., Y_order of the inverse of ``series``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    s = pole_order(series, max_t, tol)
    while True:
        xs = _recursion(series, s, s + order + 1, tol)
        if s == 0:
            break
        # the rank test can overshoot on nearly singular input; a vanishing
        # leading coefficient means the true pole is lower
        scale = max(1.0, max(max_abs(x) for x in xs))
        if max_abs(xs[0]) > 1e-9 * scale:
            break
        s -= 1
    return LaurentSeries(tuple(xs), s, order)
