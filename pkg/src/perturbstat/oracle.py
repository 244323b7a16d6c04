"""Independent checks used by the test-suite and the reproduction script.

* :func:`adjugate_laurent` expands ``det(A(eps))^{-1} adj(A(eps))`` in exact
  rational arithmetic.  It is slow on purpose and shares no code with the
  floating-point inversion in :mod:`perturbstat.laurent`.
* :func:`pointwise_residual` samples ``A(eps) Y(eps) - I`` on a grid.
* :func:`minimize_sse` runs a golden-section search on the exact residual sum
  of squares, evaluated by ``numpy.linalg.lstsq`` rather than by any series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NoInteriorMinimumError, NoPoleFoundError, ValidityDiscError
from .laurent import AnalyticMatrixSeries, LaurentSeries
from .numerics import RationalMatrix

Poly = tuple[Fraction, ...]  # low to high degree, no trailing zeros

MAX_DIM = 6
MAX_ORDER = 6


def _trim(p: Sequence[Fraction]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pneg(a: Poly) -> Poly:
    return tuple(-x for x in a)


def pmul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def pdiv_exact(a: Poly, b: Poly) -> Poly:
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    rem = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    for k in range(len(q) - 1, -1, -1):
        coef = rem[k + len(b) - 1] / b[-1]
        q[k] = coef
        for j, y in enumerate(b):
            rem[k + j] -= coef * y
    if any(rem):
        raise ArithmeticError("polynomial division left a remainder")
    return _trim(q)


def valuation(p: Poly) -> int:
    for i, x in enumerate(p):
        if x:
            return i
    raise ValueError("valuation of the zero polynomial")


def bareiss_det(m: list[list[Poly]]) -> Poly:
    """Fraction-free elimination over Q[eps]; every division is exact."""
    a = [list(row) for row in m]
    n = len(a)
    sign = 1
    prev: Poly = (Fraction(1),)
    for k in range(n - 1):
        if not a[k][k]:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return ()
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = padd(pmul(a[k][k], a[i][j]), pneg(pmul(a[i][k], a[k][j])))
                a[i][j] = pdiv_exact(num, prev)
        prev = a[k][k]
    det = a[n - 1][n - 1] if n else (Fraction(1),)
    return det if sign > 0 else pneg(det)


def _minor(m: list[list[Poly]], row: int, col: int) -> list[list[Poly]]:
    return [[x for j, x in enumerate(r) if j != col] for i, r in enumerate(m) if i != row]


def adjugate(m: list[list[Poly]]) -> list[list[Poly]]:
    n = len(m)
    if n == 1:
        return [[(Fraction(1),)]]
    adj = [[() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            cof = bareiss_det(_minor(m, j, i))
            adj[i][j] = cof if (i + j) % 2 == 0 else pneg(cof)
    return adj


def reciprocal_series(q: Poly, order: int) -> list[Fraction]:
    """First ``order + 1`` power-series coefficients of 1/q, q(0) != 0."""
    if not q or q[0] == 0:
        raise ZeroDivisionError("reciprocal needs a nonzero constant term")
    r = [Fraction(1) / q[0]]
    for k in range(1, order + 1):
        acc = sum((q[i] * r[k - i] for i in range(1, min(k, len(q) - 1) + 1)), Fraction(0))
        r.append(-acc / q[0])
    return r


@dataclass(frozen=True)
class ExactLaurent:
    pole_order: int
    order: int
    coefficients: tuple[RationalMatrix, ...]
    determinant: Poly

    def coefficient(self, k: int) -> RationalMatrix:
        return self.coefficients[k + self.pole_order]

    def to_float(self) -> LaurentSeries:
        return LaurentSeries(tuple(c.to_float() for c in self.coefficients), self.pole_order, self.order)


def _poly_matrix(coefficients: Sequence) -> list[list[Poly]]:
    mats = [c if isinstance(c, RationalMatrix) else RationalMatrix.of(c) for c in coefficients]
    rows, cols = mats[0].rows, mats[0].cols
    if any((m.rows, m.cols) != (rows, cols) for m in mats):
        raise ValueError("coefficient shapes differ")
    if rows != cols:
        raise ValueError("series must be square")
    return [[_trim([m.entries[i][j] for m in mats]) for j in range(cols)] for i in range(rows)]


def adjugate_laurent(coefficients: Sequence, order: int) -> ExactLaurent:
    """Exact Laurent coefficients of ``A(eps)^{-1}`` for rational ``A_0, A_1, ...``.

    ``coefficients`` holds the A_k as RationalMatrix or nested sequences of
    ints/Fractions/decimal strings.
    """
    pm = _poly_matrix(coefficients)
    n = len(pm)
    if n > MAX_DIM or order > MAX_ORDER:
        raise ValueError(f"oracle is limited to n <= {MAX_DIM}, order <= {MAX_ORDER}")
    det = bareiss_det(pm)
    if not det:
        raise NoPoleFoundError("det A(eps) is identically zero")
    v = valuation(det)
    q = det[v:]
    adj = adjugate(pm)
    recip = reciprocal_series(q, order + v)
    # A^{-1} = eps^{-v} adj(eps) / q(eps); coefficient of eps^k needs degree k + v
    coeffs = []
    for k in range(-v, order + 1):
        d = k + v
        entries = []
        for i in range(n):
            row = []
            for j in range(n):
                a = adj[i][j]
                row.append(sum((a[t] * recip[d - t] for t in range(min(d, len(a) - 1) + 1)),
                               Fraction(0)))
            entries.append(row)
        coeffs.append(RationalMatrix.of(entries))
    s = v
    while s > 0 and coeffs[v - s].is_zero():
        s -= 1
    return ExactLaurent(s, order, tuple(coeffs[v - s:]), det)


def rational_series(coefficients: Sequence) -> AnalyticMatrixSeries:
    mats = [c if isinstance(c, RationalMatrix) else RationalMatrix.of(c) for c in coefficients]
    return AnalyticMatrixSeries(tuple(m.to_float() for m in mats))


def pointwise_residual(series: AnalyticMatrixSeries, candidate: LaurentSeries,
                       eps_grid: Sequence[float]) -> float:
    """max over the grid of ||A(eps) Y(eps) - I||_inf (max-abs entry)."""
    n = series.shape[0]
    worst = 0.0
    for eps in eps_grid:
        r = series.evaluate(eps) @ candidate.evaluate(eps) - np.eye(n)
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


# ---------------------------------------------------------------------------
# golden-section search on the exact SSE

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def exact_sse(design, y, eps: float, max_cond: float = 1e12) -> float:
    x = np.asarray(design.evaluate(eps))
    sv = np.linalg.svd(x, compute_uv=False)
    if sv[-1] == 0 or (sv[0] / sv[-1]) ** 2 > max_cond:
        raise ValidityDiscError(f"Gram matrix is numerically singular at eps={eps}")
    y = np.asarray(y, dtype=float).ravel()
    beta, *_ = np.linalg.lstsq(x.T, y, rcond=None)
    r = y - x.T @ beta
    return float(r @ r)


def golden_section(f, lo: float, hi: float, tol: float = 1e-6) -> tuple[float, float]:
    a, b = min(lo, hi), max(lo, hi)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return a, b


def _sse_or_inf(design, y, eps: float) -> float:
    try:
        return exact_sse(design, y, eps)
    except ValidityDiscError:
        return math.inf


def minimize_sse(design, y, bracket: tuple[float, float] = (-0.3, 0.3), tol: float = 1e-6) -> float:
    """Minimizer of the exact SSE(eps) on ``bracket``.

    Points where the Gram matrix is numerically singular (isolated values of
    eps such as 0 for a singular perturbation) are skipped.
    """
    lo, hi = bracket
    grid = np.linspace(lo, hi, 41)
    values = np.array([_sse_or_inf(design, y, e) for e in grid])
    finite = values[np.isfinite(values)]
    if finite.size < 3:
        raise ValidityDiscError("SSE(eps) is undefined on most of the bracket")
    spread = finite.max() - finite.min()
    if spread <= 1e-10 * max(1.0, abs(finite.max())):
        raise NoInteriorMinimumError("SSE(eps) is flat on the bracket; eps is not identifiable")
    # start from the best grid cell so a multimodal curve still yields its global grid minimum
    k = int(np.argmin(values))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    a, b = golden_section(lambda e: _sse_or_inf(design, y, e), a, b, tol)
    x = 0.5 * (a + b)
    if x - lo <= tol or hi - x <= tol:
        raise NoInteriorMinimumError(f"minimum sits on the bracket edge at {x:.6g}")
    return x
