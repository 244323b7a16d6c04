"""Dense real-matrix kernels and the F distribution.

Matrices are plain 2-D ``float64`` numpy arrays.  numpy supplies storage and
elementwise arithmetic; the factorizations (one-sided Jacobi SVD, cyclic
Jacobi eigensolver, Cholesky) and the incomplete beta function are written
out here so that the rank decisions driving pole-order detection are fully
under our control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import AsymmetryError, DimensionError, NotPositiveDefiniteError

EPS = np.finfo(float).eps


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D float array (vectors become single columns)."""
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def max_abs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


# ---------------------------------------------------------------------------
# SVD / pseudoinverse / rank


def _rotation_tangent(diff: float, off: float) -> float:
    # tangent of the Jacobi angle (smaller root), free of the diff/off quotient
    sign = math.copysign(1.0, diff) * math.copysign(1.0, off)
    return sign * 2.0 * abs(off) / (abs(diff) + math.hypot(diff, 2.0 * off))


def svd_jacobi(m, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``m = U @ diag(s) @ V.T`` by one-sided (Hestenes) Jacobi.

    Singular values come back in descending order.  Columns of U belonging
    to zero singular values are left as zero vectors; they never contribute
    to a pseudoinverse.
    """
    m = as_matrix(m)
    if m.shape[0] < m.shape[1]:
        v, s, u = svd_jacobi(m.T, max_sweeps)
        return u, s, v

    u = m.copy()
    n = u.shape[1]
    v = np.eye(n)
    # a column at rounding level of the whole matrix is numerically zero; rotating
    # it only shuffles noise, and without this check such columns never settle
    floor = EPS * EPS * float(np.sum(u * u))
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = u[:, p] @ u[:, p]
                beta = u[:, q] @ u[:, q]
                gamma = u[:, p] @ u[:, q]
                if min(alpha, beta) <= floor or abs(gamma) <= EPS * math.sqrt(alpha * beta):
                    continue
                rotated = True
                t = _rotation_tangent(beta - alpha, gamma)
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                up, uq = u[:, p].copy(), u[:, q]
                u[:, p] = c * up - s * uq
                u[:, q] = s * up + c * uq
                vp, vq = v[:, p].copy(), v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break

    sv = np.sqrt(np.sum(u * u, axis=0))
    order = np.argsort(-sv, kind="stable")
    sv, u, v = sv[order], u[:, order], v[:, order]
    nz = sv > 0
    u[:, nz] /= sv[nz]
    u[:, ~nz] = 0.0
    return u, sv, v


def default_tol(shape: tuple[int, int], sigma_max: float) -> float:
    return max(shape) * EPS * sigma_max


def _cutoff(m: np.ndarray, s: np.ndarray, tol: float) -> float:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if tol == 0:
        tol = default_tol(m.shape, s[0] if s.size else 0.0)
    return tol


def pinv(m, tol: float = 0.0) -> np.ndarray:
    """Moore-Penrose inverse; singular values <= tol are treated as zero.

    ``tol=0`` selects max(rows, cols) * eps * sigma_max.
    """
    m = as_matrix(m)
    u, s, v = svd_jacobi(m)
    cut = _cutoff(m, s, tol)
    keep = s > cut
    return (v[:, keep] / s[keep]) @ u[:, keep].T


def numeric_rank(m, tol: float = 0.0) -> int:
    m = as_matrix(m)
    _, s, _ = svd_jacobi(m)
    return int(np.sum(s > _cutoff(m, s, tol)))


# ---------------------------------------------------------------------------
# SPD solve and symmetric eigenproblem


def cholesky(m) -> np.ndarray:
    m = as_matrix(m)
    n = m.shape[0]
    if m.shape[1] != n:
        raise DimensionError("cholesky needs a square matrix")
    low = np.zeros_like(m)
    for j in range(n):
        d = m[j, j] - low[j, :j] @ low[j, :j]
        if d <= 0.0:
            raise NotPositiveDefiniteError(f"pivot {j} is {d:.3g}")
        low[j, j] = math.sqrt(d)
        low[j + 1:, j] = (m[j + 1:, j] - low[j + 1:, :j] @ low[j, :j]) / low[j, j]
    return low


def solve_spd(m, rhs) -> np.ndarray:
    """Solve ``m @ x = rhs`` for symmetric positive definite ``m``."""
    low = cholesky(m)
    rhs = np.asarray(rhs, dtype=float)
    vec = rhs.ndim == 1
    b = rhs.reshape(-1, 1) if vec else rhs.copy()
    if b.shape[0] != low.shape[0]:
        raise DimensionError(f"rhs has {b.shape[0]} rows, matrix is {low.shape}")
    n = low.shape[0]
    y = np.zeros_like(b)
    for i in range(n):
        y[i] = (b[i] - low[i, :i] @ y[:i]) / low[i, i]
    x = np.zeros_like(b)
    for i in reversed(range(n)):
        x[i] = (y[i] - low[i + 1:, i] @ x[i + 1:]) / low[i, i]
    return x.ravel() if vec else x


def sym_eigen(m, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` with values descending and the columns of
    ``vectors`` orthonormal.  Each eigenvector is signed so that its
    largest-magnitude entry is positive.
    """
    a = as_matrix(m).copy()
    n = a.shape[0]
    if a.shape[1] != n:
        raise DimensionError("sym_eigen needs a square matrix")
    if max_abs(a - a.T) > 1e-12 * max(1.0, max_abs(a)):
        raise AsymmetryError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= EPS * max(1e-300, math.sqrt(np.sum(a * a))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                t = _rotation_tangent(a[q, q] - a[p, p], a[p, q])
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    vals = np.diag(a).copy()
    order = np.argsort(-vals, kind="stable")
    vals, v = vals[order], v[:, order]
    for j in range(n):
        k = int(np.argmax(np.abs(v[:, j])))
        if v[k, j] < 0:
            v[:, j] = -v[:, j]
    return vals, v


# ---------------------------------------------------------------------------
# Incomplete beta and the F distribution


def _betacf(a: float, b: float, x: float, max_iter: int = 10_000) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, 1.0 - x) / b


def f_cdf(f: float, d1: int, d2: int) -> float:
    if f <= 0:
        return 0.0
    return betainc(d1 / 2.0, d2 / 2.0, d1 * f / (d1 * f + d2))


def f_sf(f: float, d1: int, d2: int) -> float:
    if f <= 0:
        return 1.0
    # upper tail through the complementary argument keeps precision for small alpha
    return betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))


def f_quantile(alpha: float, d1: int, d2: int) -> float:
    """Upper-alpha point of F(d1, d2): the value with P(F > value) = alpha."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    lo, hi = 0.0, 1.0
    while f_sf(hi, d1, d2) > alpha:
        lo, hi = hi, 2.0 * hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f_sf(mid, d1, d2) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Exact rational matrices (oracle substrate)


@dataclass(frozen=True)
class RationalMatrix:
    rows: int
    cols: int
    entries: tuple[tuple[Fraction, ...], ...]

    @classmethod
    def of(cls, data: Sequence[Sequence]) -> "RationalMatrix":
        entries = tuple(tuple(Fraction(x) for x in row) for row in data)
        if not entries or not entries[0] or len({len(r) for r in entries}) != 1:
            raise DimensionError("rational matrix must be rectangular and non-empty")
        return cls(len(entries), len(entries[0]), entries)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls.of([[0] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.of([[int(i == j) for j in range(n)] for i in range(n)])

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch")
        return RationalMatrix.of([[x + y for x, y in zip(r, s)]
                                  for r, s in zip(self.entries, other.entries)])

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix.of([[-x for x in r] for r in self.entries])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        return self + (-other)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise DimensionError("shape mismatch")
        cols = list(zip(*other.entries))
        return RationalMatrix.of([[sum((x * y for x, y in zip(r, c)), Fraction(0))
                                   for c in cols] for r in self.entries])

    def scale(self, k) -> "RationalMatrix":
        k = Fraction(k)
        return RationalMatrix.of([[k * x for x in r] for r in self.entries])

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.entries])
