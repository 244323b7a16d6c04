import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_design
from perturbstat import gallant, pca
from perturbstat.errors import DegenerateError
from perturbstat.linmodel import PerturbedDesign

RANK1 = PerturbedDesign.of([[2, 2, 1, 1], [0, 0, 0, 0]], [[0, 0, 0, 0], [1, 1, 1, 1]])


@st.composite
def separated_pairs(draw, p=2):
    """Symmetric S0 (eigenvalues at least 0.5 apart) and a bounded symmetric S1."""
    seed = draw(st.integers(0, 2**32 - 1))
    g = np.random.default_rng(seed)
    q, _ = np.linalg.qr(g.normal(size=(p, p)))
    vals = np.cumsum(0.5 + 2 * g.random(p))
    s0 = q @ np.diag(vals) @ q.T
    a = g.normal(size=(p, p))
    return 0.5 * (s0 + s0.T), 0.5 * (a + a.T)


def test_covariance_series_validation():
    with pytest.raises(ValueError):
        pca.CovarianceSeries((np.array([[1.0, 2.0], [0.0, 1.0]]),))
    with pytest.raises(ValueError):
        pca.CovarianceSeries((np.diag([1.0, -1.0]),))


def test_covariance_zero_perturbation(rng):
    x0 = rng.normal(size=(2, 8))
    y = rng.normal(size=(8, 3))
    cov = pca.covariance_series(PerturbedDesign.of(x0, np.zeros((2, 8))), y, 2)
    p0 = np.eye(8) - x0.T @ np.linalg.solve(x0 @ x0.T, x0)
    np.testing.assert_allclose(cov.coefficients[0], y.T @ p0 @ y, atol=1e-12)
    assert np.max(np.abs(cov.coefficients[1])) < 1e-13
    assert np.max(np.abs(cov.coefficients[2])) < 1e-13


def test_covariance_rank1_design(rng):
    cov = pca.covariance_series(RANK1, rng.normal(size=(4, 2)), 3)
    for s in cov.coefficients[1:]:
        assert np.max(np.abs(s)) < 1e-10


@pytest.mark.parametrize("order", [1, 2])
def test_covariance_matches_direct(rng, order):
    des = random_design(rng, m=2, n=9, scale=0.3)
    y = rng.normal(size=(9, 2))
    cov = pca.covariance_series(des, y, order)

    def direct(e):
        x = des.evaluate(e)
        return y.T @ (np.eye(9) - x.T @ np.linalg.solve(x @ x.T, x)) @ y

    errs = [np.max(np.abs(cov.evaluate(e) - direct(e))) for e in (1e-2, 1e-3)]
    assert errs[1] <= errs[0] * 10.0 ** (-(order + 0.5))


def test_gap_examples():
    assert pca.eigen_gap_2x2(np.diag([3.0, 1.0]), np.zeros((2, 2))) == (2.0, 0.0)
    assert pca.eigen_gap_2x2(np.diag([3.0, 1.0]), np.diag([1.0, -1.0])) == pytest.approx((2.0, 2.0))
    gap = pca.eigen_gap_2x2([[2.0, 1.0], [1.0, 2.0]], [[0.0, 1.0], [1.0, 0.0]])
    assert gap == pytest.approx((2.0, 2.0), abs=1e-9)


def test_gap_degenerate():
    with pytest.raises(DegenerateError):
        pca.eigen_gap_2x2(np.eye(2), np.diag([1.0, 0.0]))


def test_eigen_pair_examples():
    e = pca.eigen_pair_series(np.diag([3.0, 1.0]), np.zeros((2, 2)), 0)
    assert e.lambda1 == 0.0 and not e.d1.any()
    e = pca.eigen_pair_series([[2.0, 1.0], [1.0, 2.0]], [[0.0, 1.0], [1.0, 0.0]], 0)
    assert e.lambda0 == pytest.approx(3.0, abs=1e-12)
    assert e.lambda1 == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(e.d1)) < 1e-12


def test_eigen_pair_degenerate_and_index():
    with pytest.raises(DegenerateError):
        pca.eigen_pair_series(np.eye(3), np.zeros((3, 3)), 1)
    with pytest.raises(IndexError):
        pca.eigen_pair_series(np.eye(2) * [1, 2], np.zeros((2, 2)), 2)
    exps = pca.eigen_expansions(np.diag([2.0, 1.0, 1.0]), np.zeros((3, 3)))
    assert exps[0] is not None and exps[1] is None and exps[2] is None


@given(separated_pairs())
def test_trace_identity_and_gap_consistency(pair):
    s0, s1 = pair
    top = pca.eigen_pair_series(s0, s1, 0)
    bottom = pca.eigen_pair_series(s0, s1, 1)
    assert abs(top.lambda0 + bottom.lambda0 - np.trace(s0)) < 1e-10
    assert abs(top.lambda1 + bottom.lambda1 - np.trace(s1)) < 1e-10
    gap0, gap1 = pca.eigen_gap_2x2(s0, s1)
    assert gap0 == pytest.approx(top.lambda0 - bottom.lambda0, abs=1e-9)
    assert gap1 == pytest.approx(top.lambda1 - bottom.lambda1, abs=1e-9)


@given(st.one_of(separated_pairs(2), separated_pairs(3), separated_pairs(4)))
def test_first_order_equations_and_decay(pair):
    s0, s1 = pair
    p = s0.shape[0]
    for i in range(p):
        e = pca.eigen_pair_series(s0, s1, i)
        assert np.max(np.abs(s0 @ e.d0 - e.lambda0 * e.d0)) < 1e-8
        lhs = (s0 - e.lambda0 * np.eye(p)) @ e.d1
        rhs = (e.lambda1 * np.eye(p) - s1) @ e.d0
        assert np.max(np.abs(lhs - rhs)) < 1e-8
        assert abs(e.d0 @ e.d1) < 1e-10
        norm1 = np.linalg.norm(s1, 2)
        gap = min(abs(e.lambda0 - v) for j, v in enumerate(np.linalg.eigvalsh(s0)[::-1]) if j != i)
        for eps in (1e-2, 1e-3):
            exact = np.sort(np.linalg.eigvalsh(s0 + eps * s1))[::-1][i]
            # second-order bound for a simple eigenvalue under a symmetric perturbation
            bound = eps ** 2 * norm1 ** 2 / (gap - 2 * eps * norm1)
            assert abs(e.value(eps) - exact) <= bound * (1 + 1e-6) + 1e-12
            # first-order terms cancel, leaving eps^2 (S1 - lambda1) d1
            d = e.vector(eps)
            res = np.linalg.norm((s0 + eps * s1) @ d - e.value(eps) * d)
            want = eps ** 2 * np.linalg.norm((s1 - e.lambda1 * np.eye(p)) @ e.d1)
            assert abs(res - want) <= 1e-6 * want + 1e-13


def test_gallant_two_column_trace_identity():
    des = gallant.design()
    cov = pca.covariance_series(des, gallant.TABLE[:, 4:6], 1)
    s0, s1 = cov.coefficients
    exps = pca.eigen_expansions(s0, s1)
    assert sum(e.lambda0 for e in exps) == pytest.approx(np.trace(s0), abs=1e-9)
    assert sum(e.lambda1 for e in exps) == pytest.approx(np.trace(s1), abs=1e-9)
