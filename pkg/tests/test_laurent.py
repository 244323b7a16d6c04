import random

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from factories import random_rational_series
from perturbstat import laurent as la
from perturbstat.errors import DimensionError, NoPoleFoundError
from perturbstat.oracle import adjugate_laurent, pointwise_residual, rational_series

A = np.array([[1.0, 1.0], [1.0, 1.0]])
B = np.array([[-1.0, 1.0], [-2.0, -1.0]])
WORKED = la.AnalyticMatrixSeries.of(A, B)


def test_series_is_immutable():
    with pytest.raises(ValueError):
        WORKED.coefficients[0][0, 0] = 5.0


def test_series_rejects_mixed_shapes():
    with pytest.raises(DimensionError):
        la.AnalyticMatrixSeries.of(np.eye(2), np.eye(3))


def test_evaluate_is_polynomial():
    assert np.array_equal(WORKED.evaluate(0.5), A + 0.5 * B)
    assert np.array_equal(WORKED.coefficient(7), np.zeros((2, 2)))


def test_build_augmented_t0_and_t1():
    assert np.array_equal(la.build_augmented(WORKED, 0).block, A)
    big = la.build_augmented(WORKED, 1).block
    assert np.array_equal(big, np.block([[A, np.zeros((2, 2))], [B, A]]))


def test_build_augmented_quadratic_third_row():
    a0, a1, a2 = np.eye(2), 2 * np.eye(2), 3 * np.eye(2)
    big = la.build_augmented(la.AnalyticMatrixSeries.of(a0, a1, a2), 2).block
    assert np.array_equal(big[4:, :], np.hstack([a2, a1, a0]))
    assert big.shape == (6, 6)


def test_build_augmented_needs_square():
    with pytest.raises(DimensionError):
        la.build_augmented(la.AnalyticMatrixSeries.of(np.ones((2, 3))), 1)


def test_pole_order_examples():
    assert la.pole_order(la.AnalyticMatrixSeries.of(np.eye(3), np.ones((3, 3)))) == 0
    assert la.pole_order(WORKED) == 1
    assert la.pole_order(la.AnalyticMatrixSeries.of(np.zeros((2, 2)), np.eye(2))) == 1


def test_pole_order_identically_singular():
    with pytest.raises(NoPoleFoundError):
        la.pole_order(la.AnalyticMatrixSeries.of(A, A))
    with pytest.raises(NoPoleFoundError):
        la.invert_series(la.AnalyticMatrixSeries.of(np.zeros((2, 2))), 1)


def test_invert_worked_example():
    inv = la.invert_series(WORKED, 1)
    assert inv.pole_order == 1
    np.testing.assert_allclose(inv.coefficient(-1), [[-1, 1], [1, -1]], atol=1e-9)
    np.testing.assert_allclose(inv.coefficient(0), [[-2, 4], [1, -2]], atol=1e-9)
    np.testing.assert_allclose(inv.coefficient(1), [[-6, 12], [3, -6]], atol=1e-9)


def test_invert_identity_and_diagonal():
    inv = la.invert_series(la.AnalyticMatrixSeries.of(np.eye(2), np.zeros((2, 2))), 3)
    assert inv.pole_order == 0
    np.testing.assert_allclose(inv.coefficient(0), np.eye(2), atol=1e-15)
    for k in (1, 2, 3):
        np.testing.assert_allclose(inv.coefficient(k), 0.0, atol=1e-15)

    inv = la.invert_series(la.AnalyticMatrixSeries.of(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 1)
    assert inv.pole_order == 1
    np.testing.assert_allclose(inv.coefficient(-1), np.diag([0.0, 1.0]), atol=1e-12)
    np.testing.assert_allclose(inv.coefficient(0), np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(inv.coefficient(1), 0.0, atol=1e-12)


def test_coefficient_past_order_is_unknown():
    inv = la.invert_series(WORKED, 1)
    with pytest.raises(IndexError):
        inv.coefficient(2)
    np.testing.assert_array_equal(inv.coefficient(-4), np.zeros((2, 2)))


def test_multiply_by_identity_and_polynomials():
    inv = la.invert_series(WORKED, 2)
    same = la.series_multiply(la.identity_series(2), inv)
    assert same.pole_order == inv.pole_order and same.order == inv.order
    for k in range(-1, 3):
        np.testing.assert_array_equal(same.coefficient(k), inv.coefficient(k))

    p = la.AnalyticMatrixSeries.of([[1.0]], [[2.0]], [[-1.0]])
    q = la.AnalyticMatrixSeries.of([[3.0]], [[0.0]], [[4.0]], [[5.0]])
    prod = la.series_multiply(p, q)
    expected = np.polymul([-1.0, 2.0, 1.0], [5.0, 4.0, 0.0, 3.0])[::-1]
    assert prod.exact
    np.testing.assert_allclose([prod.coefficient(k)[0, 0] for k in range(6)], expected)


def test_multiply_tracks_valid_order():
    inv = la.invert_series(WORKED, 2)  # pole 1, known through eps^2
    prod = la.series_multiply(WORKED, inv)
    assert prod.order == 2
    twice = la.series_multiply(inv, inv)  # each factor has a pole of order 1
    assert twice.pole_order == 2 and twice.order == 1


def test_multiply_shape_mismatch():
    with pytest.raises(DimensionError):
        la.series_multiply(la.AnalyticMatrixSeries.of(np.ones((2, 3))), la.identity_series(2))


def _identity_defect(series, inv):
    prod = la.series_multiply(series, inv)
    n = series.shape[0]
    worst = 0.0
    for k in range(-prod.pole_order, prod.order + 1):
        target = np.eye(n) if k == 0 else np.zeros((n, n))
        worst = max(worst, float(np.max(np.abs(prod.coefficient(k) - target))))
    return worst


@st.composite
def known_pole_series(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    pole = draw(st.integers(0, 2))
    degree = draw(st.integers(1, 2))
    n = draw(st.integers(2 if (pole == 2 and degree == 1) else 1, 4))
    mats, s = random_rational_series(random.Random(seed), n, pole, degree)
    return mats, s


@given(known_pole_series(), st.integers(0, 3))
def test_inverse_identity(case, order):
    mats, s = case
    series = rational_series(mats)
    inv = la.invert_series(series, order)
    assert inv.pole_order == s
    assert _identity_defect(series, inv) < 1e-8
    if s:
        assert np.max(np.abs(inv.coefficient(-s))) > 1e-8


@given(known_pole_series(), st.integers(0, 3))
def test_matches_exact_adjugate(case, order):
    mats, s = case
    exact = adjugate_laurent(mats, order).to_float()
    inv = la.invert_series(rational_series(mats), order)
    assert exact.pole_order == inv.pole_order == s
    for k in range(-s, order + 1):
        np.testing.assert_allclose(inv.coefficient(k), exact.coefficient(k), atol=1e-9)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_pointwise_error_decays(seed, order):
    g = np.random.default_rng(seed)
    n = int(g.integers(1, 5))
    a0 = g.normal(size=(n, n)) + 3 * np.eye(n)
    # the grid must sit well inside the disc of convergence
    assume(np.linalg.svd(a0, compute_uv=False)[-1] > 0.5)
    series = la.AnalyticMatrixSeries.of(a0, g.normal(size=(n, n)), g.normal(size=(n, n)))
    inv = la.invert_series(series, order)
    errs = [np.max(np.abs(inv.evaluate(e) - np.linalg.inv(series.evaluate(e)))) for e in (1e-2, 1e-3)]
    # O(eps^(K+1)): one decade should buy about K+1 digits
    assert errs[1] <= max(errs[0] * 10.0 ** (-(order + 1) + 0.5), 1e-13)


@given(st.integers(0, 2**32 - 1))
def test_regular_linear_recursion(seed):
    g = np.random.default_rng(seed)
    n = int(g.integers(1, 5))
    a0 = g.normal(size=(n, n)) + 3 * np.eye(n)
    a1 = g.normal(size=(n, n))
    inv = la.invert_series(la.AnalyticMatrixSeries.of(a0, a1), 4)
    y0 = inv.coefficient(0)
    assert np.max(np.abs(y0 - np.linalg.inv(a0))) < 1e-10
    for k in range(4):
        step = -y0 @ a1 @ inv.coefficient(k)
        assert np.max(np.abs(inv.coefficient(k + 1) - step)) < 1e-10 * max(1.0, np.max(np.abs(step)))


def test_singular_linear_recursion():
    # pole of order 2 from a Jordan-type pencil
    mats, s = random_rational_series(random.Random(7), 3, 2, 1)
    series = rational_series(mats)
    inv = la.invert_series(series, 1)
    assert inv.pole_order == s == 2
    a0 = series.coefficient(0)
    for k in range(1, s):
        lhs = inv.coefficient(-k - 1)
        rhs = -inv.coefficient(-1) @ a0 @ inv.coefficient(-k)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_pointwise_residual_orders():
    inv = la.invert_series(WORKED, 2)
    grid = [1e-2, 1e-3]
    good = pointwise_residual(WORKED, inv, grid)
    short = pointwise_residual(WORKED, inv.truncate(1), grid)
    assert good < 1e-4 and short > 5 * good
    wrong_pole = la.LaurentSeries(inv.coefficients[1:], 0, 2)
    assert pointwise_residual(WORKED, wrong_pole, grid) > 0.1


def test_trim_and_truncate():
    inv = la.invert_series(WORKED, 2)
    padded = la.LaurentSeries((np.zeros((2, 2)),) + inv.coefficients, 2, 2)
    assert padded.trim().pole_order == 1
    assert inv.truncate(0).order == 0
    with pytest.raises(ValueError):
        inv.truncate(5)
