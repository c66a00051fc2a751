import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhscellfree.quadrature import QuadratureError, quad_boxes, quad_nd


def test_unit_square_area():
    assert quad_nd(lambda x, y: np.ones_like(x), [0, 0], [1, 1]).value == pytest.approx(1.0, abs=1e-14)


def test_radial_integral_matches_antiderivative():
    R, H = 100.0, 10.0
    oracle = math.asinh(R / H) - R / math.sqrt(R * R + H * H)
    res = quad_nd(lambda r: r * r / (r * r + H * H) ** 1.5, [0.0], [R], rtol=1e-12)
    assert res.value == pytest.approx(oracle, rel=1e-10)
    assert oracle == pytest.approx(2.0032, abs=1e-4)


def test_gaussian_3d():
    res = quad_nd(lambda x, y, z: np.exp(-(x * x + y * y + z * z)), [-6] * 3, [6] * 3,
                  rtol=1e-10)
    assert res.value == pytest.approx(math.pi**1.5, rel=1e-9)


def test_error_estimate_within_tolerance():
    res = quad_nd(lambda x: 1.0 / (1e-3 + x * x), [-1.0], [1.0], rtol=1e-9)
    exact = 2.0 / math.sqrt(1e-3) * math.atan(1.0 / math.sqrt(1e-3))
    assert abs(res.value - exact) <= 1e-8 * exact
    assert res.error <= 1e-9 * abs(res.value)


def test_batch_owners_are_independent():
    lower = np.array([[0.0], [0.0], [1.0]])
    upper = np.array([[1.0], [2.0], [3.0]])
    res = quad_boxes(lambda p, o: p[:, 0] ** 2, lower, upper, rtol=1e-12)
    assert np.allclose(res.values, [1 / 3, 8 / 3, 26 / 3], rtol=1e-12)


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError):
        quad_nd(lambda x: np.full_like(x, np.nan), [0.0], [1.0])


def test_budget_exhaustion_reports_estimate():
    # a discontinuity cannot be resolved to 1e-15 with a tiny box budget
    with pytest.raises(QuadratureError) as info:
        quad_nd(lambda x: (x > 1 / 3).astype(float), [0.0], [1.0], rtol=1e-15,
                max_rounds=5)
    assert info.value.estimate is not None
    assert info.value.index == 0


@given(a=st.floats(-3, 3), b=st.floats(0.1, 4), k=st.integers(0, 6))
def test_polynomials_exact(a, b, k):
    res = quad_nd(lambda x: x**k, [a], [a + b], rtol=1e-12)
    exact = ((a + b) ** (k + 1) - a ** (k + 1)) / (k + 1)
    assert res.value == pytest.approx(exact, rel=1e-11, abs=1e-12)
