import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ingb.errors import ContractError
from ingb.geometry import log_ball_volume, log_gamma, minkowski_distance

# 30-digit reference values of ln Gamma (mpmath.loggamma)
LGAMMA_REF = {
    0.5: 0.572364942924700087071713675677,
    1.0: 0.0,
    2.5: 0.284682870472919159632494669683,
    4.0: 1.79175946922805500081247735838,
    10.3: 13.4820367861383585926530059808,
    50.0: 144.565743946344886008918443063,
}


@pytest.mark.parametrize("x,expected", sorted(LGAMMA_REF.items()))
def test_log_gamma_reference(x, expected):
    assert log_gamma(x) == pytest.approx(expected, rel=1e-12, abs=1e-14)


def test_log_gamma_half_is_log_sqrt_pi():
    assert log_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_domain(x):
    with pytest.raises(ContractError):
        log_gamma(x)


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=0.5, max_value=50.0, exclude_min=True))
def test_log_gamma_recurrence(x):
    assert math.exp(log_gamma(x + 1) - log_gamma(x)) == pytest.approx(x, rel=1e-9)


@pytest.mark.parametrize("n,r,expected", [
    (2, 1.0, math.log(math.pi)),
    (3, 2.0, math.log(32 * math.pi / 3)),
    (1, 5.0, math.log(10.0)),
])
def test_log_ball_volume_closed_forms(n, r, expected):
    assert log_ball_volume(n, r) == pytest.approx(expected, rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 200), st.floats(1e-3, 1e3))
def test_volume_doubling(n, r):
    assert log_ball_volume(n, 2 * r) - log_ball_volume(n, r) == pytest.approx(
        n * math.log(2), rel=1e-9)
    assert log_ball_volume(n, r * 1.01) > log_ball_volume(n, r)


def test_volume_high_dimension_stays_finite():
    v = log_ball_volume(500, 0.5)
    assert math.isfinite(v)


@pytest.mark.parametrize("n,r", [(0, 1.0), (2, 0.0), (2, -1.0), (1.5, 1.0)])
def test_volume_domain(n, r):
    with pytest.raises(ContractError):
        log_ball_volume(n, r)


@pytest.mark.parametrize("a,b,p,expected", [
    ((0, 0), (3, 4), 2, 5.0),
    ((1, 1), (1, 1), 2, 0.0),
    ((0, 0), (1, 1), 1, 2.0),
    ((0, 0), (1, 1), 3, 2 ** (1 / 3)),
])
def test_minkowski_examples(a, b, p, expected):
    assert minkowski_distance(a, b, p) == pytest.approx(expected)


def test_minkowski_dimension_mismatch():
    with pytest.raises(ContractError):
        minkowski_distance((0, 0), (0, 0, 0))


def test_minkowski_rejects_small_order():
    with pytest.raises(ContractError):
        minkowski_distance((0, 0), (1, 1), 0.5)


vec = st.lists(st.floats(-100, 100), min_size=3, max_size=3)


@settings(max_examples=300, deadline=None)
@given(vec, vec, vec, st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_triangle_inequality(a, b, c, p):
    ab = minkowski_distance(a, b, p)
    assert ab == pytest.approx(minkowski_distance(b, a, p))
    assert minkowski_distance(a, c, p) <= ab + minkowski_distance(b, c, p) + 1e-9
