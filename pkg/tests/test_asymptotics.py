import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lconvex.asymptotics import gamma_ratio_series, moment_gammas, vertex_weight_series
from lconvex.expansions import beta_moment


@given(a=st.floats(-1.5, 2.0), b=st.floats(-0.5, 3.0))
def test_gamma_ratio_series(a, b):
    s = gamma_ratio_series(a, b, order=5)
    for n in (200, 2000):
        with mpmath.workdps(40):
            N = mpmath.mpf(n)
            exact = float(mpmath.gammaprod([N + a], [N + b]) * N ** (mpmath.mpf(b) - a))
        approx = float(s(1.0 / n))
        assert approx == pytest.approx(exact, rel=50 * (1 + abs(a) + abs(b)) ** 6 / n**5 + 1e-14)


def test_moment_gammas_small_beta():
    assert moment_gammas(0.0) == pytest.approx((1, -1, -1))
    assert moment_gammas(1.0) == pytest.approx((1, -3, 1))


@pytest.mark.parametrize("beta", [2 / 3, 4 / 3, 2.0])
def test_moment_gammas_against_mpmath(beta):
    g = moment_gammas(beta, order=4)
    for n in (10**3, 10**4):
        approx = sum(c / n**j for j, c in enumerate(g))
        assert approx == pytest.approx(float(beta_moment(beta, n)), abs=10 * abs(g[3]) / n**3 + 1e-15)


def test_vertex_weight_series_is_gamma_ratio():
    s = vertex_weight_series(2 / 3)
    n = 500
    assert float(s(1 / n)) * n ** (1 / 3) == pytest.approx(
        float(mpmath.gammaprod([n + 1], [n + 2 / 3])), rel=1e-12
    )
