import csv

import numpy as np
import pytest
from scipy.optimize import brentq

from lconvex import SmoothBody
from lconvex.caps import (
    cap,
    cap_area,
    expectation_integral,
    height_for_area,
    jacobian_KL,
    jacobian_LL,
    jstar_LL,
    write_grid_csv,
)
from lconvex.chains import chain_KL
from lconvex.errors import AreaOutOfRange, HeightOutOfRange

from conftest import random_pair


def lens(r1, r2, d):
    """Area of the intersection of two discs with center distance d."""
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        return np.pi * min(r1, r2) ** 2
    a = r1 * r1 * np.arccos((d * d + r1 * r1 - r2 * r2) / (2 * d * r1))
    b = r2 * r2 * np.arccos((d * d + r2 * r2 - r1 * r1) / (2 * d * r2))
    return a + b - 0.5 * np.sqrt((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2))


def disc_cap_area(rho, R, t):
    return np.pi * rho**2 - lens(rho, R, R + t - rho)


def test_zero_height():
    K, L = SmoothBody.disc(0.8), SmoothBody.disc(2.0)
    c = cap(K, L, 0.3, 0.0)
    assert c.area == 0.0
    assert c.sigma_plus == c.sigma_minus == 0.0
    assert jacobian_KL(K, L, 0.3, 0.0) == 0.0


@pytest.mark.parametrize("t", [1e-3, 0.01, 0.1, 0.5, 0.9, 1.5])
def test_disc_lens_area(t):
    rho, R = 0.8, 2.0
    K, L = SmoothBody.disc(rho), SmoothBody.disc(R)
    assert cap_area(K, L, 1.3, t) == pytest.approx(disc_cap_area(rho, R, t), rel=1e-10)


def test_height_out_of_range(disc_pair):
    K, L = disc_pair
    with pytest.raises(HeightOutOfRange):
        cap(K, L, 0.0, -0.1)
    with pytest.raises(HeightOutOfRange):
        cap(K, L, 0.0, 2.0)


def test_area_derivative_is_chord(rng):
    K, L = random_pair(rng)
    e = 1e-6
    for u, t in [(0.2, 0.01), (2.5, 0.1), (4.0, 0.3)]:
        c = cap(K, L, u, t)
        fd = (cap_area(K, L, u, t + e) - cap_area(K, L, u, t - e)) / (2 * e)
        assert fd == pytest.approx(c.sigma_plus - c.sigma_minus, rel=1e-6)


def test_area_monotone_in_t(rng):
    K, L = random_pair(rng)
    ts = np.linspace(0.0, 0.9 * K.width(1.0), 40)
    a = [cap_area(K, L, 1.0, t) for t in ts]
    assert np.all(np.diff(a) > 0)


def test_small_t_matches_chain(rng):
    K, L = random_pair(rng)
    u = 0.7
    ch = chain_KL(u, K, L)
    ratios_a, ratios_j = [], []
    for t in (1e-4, 1e-5, 1e-6):
        ratios_a.append(cap_area(K, L, u, t) / (ch.a[0] * t**1.5))
        ratios_j.append(jacobian_KL(K, L, u, t) / (ch.j[0] * t**1.5))
    assert abs(ratios_a[-1] - 1) < 1e-5 and abs(ratios_j[-1] - 1) < 1e-5
    assert abs(ratios_a[-1] - 1) < abs(ratios_a[0] - 1)


def test_area_series_residual_slope(rng):
    # residual after a1 t^(3/2) + a3 t^(5/2) is O(t^(7/2)): relative O(t^2)
    K, L = random_pair(rng)
    u = 2.1
    ch = chain_KL(u, K, L)
    ts = np.geomspace(1e-3, 1e-2, 8)
    res = [abs(cap_area(K, L, u, t) - ch.a[0] * t**1.5 - ch.a[2] * t**2.5) for t in ts]
    slope = np.polyfit(np.log(ts), np.log(res), 1)[0]
    assert slope == pytest.approx(3.5, abs=0.15)


def test_disc_jacobian_closed_form():
    rho, R = 0.8, 2.0
    K, L = SmoothBody.disc(rho), SmoothBody.disc(R)
    for t in (0.01, 0.2, 0.7):
        c = cap(K, L, 0.5, t)
        d = c.psi_plus - c.psi_minus
        closed = (R - rho + t) * 2 * R**2 * (d - np.sin(d))
        assert jacobian_KL(K, L, 0.5, t) == pytest.approx(closed, rel=1e-9)


def test_jstar_LL(generic_L):
    from lconvex.expansions import tilde_J

    u = 1.2
    for t in (1e-3, 0.05, 0.3):
        assert jstar_LL(generic_L, u, t) == pytest.approx(jstar_LL(generic_L, u, t, subdivided=True), rel=1e-9)
        assert jacobian_LL(generic_L, u, t) == pytest.approx(t * jstar_LL(generic_L, u, t), rel=1e-12)
    J = tilde_J(generic_L, u)
    small = [jstar_LL(generic_L, u, t) for t in (1e-3, 1e-4, 1e-5)]
    assert all(s < J for s in small)
    assert np.all(np.diff(small) > 0)
    assert small[-1] == pytest.approx(J, rel=1e-4)


def test_disc_jstar_limit():
    R = 1.5
    D = SmoothBody.disc(R)
    assert jstar_LL(D, 0.0, 1e-7) == pytest.approx(2 * np.pi * R**2, rel=1e-6)


def test_height_for_area_disc_oracle():
    rho, R = 0.8, 2.0
    K, L = SmoothBody.disc(rho), SmoothBody.disc(R)
    for delta in (1e-6, 1e-3, 0.1):
        t = height_for_area(K, L, np.array([0.3, 2.0]), delta)
        ref = brentq(lambda s: disc_cap_area(rho, R, s) - delta, 1e-12, 2 * rho, xtol=1e-15)
        assert t == pytest.approx(ref, rel=1e-9)


def test_height_for_area_roundtrip(rng):
    K, L = random_pair(rng)
    u = rng.uniform(0, 2 * np.pi, 6)
    for delta in (1e-5, 0.05 * K.area):
        t = height_for_area(K, L, u, delta)
        for ui, ti in zip(u, t):
            assert abs(cap_area(K, L, ui, ti) - delta) <= 1e-12 * K.area
    with pytest.raises(AreaOutOfRange):
        height_for_area(K, L, u, 2 * K.area)


def test_expectation_two_points(disc_pair):
    # two points are always both vertices
    r = expectation_integral(*disc_pair, 2, n_u=32)
    assert r.value == pytest.approx(2.0, rel=1e-8)


def test_expectation_disc_LL_large_n():
    D = SmoothBody.disc(1.0)
    r = expectation_integral(D, D, 1000, regime="LL")
    assert r.value == pytest.approx(np.pi**2 / 2 - np.pi**2 / 1000, abs=1e-4)
    assert r.total_error < 1e-6


def test_grid_csv(tmp_path, disc_pair):
    p = tmp_path / "g.csv"
    write_grid_csv(p, *disc_pair, n_u=4, n_t=5)
    rows = list(csv.reader(open(p)))
    assert rows[0][:4] == ["u", "t", "area", "jacobian"] and len(rows) == 21
