import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lconvex import SmoothBody
from lconvex.errors import NotContainedInAnyTranslate, PointsTooFarApart
from lconvex.lhull import (
    _chord_newton,
    _chord_scan,
    chord_translates,
    is_subset,
    lhull,
    lhull_bruteforce,
    polygon_area,
    to_svg,
)

BODIES = [
    SmoothBody.disc(1.0),
    SmoothBody(1.0, cos=[0, 0.12, 0.03, 0.01], sin=[0, -0.05, 0.02]),
    SmoothBody.ellipse(1.3, 0.7),
]


def disc_hull(X, R=1.0):
    """Independent hull for a disc: an ordered pair is an edge iff its ccw disc covers X."""
    n = len(X)
    edges = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            d = X[j] - X[i]
            l = np.hypot(*d)
            c = (X[i] + X[j]) / 2 + np.array([-d[1], d[0]]) / l * np.sqrt(R * R - l * l / 4)
            if np.all(np.hypot(*(X - c).T) <= R + 1e-12):
                edges[i] = (j, l)
    s = min(edges, key=lambda i: tuple(X[i]))
    v, A = [s], 0.0
    while True:
        j, l = edges[v[-1]]
        phi = 2 * np.arcsin(l / (2 * R))
        A += 0.5 * R * R * (phi - np.sin(phi))
        if j == s:
            break
        v.append(j)
    P = X[v]
    A += 0.5 * np.sum(P[:, 0] * np.roll(P[:, 1], -1) - P[:, 1] * np.roll(P[:, 0], -1))
    return P, A


def test_disc_chord():
    D = SmoothBody.disc(1.0)
    c1, c2 = chord_translates(D, [-0.6, 0.0], [0.6, 0.0])
    assert np.allclose(c1, [0, 0.8]) and np.allclose(c2, [0, -0.8])


def test_chord_endpoints_on_boundary():
    L = BODIES[1]
    p, q = np.array([0.1, -0.2]), np.array([0.5, 0.9])
    for c in chord_translates(L, p, q):
        assert np.all(np.abs(L.margin(np.array([p, q]) - c)) < 1e-12)


def test_chord_too_far():
    D = SmoothBody.disc(1.0)
    with pytest.raises(PointsTooFarApart):
        chord_translates(D, [0, 0], [2.5, 0])
    with pytest.raises(PointsTooFarApart):
        chord_translates(D, [0, 0], [0, 0])


def test_newton_matches_scan(rng):
    L = BODIES[2]
    d = rng.uniform(-0.8, 0.8, (40, 2))
    th, ph, ok = _chord_newton(L, d, +1)
    assert ok.mean() > 0.9
    for i in np.nonzero(ok)[0]:
        t2, p2 = _chord_scan(L, d[i], +1)
        assert np.mod(th[i] - t2 + np.pi, 2 * np.pi) - np.pi == pytest.approx(0, abs=1e-10)


@pytest.mark.parametrize("L", BODIES, ids=lambda b: b.name)
def test_matches_bruteforce(L, rng):
    for _ in range(60):
        n = int(rng.integers(1, 13))
        X = rng.uniform(-0.45, 0.45, (n, 2))
        P, Q = lhull(X, L), lhull_bruteforce(X, L)
        assert P.f0 == Q.f0
        assert np.allclose(P.vertices, Q.vertices)
        assert P.area == pytest.approx(Q.area, abs=1e-9)


def test_disc_oracle(rng):
    D = BODIES[0]
    for _ in range(60):
        X = rng.uniform(-0.45, 0.45, (int(rng.integers(3, 15)), 2))
        P = lhull(X, D)
        V, A = disc_hull(X)
        assert P.f0 == len(V) and np.allclose(P.vertices, V)
        assert P.area == pytest.approx(A, abs=1e-10)


def test_two_points_spindle():
    R, l = 1.0, 1.2
    D = SmoothBody.disc(R)
    P = lhull(np.array([[-l / 2, 0.0], [l / 2, 0.0]]), D)
    phi = 2 * np.arcsin(l / (2 * R))
    assert P.f0 == 2
    assert P.area == pytest.approx(R * R * (phi - np.sin(phi)), rel=1e-12)


def test_degenerate_inputs():
    L = BODIES[1]
    assert lhull(np.array([[0.1, 0.2]]), L).f0 == 1
    assert lhull(np.array([[0.1, 0.2]] * 3), L).f0 == 1
    X = np.array([[-0.3, 0.0], [0.0, 0.0], [0.3, 0.0]])
    assert lhull(X, L).f0 == 2  # middle collinear point is interior
    with pytest.raises(ValueError):
        lhull(np.zeros((0, 2)), L)


def test_not_contained():
    D = SmoothBody.disc(1.0)
    X = 1.8 * np.array([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])
    with pytest.raises(NotContainedInAnyTranslate):
        lhull(X, D)


def test_hull_points_inside(rng):
    L = BODIES[1]
    X = rng.uniform(-0.4, 0.4, (200, 2))
    P = lhull(X, L)
    centers = np.array([a.center for a in P.arcs])
    m = L.margin(X[None, :, :] - centers[:, None, :])
    assert np.all(m <= L.tol)


def test_monotone_and_idempotent(rng):
    L = BODIES[2]
    X = rng.uniform(-0.4, 0.4, (40, 2))
    P = lhull(X[:25], L)
    Q = lhull(X, L)
    assert is_subset(P, Q)
    assert P.area <= Q.area + 1e-12
    R = lhull(Q.vertices, L)
    assert R.f0 == Q.f0 and R.area == pytest.approx(Q.area, abs=1e-12)


@pytest.mark.parametrize("lam", [10.0, 100.0])
def test_large_body_approaches_classical(lam, rng):
    from scipy.spatial import ConvexHull

    L = BODIES[1].scaled(lam)
    X = rng.uniform(-1, 1, (30, 2))
    P = lhull(X, L)
    H = ConvexHull(X)
    # L-vertices are classical vertices; flat corners may drop out
    hv = {tuple(v) for v in X[H.vertices]}
    assert all(tuple(v) in hv for v in P.vertices)
    assert P.f0 == lhull_bruteforce(X, L).f0
    assert P.area == pytest.approx(H.volume, rel=2.0 / lam)
    assert P.area >= H.volume


@settings(max_examples=15)
@given(st.floats(0, 2 * np.pi), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.integers(0, 10**6))
def test_rigid_motion(phi, dx, dy, seed):
    L = BODIES[1]
    X = np.random.default_rng(seed).uniform(-0.35, 0.35, (15, 2))
    c, s = np.cos(phi), np.sin(phi)
    Rm = np.array([[c, -s], [s, c]])
    Y = X @ Rm.T + [dx, dy]
    P = lhull(X, L)
    Q = lhull(Y, L.rotated(phi))
    assert P.f0 == Q.f0
    assert P.area == pytest.approx(Q.area, rel=1e-10)


def test_area_and_svg():
    D = SmoothBody.disc(1.0)
    P = lhull(np.array([[0.3, 0.1], [-0.2, 0.4], [-0.1, -0.3]]), D)
    assert polygon_area(P) == P.area
    B = P.boundary(64)
    x, y = B[:, 0], B[:, 1]
    shoelace = 0.5 * np.sum(x * np.roll(y, -1) - y * np.roll(x, -1))
    assert shoelace == pytest.approx(P.area, rel=1e-3)
    svg = to_svg(P, P.vertices)
    assert svg.startswith("<svg") and svg.count("<circle") >= 3
    d = P.to_dict()
    assert len(d["vertices"]) == 3 and len(d["arcs"]) == 3
