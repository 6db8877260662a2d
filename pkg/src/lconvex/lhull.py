"""L-convex hulls of finite point sets.

The hull [X]_L is the intersection of all translates of L containing X.  Its
boundary is a cyclic sequence of vertices (points of X) joined by arcs of
translates L + c.  An arc from p to q is parametrized by the outer-normal angle
on dL: it runs over theta in [theta_a, theta_b] with p = c + x_L(theta_a) and
q = c + x_L(theta_b).

Edges are oriented counter-clockwise, so along an edge the outer normal turns
positively by less than pi.  For a chord vector d = q - p there are exactly two
pairs (theta, phi) with x_L(phi) - x_L(theta) = d; the counter-clockwise edge is
the one with 0 < phi - theta < pi (mod 2 pi).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.spatial import ConvexHull, QhullError

from .body import SmoothBody, unit, unit_perp
from .errors import NotContainedInAnyTranslate, PointsTooFarApart
from .quad import gl_integrate

TWO_PI = 2.0 * np.pi
NEWTON_STEPS = 40
SCAN_NODES = 512


@dataclass(frozen=True)
class LArc:
    center: np.ndarray
    theta_a: float
    theta_b: float

    def points(self, L: SmoothBody, samples=64):
        th = np.linspace(self.theta_a, self.theta_b, samples)
        return self.center + L.boundary_point(th)

    def as_dict(self):
        return {"center": [float(self.center[0]), float(self.center[1])],
                "theta_a": float(self.theta_a), "theta_b": float(self.theta_b)}


@dataclass
class LPolygon:
    body: SmoothBody
    vertices: np.ndarray
    arcs: list = field(default_factory=list)
    area: float = 0.0

    @property
    def f0(self):
        return int(len(self.vertices))

    def to_dict(self):
        return {
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "arcs": [a.as_dict() for a in self.arcs],
            "f0": self.f0,
            "area": float(self.area),
        }

    def boundary(self, samples=64):
        """Closed polyline approximation of the hull boundary."""
        if not self.arcs:
            return np.array(self.vertices, dtype=float)
        return np.concatenate([a.points(self.body, samples)[:-1] for a in self.arcs])


# ---------------------------------------------------------------------------- chords

def _chord_residual(L, th, ph, d):
    return L.boundary_point(ph) - L.boundary_point(th) - d


def _chord_newton(L: SmoothBody, d, side=+1):
    """Solve x_L(phi) - x_L(theta) = d for a batch of chord vectors ``d``.

    ``side=+1`` targets the counter-clockwise solution (outer normals on the right
    of d), ``side=-1`` the other one.  Returns theta, phi and a convergence mask.
    """
    d = np.atleast_2d(np.asarray(d, dtype=float))
    length = np.hypot(d[:, 0], d[:, 1])
    alpha = np.arctan2(d[:, 1], d[:, 0])
    radius = L.a0
    half = np.arcsin(np.clip(length / (2.0 * radius), 0.0, 1.0))
    mid = alpha - side * 0.5 * np.pi
    th = mid - side * half
    ph = mid + side * half
    scale = max(L.diameter, 1e-300)
    ok = np.zeros(len(d), dtype=bool)
    for _ in range(NEWTON_STEPS):
        r = _chord_residual(L, th, ph, d)
        err = np.hypot(r[:, 0], r[:, 1])
        ok = err <= 1e-13 * scale
        if np.all(ok):
            break
        ta = L.radius_of_curvature(th)[:, None] * unit_perp(th)
        tb = L.radius_of_curvature(ph)[:, None] * unit_perp(ph)
        # J = [-ta, tb]; solve J @ (dth, dph) = -r
        det = -ta[:, 0] * tb[:, 1] + ta[:, 1] * tb[:, 0]
        det = np.where(np.abs(det) < 1e-300, 1e-300, det)
        dth = (-r[:, 0] * tb[:, 1] + r[:, 1] * tb[:, 0]) / det
        dph = (ta[:, 0] * r[:, 1] - ta[:, 1] * r[:, 0]) / det
        dth = np.clip(dth, -0.5, 0.5)
        dph = np.clip(dph, -0.5, 0.5)
        th = np.where(ok, th, th + dth)
        ph = np.where(ok, ph, ph + dph)
    span = np.mod(ph - th, TWO_PI)
    right = span < np.pi if side > 0 else span > np.pi
    return np.mod(th, TWO_PI), np.mod(th, TWO_PI) + span, ok & right & (length > 0)


def _chord_scan(L: SmoothBody, d, side=+1):
    """Sign-change scan of the membership margin of x_L(theta) + d, then brentq."""
    d = np.asarray(d, dtype=float)
    grid = np.linspace(0.0, TWO_PI, SCAN_NODES + 1)
    g = L.margin(L.boundary_point(grid) + d)
    out = []
    for i in np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) <= 0)[0]:
        if g[i] == 0.0:
            th = grid[i]
        else:
            th = brentq(lambda t: float(L.margin((L.boundary_point(t) + d)[None])[0]),
                        grid[i], grid[i + 1], xtol=1e-15, rtol=1e-15)
        _, ph = L.margin((L.boundary_point(th) + d)[None], return_theta=True)
        span = np.mod(ph[0] - th, TWO_PI)
        out.append((np.mod(th, TWO_PI), span))
    for th, span in out:
        if (span < np.pi) == (side > 0) and 0.0 < span < TWO_PI:
            return th, th + span
    raise PointsTooFarApart(f"no translate of {L.name} has the chord {d.tolist()}")


def _ccw_chords(L, p, qs):
    """Counter-clockwise edge parameters for chords p -> q, q in ``qs``."""
    d = np.asarray(qs, dtype=float) - np.asarray(p, dtype=float)
    th, ph, ok = _chord_newton(L, d, +1)
    for i in np.nonzero(~ok)[0]:
        th[i], ph[i] = _chord_scan(L, d[i], +1)
    return th, ph


def chord_translates(L: SmoothBody, p, q):
    """Centers c with both p and q on the boundary of L + c (at most two).

    The first center is the one whose arc from p to q turns counter-clockwise.
    """
    p = np.asarray(p, dtype=float)
    d = np.asarray(q, dtype=float) - p
    if np.hypot(*d) == 0.0:
        raise PointsTooFarApart("coincident points determine no unique translate")
    centers = []
    for side in (+1, -1):
        th, ph, ok = _chord_newton(L, d[None], side)
        if ok[0]:
            th0 = th[0]
        else:
            th0, _ = _chord_scan(L, d, side)
        centers.append(p - L.boundary_point(th0))
    return centers


# ---------------------------------------------------------------------------- start vertex

def _gauge(L: SmoothBody, y, steps=4):
    """Minkowski gauge of points ``y`` w.r.t. L (origin interior) and the maximizing normal."""
    y = np.atleast_2d(y)
    vals = (y @ L._grid_u.T) / L._grid_h
    idx = np.argmax(vals, axis=1)
    th = L._grid_theta[idx]
    for _ in range(steps):
        n0 = y[:, 0] * np.cos(th) + y[:, 1] * np.sin(th)
        n1 = -y[:, 0] * np.sin(th) + y[:, 1] * np.cos(th)
        h, h1, h2 = L.support(th), L.support(th, 1), L.support(th, 2)
        f1 = n1 / h - n0 * h1 / h**2
        f2 = -n0 / h - 2 * n1 * h1 / h**2 - n0 * h2 / h**2 + 2 * n0 * h1**2 / h**3
        step = np.where(f2 < 0, -f1 / np.where(f2 < 0, f2, -1.0), 0.0)
        th = th + np.clip(step, -L._grid_step, L._grid_step)
    g = (y[:, 0] * np.cos(th) + y[:, 1] * np.sin(th)) / L.support(th)
    return g, np.mod(th, TWO_PI)


def _enclosing_center(L: SmoothBody, X):
    """A center c with X inside L + c, or raise NotContainedInAnyTranslate."""
    def worst(c):
        return float(np.max(_gauge(L, X - c)[0]))

    candidates = [np.zeros(2), X.mean(axis=0), 0.5 * (X.min(axis=0) + X.max(axis=0))]
    for c in candidates:
        if worst(c) <= 1.0:
            return c
    best = min(candidates, key=worst)
    res = minimize(worst, best, method="Nelder-Mead",
                   options={"xatol": 1e-12 * L.diameter, "fatol": 1e-14, "maxiter": 2000})
    if res.fun <= 1.0 + 1e-9:
        return res.x
    raise NotContainedInAnyTranslate(
        f"point set needs a {res.fun:.6g}-dilate of {L.name}")


def _start_vertex(L, X, c):
    """Index of a hull vertex and a normal angle of a supporting translate there.

    Shrinking L + c about c until it touches X gives lambda*L + c containing X with
    a point x on its boundary; L + c - (1 - lambda) x_L(theta) then contains X and
    passes through x with normal theta.
    """
    g, th = _gauge(L, X - c)
    i = int(np.argmax(g))
    return i, float(th[i])


# ---------------------------------------------------------------------------- hull

def _dedupe(X, tol):
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    if len(X) == 0:
        raise ValueError("empty point set")
    key = np.round(X / max(tol, 1e-300)).astype(np.int64)
    _, idx = np.unique(key, axis=0, return_index=True)
    return X[np.sort(idx)]


def _classical_hull(X):
    if len(X) <= 2:
        return np.arange(len(X))
    try:
        return ConvexHull(X).vertices
    except QhullError:
        # collinear input: the two extreme points along the principal direction
        d = X - X.mean(axis=0)
        axis = np.linalg.svd(d, full_matrices=False)[2][0]
        s = d @ axis
        return np.array([int(np.argmin(s)), int(np.argmax(s))])


def _assemble(L, X, order, thetas, phis):
    """Rotate to start at the lexicographic minimum and build the polygon."""
    verts = X[order]
    start = min(range(len(order)), key=lambda k: (verts[k, 0], verts[k, 1]))
    roll = lambda a: list(a[start:]) + list(a[:start])
    order, thetas, phis = roll(order), roll(thetas), roll(phis)
    arcs = []
    for k, (i, th, ph) in enumerate(zip(order, thetas, phis)):
        c = X[i] - L.boundary_point(th)
        arcs.append(LArc(c, float(th), float(ph)))
    P = LPolygon(L, X[order], arcs)
    P.area = polygon_area(P)
    return P


def _single(L, X):
    return LPolygon(L, X[:1].copy(), [], 0.0)


def lhull(X, L: SmoothBody) -> LPolygon:
    """L-convex hull by gift wrapping over the classical hull vertices."""
    X = _dedupe(X, L.tol)
    if len(X) == 1:
        return _single(L, X)
    c = _enclosing_center(L, X)
    cand = _classical_hull(X)
    H = X[cand]
    i, th_cur = _start_vertex(L, H, c)
    first = i
    order, thetas, phis = [], [], []
    for _ in range(len(H) + 1):
        others = np.array([j for j in range(len(H)) if j != i])
        th, ph = _ccw_chords(L, H[i], H[others])
        turn = np.mod(th - th_cur, TWO_PI)
        # ties: the nearer point along the arc comes first
        key = np.lexsort((ph - th, np.round(turn, 12)))
        k = key[0]
        order.append(cand[i])
        thetas.append(th[k])
        phis.append(ph[k])
        i = int(others[k])
        th_cur = float(np.mod(ph[k], TWO_PI))
        if i == first:
            break
    else:
        raise RuntimeError("gift wrapping did not close")
    return _assemble(L, X, order, thetas, phis)


def lhull_bruteforce(X, L: SmoothBody, tol=None) -> LPolygon:
    """Reference hull: test every ordered pair as an edge against every point."""
    X = _dedupe(X, L.tol)
    tol = L.tol if tol is None else tol
    n = len(X)
    if n == 1:
        return _single(L, X)
    _enclosing_center(L, X)
    I, J = np.nonzero(~np.eye(n, dtype=bool))
    th = np.empty(len(I))
    ph = np.empty(len(I))
    for i in range(n):
        m = I == i
        th[m], ph[m] = _ccw_chords(L, X[i], X[J[m]])
    centers = X[I] - L.boundary_point(th)
    margins = L.margin(X[None, :, :] - centers[:, None, :])
    valid = np.all(margins <= tol, axis=1)
    out = {}
    for e in np.nonzero(valid)[0]:
        out.setdefault(int(I[e]), []).append(e)
    if not out:
        raise RuntimeError("no valid edge found")
    start = min(out, key=lambda i: (X[i, 0], X[i, 1]))
    order, thetas, phis = [], [], []
    i, th_in = start, None
    for _ in range(n + 1):
        edges = out[i]
        if th_in is None:
            e = min(edges, key=lambda e: (ph[e] - th[e]))
        else:
            e = min(edges, key=lambda e: (round(float(np.mod(th[e] - th_in, TWO_PI)), 12), ph[e] - th[e]))
        order.append(i)
        thetas.append(th[e])
        phis.append(ph[e])
        i, th_in = int(J[e]), float(np.mod(ph[e], TWO_PI))
        if i == start:
            break
    else:
        raise RuntimeError("edge cycle did not close")
    return _assemble(L, X, order, thetas, phis)


def polygon_area(P: LPolygon) -> float:
    """Green's theorem per arc: (1/2)[int rho h dtheta + c x (x_L(b) - x_L(a))]."""
    if not P.arcs:
        return 0.0
    L = P.body
    a = np.array([arc.theta_a for arc in P.arcs])
    b = np.array([arc.theta_b for arc in P.arcs])
    c = np.array([arc.center for arc in P.arcs])
    rho_h = gl_integrate(lambda t: L.radius_of_curvature(t) * L.support(t), a, b, n=48)
    dx = L.boundary_point(b) - L.boundary_point(a)
    cross = c[:, 0] * dx[:, 1] - c[:, 1] * dx[:, 0]
    return float(0.5 * np.sum(rho_h + cross))


def is_subset(P: LPolygon, Q: LPolygon, tol=None):
    """True if every vertex of P lies in every arc translate of Q."""
    if not Q.arcs:
        return bool(np.all(np.hypot(*(P.vertices - Q.vertices[0]).T) <= (tol or Q.body.tol)))
    tol = Q.body.tol if tol is None else tol
    centers = np.array([a.center for a in Q.arcs])
    m = Q.body.margin(P.vertices[None, :, :] - centers[:, None, :])
    return bool(np.all(m <= tol))


# ---------------------------------------------------------------------------- output

def to_svg(P: LPolygon, points=None, samples=64, size=400, extra=()):
    """Static SVG of the hull boundary, its vertices and optional input points."""
    pts = [P.boundary(samples)]
    if points is not None:
        pts.append(np.asarray(points, dtype=float).reshape(-1, 2))
    for poly in extra:
        pts.append(np.asarray(poly, dtype=float))
    allp = np.concatenate([p for p in pts if len(p)])
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    s = size / (span + 2 * pad)

    def tr(q):
        q = np.atleast_2d(q)
        return np.column_stack([(q[:, 0] - lo[0] + pad) * s, size - (q[:, 1] - lo[1] + pad) * s])

    def path(q, color, closed=True):
        q = tr(q)
        d = " ".join(f"{x:.3f},{y:.3f}" for x, y in q)
        tag = "polygon" if closed else "polyline"
        return f'<{tag} points="{d}" fill="none" stroke="{color}" stroke-width="1"/>'

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for poly in extra:
        out.append(path(poly, "#999999"))
    if len(P.arcs):
        out.append(path(P.boundary(samples), "#1f4e9a"))
    if points is not None:
        for x, y in tr(np.asarray(points, dtype=float).reshape(-1, 2)):
            out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="1.2" fill="#555555"/>')
    for x, y in tr(P.vertices):
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="#c0392b"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


__all__ = [
    "LArc",
    "LPolygon",
    "chord_translates",
    "lhull",
    "lhull_bruteforce",
    "polygon_area",
    "is_subset",
    "to_svg",
]
