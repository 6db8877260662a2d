"""L-convex floating bodies and the area of the wet part.

K^L_delta is approximated by intersecting the translates L + p(u, delta) for u on
an M-point grid, where L + p(u, delta) cuts a cap of area delta off K in
direction u.  When consecutive translates meet in the expected order, the
intersection is an L-polygon whose arcs are computed exactly (chord problem for
consecutive offsets); otherwise each translate is polygonalized and the
half-planes are intersected.  The remaining error is the O(M^-2) bulge between
grid directions, removed by M-doubling extrapolation.
"""

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection

from .body import SmoothBody, unit
from .caps import cap_batch, height_for_area
from .errors import AreaOutOfRange, DeltaTooLarge
from .lhull import LArc, LPolygon, _chord_newton, polygon_area

TWO_PI = 2.0 * np.pi
POLYGON_VERTICES = 1024


@dataclass
class FloatingBodyResult:
    delta: float
    wet_area: float
    body_approx: np.ndarray
    grid: int
    error_est: float = float("nan")
    raw: dict = field(default_factory=dict)
    method: str = "arcs"

    def as_dict(self):
        return {"delta": self.delta, "wet_area": self.wet_area, "error_est": self.error_est,
                "grid": self.grid, "method": self.method, "raw": self.raw}


def _offsets(K, L, delta, M):
    u = TWO_PI * np.arange(M) / M
    try:
        t = height_for_area(K, L, u, delta)
    except AreaOutOfRange as exc:
        raise DeltaTooLarge(str(exc)) from None
    d = cap_batch(K, L, u, t)
    if np.any(d["status"] != 0):
        raise DeltaTooLarge(f"delta={delta:g} leaves some direction without a proper cap")
    return u, t, d["p"]


def _wrap(x):
    return np.mod(x + np.pi, TWO_PI) - np.pi


def _arc_intersection(L, u, p, tol):
    """Exact intersection of translates when each contributes one arc in u-order."""
    nxt = np.roll(np.arange(len(u)), -1)
    th, ph, ok = _chord_newton(L, p - p[nxt], +1)
    if not np.all(ok):
        return None
    # p_i + x_L(th) = p_next + x_L(ph): th ends arc i, ph starts arc i+1
    theta_b = u + _wrap(th - u)
    theta_a = np.roll(u[nxt] + _wrap(ph - u[nxt]), 1)
    if np.any(theta_b <= theta_a):
        return None
    verts = p + L.boundary_point(theta_b)
    m = L.margin(verts[None, :, :] - p[:, None, :], stride=4)
    if np.any(m > tol):
        return None
    arcs = [LArc(p[i], float(theta_a[i]), float(theta_b[i])) for i in range(len(u))]
    P = LPolygon(L, verts, arcs)
    return polygon_area(P), verts


def _clipped_intersection(L, p, interior):
    """Intersection of polygonalized translates (tangent-line polygons)."""
    th = TWO_PI * np.arange(POLYGON_VERTICES) / POLYGON_VERTICES
    n = unit(th)
    h = L.support(th)
    rhs = h[None, :] + p @ n.T
    A = np.broadcast_to(n, (len(p),) + n.shape).reshape(-1, 2)
    hs = np.column_stack([A, -rhs.reshape(-1)])
    verts = HalfspaceIntersection(hs, interior).intersections
    hull = ConvexHull(verts)
    return float(hull.volume), verts[hull.vertices]


def _intersection_area(K, L, delta, M):
    u, t, p = _offsets(K, L, delta, M)
    res = _arc_intersection(L, u, p, L.tol)
    if res is not None:
        return res + ("arcs",)
    interior = np.zeros(2)
    if np.any(L.margin(interior[None, :] - p) >= 0.0):
        interior = np.mean(p + L.boundary_point(u + np.pi), axis=0)
        if np.any(L.margin(interior[None, :] - p) >= 0.0):
            raise DeltaTooLarge(f"translates for delta={delta:g} have no common interior point")
    area, verts = _clipped_intersection(L, p, interior)
    return area, verts, "clipped"


def floating_body(K: SmoothBody, L: SmoothBody, delta, u_nodes=256, extrapolate=True):
    """Wet-part area A(K) - A(K^L_delta) with an M-doubling error estimate.

    With ``extrapolate`` the reported value is the Richardson combination of the
    M and 2M grids (leading error O(M^-2)); the estimate is the size of that
    correction.
    """
    M = int(u_nodes)
    if M < 64:
        raise ValueError("u_nodes must be at least 64")
    a1, _, m1 = _intersection_area(K, L, delta, M)
    a2, verts, m2 = _intersection_area(K, L, delta, 2 * M)
    w1, w2 = K.area - a1, K.area - a2
    if extrapolate and m1 == m2 == "arcs":
        wet = (4.0 * w2 - w1) / 3.0
        err = abs(w2 - w1) / 3.0
    else:
        wet, err = w2, abs(w2 - w1)
    return FloatingBodyResult(float(delta), float(wet), verts, M, float(err),
                              {"wet_M": w1, "wet_2M": w2}, m2)


def disc_wet_area(r, R, delta):
    """Closed form for K = disc r inside L = disc R (R > r) or half-planes (R = inf).

    The cap at depth t is the part of the disc r outside a disc R whose boundary
    passes at distance r - t from the center of K; its area is a difference of two
    circular segments.  By symmetry K^L_delta is the disc of radius r - t.
    """
    from scipy.optimize import brentq

    def segment(radius, chord_half):
        ang = 2.0 * np.arcsin(min(chord_half / radius, 1.0))
        return 0.5 * radius**2 * (ang - np.sin(ang))

    def cap(t):
        if not np.isfinite(R):
            return segment(r, np.sqrt(max(r**2 - (r - t) ** 2, 0.0)))
        d = R - (r - t)  # distance between centers
        x = (d**2 + r**2 - R**2) / (2.0 * d)  # along the axis, from center of K
        half = np.sqrt(max(r**2 - x**2, 0.0))
        # region of disc r beyond the chord minus the part of disc R beyond it
        return segment(r, half) - segment(R, half)

    t = brentq(lambda s: cap(s) - delta, 1e-300, r, xtol=1e-15, rtol=1e-15)
    return float(np.pi * r**2 - np.pi * (r - t) ** 2), float(t)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    slope_stderr: float
    constant: float
    reference_constant: float
    deltas: tuple
    wet: tuple

    def as_dict(self):
        return {"slope": self.slope, "slope_stderr": self.slope_stderr, "constant": self.constant,
                "reference_constant": self.reference_constant,
                "deltas": list(self.deltas), "wet": list(self.wet)}


def reference_wet_constant(K, L=None, nodes=2048):
    """(9/32)^(1/3) * int (kappa_K - kappa_L)^(1/3) / kappa_K du.

    Leading coefficient obtained by treating each cap as parabolic; exploratory
    comparison only.  ``L=None`` stands for half-planes (kappa_L = 0).
    """
    u = TWO_PI * np.arange(nodes) / nodes
    kk = K.curvature(u)
    kl = 0.0 if L is None else L.curvature(u)
    return float((9.0 / 32.0) ** (1.0 / 3.0) * np.mean((kk - kl) ** (1.0 / 3.0) / kk) * TWO_PI)


def fit_exponent(deltas, wet, reference=float("nan")):
    deltas = np.asarray(deltas, dtype=float)
    wet = np.asarray(wet, dtype=float)
    x, y = np.log(deltas), np.log(wet)
    X = np.column_stack([x, np.ones_like(x)])
    coef, res, *_ = np.linalg.lstsq(X, y, rcond=None)
    dof = max(len(x) - 2, 1)
    resid = y - X @ coef
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    return ExponentFit(float(coef[0]), float(np.sqrt(cov[0, 0])), float(np.exp(coef[1])),
                       float(reference), tuple(deltas.tolist()), tuple(wet.tolist()))


def wet_exponent_fit(K: SmoothBody, L: SmoothBody, delta_grid, u_nodes=128) -> ExponentFit:
    """Least-squares slope of log wet area against log delta."""
    delta_grid = np.sort(np.asarray(delta_grid, dtype=float))
    if delta_grid[-1] / delta_grid[0] < 100.0:
        raise ValueError("delta grid should span at least two decades")
    wet = [floating_body(K, L, d, u_nodes).wet_area for d in delta_grid]
    return fit_exponent(delta_grid, wet, reference_wet_constant(K, L))


def write_csv(path, results):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["delta", "wet_area", "error_est"])
        for r in results:
            w.writerow([repr(r.delta), repr(r.wet_area), repr(r.error_est)])


def to_svg(K: SmoothBody, result: FloatingBodyResult, size=400):
    from .lhull import to_svg as _svg

    outline = K.boundary_point(np.linspace(0.0, TWO_PI, 512, endpoint=False))
    inner = LPolygon(K, np.zeros((0, 2)), [], 0.0)
    svg = _svg(inner, None, size=size, extra=[outline, result.body_approx])
    return svg


__all__ = [
    "FloatingBodyResult",
    "ExponentFit",
    "floating_body",
    "disc_wet_area",
    "reference_wet_constant",
    "fit_exponent",
    "wet_exponent_fit",
    "write_csv",
    "to_svg",
]
