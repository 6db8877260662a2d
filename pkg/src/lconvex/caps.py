"""L-caps of K: exact numeric geometry and the expectation integral for f_0.

A cap with vertex x_K(u) and height t is K \\ (L + p) with

    p = x_K(u) - t u - x_L(u),

so that L + p touches the vertex's normal line at x_K(u) - t u with the same
outer normal u.  K = L is the same construction with p = -t u.

Everything is vectorized over (u, t) pairs: the intersection points are
bracketed on a 512-sample grid along dK and refined by an Illinois
(safeguarded secant) iteration, and areas
come from Green's theorem on the two boundary arcs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import quad_vec

from .body import TWO_PI, SmoothBody, unit, unit_perp
from .errors import (
    AreaOutOfRange,
    HeightOutOfRange,
    QuadratureNotConverged,
    TangentialIntersection,
)
from .quad import arc_pair_integral, arc_pair_integral_direct, gl_integrate

SCAN = 512
ROOT_STEPS = 60
ROOT_TOL = 1e-13
AMBIGUITY = 1e-11

OK, WHOLE, MULTI, EMPTY = 0, 1, 2, 3


@dataclass
class CapGeometry:
    u: float
    t: float
    vertex: np.ndarray
    translate_offset: np.ndarray
    theta_minus: float  # normal angle of the left intersection point on dK
    theta_plus: float
    psi_minus: float  # normal angles of the same points on d(L + p)
    psi_plus: float
    area: float
    sigma_minus: float
    sigma_plus: float
    roots: int = 2


@dataclass
class IntegrationDomain:
    t1: float
    delta0: float
    tail_bound: float
    t_max: float


@dataclass
class ExpectationResult:
    value: float
    error: float
    domain: IntegrationDomain
    n: int
    regime: str
    n_u: int
    flagged: int = 0
    per_direction: np.ndarray = field(default=None, repr=False)

    @property
    def total_error(self):
        return self.error + self.domain.tail_bound


# ------------------------------------------------------------------ batch core


def _margin(L: SmoothBody, y, theta0=None):
    """Support margin of points y w.r.t. L and the maximizing normal.

    Without ``theta0`` a 64-direction grid seeds the Newton refinement; with it
    (a nearby maximizer from a previous call) Newton starts there directly.
    """
    if theta0 is None:
        return L.margin(y, return_theta=True, newton_steps=6, stride=4)
    return L.margin(y, theta0=theta0, return_theta=True, newton_steps=4)


def _margin_sign(L: SmoothBody, y):
    """Margins accurate enough to decide their sign.

    The plain grid maximum is a lower bound; its deficit is at most
    |y| (grid step)^2 / 2, so only samples within that band of zero are refined.
    """
    stride = 4
    vals = y @ L._grid_u[::stride].T - L._grid_h[::stride]
    g = np.max(vals, axis=-1)
    step = L._grid_step * stride
    band = 0.5 * (np.linalg.norm(y, axis=-1) + L.diameter) * step**2
    unsure = (g <= 0.0) & (g > -band)
    if np.any(unsure):
        g[unsure], _ = _margin(L, y[unsure])
    return g


def _offset(K, L, u, t):
    return K.boundary_point(u) - t[..., None] * unit(u) - L.boundary_point(u)


def cap_batch(K: SmoothBody, L: SmoothBody, u, t):
    """Cap data for arrays u, t (broadcast, flattened).

    Returns a dict of arrays; ``status`` is OK, WHOLE (dK misses L+p: the cap is
    all of K), MULTI (more than two boundary crossings), or EMPTY (t = 0).
    """
    u, t = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(t, dtype=float))
    u = u.ravel().copy()
    t = t.ravel().copy()
    m = u.size
    p = _offset(K, L, u, t)

    k = np.arange(-SCAN // 2, SCAN // 2)
    phi = u[:, None] + TWO_PI * k / SCAN  # (m, SCAN), index SCAN//2 is the vertex
    pts = K.boundary_point(phi) - p[:, None, :]
    g = _margin_sign(L, pts.reshape(-1, 2))
    g = g.reshape(m, SCAN)
    pos = g > 0.0
    c = SCAN // 2
    pos[:, c] = t > 0

    flips = np.sum(pos != np.roll(pos, 1, axis=1), axis=1)
    status = np.full(m, OK)
    status[flips == 0] = WHOLE
    status[flips > 2] = MULTI
    status[t <= 0] = EMPTY

    # first non-positive sample to the right / left of the vertex
    right = pos[:, c:]
    left = pos[:, : c + 1][:, ::-1]
    kr = np.argmin(right, axis=1)
    kl = np.argmin(left, axis=1)
    step = TWO_PI / SCAN

    def refine(inside, outside, pp):
        # Illinois iteration on G(phi) = margin(x_K(phi) - p); G > 0 at ``inside``
        a, b = inside.copy(), outside.copy()
        fa, tha = _margin(L, K.boundary_point(a) - pp)
        fb, thb = _margin(L, K.boundary_point(b) - pp)
        side = np.zeros(a.size, dtype=int)
        for _ in range(ROOT_STEPS):
            denom = fb - fa
            c = np.where(denom != 0.0, (a * fb - b * fa) / np.where(denom != 0.0, denom, 1.0), 0.5 * (a + b))
            bad = ~((c - np.minimum(a, b)) * (c - np.maximum(a, b)) <= 0.0)
            c = np.where(bad, 0.5 * (a + b), c)
            th0 = np.where(np.abs(c - a) < np.abs(c - b), tha, thb)
            fc, thc = _margin(L, K.boundary_point(c) - pp, th0)
            pos = fc > 0.0
            fb = np.where(pos & (side == 1), 0.5 * fb, fb)
            fa = np.where(~pos & (side == -1), 0.5 * fa, fa)
            a, fa, tha = np.where(pos, c, a), np.where(pos, fc, fa), np.where(pos, thc, tha)
            b, fb, thb = np.where(pos, b, c), np.where(pos, fb, fc), np.where(pos, thb, thc)
            side = np.where(pos, 1, -1)
            if np.all((np.abs(a - b) <= ROOT_TOL) | (np.abs(fc) <= 4e-16 * K.diameter)):
                break
        root = np.where(np.abs(fa) < np.abs(fb), a, b)
        th = np.where(np.abs(fa) < np.abs(fb), tha, thb)
        return root, th

    live = status == OK
    phi_p = np.where(live, u + kr * step, u)
    phi_m = np.where(live, u - kl * step, u)
    psi_p = u.copy()
    psi_m = u.copy()
    if np.any(live):
        pl = p[live]
        phi_p[live], psi_p[live] = refine(u[live] + (kr[live] - 1) * step, u[live] + kr[live] * step, pl)
        phi_m[live], psi_m[live] = refine(u[live] - (kl[live] - 1) * step, u[live] - kl[live] * step, pl)

    q_p = K.boundary_point(phi_p)
    q_m = K.boundary_point(phi_m)
    _, psi_p = L.margin(q_p - p, theta0=psi_p, return_theta=True, newton_steps=6)
    _, psi_m = L.margin(q_m - p, theta0=psi_m, return_theta=True, newton_steps=6)
    psi_p = u + np.mod(psi_p - u + np.pi, TWO_PI) - np.pi
    psi_m = u + np.mod(psi_m - u + np.pi, TWO_PI) - np.pi

    vertex = K.boundary_point(u)
    tang = unit_perp(u)
    sig_p = np.sum((q_p - vertex) * tang, axis=-1)
    sig_m = np.sum((q_m - vertex) * tang, axis=-1)

    area = _green_area(K, L, u, p, phi_m, phi_p, psi_m, psi_p)
    area = np.where(status == WHOLE, K.area, area)
    area = np.where(status == EMPTY, 0.0, area)
    return {
        "u": u,
        "t": t,
        "p": p,
        "phi_minus": phi_m,
        "phi_plus": phi_p,
        "psi_minus": psi_m,
        "psi_plus": psi_p,
        "sigma_minus": np.where(status == OK, sig_m, 0.0),
        "sigma_plus": np.where(status == OK, sig_p, 0.0),
        "area": area,
        "status": status,
        "roots": flips,
        "ambiguous": _ambiguous(g, pos, c),
    }


def _ambiguous(g, pos, c):
    """Grid samples that nearly touch zero without crossing (tangential contact)."""
    near = np.abs(g) < AMBIGUITY
    near[:, c] = False
    return np.any(near & ~(pos != np.roll(pos, 1, axis=1)) & ~(pos != np.roll(pos, -1, axis=1)), axis=1)


def _green_area(K, L, u, p, phi_m, phi_p, psi_m, psi_p):
    """Area between the dK arc [phi_m, phi_p] and the d(L+p) arc [psi_m, psi_p].

    Green's theorem with the vertex x_K(u) as origin o keeps the integrands small:
        A = 1/2 [ int rho_K (h_K - <o,u>) - int rho_L (h_L + <p - o, u>) ].
    """
    o = K.boundary_point(u)
    n = max(64, 4 * max(K.kmax, L.kmax) + 16)
    po = p - o

    def arc_K(th):
        return K.radius_of_curvature(th) * (
            K.support(th) - o[:, 0, None] * np.cos(th) - o[:, 1, None] * np.sin(th)
        )

    def arc_L(th):
        return L.radius_of_curvature(th) * (
            L.support(th) + po[:, 0, None] * np.cos(th) + po[:, 1, None] * np.sin(th)
        )

    return 0.5 * (gl_integrate(arc_K, phi_m, phi_p, n) - gl_integrate(arc_L, psi_m, psi_p, n))


def jacobian_batch(K, L, data, regime):
    u, t = data["u"], data["t"]
    span = data["psi_plus"] - data["psi_minus"]
    ok = (data["status"] == OK) & (span <= np.pi + 1e-12)
    ipair = np.zeros_like(t)
    if np.any(ok):
        ipair[ok] = arc_pair_integral(L, data["psi_minus"][ok], data["psi_plus"][ok])
    if regime == "LL":
        return t * ipair
    k = 1.0 / L.curvature(u) - 1.0 / K.curvature(u) + t
    return k * ipair


# ------------------------------------------------------------------ public scalar API


def cap(K: SmoothBody, L: SmoothBody, u, t) -> CapGeometry:
    u = float(u)
    t = float(t)
    if t < 0:
        raise HeightOutOfRange(f"height must be non-negative, got {t}")
    d = cap_batch(K, L, u, t)
    status = int(d["status"][0])
    if status == WHOLE:
        raise HeightOutOfRange(f"t = {t} is beyond t0(u): the boundaries no longer cross")
    if bool(d["ambiguous"][0]):
        raise TangentialIntersection(f"tangential contact at u={u}, t={t}")
    return CapGeometry(
        u=u,
        t=t,
        vertex=K.boundary_point(u),
        translate_offset=d["p"][0],
        theta_minus=float(d["phi_minus"][0]),
        theta_plus=float(d["phi_plus"][0]),
        psi_minus=float(d["psi_minus"][0]),
        psi_plus=float(d["psi_plus"][0]),
        area=float(d["area"][0]),
        sigma_minus=float(d["sigma_minus"][0]),
        sigma_plus=float(d["sigma_plus"][0]),
        roots=int(d["roots"][0]),
    )


def cap_area(K, L, u, t):
    return cap_batch(K, L, u, t)["area"]


def jacobian_KL(K, L, u, t):
    if float(t) == 0.0:
        return 0.0
    d = cap_batch(K, L, u, t)
    if d["status"][0] == WHOLE:
        raise HeightOutOfRange(f"t = {t} is beyond t0(u)")
    return float(jacobian_batch(K, L, d, "KL")[0])


def jacobian_LL(L, u, t, subdivided=False):
    """J(u,t) = t J*(u,t) for K = L.

    ``subdivided`` evaluates J* through the decomposition
    J* = J~ - J_1 - J_2 - 2 Jbar_1 - 2 Jbar_2 (the half-circle arc minus the
    two end arcs and their cross terms) instead of directly.
    """
    if float(t) == 0.0:
        return 0.0
    return float(t) * jstar_LL(L, u, t, subdivided)


def jstar_LL(L, u, t, subdivided=False):
    u = float(u)
    d = cap_batch(L, L, u, t)
    if d["status"][0] == WHOLE:
        raise HeightOutOfRange(f"t = {t} is beyond t0(u)")
    a, b = float(d["psi_minus"][0]), float(d["psi_plus"][0])
    if not subdivided:
        return float(arc_pair_integral(L, a, b))
    a0, b0 = u - np.pi / 2, u + np.pi / 2
    full = arc_pair_integral_direct(L, a0, b0)
    j1 = arc_pair_integral_direct(L, a0, a)
    j2 = arc_pair_integral_direct(L, b, b0)
    jbar1 = _cross(L, a0, a, a, b0)
    jbar2 = _cross(L, a, b, b, b0)
    return full - j1 - j2 - 2.0 * jbar1 - 2.0 * jbar2


def _cross(L, a, b, c, d, n=96):
    """int_{[a,b]} int_{[c,d]} rho rho |sin| for arcs with a <= b <= c <= d, d - a <= pi.

    For a fixed normal psi in [a, b] the inner integral is the projection of the
    chord x(d) - x(c) onto -u(psi).
    """
    chord = L.boundary_point(d) - L.boundary_point(c)

    def inner(psi):
        return -L.radius_of_curvature(psi) * (chord[0] * np.cos(psi) + chord[1] * np.sin(psi))

    return float(gl_integrate(inner, a, b, n))


def height_for_area(K, L, u, delta, tol=1e-12):
    """Height t* with A(u, t*) = delta (vectorized over u).

    Newton steps use dA/dt = sigma_+ - sigma_-; a bracket [lo, hi] kept from the
    monotonicity of A in t catches any step that leaves it.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    delta = float(delta)
    if not 0.0 < delta < K.area:
        raise AreaOutOfRange(f"need 0 < delta < A(K) = {K.area}, got {delta}")
    lo = np.zeros_like(u)
    hi = K.width(u) * (1 + 1e-12)
    t = 0.5 * hi
    for _ in range(100):
        d = cap_batch(K, L, u, t)
        resid = d["area"] - delta
        below = resid < 0.0
        lo = np.where(below, t, lo)
        hi = np.where(below, hi, t)
        done = np.abs(resid) <= tol * K.area
        if np.all(done):
            break
        slope = d["sigma_plus"] - d["sigma_minus"]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - resid / slope
        ok = (slope > 0) & (step > lo) & (step < hi)
        t = np.where(done, t, np.where(ok, step, 0.5 * (lo + hi)))
    return t


# ------------------------------------------------------------------ expectation


def _cutoff(n, area, tail_target):
    if n <= 2:
        return area
    frac = 1.0 - tail_target ** (1.0 / (n - 2))
    return area * max(0.1, frac)


def expectation_integral(
    K: SmoothBody,
    L: SmoothBody,
    n: int,
    regime="KL",
    n_u=64,
    max_n_u=256,
    epsrel=1e-10,
    tail_target=1e-13,
    strict=False,
):
    """E f_0 = A^-2 C(n,2) int_{S^1} int_0^{t1} (1 - A(u,t)/A)^(n-2) J(u,t) dt du.

    The t-integral is adaptive Gauss-Kronrod (vector-valued over the u-nodes),
    the u-integral a periodic trapezoid doubled until two levels agree.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if regime not in ("KL", "LL"):
        raise ValueError(f"unknown regime {regime!r}")
    if regime == "LL":
        K = L
    area = K.area
    delta0 = _cutoff(n, area, tail_target)
    t_max = float(np.max(K.width(np.linspace(0, TWO_PI, 256, endpoint=False))))

    def inner(us):
        widths = K.width(us)
        if delta0 >= area * (1 - 1e-12):
            t1 = float(np.max(widths)) * (1 + 1e-9)
        else:
            t1 = float(np.max(height_for_area(K, L, us, delta0)))
        flagged = np.zeros(us.size, dtype=bool)

        def f(t):
            d = cap_batch(K, L, us, np.full(us.size, t))
            flagged[d["status"] == MULTI] = True
            jac = jacobian_batch(K, L, d, regime)
            weight = np.clip(1.0 - d["area"] / area, 0.0, 1.0) ** (n - 2)
            return np.where(d["status"] == OK, weight * jac, 0.0)

        scale = _typical_height(K, L, us, n, regime, t1)
        points = [t1 * 4.0**-k for k in range(1, 30) if t1 * 4.0**-k > scale * 0.1]
        val, err = quad_vec(f, 0.0, t1, epsabs=0.0, epsrel=epsrel, points=sorted(points), limit=2000)
        return val, err, t1, int(flagged.sum())

    us = np.linspace(0.0, TWO_PI, n_u, endpoint=False)
    vals, qerr, t1, flagged = inner(us)
    coef = comb(n, 2) / area**2
    total = coef * TWO_PI * np.mean(vals)
    terr = np.inf
    while True:
        coarse = coef * TWO_PI * np.mean(vals[::2])
        terr = abs(total - coarse)
        if terr <= 10 * epsrel * abs(total) or us.size >= max_n_u:
            break
        mids = us + np.pi / us.size
        v2, e2, t1b, f2 = inner(mids)
        merged = np.empty(2 * us.size)
        merged[0::2], merged[1::2] = vals, v2
        us_m = np.empty(2 * us.size)
        us_m[0::2], us_m[1::2] = us, mids
        vals, us = merged, us_m
        qerr = max(qerr, e2)
        t1 = max(t1, t1b)
        flagged += f2
        total = coef * TWO_PI * np.mean(vals)

    jmax = _jacobian_bound(K, L, regime, t_max)
    tail = TWO_PI * jmax * t_max * (1.0 - delta0 / area) ** (n - 2) * coef
    error = coef * TWO_PI * qerr + terr
    domain = IntegrationDomain(t1=t1, delta0=delta0, tail_bound=float(tail), t_max=t_max)
    if strict and error > 1e3 * epsrel * abs(total):
        raise QuadratureNotConverged(f"expectation integral error {error:.3g}", error)
    return ExpectationResult(
        value=float(total),
        error=float(error),
        domain=domain,
        n=n,
        regime=regime,
        n_u=us.size,
        flagged=flagged,
        per_direction=coef * vals,
    )


def _typical_height(K, L, us, n, regime, t1):
    """Height where the cap area is about A/n: where the weight starts to decay."""
    target = K.area / max(n, 2)
    if target >= K.area * 0.999:
        return t1
    try:
        return float(np.min(height_for_area(K, L, us[:: max(1, us.size // 8)], target)))
    except AreaOutOfRange:
        return t1


def _jacobian_bound(K, L, regime, t_max, nu=32, nt=32):
    us = np.linspace(0.0, TWO_PI, nu, endpoint=False)
    ts = np.linspace(0.0, t_max, nt + 2)[1:-1]
    uu, tt = np.meshgrid(us, ts)
    d = cap_batch(K, L, uu, tt)
    return float(np.max(jacobian_batch(K, L, d, regime)))


# ------------------------------------------------------------------ output


def write_grid_csv(path, K, L, regime="KL", n_u=32, n_t=32, t_max=None):
    """Dump A(u,t) and J(u,t) on a regular grid."""
    us = np.linspace(0.0, TWO_PI, n_u, endpoint=False)
    if t_max is None:
        t_max = float(np.min(K.width(us)))
    ts = np.linspace(0.0, t_max, n_t + 1)[1:]
    uu, tt = np.meshgrid(us, ts, indexing="ij")
    d = cap_batch(K, L if regime == "KL" else K, uu, tt)
    jac = jacobian_batch(K, L if regime == "KL" else K, d, regime)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "t", "area", "jacobian", "status"])
        for row in zip(d["u"], d["t"], d["area"], jac, d["status"]):
            w.writerow([f"{row[0]:.12g}", f"{row[1]:.12g}", f"{row[2]:.15g}", f"{row[3]:.15g}", int(row[4])])
    return path


__all__ = [
    "CapGeometry",
    "IntegrationDomain",
    "ExpectationResult",
    "cap",
    "cap_area",
    "cap_batch",
    "jacobian_KL",
    "jacobian_LL",
    "jstar_LL",
    "jacobian_batch",
    "height_for_area",
    "expectation_integral",
    "write_grid_csv",
]
