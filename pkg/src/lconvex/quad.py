"""Quadrature helpers: Gauss-Legendre rules, the periodic trapezoid rule, and
the double arc integral that every Jacobian in the package reduces to."""

from functools import lru_cache

import numpy as np

from .body import TWO_PI, unit, unit_perp
from .errors import QuadratureNotConverged


@lru_cache(maxsize=None)
def gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gl_integrate(f, a, b, n=64):
    """Integrate a vectorized ``f`` over [a, b] with an ``n``-point rule.

    ``a`` and ``b`` may be arrays; the result then has their shape.
    """
    x, w = gauss_legendre(n)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * x
    return half * (f(nodes) @ w)


def gl_doubling(f, a, b, n=64, rtol=1e-11, max_n=1024):
    """Gauss-Legendre with the node count doubled until two rules agree."""
    prev = gl_integrate(f, a, b, n)
    while n < max_n:
        n *= 2
        cur = gl_integrate(f, a, b, n)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(np.abs(cur), 1e-300)):
            return cur
        prev = cur
    return prev


def periodic_trapezoid(f, n_start=256, n_max=4096, rtol=1e-13, strict=False):
    """Integral of a smooth 2*pi-periodic ``f`` over the circle.

    The node count is doubled from ``n_start``; the reported error is the change
    between the last two rules.  Returns ``(value, error)``.
    """
    n = n_start
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    prev = TWO_PI * np.mean(f(theta))
    err = np.inf
    while n < n_max:
        theta = np.linspace(0.0, TWO_PI, n, endpoint=False) + np.pi / n
        cur = 0.5 * prev + 0.5 * TWO_PI * np.mean(f(theta))
        n *= 2
        err = abs(cur - prev)
        prev = cur
        if err <= rtol * max(abs(cur), 1e-300):
            break
    if strict and err > rtol * max(abs(prev), 1e-300):
        raise QuadratureNotConverged(f"periodic trapezoid stalled at n={n}", err)
    return float(prev), float(err)


def arc_pair_integral(body, a, b):
    """Double integral of rho(phi) rho(psi) |sin(phi - psi)| over [a, b]^2.

    This is the double arc-length integral of |u(s1) x u(s2)| over the arc of
    the boundary with normal angles in [a, b] (b - a <= pi).  It reduces to

        2 * int_a^b rho(phi) <x(phi) - x(a), u(phi)> dphi
          = 2 * (int_a^b rho h dphi - <x(a), R(x(b) - x(a))>)

    with R the rotation by -90 degrees; the remaining integrand is a
    trigonometric polynomial.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = max(32, 2 * body.kmax + 8)

    def rho_h(t):
        return body.radius_of_curvature(t) * body.support(t)

    core = gl_integrate(rho_h, a, b, n)
    xa = body.boundary_point(a)
    xb = body.boundary_point(b)
    d = xb - xa
    rot = np.stack([d[..., 1], -d[..., 0]], axis=-1)
    return 2.0 * (core - np.sum(xa * rot, axis=-1))


def arc_pair_integral_direct(body, a, b, n=96):
    """Tensor-product evaluation of the same double integral on the triangle
    psi < phi, where the integrand sin(phi - psi) has no kink."""
    x, w = gauss_legendre(n)
    a = float(a)
    b = float(b)
    phi = a + 0.5 * (b - a) * (x + 1.0)
    wphi = 0.5 * (b - a) * w
    total = 0.0
    rho_phi = body.radius_of_curvature(phi)
    for p, wp, rp in zip(phi, wphi, rho_phi):
        psi = a + 0.5 * (p - a) * (x + 1.0)
        wpsi = 0.5 * (p - a) * w
        total += wp * rp * np.sum(wpsi * body.radius_of_curvature(psi) * np.sin(p - psi))
    return 2.0 * total


def arc_pair_integral_tensor(body, a, b, n=48):
    """Vectorized tensor-product version of ``arc_pair_integral_direct``.

    ``a`` and ``b`` are arrays; the triangle psi < phi is mapped to the square
    so the smooth integrand sin(phi - psi) is integrated without a kink.
    """
    x, w = gauss_legendre(n)
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    phi = a + 0.5 * (b - a) * (x + 1.0)
    wphi = 0.5 * (b - a) * w
    psi = a[..., None] + 0.5 * (phi - a)[..., None] * (x + 1.0)
    wpsi = 0.5 * (phi - a)[..., None] * w
    inner = np.sum(wpsi * body.radius_of_curvature(psi) * np.sin(phi[..., None] - psi), axis=-1)
    return 2.0 * np.sum(wphi * body.radius_of_curvature(phi) * inner, axis=-1)


def projection_length(body, a, phi):
    """<x(phi) - x(a), u(phi)>: the inner integral of the arc-pair integrand."""
    return np.sum((body.boundary_point(phi) - body.boundary_point(a)) * unit(phi), axis=-1)


__all__ = [
    "gauss_legendre",
    "gl_integrate",
    "gl_doubling",
    "periodic_trapezoid",
    "arc_pair_integral",
    "arc_pair_integral_direct",
    "arc_pair_integral_tensor",
    "projection_length",
    "unit_perp",
]
