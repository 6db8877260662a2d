"""Planar convex bodies given by finite Fourier support functions.

A body is stored through its support function

    h(theta) = a0 + sum_k a_k cos(k theta) + b_k sin(k theta),

so every derivative is an exact trigonometric sum.  The first harmonic only
translates the body; it is removed at construction (the Steiner point moves to
the origin) and kept in ``translation`` so user coordinates can be recovered.

Curvature derivatives are taken with respect to arc length, counter-clockwise.
With rho = h + h'' the radius of curvature and ds = rho dtheta:

    kappa   = 1 / rho
    kappa'  = -rho' / rho**3
    kappa'' = -rho'' / rho**4 + 3 rho'**2 / rho**5
    kappa'''= -rho''' / rho**5 + 10 rho' rho'' / rho**6 - 15 rho'**3 / rho**7
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CurvatureConditionViolated, InvalidBody, UnsupportedOrder

TWO_PI = 2.0 * np.pi
VALIDATION_GRID = 4096
MEMBERSHIP_GRID = 256
MAX_ORDER = 5


def unit(theta):
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def unit_perp(theta):
    """Counter-clockwise tangent (u rotated by +90 degrees)."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([-np.sin(theta), np.cos(theta)], axis=-1)


@dataclass(frozen=True)
class Frame:
    """Local frame at a boundary point: tangent r'(s) and inward normal -u."""

    origin: np.ndarray
    tangent: np.ndarray
    inward_normal: np.ndarray

    def coords(self, points):
        """(sigma, eta) coordinates of ``points`` in this frame."""
        d = np.asarray(points, dtype=float) - self.origin
        return d @ self.tangent, d @ self.inward_normal


@dataclass(frozen=True)
class PairReport:
    min_kappa_K: float
    max_kappa_L: float
    strict: bool
    passed: bool
    normalized: bool

    def as_dict(self):
        return {
            "min_kappa_K": self.min_kappa_K,
            "max_kappa_L": self.max_kappa_L,
            "strict": self.strict,
            "passed": self.passed,
            "normalized": self.normalized,
        }


class SmoothBody:
    """Strictly convex planar body with a trigonometric-polynomial support function.

    Instances are immutable; all queries are pure.
    """

    def __init__(self, a0, cos=(), sin=(), name="body"):
        cos = np.atleast_1d(np.asarray(cos, dtype=float))
        sin = np.atleast_1d(np.asarray(sin, dtype=float))
        kmax = max(cos.size, sin.size, 1)
        a = np.zeros(kmax)
        b = np.zeros(kmax)
        a[: cos.size] = cos
        b[: sin.size] = sin
        self.translation = np.array([a[0], b[0]])
        a[0] = 0.0
        b[0] = 0.0
        self.a0 = float(a0)
        self._a = a
        self._b = b
        self._k = np.arange(1, kmax + 1, dtype=float)
        self.name = str(name)
        self._a.setflags(write=False)
        self._b.setflags(write=False)

        self._check_convexity()

        g = np.linspace(0.0, TWO_PI, MEMBERSHIP_GRID, endpoint=False)
        self._grid_theta = g
        self._grid_u = unit(g)
        self._grid_h = self.support(g)
        self._grid_step = TWO_PI / MEMBERSHIP_GRID
        self.diameter = float(np.max(self.width(g)))
        self.tol = 1e-9 * self.diameter

    # ------------------------------------------------------------------ construction
    @classmethod
    def disc(cls, radius, name=None):
        return cls(radius, name=name or f"disc({radius:g})")

    @classmethod
    def fit(cls, support_fn, kmax=32, name="fit", samples=4096):
        """Least-squares Fourier fit of an arbitrary support function.

        The maximum residual on the sample grid is kept as ``fit_residual``.
        """
        theta = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        values = np.asarray(support_fn(theta), dtype=float)
        coef = np.fft.rfft(values) / samples
        a0 = coef[0].real
        a = 2.0 * coef[1 : kmax + 1].real
        b = -2.0 * coef[1 : kmax + 1].imag
        body = cls(a0, a, b, name=name)
        residual = values - body.support(theta) - unit(theta) @ body.translation
        body.fit_residual = float(np.max(np.abs(residual)))
        return body

    @classmethod
    def ellipse(cls, a, b, kmax=32, name=None):
        return cls.fit(
            lambda t: np.sqrt((a * np.cos(t)) ** 2 + (b * np.sin(t)) ** 2),
            kmax=kmax,
            name=name or f"ellipse({a:g},{b:g})",
        )

    @classmethod
    def from_dict(cls, spec):
        return cls(spec["a0"], spec.get("cos", ()), spec.get("sin", ()), spec.get("name", "body"))

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self):
        cos = list(self._a)
        sin = list(self._b)
        cos[0], sin[0] = float(self.translation[0]), float(self.translation[1])
        return {"a0": self.a0, "cos": cos, "sin": sin, "name": self.name}

    def scaled(self, factor, name=None):
        return SmoothBody(
            factor * self.a0, factor * self._a, factor * self._b, name or f"{factor:g}*{self.name}"
        )

    def rotated(self, angle, name=None):
        """Body rotated counter-clockwise by ``angle``: h_new(t) = h(t - angle)."""
        k = self._k
        c, s = np.cos(k * angle), np.sin(k * angle)
        a = self._a * c - self._b * s
        b = self._a * s + self._b * c
        return SmoothBody(self.a0, a, b, name or f"rot({self.name})")

    @property
    def kmax(self):
        return self._k.size

    @property
    def fourier(self):
        return self.a0, self._a.copy(), self._b.copy()

    def is_centrally_symmetric(self, tol=1e-14):
        odd = self._k % 2 == 1
        return bool(np.all(np.abs(self._a[odd]) <= tol) and np.all(np.abs(self._b[odd]) <= tol))

    def _check_convexity(self):
        theta = np.linspace(0.0, TWO_PI, VALIDATION_GRID, endpoint=False)
        rho = self.radius_of_curvature(theta)
        i = int(np.argmin(rho))
        step = TWO_PI / VALIDATION_GRID
        res = minimize_scalar(
            lambda t: float(self.radius_of_curvature(t)),
            bounds=(theta[i] - step, theta[i] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        self.min_radius_of_curvature = float(min(rho[i], res.fun))
        j = int(np.argmax(rho))
        res = minimize_scalar(
            lambda t: -float(self.radius_of_curvature(t)),
            bounds=(theta[j] - step, theta[j] + step),
            method="bounded",
            options={"xatol": 1e-12},
        )
        self.max_radius_of_curvature = float(max(rho[j], -res.fun))
        if not self.min_radius_of_curvature > 0.0:
            raise InvalidBody(
                f"{self.name}: h + h'' reaches {self.min_radius_of_curvature:.3g} <= 0"
            )
        if np.min(self.support(theta)) <= 0.0:
            raise InvalidBody(f"{self.name}: support function not positive after recentering")

    # ------------------------------------------------------------------ support function
    def support(self, theta, order=0):
        """Exact ``order``-th derivative of the support function."""
        if order < 0 or order > MAX_ORDER:
            raise UnsupportedOrder(f"support derivative of order {order} (max {MAX_ORDER})")
        theta = np.asarray(theta, dtype=float)
        phase = np.multiply.outer(theta, self._k) + order * np.pi / 2
        kk = self._k**order
        val = np.cos(phase) @ (kk * self._a) + np.sin(phase) @ (kk * self._b)
        if order == 0:
            val = val + self.a0
        return val

    def radius_of_curvature(self, theta, order=0):
        """d^order/dtheta^order of rho = h + h''."""
        return self.support(theta, order) + self.support(theta, order + 2)

    def curvature(self, theta, order=0):
        """Curvature and its arc-length derivatives (order 0..3)."""
        r = self.radius_of_curvature(theta)
        if order == 0:
            return 1.0 / r
        r1 = self.radius_of_curvature(theta, 1)
        if order == 1:
            return -r1 / r**3
        r2 = self.radius_of_curvature(theta, 2)
        if order == 2:
            return -r2 / r**4 + 3.0 * r1**2 / r**5
        if order == 3:
            r3 = self.radius_of_curvature(theta, 3)
            return -r3 / r**5 + 10.0 * r1 * r2 / r**6 - 15.0 * r1**3 / r**7
        raise UnsupportedOrder(f"curvature derivative of order {order} (max 3)")

    def curvature_jet(self, theta):
        """(kappa, kappa', kappa'', kappa''') at normal angle ``theta``."""
        return tuple(float(self.curvature(theta, j)) for j in range(4))

    def boundary_point(self, theta):
        """x(theta) = h u + h' u_perp: the boundary point with outer normal u(theta)."""
        theta = np.asarray(theta, dtype=float)
        h = self.support(theta)[..., None]
        dh = self.support(theta, 1)[..., None]
        return h * unit(theta) + dh * unit_perp(theta)

    def frame(self, theta):
        theta = float(theta)
        return Frame(self.boundary_point(theta), unit_perp(theta), -unit(theta))

    def width(self, theta):
        """Distance between the two supporting lines with normal +-u(theta)."""
        theta = np.asarray(theta, dtype=float)
        return self.support(theta) + self.support(theta + np.pi)

    def tangent_width(self, theta):
        """Distance between the two supporting lines parallel to u(theta)."""
        return self.width(np.asarray(theta, dtype=float) + np.pi / 2)

    @property
    def area(self):
        k2 = self._k**2
        return float(np.pi * self.a0**2 + 0.5 * np.pi * np.sum((1.0 - k2) * (self._a**2 + self._b**2)))

    @property
    def perimeter(self):
        return float(TWO_PI * self.a0)

    def min_curvature(self):
        return 1.0 / self.max_radius_of_curvature

    def max_curvature(self):
        return 1.0 / self.min_radius_of_curvature

    # ------------------------------------------------------------------ membership
    def margin(self, points, center=None, theta0=None, return_theta=False, newton_steps=5, stride=1):
        """max_theta <p - c, u(theta)> - h(theta) for ``points`` and the body ``self + center``.

        Negative inside.  The maximum over a 256-point grid (every ``stride``-th
        node) is refined by safeguarded Newton steps.  ``theta0`` (same shape as
        the point batch) skips the grid search.
        """
        y = np.asarray(points, dtype=float)
        if center is not None:
            y = y - np.asarray(center, dtype=float)
        if theta0 is None:
            vals = y @ self._grid_u[::stride].T - self._grid_h[::stride]
            idx = np.argmax(vals, axis=-1)
            th = self._grid_theta[::stride][idx]
            best = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]
            max_step = self._grid_step * stride
            th_start = th
        else:
            th = np.broadcast_to(np.asarray(theta0, dtype=float), y.shape[:-1]).copy()
            best = np.full(y.shape[:-1], -np.inf)
            max_step = 0.25
            th_start = th
        yx, yy = y[..., 0], y[..., 1]
        for _ in range(newton_steps):
            c, s = np.cos(th), np.sin(th)
            g1 = -yx * s + yy * c - self.support(th, 1)
            g2 = -(yx * c + yy * s) - self.support(th, 2)
            step = np.where(g2 < 0.0, -g1 / np.where(g2 < 0.0, g2, -1.0), 0.0)
            th = th + np.clip(step, -max_step, max_step)
        m = yx * np.cos(th) + yy * np.sin(th) - self.support(th)
        out = np.maximum(m, best)
        th = np.where(m >= best, th, th_start)
        if return_theta:
            return out, np.mod(th, TWO_PI)
        return out

    def contains(self, points, center=None, tol=None):
        tol = self.tol if tol is None else tol
        return self.margin(points, center) <= tol

    def __repr__(self):
        return f"SmoothBody(name={self.name!r}, a0={self.a0:g}, kmax={self.kmax})"


def validate_pair(K: SmoothBody, L: SmoothBody, strict=True) -> PairReport:
    """Check max kappa_L < 1 < min kappa_K (``strict``) or just max kappa_L < min kappa_K.

    The relaxed mode flags ``normalized=False`` when the pair only satisfies the
    condition after rescaling.
    """
    kk = K.min_curvature()
    kl = L.max_curvature()
    chain = kl < 1.0 < kk
    if strict:
        if not chain:
            raise CurvatureConditionViolated(
                f"need max kappa_L < 1 < min kappa_K, got {kl:.6g} and {kk:.6g}"
            )
        return PairReport(kk, kl, True, True, True)
    return PairReport(kk, kl, False, kl < kk, chain)


def volume_product_projection(L: SmoothBody, nodes=4096) -> float:
    """Half the product of the areas of the projection body of L and its polar.

    The projection body has support function equal to the width of L; the polar
    area is half the integral of width**-2 over the circle.
    """
    a0, a, b = L.fourier
    even = (L._k % 2) == 0
    k2 = L._k[even] ** 2
    wa, wb = 2.0 * a[even], 2.0 * b[even]
    area_pi = np.pi * (2.0 * a0) ** 2 + 0.5 * np.pi * np.sum((1.0 - k2) * (wa**2 + wb**2))
    theta = np.linspace(0.0, TWO_PI, nodes, endpoint=False)
    area_polar = 0.5 * np.mean(L.width(theta) ** -2.0) * TWO_PI
    return float(0.5 * area_pi * area_polar)
