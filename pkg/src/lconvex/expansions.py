"""Closed-form expansion coefficients for E f_0 and the missed area.

K != L (curvature condition max k_L < 1 < min k_K):

    E f_0 = z1 n^(1/3) + z2 + z3 n^(-1/3) + ...,   z2 = 0,

K = L:

    E f_0 = tz1 + tz2 n^(-1/2) + tz3 n^(-1) + ...

Every coefficient is an integral over directions of a per-direction weight.
The weights here come from closed formulas in the curvature jets; ``chains``
derives the same weights mechanically, and the two are compared in the tests.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import gamma

import mpmath
import numpy as np

from .asymptotics import moment_gammas
from .body import TWO_PI, SmoothBody, validate_pair, volume_product_projection
from .chains import chain_KL, chain_LL
from .quad import arc_pair_integral_tensor

N_START = 256
N_MAX = 4096
CHAIN_START = 32
CHAIN_MAX = 512


def circle_integral(fn, n_start=N_START, n_max=N_MAX, rtol=1e-14):
    """Periodic trapezoid rule with node doubling; returns (value, error).

    The error estimate is the change between the last two levels (the rule
    converges geometrically, so this over-estimates the true error).
    """
    n = n_start
    theta = np.linspace(0.0, TWO_PI, n, endpoint=False)
    vals = fn(theta)
    value = TWO_PI * np.mean(vals)
    err = np.inf
    while n < n_max:
        mids = theta + np.pi / n
        new = fn(mids)
        theta = np.concatenate([theta, mids])
        vals = np.concatenate([vals, new])
        n *= 2
        refined = TWO_PI * np.mean(vals)
        err = abs(refined - value)
        value = refined
        if err <= rtol * max(abs(value), 1e-300):
            break
    return float(value), float(err)


def _scalar_circle_integral(fn, n_start=CHAIN_START, n_max=CHAIN_MAX, rtol=1e-13):
    return circle_integral(lambda th: np.array([fn(t) for t in th]), n_start, n_max, rtol)


# ----------------------------------------------------------------------- K != L


def _jets(K, L, theta):
    kK = [K.curvature(theta, j) for j in range(3)]
    kL = [L.curvature(theta, j) for j in range(3)]
    return kK, kL


def relative_asa_density(K, L, theta):
    kK, kL = _jets(K, L, theta)
    return np.cbrt(kK[0] - kL[0]) / kK[0]


def relative_asa(K: SmoothBody, L: SmoothBody, with_error=False):
    """as^L(K) = int (k_K - k_L)^(1/3) / k_K du."""
    validate_pair(K, L)
    val, err = circle_integral(lambda th: relative_asa_density(K, L, th))
    return (val, err) if with_error else val


def w1_density(K, L, theta):
    return np.cbrt(2.0 / (3.0 * K.area)) * gamma(5.0 / 3.0) * relative_asa_density(K, L, theta)


def z1(K: SmoothBody, L: SmoothBody, with_error=False):
    val, err = relative_asa(K, L, with_error=True)
    c = np.cbrt(2.0 / (3.0 * K.area)) * gamma(5.0 / 3.0)
    return (c * val, c * err) if with_error else c * val


def w3_density(K, L, theta):
    """Per-direction weight of n^(-1/3) in E f_0."""
    (k, k1, k2), (l, l1, l2) = _jets(K, L, theta)
    d = k - l
    t1 = (l * (2 * k**2 - 3 * k * l - l**2) - l2) / (2 * k * l * np.cbrt(d))
    t2 = (2 * l * (k2 - l2) + 5 * l1 * (k1 - l1)) / (6 * k * l * d ** (4.0 / 3.0))
    t3 = 5 * (k1 - l1) ** 2 / (9 * k * d ** (7.0 / 3.0))
    return -np.cbrt(1.5 * K.area) * gamma(7.0 / 3.0) / 5.0 * (t1 + t2 - t3)


def z3(K: SmoothBody, L: SmoothBody, with_error=False):
    validate_pair(K, L)
    val, err = circle_integral(lambda th: w3_density(K, L, th))
    return (val, err) if with_error else val


def z_chain(K: SmoothBody, L: SmoothBody, with_error=False):
    """(z1, z2, z3) by integrating the mechanized per-direction weights."""
    validate_pair(K, L)
    out = []
    for idx in range(3):
        out.append(_scalar_circle_integral(lambda th, i=idx: chain_KL(th, K, L, check=False).w[i]))
    if with_error:
        return out
    return tuple(v for v, _ in out)


# ----------------------------------------------------------------------- K == L


def tilde_J(L: SmoothBody, theta):
    """Double integral of rho rho |sin| over the half circle of normals centred at theta."""
    theta = np.asarray(theta, dtype=float)
    return arc_pair_integral_tensor(L, theta - np.pi / 2, theta + np.pi / 2)


def tilde_w1_density(L, theta):
    return tilde_J(L, theta) / (2.0 * L.tangent_width(theta) ** 2)


def tilde_z1(L: SmoothBody, with_error=False):
    val, err = circle_integral(lambda th: tilde_w1_density(L, th))
    return (val, err) if with_error else val


def _j_terms(L, theta, source):
    ch = chain_LL(theta, L)
    if source == "chain":
        return ch.j[1], ch.j[2], ch.width
    if source == "transcribed":
        return ch.transcribed_l2, ch.transcribed_l3, ch.width
    raise ValueError(f"unknown source {source!r}")


def tilde_w2_density(L, theta, source="chain"):
    j2, _, w = _j_terms(L, theta, source)
    return gamma(2.5) * np.sqrt(L.area) / (2.0 * w**2.5) * j2


def tilde_w3_density(L, theta, source="chain"):
    _, j3, w = _j_terms(L, theta, source)
    return L.area * j3 / w**3


def tilde_z2(L: SmoothBody, source="chain", with_error=False):
    val, err = _scalar_circle_integral(lambda th: tilde_w2_density(L, th, source))
    return (val, err) if with_error else val


def tilde_z3(L: SmoothBody, source="chain", with_error=False):
    val, err = _scalar_circle_integral(lambda th: tilde_w3_density(L, th, source))
    return (val, err) if with_error else val


# ----------------------------------------------------------------------- Beta moments


@dataclass
class GammaMoment:
    beta: float
    n: int
    alpha: float
    exact: float
    gamma1: float
    gamma2_displayed: float
    gamma2_exact: float

    @property
    def asymptotic(self):
        """Gamma(beta+1) + gamma_1/n + gamma_2/n^2 with the displayed gamma_2."""
        return gamma(self.beta + 1) + self.gamma1 / self.n + self.gamma2_displayed / self.n**2

    @property
    def asymptotic_exact(self):
        return gamma(self.beta + 1) + self.gamma1 / self.n + self.gamma2_exact / self.n**2

    @property
    def residual(self):
        return self.exact - self.asymptotic

    @property
    def residual_exact(self):
        return self.exact - self.asymptotic_exact


def displayed_gammas(beta):
    """Closed-form (gamma_1, gamma_2); this gamma_2 misses the true n^-2 term, see ``gamma2_exact``."""
    return -gamma(beta + 3) / 2.0, -gamma(beta + 4) / 3.0 - 2.0 * gamma(beta + 3)


def gamma2_exact(beta):
    """Second-order coefficient from the exact Gamma-ratio expansion.

    M_beta(n) = Gamma(beta+1) Gamma(N+1) N^(beta+1) / Gamma(N+beta+2), N = n-2,
    expands to Gamma(beta+1) + gamma_1/n + gamma_2/n^2 with
    gamma_2 = Gamma(beta+3) (3 (beta+2)^2 + beta - 24) / 24.
    """
    return gamma(beta + 3) * (3 * (beta + 2) ** 2 + beta - 24) / 24.0


def beta_moment(beta, n, alpha=1.0, dps=50):
    """int_0^{alpha N} (1 - y/N)^N y^beta dy with N = n - 2, in high precision."""
    with mpmath.workdps(dps):
        N = mpmath.mpf(n - 2)
        b = mpmath.mpf(beta)
        full = N ** (b + 1) * mpmath.beta(b + 1, N + 1)
        if alpha >= 1:
            return full
        return full * mpmath.betainc(b + 1, N + 1, 0, alpha, regularized=True)


def gamma_moment(beta, n, alpha=1.0):
    if beta <= -1:
        raise ValueError("beta must exceed -1")
    if n < 3:
        raise ValueError("n must be at least 3")
    g1, g2 = displayed_gammas(beta)
    return GammaMoment(
        beta=float(beta),
        n=int(n),
        alpha=float(alpha),
        exact=float(beta_moment(beta, n, alpha)),
        gamma1=g1,
        gamma2_displayed=g2,
        gamma2_exact=gamma2_exact(beta),
    )


def moment_residual(beta, n, which="displayed", dps=60):
    """exact - (Gamma(beta+1) + gamma_1/n + gamma_2/n^2), in high precision."""
    g1, g2 = displayed_gammas(beta)
    if which == "exact":
        g2 = gamma2_exact(beta)
    with mpmath.workdps(dps):
        n_ = mpmath.mpf(n)
        approx = mpmath.gamma(mpmath.mpf(beta) + 1) + mpmath.mpf(g1) / n_ + mpmath.mpf(g2) / n_**2
        return float(beta_moment(beta, n, dps=dps) - approx)


# ----------------------------------------------------------------------- report


@dataclass
class ExpansionReport:
    regime: str
    coefficients: dict
    quadrature_error: dict
    body_refs: list
    notes: dict = field(default_factory=dict)

    def to_json(self, **kw):
        return json.dumps(asdict(self), **kw)


def coefficients(K: SmoothBody | None, L: SmoothBody, regime="KL", source="chain", symmetric_tol=1e-8):
    if regime == "KL":
        a, ea = z1(K, L, with_error=True)
        c, ec = z3(K, L, with_error=True)
        return ExpansionReport(
            regime="KL",
            coefficients={"z1": a, "z2": 0.0, "z3": c},
            quadrature_error={"z1": ea, "z2": 0.0, "z3": ec},
            body_refs=[K.name, L.name],
            notes={"relative_affine_surface_area": relative_asa(K, L), "area": K.area},
        )
    if regime == "LL":
        a, ea = tilde_z1(L, with_error=True)
        b, eb = tilde_z2(L, source, with_error=True)
        c, ec = tilde_z3(L, source, with_error=True)
        notes = {
            "source": source,
            "tz2_vanishes": abs(b) < symmetric_tol,
            "centrally_symmetric": L.is_centrally_symmetric(),
            "area": L.area,
        }
        if L.is_centrally_symmetric():
            notes["volume_product_projection"] = volume_product_projection(L)
        return ExpansionReport(
            regime="LL",
            coefficients={"tz1": a, "tz2": b, "tz3": c},
            quadrature_error={"tz1": ea, "tz2": eb, "tz3": ec},
            body_refs=[L.name],
            notes=notes,
        )
    raise ValueError(f"unknown regime {regime!r}")


def series_eval(report: ExpansionReport, n, target="f0"):
    """Truncated series at sample size n.

    ``f0``: the vertex-count series.  ``missed_area``: the expected missed area
    (absolute), from the Efron identity E A(K minus K_n) / A(K) = E f0(n+1) / (n+1)
    applied to the vertex-count series.
    """
    c = report.coefficients
    n = float(n)

    def f0(m):
        if report.regime == "KL":
            return c["z1"] * m ** (1 / 3) + c.get("z2", 0.0) + c["z3"] * m ** (-1 / 3)
        return c["tz1"] + c["tz2"] * m**-0.5 + c["tz3"] / m

    if target == "f0":
        return f0(n)
    if target == "missed_area":
        return f0(n + 1.0) / (n + 1.0) * report.notes.get("area", 1.0)
    raise ValueError(f"unknown target {target!r}")


__all__ = [
    "circle_integral",
    "relative_asa",
    "z1",
    "z3",
    "z_chain",
    "w1_density",
    "w3_density",
    "tilde_J",
    "tilde_z1",
    "tilde_z2",
    "tilde_z3",
    "tilde_w1_density",
    "tilde_w2_density",
    "tilde_w3_density",
    "GammaMoment",
    "gamma_moment",
    "displayed_gammas",
    "gamma2_exact",
    "beta_moment",
    "moment_residual",
    "moment_gammas",
    "ExpansionReport",
    "coefficients",
    "series_eval",
]
