"""Mechanized coefficient chains for the cap integrals.

Both chains expand, around a boundary direction u, the cap area A(u,t), the
Jacobian J(u,t), the height t as a function of the relative area x = A/A_ref,
and finally the integrand J(t(x)) t'(x) whose Beta moments give the per-direction
coefficients of the expected vertex count.  Nothing here uses a closed-form
coefficient: everything is composed from the boundary jets with PuiseuxSeries
arithmetic, so the closed forms in ``expansions`` can be checked against it.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import gamma

import numpy as np

from .asymptotics import vertex_weight_series
from .body import SmoothBody, unit, unit_perp, validate_pair
from .puiseux import PuiseuxSeries, arclength_series, compose, invert_series
from .quad import arc_pair_integral

HALF = Fraction(1, 2)


def _coeffs(series, start, step, count):
    return [float(c) for c in series.coefficient_list(start, step, count)]


def _collect_vertex_weights(v: PuiseuxSeries, area_ref, count):
    """n-expansion of sum_k v_k/(2A^2) Gamma(beta_k+1) Gamma(n+1)/Gamma(n+beta_k).

    Returns a PuiseuxSeries in 1/n (times n^(1 - beta_min)) as a dict
    exponent-of-n -> coefficient, keeping only exponents known from ``v``.
    """
    out = {}
    limit = 1 - v.trunc  # first n-power touched by the unknown tail of v
    for beta in v.exponents():
        coef = float(v[beta])
        weights = vertex_weight_series(float(beta), order=6)
        lead = 1 - beta
        for j in range(6):
            p = lead - j
            if p <= limit:
                break
            out[p] = out.get(p, 0.0) + coef / (2.0 * area_ref**2) * gamma(float(beta) + 1.0) * float(weights[j])
    return dict(sorted(out.items(), reverse=True)[:count])


# ------------------------------------------------------------------------- K != L


@dataclass
class CapChainKL:
    u: float
    kappa_K: tuple
    kappa_L: tuple
    e: list
    c: list
    a: list
    g: list
    l: list
    j: list
    p: list
    q: list
    v: list
    w: list
    series: dict = field(default_factory=dict, repr=False)

    def as_dict(self):
        d = asdict(self)
        d.pop("series")
        return d

    def to_json(self, **kw):
        return json.dumps(self.as_dict(), **kw)


def graph_series(jet):
    """Local graph eta = f(sigma) of a boundary with curvature jet ``jet``."""
    return arclength_series(*jet).graph


def chain_KL(u, K: SmoothBody, L: SmoothBody, check=True) -> CapChainKL:
    if check:
        validate_pair(K, L, strict=False)
    jet_K = tuple(float(x) for x in K.curvature_jet(u))
    jet_L = tuple(float(x) for x in L.curvature_jet(u))
    arc_L = arclength_series(*jet_L)
    f_K = graph_series(jet_K)
    f_L = arc_L.graph

    # height of the translated L-boundary above f_K, as a function of sigma
    t_of_sigma = f_K - f_L
    sig_plus = invert_series(t_of_sigma)
    sig_minus = -invert_series(t_of_sigma.reflect())

    t = PuiseuxSeries({2: 1.0}, 2, Fraction(100))
    F = (f_L - f_K).integ()
    area = compose(F, sig_plus) - compose(F, sig_minus) + t * (sig_plus - sig_minus)

    s_plus = compose(arc_L.s_of_sigma, sig_plus)
    s_minus = compose(arc_L.s_of_sigma, sig_minus)
    sig, eta = arc_L.sigma, arc_L.eta
    G = (sig * arc_L.deta - eta * arc_L.dsigma).integ()
    sig_m, eta_m = compose(sig, s_minus), compose(eta, s_minus)
    istar = 2.0 * (
        compose(G, s_plus)
        - compose(G, s_minus)
        - sig_m * (compose(eta, s_plus) - eta_m)
        + eta_m * (compose(sig, s_plus) - sig_m)
    )
    k0 = 1.0 / jet_L[0] - 1.0 / jet_K[0]
    jac = istar * k0 + istar * t

    # t as a function of x = A/A(K): work in tau = t^(1/2) so A is an integer series
    area_K = K.area
    x_of_tau = area.in_root_variable() / area_K
    tau_of_x = invert_series(x_of_tau)
    t_of_x = tau_of_x ** 2
    q = compose(jac.in_root_variable(), tau_of_x)
    v = q * t_of_x.deriv()

    w = _collect_vertex_weights(v, area_K, 4)
    third = Fraction(1, 3)
    return CapChainKL(
        u=float(u),
        kappa_K=jet_K,
        kappa_L=jet_L,
        e=[float(t_of_sigma[i]) for i in range(2, 6)],
        c=_coeffs(sig_plus, HALF, HALF, 4),
        a=_coeffs(area, Fraction(3, 2), HALF, 4),
        g=_coeffs(s_plus, HALF, HALF, 4),
        l=_coeffs(istar, Fraction(3, 2), HALF, 3),
        j=_coeffs(jac, Fraction(3, 2), HALF, 3),
        p=_coeffs(t_of_x, 2 * third, third, 4),
        q=_coeffs(q, Fraction(1), third, 4),
        v=_coeffs(v, 2 * third, third, 4),
        w=[w.get(Fraction(1, 3) - Fraction(k, 3), 0.0) for k in range(3)],
        series={"area": area, "jacobian": jac, "istar": istar, "t_of_x": t_of_x, "integrand": v,
                "sigma_plus": sig_plus, "sigma_minus": sig_minus, "s_plus": s_plus, "s_minus": s_minus},
    )


# ------------------------------------------------------------------------- K == L


@dataclass
class CapChainLL:
    u: float
    sigma_x1: float
    eta_x1: float
    sigma_x2: float
    eta_x2: float
    width: float
    b_u1: list
    b_u2: list
    mu1: list
    mu2: list
    a1: list
    a2: list
    a: list
    l: list
    j: list
    p: list
    v: list
    w: list
    transcribed_l2: float
    transcribed_l3: float
    series: dict = field(default_factory=dict, repr=False)

    def as_dict(self):
        d = asdict(self)
        d.pop("series")
        return d

    def to_json(self, **kw):
        return json.dumps(self.as_dict(), **kw)


def _side_cap(jet):
    """Expansions at one tangency point x_i for the K = L cap.

    In the local frame at x_i the two intersection points of dL and dL - t u lie on
    a chord at height h_i whose length is t.  Returns series in t for h_i, the
    chord ends, and the side-cap area A_i, plus the arc-length series.
    """
    arc = arclength_series(*jet)
    f = arc.graph
    plus_h = invert_series(f)  # in h^(1/2)
    minus_h = -invert_series(f.reflect())
    chord = (plus_h - minus_h).in_root_variable()  # t as an integer series in nu = h^(1/2)
    nu_of_t = invert_series(chord)  # m = 1: a series in t
    h = nu_of_t ** 2
    sp = compose(plus_h.in_root_variable(), nu_of_t)
    sm = compose(minus_h.in_root_variable(), nu_of_t)
    F = f.integ()
    area = h * (sp - sm) - (compose(F, sp) - compose(F, sm))
    return arc, h, sp, sm, area


def chain_LL(u, L: SmoothBody) -> CapChainLL:
    u = float(u)
    x = L.boundary_point(u)
    tau = unit_perp(u)
    x1 = L.boundary_point(u - np.pi / 2)
    x2 = L.boundary_point(u + np.pi / 2)
    sx1, ex1 = float((x1 - x) @ tau), float((x1 - x) @ -unit(u))
    sx2, ex2 = float((x2 - x) @ tau), float((x2 - x) @ -unit(u))
    width = sx2 - sx1

    jet1 = tuple(float(v) for v in L.curvature_jet(u - np.pi / 2))
    jet2 = tuple(float(v) for v in L.curvature_jet(u + np.pi / 2))
    arc1, h1, sp1, sm1, area1 = _side_cap(jet1)
    arc2, h2, sp2, sm2, area2 = _side_cap(jet2)

    t = PuiseuxSeries({1: 1.0}, 1, Fraction(100))
    area = area1 + area2 + (width - h1 - h2) * t

    # Normal angles of the cut-arc ends P_- + t u (near x1) and P_+ + t u (near x2),
    # as offsets from u -/+ pi/2.  Near x1 the point sits at sigma_1 = sigma_{1,+};
    # near x2 at sigma_2 = sigma_{2,-}.
    d_alpha = compose(arc1.turning, compose(arc1.s_of_sigma, sp1))
    d_beta = compose(arc2.turning, compose(arc2.s_of_sigma, sm2))
    jstar = _arc_pair_taylor(L, u - np.pi / 2, u + np.pi / 2, d_alpha, d_beta)
    jac = jstar * t

    area_L = L.area
    t_of_x = invert_series(area / area_L)
    q = compose(jac, t_of_x)
    v = q * t_of_x.deriv()
    w = _collect_vertex_weights(v, area_L, 3)

    jac2 = jac.lift(2)
    v2 = v.lift(2)
    b1 = list(arc1.graph_coefficients())
    b2 = list(arc2.graph_coefficients())
    pl2, pl3 = transcribed_l2_l3(sx1, ex1, sx2, ex2, width, b1, b2, jet1[0], jet2[0])
    return CapChainLL(
        u=u,
        sigma_x1=sx1,
        eta_x1=ex1,
        sigma_x2=sx2,
        eta_x2=ex2,
        width=width,
        b_u1=b1,
        b_u2=b2,
        mu1=_coeffs(h1, 2, 1, 4),
        mu2=_coeffs(h2, 2, 1, 4),
        a1=_coeffs(area1, 3, 1, 3),
        a2=_coeffs(area2, 3, 1, 3),
        a=_coeffs(area, 1, 1, 4),
        l=_coeffs(jstar.lift(2), 0, HALF, 3),
        j=_coeffs(jac2, 1, HALF, 3),
        p=_coeffs(t_of_x, 1, 1, 4),
        v=_coeffs(v2, 1, HALF, 3),
        w=[w.get(Fraction(-k, 2), 0.0) for k in range(3)],
        transcribed_l2=pl2,
        transcribed_l3=pl3,
        series={"area": area, "jstar": jstar, "jacobian": jac, "t_of_x": t_of_x, "integrand": v,
                "h1": h1, "h2": h2, "d_alpha": d_alpha, "d_beta": d_beta},
    )


def _arc_pair_taylor(L, alpha0, beta0, d_alpha, d_beta):
    """Second-order Taylor expansion of Phi(alpha, beta) = arc_pair_integral(L, alpha, beta)
    along (alpha0 + d_alpha(t), beta0 + d_beta(t)).

    With D = x(beta) - x(alpha):
        Phi_beta   = 2 rho(beta) <D, u(beta)>
        Phi_alpha  = 2 rho(alpha) <D, u(alpha)>
        Phi_bb     = 2 rho'(beta) <D, u(beta)> + 2 rho(beta) <D, u_perp(beta)>
        Phi_aa     = 2 rho'(alpha) <D, u(alpha)> + 2 rho(alpha) <D, u_perp(alpha)>
        Phi_ab     = -2 rho(alpha) rho(beta) sin(beta - alpha)
    Both offsets are O(t), so the result is known through t^2.
    """
    phi0 = float(arc_pair_integral(L, alpha0, beta0))
    D = L.boundary_point(beta0) - L.boundary_point(alpha0)
    ra, rb = float(L.radius_of_curvature(alpha0)), float(L.radius_of_curvature(beta0))
    dra, drb = float(L.radius_of_curvature(alpha0, 1)), float(L.radius_of_curvature(beta0, 1))
    ua, ub = unit(alpha0), unit(beta0)
    pa, pb = unit_perp(alpha0), unit_perp(beta0)
    g_a = 2 * ra * float(D @ ua)
    g_b = 2 * rb * float(D @ ub)
    h_aa = 2 * dra * float(D @ ua) + 2 * ra * float(D @ pa)
    h_bb = 2 * drb * float(D @ ub) + 2 * rb * float(D @ pb)
    h_ab = -2 * ra * rb * np.sin(beta0 - alpha0)
    trunc = Fraction(3)
    da, db = d_alpha.truncate(trunc), d_beta.truncate(trunc)
    out = g_a * da + g_b * db + 0.5 * h_aa * da * da + h_ab * da * db + 0.5 * h_bb * db * db
    return (out + phi0).truncate(trunc)


def transcribed_l2_l3(sx1, ex1, sx2, ex2, width, b1, b2, k1, k2):
    """Alternative closed-form l2/l3 weights in the x(u)-frame, kept for comparison with the chain."""
    d_eta = ex2 - ex1
    n1 = width * (1 + sx1) + ex1 * d_eta
    n2 = width * (sx2 - 1) + ex2 * d_eta
    l2 = -2.0 * (n1 / np.sqrt(b1[0]) + n2 / np.sqrt(b2[0]))
    l3 = (
        n1 * b1[1] / b1[0] ** 2
        + (ex1 - ex2) * k1 / b1[0]
        + (width * (1 - sx2) + ex2 * (ex1 - ex2)) * b2[1] / b2[0] ** 2
        + (ex1 - ex2) * k2 / b2[0]
    )
    return float(l2), float(l3)


__all__ = ["CapChainKL", "CapChainLL", "chain_KL", "chain_LL", "graph_series", "transcribed_l2_l3"]
