"""Truncated Puiseux series: exponents on a common grid (1/m) Z with a known
truncation order.

Coefficients are floats by default.  Any numeric type closed under + and *
works; passing ``sympy`` numbers or symbols gives exact coefficients, which the
tests use to check series-reversion formulas symbolically.

Truncation is tracked pessimistically: every operation keeps the smallest
exponent that its operands still justify, never more.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .errors import ComposeIntoConstant, NonInvertibleLeadingTerm

try:  # optional: exact coefficients
    import sympy
except ImportError:  # pragma: no cover
    sympy = None

# coefficients this small relative to the largest one are treated as zero when
# locating a leading term
LEADING_RTOL = 1e-13


def _is_symbolic(c):
    return sympy is not None and isinstance(c, sympy.Basic)


def _like(value: Fraction, sample):
    """Convert an exact rational ``value`` to the coefficient type of ``sample``."""
    if _is_symbolic(sample):
        return sympy.Rational(value.numerator, value.denominator)
    if isinstance(sample, (Fraction, int)) and not isinstance(sample, bool):
        return value
    return float(value)


def _cpow(c, a: Fraction):
    if _is_symbolic(c):
        return c ** sympy.Rational(a.numerator, a.denominator)
    if isinstance(c, (Fraction, int)):
        if a.denominator == 1:
            return Fraction(c) ** a.numerator
        root = float(c) ** float(a)
        exact = Fraction(root).limit_denominator(10**6)
        if exact ** a.denominator == Fraction(c) ** a.numerator:
            return exact
        return root
    return float(c) ** float(a)


def _is_zero(c):
    if _is_symbolic(c):
        return c == 0
    return c == 0


def _lcm(a, b):
    return a * b // gcd(a, b)


class PuiseuxSeries:
    """sum_k coeffs[k] * x**(k/denom), known for exponents below ``trunc``."""

    __slots__ = ("denom", "coeffs", "trunc")

    def __init__(self, coeffs, denom=1, trunc=None):
        self.denom = int(denom)
        if trunc is None:
            raise ValueError("a truncation order is required")
        self.trunc = Fraction(trunc)
        self.coeffs = {
            int(k): c
            for k, c in dict(coeffs).items()
            if Fraction(int(k), self.denom) < self.trunc and not _is_zero(c)
        }

    # ---------------------------------------------------------------- constructors
    @classmethod
    def variable(cls, trunc, denom=1):
        """The series x itself."""
        return cls({denom: 1.0}, denom, trunc)

    @classmethod
    def monomial(cls, coef, exponent, trunc):
        exponent = Fraction(exponent)
        return cls({exponent.numerator: coef}, exponent.denominator, trunc)

    @classmethod
    def from_list(cls, coeffs, trunc=None, denom=1):
        """Coefficients of x**(k/denom), k = 0, 1, ...; default truncation just past the list."""
        if trunc is None:
            trunc = Fraction(len(coeffs), denom)
        return cls(dict(enumerate(coeffs)), denom, trunc)

    # ---------------------------------------------------------------- access
    def exponents(self):
        return sorted(Fraction(k, self.denom) for k in self.coeffs)

    def __getitem__(self, exponent):
        exponent = Fraction(exponent)
        if exponent >= self.trunc:
            raise KeyError(f"exponent {exponent} is beyond the truncation {self.trunc}")
        k = exponent * self.denom
        if k.denominator != 1:
            return 0.0
        return self.coeffs.get(int(k), 0.0)

    def coefficient_list(self, start, step, count):
        """[self[start + i*step] for i in range(count)]."""
        start, step = Fraction(start), Fraction(step)
        return [self[start + i * step] for i in range(count)]

    def _sample(self):
        for c in self.coeffs.values():
            return c
        return 0.0

    def valuation(self, rtol=LEADING_RTOL):
        """Smallest exponent with a non-negligible coefficient (trunc if none)."""
        if not self.coeffs:
            return self.trunc
        numeric = [abs(c) for c in self.coeffs.values() if not _is_symbolic(c)]
        scale = max(numeric) if numeric else 0.0
        for k in sorted(self.coeffs):
            c = self.coeffs[k]
            if _is_symbolic(c) or abs(c) > rtol * scale:
                return Fraction(k, self.denom)
        return self.trunc

    def leading(self):
        v = self.valuation()
        return v, self[v]

    def lift(self, denom):
        if denom % self.denom:
            raise ValueError("can only lift to a multiple of the denominator")
        f = denom // self.denom
        return PuiseuxSeries({k * f: c for k, c in self.coeffs.items()}, denom, self.trunc)

    def _common(self, other):
        d = _lcm(self.denom, other.denom)
        return self.lift(d), other.lift(d)

    def truncate(self, order):
        return PuiseuxSeries(self.coeffs, self.denom, min(self.trunc, Fraction(order)))

    def chop(self, tol):
        """Drop float coefficients with absolute value below ``tol``."""
        return PuiseuxSeries(
            {k: c for k, c in self.coeffs.items() if _is_symbolic(c) or abs(c) > tol},
            self.denom,
            self.trunc,
        )

    def map(self, fn):
        return PuiseuxSeries({k: fn(c) for k, c in self.coeffs.items()}, self.denom, self.trunc)

    # ---------------------------------------------------------------- arithmetic
    def __neg__(self):
        return self.map(lambda c: -c)

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries({0: other}, self.denom, self.trunc)
        a, b = self._common(other)
        out = dict(a.coeffs)
        for k, c in b.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return PuiseuxSeries(out, a.denom, min(a.trunc, b.trunc))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self.map(lambda c: c * other)
        a, b = self._common(other)
        trunc = min(a.trunc + b.valuation(), b.trunc + a.valuation())
        d = a.denom
        limit = trunc * d
        out = {}
        for ka, ca in a.coeffs.items():
            for kb, cb in b.coeffs.items():
                k = ka + kb
                if k < limit:
                    out[k] = out[k] + ca * cb if k in out else ca * cb
        return PuiseuxSeries(out, d, trunc)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return self.map(lambda c: c / other)
        return self * other ** -1

    def __pow__(self, a):
        a = Fraction(a)
        if a.denominator == 1 and a >= 0:
            return self._int_pow(int(a))
        v, c = self.leading()
        if v >= self.trunc:
            raise NonInvertibleLeadingTerm("series has no known leading term")
        if not _is_symbolic(c) and c <= 0 and a.denominator != 1:
            raise NonInvertibleLeadingTerm("fractional power needs a positive leading coefficient")
        # self = c x^v (1 + r)
        one = _like(Fraction(1), c)
        r = (self * PuiseuxSeries.monomial(one, -v, self.trunc - v + 1)) / c - one
        r = r.truncate(self.trunc - v)
        rel = _binomial_series(r, a)
        lead = _cpow(c, a)
        return PuiseuxSeries.monomial(lead, a * v, a * v + rel.trunc + 1) * rel

    def _int_pow(self, k):
        result = PuiseuxSeries({0: _like(Fraction(1), self._sample())}, self.denom, Fraction(10**9))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # ---------------------------------------------------------------- calculus
    def deriv(self):
        out = {}
        for k, c in self.coeffs.items():
            if k:
                out[k - self.denom] = c * _like(Fraction(k, self.denom), c)
        return PuiseuxSeries(out, self.denom, self.trunc - 1)

    def integ(self):
        """Antiderivative vanishing at 0 (all exponents must exceed -1)."""
        out = {}
        for k, c in self.coeffs.items():
            e = Fraction(k, self.denom) + 1
            if e == 0:
                raise ValueError("logarithmic term in antiderivative")
            out[k + self.denom] = c / _like(e, c)
        return PuiseuxSeries(out, self.denom, self.trunc + 1)

    def reflect(self):
        """x -> -x for an integer-exponent series."""
        if self.denom != 1:
            raise ValueError("reflection needs integer exponents")
        return PuiseuxSeries(
            {k: (c if k % 2 == 0 else -c) for k, c in self.coeffs.items()}, 1, self.trunc
        )

    def in_root_variable(self):
        """Reinterpret a series in x^(1/m) as an integer-exponent series in y = x^(1/m)."""
        return PuiseuxSeries(self.coeffs, 1, self.trunc * self.denom)

    def from_root_variable(self, m):
        """Inverse of ``in_root_variable``: integer series in y -> series in x = y^m."""
        if self.denom != 1:
            raise ValueError("expected an integer-exponent series")
        return PuiseuxSeries(self.coeffs, m, self.trunc / m)

    # ---------------------------------------------------------------- evaluation
    def __call__(self, x):
        if isinstance(x, PuiseuxSeries):
            return compose(self, x)
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for k, c in self.coeffs.items():
            total = total + float(c) * x ** (k / self.denom)
        return total

    def __repr__(self):
        terms = " + ".join(f"{c!r}*x^({Fraction(k, self.denom)})" for k, c in sorted(self.coeffs.items()))
        return f"PuiseuxSeries({terms or '0'} + O(x^{self.trunc}))"


def _binomial_series(r: PuiseuxSeries, a: Fraction) -> PuiseuxSeries:
    """(1 + r)**a for a series r with positive valuation."""
    v = r.valuation()
    sample = r._sample()
    one = _like(Fraction(1), sample)
    result = PuiseuxSeries({0: one}, r.denom, r.trunc)
    if v >= r.trunc:
        return result
    if v <= 0:
        raise ComposeIntoConstant("binomial expansion needs a series without constant term")
    nterms = int((r.trunc / v).__ceil__())
    term = PuiseuxSeries({0: one}, r.denom, r.trunc)
    binom = Fraction(1)
    for j in range(1, nterms + 1):
        binom = binom * (a - j + 1) / j
        term = (term * r).truncate(r.trunc)
        if not term.coeffs:
            break
        result = result + term * _like(binom, sample)
    return result.truncate(r.trunc)


def compose(outer: PuiseuxSeries, inner: PuiseuxSeries) -> PuiseuxSeries:
    """outer(inner(x)).  ``inner`` must have no constant term."""
    if 0 in inner.coeffs and not (not _is_symbolic(inner.coeffs[0]) and inner.coeffs[0] == 0):
        raise ComposeIntoConstant("inner series has a constant term")
    vi = inner.valuation()
    if vi <= 0:
        raise ComposeIntoConstant("inner series must have positive valuation")
    m = outer.denom
    if any(k < 0 for k in outer.coeffs):
        raise ComposeIntoConstant("outer series has negative exponents")
    base = inner if m == 1 else inner ** Fraction(1, m)
    trunc = outer.trunc * vi
    positive = [k for k in outer.coeffs if k > 0]
    if positive:
        kmin = min(positive)
        trunc = min(trunc, Fraction(kmin, m) * vi + (inner.trunc - vi))
    sample = outer._sample()
    result = PuiseuxSeries({}, base.denom, trunc)
    power = None
    for k in range(0, max(outer.coeffs, default=0) + 1):
        power = (
            PuiseuxSeries({0: _like(Fraction(1), sample)}, base.denom, trunc)
            if power is None
            else (power * base).truncate(trunc)
        )
        if k in outer.coeffs:
            result = result + power * outer.coeffs[k]
    return result.truncate(trunc)


def invert_series(eta: PuiseuxSeries) -> PuiseuxSeries:
    """Reversion of eta(s) = b_m s^m + b_{m+1} s^{m+1} + ... (integer exponents).

    Returns s as a series in eta^(1/m).  With tau = eta^(1/m) the equation
    becomes tau = g(s) = b_m^(1/m) s (1 + sum_j b_{m+j}/b_m s^j)^(1/m), an ordinary
    series with non-zero linear term, reverted by fixed-point iteration.
    """
    if eta.denom != 1:
        raise NonInvertibleLeadingTerm("reversion needs an integer-exponent series")
    v, bm = eta.leading()
    if v >= eta.trunc or v.denominator != 1 or v < 1:
        raise NonInvertibleLeadingTerm(f"leading exponent {v} is not a positive integer")
    if not _is_symbolic(bm) and bm <= 0:
        raise NonInvertibleLeadingTerm("leading coefficient must be positive")
    m = int(v)
    g = eta ** Fraction(1, m)  # ordinary series in s, known below trunc - m + 1
    order = g.trunc
    g1 = g[1]
    rest = g - PuiseuxSeries({1: g1}, 1, order)
    tau = PuiseuxSeries.variable(order).map(lambda c: _like(Fraction(1), g1))
    s = tau / g1
    for _ in range(int(order) + 1):
        s = ((tau - compose(rest, s)) / g1).truncate(order)
    return s.from_root_variable(m)


# -------------------------------------------------------------------- Taylor series
def _taylor(kind, order):
    """cos / sin / exp Taylor series in x, truncated at x**order."""
    from math import factorial

    coeffs = {}
    for k in range(order):
        if kind == "exp":
            coeffs[k] = 1.0 / factorial(k)
        elif kind == "cos" and k % 2 == 0:
            coeffs[k] = (-1) ** (k // 2) / factorial(k)
        elif kind == "sin" and k % 2 == 1:
            coeffs[k] = (-1) ** (k // 2) / factorial(k)
    return PuiseuxSeries(coeffs, 1, order)


def series_exp(x: PuiseuxSeries) -> PuiseuxSeries:
    """exp of a series without constant term."""
    order = int((x.trunc / x.valuation()).__ceil__()) + 1
    return compose(_taylor("exp", order), x)


# -------------------------------------------------------------------- boundary geometry
def boundary_taylor(kappa, dkappa, ddkappa, dddkappa):
    """Coefficients b2..b5 of the local graph eta = f(sigma) of a boundary."""
    k, k1, k2, k3 = kappa, dkappa, ddkappa, dddkappa
    return (
        k / 2.0,
        k1 / 6.0,
        (k2 + 3.0 * k**3) / 24.0,
        (19.0 * k**2 * k1 + k3) / 120.0,
    )


@dataclass(frozen=True)
class ArclengthSeries:
    """Unit-speed boundary expansions in the tangent/inward-normal frame."""

    sigma: PuiseuxSeries
    eta: PuiseuxSeries
    dsigma: PuiseuxSeries
    deta: PuiseuxSeries
    turning: PuiseuxSeries  # tangent angle as a function of s
    s_of_sigma: PuiseuxSeries
    graph: PuiseuxSeries  # eta as a function of sigma

    def graph_coefficients(self):
        return tuple(self.graph[i] for i in range(2, 6))


def arclength_series(kappa, dkappa, ddkappa, dddkappa):
    """Expansions of r(s) = (sigma(s), eta(s)) from the curvature jet at s = 0.

    The tangent angle is phi(s) = kappa s + kappa' s^2/2 + kappa'' s^3/6 +
    kappa''' s^4/24, and (sigma', eta') = (cos phi, sin phi).  The jet fixes
    phi through s^4, so sigma and eta are known through s^5.
    """
    phi = PuiseuxSeries({1: kappa, 2: dkappa / 2.0, 3: ddkappa / 6.0, 4: dddkappa / 24.0}, 1, 5)
    dsigma = compose(_taylor("cos", 6), phi)
    deta = compose(_taylor("sin", 6), phi)
    sigma = dsigma.integ()
    eta = deta.integ()
    s_of_sigma = invert_series(sigma)
    graph = compose(eta, s_of_sigma)
    return ArclengthSeries(sigma, eta, dsigma, deta, phi, s_of_sigma, graph)


__all__ = [
    "PuiseuxSeries",
    "compose",
    "invert_series",
    "series_exp",
    "boundary_taylor",
    "arclength_series",
    "ArclengthSeries",
]
