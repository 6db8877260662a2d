"""Large-n expansions of Gamma ratios and of the beta-type moments

    M_beta(n) = int_0^N (1 - y/N)^N y^beta dy = N^(beta+1) B(beta+1, N+1),  N = n - 2,

which every expectation expansion reduces to (up to exponentially small tails).
Series are PuiseuxSeries in eps = 1/n.
"""

from functools import lru_cache
from math import comb, gamma

from scipy.special import bernoulli

from .puiseux import PuiseuxSeries, series_exp


@lru_cache(maxsize=None)
def _bernoulli_numbers(k):
    return tuple(float(b) for b in bernoulli(k))


def bernoulli_poly(k, x):
    b = _bernoulli_numbers(k)
    return sum(comb(k, j) * b[j] * x ** (k - j) for j in range(k + 1))


def gamma_ratio_series(a, b, order=4):
    """Gamma(n+a)/Gamma(n+b) = n^(a-b) * S(1/n); returns S through eps^(order-1)."""
    log_terms = {}
    for k in range(1, order):
        log_terms[k] = (-1) ** (k + 1) * (bernoulli_poly(k + 1, a) - bernoulli_poly(k + 1, b)) / (k * (k + 1))
    log_series = PuiseuxSeries(log_terms, 1, order)
    return series_exp(log_series) if log_series.coeffs else PuiseuxSeries({0: 1.0}, 1, order)


def binomial_eps_series(c, power, order=4):
    """(1 + c*eps)^power as a series in eps."""
    coeffs = {}
    binom = 1.0
    for j in range(order):
        coeffs[j] = binom * c**j
        binom *= (power - j) / (j + 1)
    return PuiseuxSeries(coeffs, 1, order)


def moment_series(beta, order=4):
    """M_beta(n) / Gamma(beta+1) = sum_j g_j n^-j, returned as a series in 1/n.

    Uses M_beta = Gamma(beta+1) Gamma(N+1) N^(beta+1) / Gamma(N+beta+2) with
    N = n - 2, i.e. Gamma(n-1)/Gamma(n+beta) * (n-2)^(beta+1).
    """
    ratio = gamma_ratio_series(-1.0, float(beta), order)
    shift = binomial_eps_series(-2.0, float(beta) + 1.0, order)
    return (ratio * shift).truncate(order)


def moment_gammas(beta, order=3):
    """(Gamma(beta+1), gamma_1, gamma_2, ...) with M_beta = Gamma(beta+1) + gamma_1/n + ..."""
    s = moment_series(beta, order)
    g0 = gamma(beta + 1.0)
    return tuple(g0 * s[j] for j in range(order))


def vertex_weight_series(beta, order=4):
    """Gamma(n+1)/Gamma(n+beta) = n^(1-beta) * S(1/n).

    For a term v * x^beta of the integrand J(t(x)) t'(x), the expected vertex count
    picks up v/(2A^2) * Gamma(beta+1) * Gamma(n+1)/Gamma(n+beta) exactly.
    """
    return gamma_ratio_series(1.0, float(beta), order)


__all__ = [
    "bernoulli_poly",
    "gamma_ratio_series",
    "moment_series",
    "moment_gammas",
    "vertex_weight_series",
]
