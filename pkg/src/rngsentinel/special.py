"""Special functions backing the test battery's p-values.

Only stdlib math underneath (erfc/lgamma from libm); the upper incomplete
gamma uses the classic series / continued-fraction split, and the
Kolmogorov survival function is the alternating theta series with the
finite-sample argument correction.
"""

from __future__ import annotations

import math

_SQRT2 = math.sqrt(2.0)


def erfc(x: float) -> float:
    return math.erfc(x)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / _SQRT2)


def _lower_gamma_series(a: float, x: float, eps: float = 1e-15, itmax: int = 600) -> float:
    # Regularized P(a, x) by power series; converges fast for x < a + 1.
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(itmax):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * eps:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_gamma_cf(a: float, x: float, eps: float = 1e-15, itmax: int = 600) -> float:
    # Regularized Q(a, x) by modified Lentz continued fraction; for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, itmax + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_upper_gamma(a: float, x: float) -> float:
    """Q(a, x) = Gamma(a, x) / Gamma(a), clamped to [0, 1]."""
    if a <= 0.0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    if x < 0.0:
        raise ValueError(f"argument must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        q = 1.0 - _lower_gamma_series(a, x)
    else:
        q = _upper_gamma_cf(a, x)
    return min(1.0, max(0.0, q))


def chi2_sf(x: float, dof: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if dof < 1:
        raise ValueError(f"dof must be >= 1, got {dof}")
    if x <= 0.0:
        return 1.0
    return regularized_upper_gamma(dof / 2.0, x / 2.0)


def kolmogorov_survival(t: float) -> float:
    """Asymptotic Kolmogorov survival 2 * sum_k (-1)^(k-1) exp(-2 k^2 t^2),
    truncated once a term drops below 1e-12, clamped to [0, 1]."""
    if t <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    two_t2 = 2.0 * t * t
    for k in range(1, 100_000):
        term = math.exp(-two_t2 * k * k)
        total += sign * term
        if term < 1e-12:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def kolmogorov_sf(d: float, n: int) -> float:
    """Survival probability for a two-sided KS statistic ``d`` at sample
    size ``n``, using the finite-sample argument sqrt(n) + 0.12 + 0.11/sqrt(n)."""
    sqrt_n = math.sqrt(n)
    t = d * (sqrt_n + 0.12 + 0.11 / sqrt_n)
    return kolmogorov_survival(t)
