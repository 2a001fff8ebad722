"""
Exact higher-order derivatives of exp(g) at a point.

Both derivative terms of the outage formula are of the form exp(g) where every
derivative of g has a closed form, so derivatives of any order follow from the
complete Bell polynomial recursion

    f^(m+1) = Σ_{i=0}^{m} C(m, i) · g^(i+1) · f^(m−i),   f = exp(g).
"""
from typing import List, Sequence

from scipy.special import binom


def falling_factorial(x: float, n: int) -> float:
    """x·(x−1)···(x−n+1), with the empty product equal to 1."""
    result = 1.0
    for i in range(n):
        result *= x - i
    return result


def power_term_derivatives(scale: float, exponent: float, x: float, order: int) -> List[float]:
    """
    Derivatives 1..order of scale·x^exponent at x > 0.

    Args:
        scale (float): Multiplicative constant
        exponent (float): Real exponent
        x (float): Evaluation point, > 0
        order (int): Highest derivative wanted

    Returns:
        list: [d/dx, d²/dx², ..., d^order/dx^order]
    """
    return [scale * falling_factorial(exponent, m) * x ** (exponent - m)
            for m in range(1, order + 1)]


def exp_derivatives(g0_exp: float, g_derivs: Sequence[float]) -> List[float]:
    """
    Derivatives 0..n of f = exp(g) from the derivatives of g.

    Args:
        g0_exp (float): exp(g) at the point, i.e. f itself
        g_derivs (Sequence[float]): g', g'', ..., g^(n) at the point

    Returns:
        list: [f, f', ..., f^(n)]
    """
    f = [g0_exp]
    for m in range(len(g_derivs)):
        f.append(sum(binom(m, i) * g_derivs[i] * f[m - i] for i in range(m + 1)))
    return f


def log_reciprocal_derivatives(poles: Sequence[float], powers: Sequence[float], t: float,
                               order: int) -> List[float]:
    """
    Derivatives 1..order of h(t) = −Σ_j p_j·ln|c_j + t|.

    h is the logarithm of Π_j (c_j + t)^(−p_j) up to a constant sign, and
    h^(m)(t) = (−1)^m·(m−1)!·Σ_j p_j·(c_j + t)^(−m).

    Args:
        poles (Sequence[float]): Offsets c_j; c_j + t must not vanish
        powers (Sequence[float]): Powers p_j
        t (float): Evaluation point
        order (int): Highest derivative wanted

    Returns:
        list: [h', ..., h^(order)]
    """
    result = []
    factorial = 1.0
    for m in range(1, order + 1):
        if m > 1:
            factorial *= m - 1
        total = sum(p * (c + t) ** (-m) for c, p in zip(poles, powers))
        result.append((-1) ** m * factorial * total)
    return result
