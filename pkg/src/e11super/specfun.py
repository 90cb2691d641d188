"""Special functions consumed by the E(1,1) family.

Associated Laguerre polynomials with real parameter, Chebyshev polynomials of
both kinds on the whole real line, and the Krall-Frink generalized Bessel
polynomials.  Everything is vectorised over ``x``; degrees are Python ints.
"""

from __future__ import annotations

import math

import numpy as np


def _asfloat(x):
    out = np.asarray(x, dtype=float)
    return out if out.ndim else float(out)


def laguerre(n: int, a: float, x):
    """Associated Laguerre polynomial L_n^a(x) by the three-term recurrence.

    ``n = -1`` is accepted and returns zero, which keeps the ladder identities
    free of special cases.
    """
    if n < -1:
        raise ValueError(f"Laguerre degree must be >= -1, got {n}")
    x = np.asarray(x, dtype=float)
    if n == -1:
        return _asfloat(np.zeros_like(x))
    prev = np.zeros_like(x)
    cur = np.ones_like(x)
    for j in range(n):
        # (j+1) L_{j+1} = (2j+1+a-x) L_j - (j+a) L_{j-1}
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return _asfloat(cur)


def laguerre_deriv(n: int, a: float, x, order: int = 1):
    """d^order/dx^order L_n^a(x) = (-1)^order L_{n-order}^{a+order}(x)."""
    if n - order < -1:
        return _asfloat(np.zeros_like(np.asarray(x, dtype=float)))
    sign = -1.0 if order % 2 else 1.0
    return _asfloat(sign * np.asarray(laguerre(n - order, a + order, x)))


def laguerre_coefficients(n: int, a: float) -> np.ndarray:
    """Monomial coefficients c_j of L_n^a, lowest degree first.

    c_j = (-1)^j (a+j+1)_{n-j} / ((n-j)! j!), valid for any real ``a``.
    """
    coeffs = np.empty(n + 1)
    for j in range(n + 1):
        rising = 1.0
        for i in range(1, n - j + 1):
            rising *= a + j + i
        coeffs[j] = (-1) ** j * rising / (math.factorial(n - j) * math.factorial(j))
    return coeffs


def chebyshev_t(n: int, x):
    """Chebyshev polynomial of the first kind, valid for every real x."""
    if n < 0:
        raise ValueError(f"T_n needs n >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    prev, cur = np.ones_like(x), x.copy()
    if n == 0:
        return _asfloat(prev)
    for _ in range(n - 1):
        prev, cur = cur, 2 * x * cur - prev
    return _asfloat(cur)


def chebyshev_u(n: int, x):
    """Chebyshev polynomial of the second kind; U_{-1} = 0."""
    if n < -1:
        raise ValueError(f"U_n needs n >= -1, got {n}")
    x = np.asarray(x, dtype=float)
    if n == -1:
        return _asfloat(np.zeros_like(x))
    prev, cur = np.zeros_like(x), np.ones_like(x)
    for _ in range(n):
        prev, cur = cur, 2 * x * cur - prev
    return _asfloat(cur)


def chebyshev_t_binomial(n: int, x):
    """T_n from the explicit sum  sum_j C(n,2j) x^(n-2j) (x^2-1)^j."""
    x = np.asarray(x, dtype=float)
    x2m1 = x * x - 1.0
    total = np.zeros_like(x)
    for j in range(n // 2 + 1):
        total = total + math.comb(n, 2 * j) * x ** (n - 2 * j) * x2m1**j
    return _asfloat(total)


def chebyshev_u_binomial(n: int, x):
    """U_n from the explicit sum  sum_j C(n+1,2j+1) x^(n-2j) (x^2-1)^j."""
    x = np.asarray(x, dtype=float)
    if n == -1:
        return _asfloat(np.zeros_like(x))
    x2m1 = x * x - 1.0
    total = np.zeros_like(x)
    for j in range(n // 2 + 1):
        total = total + math.comb(n + 1, 2 * j + 1) * x ** (n - 2 * j) * x2m1**j
    return _asfloat(total)


def bessel_poly_coefficients(n: int, a: float, b: float) -> np.ndarray:
    """Coefficients of y_n(x, a, b) in powers of x, lowest first."""
    if b == 0:
        raise ValueError("generalized Bessel polynomial needs b != 0")
    coeffs = np.empty(n + 1)
    c = 1.0
    for k in range(n + 1):
        coeffs[k] = c / b**k
        # C(n,k) (n+a-1)_k  ->  next term
        c *= (n - k) / (k + 1) * (n + a - 1 + k)
    return coeffs


def bessel_poly(n: int, a: float, b: float, x):
    """Generalized Bessel polynomial y_n(x, a, b).

    y_n = sum_k C(n,k) (n+k+a-2)^(k) (x/b)^k with the falling factorial
    (n+k+a-2)^(k), which equals the rising factorial (n+a-1)_k.  Terms are
    produced by their ratio and summed by Horner's rule.
    """
    if n < 0:
        raise ValueError(f"Bessel polynomial degree must be >= 0, got {n}")
    coeffs = bessel_poly_coefficients(n, a, b)
    x = np.asarray(x, dtype=float)
    acc = np.full_like(x, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return _asfloat(acc)


def bessel_poly_deriv(n: int, a: float, b: float, x):
    """y_n'(x, a, b) = n (n+a-1)/b * y_{n-1}(x, a+2, b)."""
    if n == 0:
        return _asfloat(np.zeros_like(np.asarray(x, dtype=float)))
    return _asfloat(n * (n + a - 1) / b * np.asarray(bessel_poly(n - 1, a + 2, b, x)))
