"""Phase-space integrals of motion and numerical Poisson brackets.

The trajectory variables Z and W are promoted to phase-space functions by
replacing E with H and the separation constant with its phase-space
expression.  The product of the two "sine" factors is taken with the sign
the momenta give it, so the extra integral L is a single-valued polynomial in
the momenta of total degree at most 2p + 2q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import (Chart, PhasePoint, RegimeError, SystemParams, angular_potential,
                    hamiltonian_polar, sigma_powers, to_modified_polar)
from .specfun import chebyshev_t, chebyshev_u


@dataclass(frozen=True)
class InvariantValues:
    Z: float
    W: float
    sqrt_term: float
    D1: float
    D2: float
    A_phase: float
    H: float


def scaled_invariants(params: SystemParams, rho, sigma, prho, psigma):
    """Square-root free pieces: (Z sqrt(D1), W sqrt(D2), s sqrt(D1 D2), D1, D2, A, H).

    Works elementwise on arrays and performs no domain checks.
    """
    w2 = params.omega**2
    sk, s2k = sigma_powers(params, sigma)
    pot = params.alpha * s2k + params.beta * sk
    ang = 4 * sigma**2 * psigma**2
    a_phase = ang - pot
    h = hamiltonian_polar(params, rho, sigma, prho, psigma)
    d1 = h * h + 4 * w2 * a_phase
    d2 = params.beta**2 - 4 * params.alpha * a_phase
    z_tilde = (4 * rho**2 * prho**2 + ang + w2 * rho**2 - pot) / rho
    w_tilde = 8 * sigma**2 / sk * psigma**2 - 2 * params.alpha * sk - params.beta
    r_tilde = 16 * sigma / sk * prho * psigma * (pot - ang)
    return z_tilde, w_tilde, r_tilde, d1, d2, a_phase, h


def _polar(point: PhasePoint) -> PhasePoint:
    return point if point.chart is Chart.MODIFIED_POLAR else to_modified_polar(point)


def invariant_arrays(params: SystemParams, rho, sigma, prho, psigma):
    """Vectorised Z, W, sqrt_term, D1, D2, A, H; NaN where D1 or D2 <= 0."""
    zt, wt, rt, d1, d2, a, h = scaled_invariants(params, rho, sigma, prho, psigma)
    with np.errstate(invalid="ignore", divide="ignore"):
        r1 = np.where(d1 > 0, np.sqrt(np.where(d1 > 0, d1, 1.0)), np.nan)
        r2 = np.where(d2 > 0, np.sqrt(np.where(d2 > 0, d2, 1.0)), np.nan)
        return zt / r1, wt / r2, rt / (r1 * r2), d1, d2, a, h


def phase_invariants(params: SystemParams, point: PhasePoint) -> InvariantValues:
    pt = _polar(point)
    if not (pt.q1 > 0 and pt.q2 > 0):
        raise RegimeError("phase invariants need rho > 0 and sigma > 0")
    zt, wt, rt, d1, d2, a, h = scaled_invariants(params, pt.q1, pt.q2, pt.p1, pt.p2)
    if not d1 > 0:
        raise RegimeError(f"D1 = H^2 + 4 omega^2 A = {d1} <= 0: no real radial turning points")
    if not d2 > 0:
        raise RegimeError(f"D2 = beta^2 - 4 alpha A = {d2} <= 0: separation constant exceeds "
                          "its upper bound")
    r1, r2 = math.sqrt(d1), math.sqrt(d2)
    return InvariantValues(Z=float(zt / r1), W=float(wt / r2), sqrt_term=float(rt / (r1 * r2)),
                           D1=float(d1), D2=float(d2), A_phase=float(a), H=float(h))


def extra_integral_arrays(params: SystemParams, rho, sigma, prho, psigma):
    """L via Chebyshev recurrences, elementwise."""
    p, q = params.k.p, params.k.q
    z, w, s, d1, d2, _, _ = invariant_arrays(params, rho, sigma, prho, psigma)
    cheb = (np.asarray(chebyshev_t(q, w)) * np.asarray(chebyshev_t(p, z))
            - np.asarray(chebyshev_u(q - 1, w)) * np.asarray(chebyshev_u(p - 1, z)) * s)
    return np.sqrt(d1) ** p * np.sqrt(d2) ** q * cheb


def extra_integral(params: SystemParams, point: PhasePoint) -> float:
    """The degree-(2p+2q) integral L = sqrt(D1)^p sqrt(D2)^q [T_q T_p - U_{q-1} U_{p-1} s]."""
    inv = phase_invariants(params, point)
    p, q = params.k.p, params.k.q
    cheb = (chebyshev_t(q, inv.W) * chebyshev_t(p, inv.Z)
            - chebyshev_u(q - 1, inv.W) * chebyshev_u(p - 1, inv.Z) * inv.sqrt_term)
    return math.sqrt(inv.D1) ** p * math.sqrt(inv.D2) ** q * cheb


def _binomial_scaled_t(n, x_tilde, d):
    # sqrt(d)^n T_n(x_tilde/sqrt(d))
    out = 0.0
    for j in range(n // 2 + 1):
        out = out + math.comb(n, 2 * j) * x_tilde ** (n - 2 * j) * (x_tilde**2 - d) ** j
    return out


def _binomial_scaled_u(n, x_tilde, d):
    # sqrt(d)^(n-1) U_{n-1}(x_tilde/sqrt(d))
    out = 0.0
    for j in range((n - 1) // 2 + 1):
        out = out + math.comb(n, 2 * j + 1) * x_tilde ** (n - 1 - 2 * j) * (x_tilde**2 - d) ** j
    return out


def extra_integral_expanded_arrays(params: SystemParams, rho, sigma, prho, psigma):
    """L from the explicit binomial sums, written without any square root."""
    p, q = params.k.p, params.k.q
    zt, wt, rt, d1, d2, _, _ = scaled_invariants(params, rho, sigma, prho, psigma)
    return (_binomial_scaled_t(q, wt, d2) * _binomial_scaled_t(p, zt, d1)
            - _binomial_scaled_u(q, wt, d2) * _binomial_scaled_u(p, zt, d1) * rt)


def extra_integral_expanded(params: SystemParams, point: PhasePoint) -> float:
    pt = _polar(point)
    return float(extra_integral_expanded_arrays(params, pt.q1, pt.q2, pt.p1, pt.p2))


# -- finite-difference brackets ----------------------------------------------

PhaseFunction = Callable[[PhasePoint], float]


def gradient(f: PhaseFunction, point: PhasePoint, step: float = 1e-5) -> np.ndarray:
    """Central differences with one Richardson level; step scales as step*(1+|x|)."""
    y = point.as_array()
    grad = np.empty(4)
    for i in range(4):
        h = step * (1 + abs(y[i]))

        def central(hh):
            yp, ym = y.copy(), y.copy()
            yp[i] += hh
            ym[i] -= hh
            return (f(point.with_state(yp)) - f(point.with_state(ym))) / (2 * hh)

        grad[i] = (4 * central(h / 2) - central(h)) / 3
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite value inside the finite-difference stencil")
    return grad


def bracket_from_gradients(gf: np.ndarray, gg: np.ndarray) -> float:
    # ordering (q1, q2, p1, p2)
    return float(gf[0] * gg[2] - gf[2] * gg[0] + gf[1] * gg[3] - gf[3] * gg[1])


def poisson_bracket(f: PhaseFunction, g: PhaseFunction, point: PhasePoint,
                    step: float = 1e-5) -> float:
    """{f, g} = sum_i df/dq_i dg/dp_i - df/dp_i dg/dq_i in the chart of ``point``."""
    return bracket_from_gradients(gradient(f, point, step), gradient(g, point, step))
