"""Classical dynamics: flow, closed-form radial motion, implicit trajectory curves.

Bounded orbits are labelled by the energy E, the separation constant A < 0
and two phases.  Along an orbit it is convenient to track two angles,

    cos(theta_Z) = Z,   cos(theta_W) = W,

with theta_Z increasing (dtheta_Z/dt = 4 sqrt(-A)/rho) and
theta_W + k theta_Z = -4 k delta2 sqrt(-A).  For k = p/q this closes after
q radial periods and gives cos C_k = T_q(W) T_p(Z) - U_{q-1}(W) U_{p-1}(Z) s,
where s = sin(theta_Z) sin(theta_W) is the signed square-root term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .invariants import extra_integral_arrays, invariant_arrays
from .model import (Chart, ChartError, PhasePoint, RegimeError, SystemParams,
                    angular_potential, cartesian_from_polar, hamiltonian_cartesian,
                    hamiltonian_polar, polar_from_cartesian, sigma_powers, to_modified_polar)
from .specfun import (chebyshev_t, chebyshev_t_binomial, chebyshev_u,
                      chebyshev_u_binomial)


class DomainEscape(RuntimeError):
    """The flow left the chart domain (rho -> 0 or sigma -> 0)."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time


# -- bounded regime and curve constants --------------------------------------

def check_bounded_regime(params: SystemParams, energy: float, sep: float) -> None:
    """Raise RegimeError naming the first violated bounded-orbit inequality."""
    w2 = params.omega**2
    if not params.alpha < 0:
        raise RegimeError(f"bounded motion needs alpha < 0 (got alpha = {params.alpha})")
    if not params.beta > 0:
        raise RegimeError(f"bounded motion needs beta > 0 (got beta = {params.beta})")
    if not energy >= 0:
        raise RegimeError(f"bounded motion needs E >= 0 (got E = {energy})")
    if not sep < 0:
        raise RegimeError(f"bounded motion needs A < 0 (got A = {sep})")
    if not energy**2 + 4 * w2 * sep > 0:
        raise RegimeError(f"-A <= E^2/(4 omega^2) violated: -A = {-sep}, "
                          f"E^2/(4 omega^2) = {energy**2 / (4 * w2)} (need D1 > 0)")
    if not params.beta**2 - 4 * params.alpha * sep > 0:
        raise RegimeError(f"-A <= beta^2/(4|alpha|) violated: -A = {-sep}, "
                          f"beta^2/(4|alpha|) = {params.beta**2 / (4 * abs(params.alpha))} "
                          "(need D2 > 0)")


def rho_bounds(energy: float, sep: float, omega: float) -> tuple[float, float]:
    d1 = energy**2 + 4 * omega**2 * sep
    if not d1 > 0:
        raise RegimeError(f"D1 = E^2 + 4 omega^2 A = {d1} <= 0: no real turning points")
    r = math.sqrt(d1)
    return (energy - r) / (2 * omega**2), (energy + r) / (2 * omega**2)


def sigma_bounds(params: SystemParams, sep: float) -> tuple[float, float]:
    """Turning values (beta -/+ sqrt(D2)) / (2|A|).

    These bound sigma**(-k) along the orbit; the corresponding range of
    sigma**k is [(beta - sqrt(D2))/(2|alpha|), (beta + sqrt(D2))/(2|alpha|)].
    """
    if not (params.alpha < 0 and params.beta > 0 and sep < 0):
        raise RegimeError("sigma bounds need alpha < 0, beta > 0 and A < 0")
    d2 = params.beta**2 - 4 * params.alpha * sep
    if d2 < 0:
        raise RegimeError(f"D2 = beta^2 - 4 alpha A = {d2} < 0: A exceeds its upper bound "
                          f"-A <= beta^2/(4|alpha|)")
    r = math.sqrt(d2)
    return (params.beta - r) / (2 * abs(sep)), (params.beta + r) / (2 * abs(sep))


@dataclass(frozen=True)
class CurveConstants:
    E: float
    A: float
    D1: float
    D2: float
    rho1: float
    rho2: float
    sigma_lo: float
    sigma_hi: float
    gamma_k: float
    c_k: float
    delta1: float
    delta2: float

    @classmethod
    def radial(cls, energy, sep, omega, delta1=0.0) -> "CurveConstants":
        """Radial data only, e.g. for the free oscillator where A >= 0 is allowed."""
        d1 = energy**2 + 4 * omega**2 * sep
        if not d1 > 0:
            raise RegimeError(f"D1 = {d1} <= 0")
        r1, r2 = rho_bounds(energy, sep, omega)
        nan = float("nan")
        return cls(energy, sep, d1, nan, r1, r2, nan, nan, nan, nan, delta1, nan)

    @property
    def cos_c(self) -> float:
        return math.cos(self.c_k)


def curve_constants(params: SystemParams, energy: float, sep: float,
                    delta1: float = 0.0, delta2: float = 0.0) -> CurveConstants:
    check_bounded_regime(params, energy, sep)
    k = params.kval
    rho1, rho2 = rho_bounds(energy, sep, params.omega)
    lo, hi = sigma_bounds(params, sep)
    # arcsin(W) at the angular turning point is +pi/2
    gamma = k * (4 * delta2 * math.sqrt(-sep) + math.pi / 2) + math.pi / 2
    c_k = (params.k.p + params.k.q) * math.pi / 2 - params.k.q * gamma
    return CurveConstants(
        E=energy, A=sep,
        D1=energy**2 + 4 * params.omega**2 * sep,
        D2=params.beta**2 - 4 * params.alpha * sep,
        rho1=rho1, rho2=rho2, sigma_lo=lo, sigma_hi=hi,
        gamma_k=gamma, c_k=c_k, delta1=delta1, delta2=delta2)


def rho_closed_form(consts: CurveConstants, omega: float, t):
    """rho(t) = (E + sqrt(D1) cos(4 omega (t + delta1))) / (2 omega^2)."""
    if not consts.D1 > 0:
        raise RegimeError("rho(t) needs D1 > 0")
    t = np.asarray(t, dtype=float)
    out = (consts.E + math.sqrt(consts.D1) * np.cos(4 * omega * (t + consts.delta1))) / (2 * omega**2)
    return out if out.ndim else float(out)


def _angles(params: SystemParams, consts: CurveConstants, rho, sigma, prho, psigma):
    z, w, _, d1, d2, _, _ = invariant_arrays(params, rho, sigma, prho, psigma)
    root = math.sqrt(-consts.A)
    sk, _ = sigma_powers(params, sigma)
    sin_z = -4 * root * prho / np.sqrt(d1)
    sin_w = -4 * root * sigma / sk * psigma / np.sqrt(d2)
    return np.arctan2(sin_z, z), np.arctan2(sin_w, w)


def curve_constants_from_point(params: SystemParams, point: PhasePoint) -> CurveConstants:
    """Recover (E, A, delta1, delta2) of the bounded orbit through ``point``."""
    pt = to_modified_polar(point)
    rho, sigma, prho, psigma = pt.q1, pt.q2, pt.p1, pt.p2
    energy = float(hamiltonian_polar(params, rho, sigma, prho, psigma))
    sep = float(4 * sigma**2 * psigma**2 - angular_potential(params, sigma))
    check_bounded_regime(params, energy, sep)
    w = params.omega
    d1 = energy**2 + 4 * w**2 * sep
    phi = math.atan2(-4 * w * rho * prho / math.sqrt(d1), (2 * w**2 * rho - energy) / math.sqrt(d1))
    provisional = CurveConstants.radial(energy, sep, w)
    theta_z, theta_w = _angles(params, provisional, rho, sigma, prho, psigma)
    k = params.kval
    delta2 = -(float(theta_w) + k * float(theta_z)) / (4 * k * math.sqrt(-sep))
    return curve_constants(params, energy, sep, phi / (4 * w), delta2)


def initial_point(params: SystemParams, consts: CurveConstants) -> PhasePoint:
    """Phase point at t = 0 on the orbit labelled by ``consts``."""
    check_bounded_regime(params, consts.E, consts.A)
    w, k = params.omega, params.kval
    energy, sep = consts.E, consts.A
    r1, r2 = math.sqrt(consts.D1), math.sqrt(consts.D2)
    root = math.sqrt(-sep)
    phi = 4 * w * consts.delta1
    rho = (energy + r1 * math.cos(phi)) / (2 * w**2)
    prho = -r1 * math.sin(phi) / (4 * w * rho)
    z = (2 * sep / rho + energy) / r1
    theta_z = math.atan2(-4 * root * prho / r1, z)
    theta_w = -4 * k * consts.delta2 * root - k * theta_z
    w_val = math.cos(theta_w)
    sigma_mk = (w_val * r2 - params.beta) / (2 * sep)
    sigma = sigma_mk ** (-1 / k)
    psigma = -math.sin(theta_w) * r2 / (4 * root * sigma * sigma_mk)
    return PhasePoint.polar(rho, sigma, prho, psigma)


# -- implicit curve ----------------------------------------------------------

def _cos_c(params, consts):
    return math.cos(consts.c_k)


def curve_residual(params: SystemParams, consts: CurveConstants, Z, W, s):
    """cos C_k - [T_q(W) T_p(Z) - U_{q-1}(W) U_{p-1}(Z) s]; zero on the orbit."""
    p, q = params.k.p, params.k.q
    val = (np.asarray(chebyshev_t(q, W)) * np.asarray(chebyshev_t(p, Z))
           - np.asarray(chebyshev_u(q - 1, W)) * np.asarray(chebyshev_u(p - 1, Z)) * np.asarray(s))
    out = _cos_c(params, consts) - val
    return out if np.ndim(out) else float(out)


def curve_residual_expanded(params: SystemParams, consts: CurveConstants, Z, W, s):
    """Same contract as :func:`curve_residual`, through the binomial double sums."""
    p, q = params.k.p, params.k.q
    val = (np.asarray(chebyshev_t_binomial(q, W)) * np.asarray(chebyshev_t_binomial(p, Z))
           - np.asarray(chebyshev_u_binomial(q - 1, W)) * np.asarray(chebyshev_u_binomial(p - 1, Z))
           * np.asarray(s))
    out = _cos_c(params, consts) - val
    return out if np.ndim(out) else float(out)


def implicit_curve(params: SystemParams, consts: CurveConstants, samples: int = 2000):
    """Closed orbit shape from the angle parametrisation, without integrating.

    Returns a dict of arrays (theta, Z, W, rho, sigma, u, v) covering q radial
    periods, after which the curve closes.
    """
    q, k = params.k.q, params.kval
    theta = np.linspace(0.0, 2 * np.pi * q, samples)
    z = np.cos(theta)
    w = np.cos(-4 * k * consts.delta2 * math.sqrt(-consts.A) - k * theta)
    r1, r2 = math.sqrt(consts.D1), math.sqrt(consts.D2)
    rho = 2 * consts.A / (z * r1 - consts.E)
    sigma = ((w * r2 - params.beta) / (2 * consts.A)) ** (-1 / k)
    root = np.sqrt(rho / sigma)
    return {"theta": theta, "Z": z, "W": w, "rho": rho, "sigma": sigma,
            "u": 0.5 * (sigma + 1) * root, "v": 0.5 * (sigma - 1) * root}


# -- equations of motion -----------------------------------------------------

def _polar_rhs(params: SystemParams):
    k, a, b, w2 = params.kval, params.alpha, params.beta, params.omega**2

    def rhs(t, y):
        rho, sigma, prho, psigma = y
        if params.free:
            pot = dpot = 0.0
        else:
            sk, s2k = sigma_powers(params, sigma)
            pot = a * s2k + b * sk
            dpot = (2 * k * a * s2k + k * b * sk) / sigma
        dh_drho = 4 * prho**2 + 4 * sigma**2 * psigma**2 / rho**2 + w2 - pot / rho**2
        dh_dsigma = -8 * sigma * psigma**2 / rho + dpot / rho
        return np.array([8 * rho * prho, -8 * sigma**2 / rho * psigma, -dh_drho, -dh_dsigma])

    return rhs


def _cartesian_rhs(params: SystemParams):
    k, a, b, w2 = params.kval, params.alpha, params.beta, params.omega**2

    def rhs(t, y):
        u, v, pu, pv = y
        du_pot = dv_pot = 0.0
        if not params.free:
            d = u - v
            rho = u * u - v * v
            sigma = (u + v) / d
            sk, s2k = sigma_powers(params, sigma)
            pot = a * s2k + b * sk
            v_rho = -pot / rho**2
            v_sigma = (2 * k * a * s2k + k * b * sk) / sigma / rho
            du_pot = v_rho * 2 * u - v_sigma * 2 * v / d**2
            dv_pot = -v_rho * 2 * v + v_sigma * 2 * u / d**2
        return np.array([2 * pu, -2 * pv, -2 * w2 * u - du_pot, 2 * w2 * v - dv_pot])

    return rhs


def vector_field(params: SystemParams, chart: Chart):
    return _polar_rhs(params) if chart is Chart.MODIFIED_POLAR else _cartesian_rhs(params)


def equations_of_motion(params: SystemParams, point: PhasePoint):
    """(d rho/dt, d sigma/dt, d p_rho/dt, d p_sigma/dt) from Hamilton's equations."""
    if point.chart is not Chart.MODIFIED_POLAR:
        raise ChartError("equations_of_motion expects a modified polar point")
    if not (point.q1 > 0 and point.q2 > 0):
        raise ChartError("equations of motion need rho > 0 and sigma > 0")
    return tuple(float(x) for x in _polar_rhs(params)(0.0, point.as_array()))


# -- integration -------------------------------------------------------------

_DOMAIN_FLOOR = 1e-12


@dataclass
class Trajectory:
    params: SystemParams
    chart: Chart
    t: np.ndarray
    states: np.ndarray           # (n, 4) in ``chart``
    H: np.ndarray
    A_phase: np.ndarray
    L: np.ndarray
    curve_residual: np.ndarray
    consts: Optional[CurveConstants] = None
    escape_time: Optional[float] = None
    sol: object = field(default=None, repr=False)
    rel_tol: float = 1e-10

    def polar(self) -> np.ndarray:
        """States in the modified polar chart, shape (n, 4)."""
        if self.chart is Chart.MODIFIED_POLAR:
            return self.states
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.column_stack(polar_from_cartesian(*self.states.T))

    def cartesian(self) -> np.ndarray:
        if self.chart is Chart.CARTESIAN:
            return self.states
        return np.column_stack(cartesian_from_polar(*self.states.T))

    def point(self, i: int) -> PhasePoint:
        return PhasePoint(self.chart, *map(float, self.states[i]))

    def relative_drift(self, name: str) -> float:
        vals = getattr(self, name)
        ref = abs(vals[0]) if vals[0] != 0 else 1.0
        return float(np.max(np.abs(vals - vals[0])) / ref)

    @property
    def escaped(self) -> bool:
        return self.escape_time is not None


def _domain_events(params: SystemParams, chart: Chart):
    if params.free:
        return []
    if chart is Chart.MODIFIED_POLAR:
        ev_rho = lambda t, y: y[0] - _DOMAIN_FLOOR
        ev_sigma = lambda t, y: y[1] - _DOMAIN_FLOOR
    else:
        ev_rho = lambda t, y: (y[0] - y[1]) * (y[0] + y[1]) - _DOMAIN_FLOOR
        ev_sigma = lambda t, y: (y[0] + y[1]) / (y[0] - y[1]) - _DOMAIN_FLOOR
    for ev in (ev_rho, ev_sigma):
        ev.terminal = True
        ev.direction = -1
    return [ev_rho, ev_sigma]


def trajectory_diagnostics(params: SystemParams, polar_states: np.ndarray,
                           consts: Optional[CurveConstants]):
    """H, A_phase, L and curve residual for an (n, 4) array of polar states."""
    rho, sigma, prho, psigma = polar_states.T
    with np.errstate(invalid="ignore", divide="ignore"):
        h = hamiltonian_polar(params, rho, sigma, prho, psigma)
        a = 4 * sigma**2 * psigma**2 - angular_potential(params, sigma)
        if consts is None or params.free:
            nan = np.full_like(rho, np.nan)
            return h, a, nan, nan.copy()
        lval = extra_integral_arrays(params, rho, sigma, prho, psigma)
        z, w, s, *_ = invariant_arrays(params, rho, sigma, prho, psigma)
        res = curve_residual(params, consts, z, w, s)
    return h, a, lval, np.asarray(res)


def integrate(params: SystemParams, initial: PhasePoint, t_end: float,
              rel_tol: float = 1e-10, dt_out: Optional[float] = None,
              consts: Optional[CurveConstants] = None) -> Trajectory:
    """Adaptive DOP853 (order 8, embedded 5/3 error estimate) with dense output.

    The flow is integrated in the chart of ``initial``.  If the orbit is in the
    bounded regime, L and the implicit-curve residual are recorded per sample;
    ``consts`` defaults to the constants recovered from ``initial``.
    """
    if not 1e-13 <= rel_tol <= 1e-6:
        raise ValueError(f"rel_tol must lie in [1e-13, 1e-6], got {rel_tol}")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    chart = initial.chart
    if chart is Chart.MODIFIED_POLAR and not params.free and not (initial.q1 > 0 and initial.q2 > 0):
        raise ChartError("initial point outside rho, sigma > 0")
    y0 = initial.as_array()
    if consts is None and not params.free:
        try:
            consts = curve_constants_from_point(params, initial)
        except (RegimeError, ChartError, ValueError):
            consts = None

    rhs = vector_field(params, chart)
    events = _domain_events(params, chart)
    atol = rel_tol * 1e-3 * max(1.0, float(np.max(np.abs(y0))))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=rel_tol, atol=atol,
                        dense_output=True, events=events or None)
    escape = None
    if sol.status == 1:
        escape = float(sol.t[-1])
    elif sol.status == -1:
        escape = float(sol.t[-1])
    t_stop = float(sol.t[-1])
    if dt_out is not None:
        if not dt_out > 0:
            raise ValueError("dt_out must be positive")
        n = int(math.floor(t_stop / dt_out + 1e-9))
        ts = dt_out * np.arange(n + 1)
        states = sol.sol(ts).T
        states[0] = y0
    else:
        ts = sol.t
        states = sol.y.T
    if chart is Chart.MODIFIED_POLAR:
        polar = states
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            polar = np.column_stack(polar_from_cartesian(*states.T))
    h, a, lval, res = trajectory_diagnostics(params, polar, consts)
    if chart is Chart.CARTESIAN:
        h = hamiltonian_cartesian(params, *states.T)
    return Trajectory(params=params, chart=chart, t=ts, states=states, H=np.asarray(h),
                      A_phase=np.asarray(a), L=np.asarray(lval), curve_residual=res,
                      consts=consts, escape_time=escape, sol=sol.sol, rel_tol=rel_tol)


# -- period detection --------------------------------------------------------

@dataclass(frozen=True)
class Closure:
    t: float
    state: np.ndarray
    initial: np.ndarray
    distance: float              # max over components of |dy| / amplitude
    amplitude: np.ndarray

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.state - self.initial)))


def find_closure(params: SystemParams, initial: PhasePoint, t_max: float,
                 tol: float = 1e-6, rel_tol: float = 1e-11) -> Optional[Closure]:
    """First return of the flow to ``initial`` within ``tol`` (scaled max norm).

    Returns are located on the hyperplane through the initial state transverse
    to the flow: sign changes of the section function are bracketed on the
    dense output and refined with Brent's method.
    """
    traj = integrate(params, initial, t_max, rel_tol=rel_tol)
    if traj.escaped:
        return None
    sol = traj.sol
    y0 = initial.as_array()
    # sample every solver step finely for amplitudes and bracketing
    steps = traj.t
    fine = np.unique(np.concatenate([np.linspace(a, b, 9) for a, b in zip(steps[:-1], steps[1:])]))
    ys = sol(fine)
    amp = ys.max(axis=1) - ys.min(axis=1)
    amp = np.where(amp > 0, amp, 1.0)
    normal = vector_field(params, initial.chart)(0.0, y0) / amp

    def section(t):
        return float(np.dot((sol(t) - y0) / amp, normal))

    g = np.dot(((ys.T - y0) / amp), normal)
    for i in range(1, len(fine) - 1):
        if g[i] < 0 <= g[i + 1]:
            t_star = brentq(section, fine[i], fine[i + 1], xtol=1e-15, maxiter=200)
            y = sol(t_star)
            dist = float(np.max(np.abs(y - y0) / amp))
            if dist < tol:
                return Closure(t=float(t_star), state=y, initial=y0, distance=dist, amplitude=amp)
    return None


def find_period(params: SystemParams, initial: PhasePoint, t_max: float,
                tol: float = 1e-6) -> Optional[float]:
    closure = find_closure(params, initial, t_max, tol)
    return None if closure is None else closure.t


# -- free oscillator ---------------------------------------------------------

@dataclass(frozen=True)
class OscillatorSample:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p_u: np.ndarray
    p_v: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    p_rho: np.ndarray
    p_sigma: np.ndarray
    E: float
    A: float
    omega: float
    singular: np.ndarray

    @property
    def energy_phase(self) -> np.ndarray:
        return self.p_u**2 - self.p_v**2 + self.omega**2 * (self.u**2 - self.v**2)

    @property
    def separation_phase(self) -> np.ndarray:
        """4 sigma^2 p_sigma^2 from the chart values (NaN at singular instants)."""
        return 4 * self.sigma**2 * self.p_sigma**2


def oscillator_trajectory(a: float, b: float, omega: float, t) -> OscillatorSample:
    """Closed-form orbit of the alpha = beta = 0 oscillator.

    u = a sin 2wt, v = b cos 2wt, p_u = w a cos 2wt, p_v = w b sin 2wt.
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s, c = np.sin(2 * omega * t), np.cos(2 * omega * t)
    u, v = a * s, b * c
    pu, pv = omega * a * c, omega * b * s
    scale = max(abs(a), abs(b), 1e-300)
    singular = (np.abs(u - v) <= 1e-12 * scale) | (np.abs(u + v) <= 1e-12 * scale)
    with np.errstate(divide="ignore", invalid="ignore"):
        rho, sigma, prho, psigma = polar_from_cartesian(u, v, pu, pv)
    nan = np.nan
    rho, sigma, prho, psigma = (np.where(singular, nan, x) for x in (rho, sigma, prho, psigma))
    return OscillatorSample(t=t, u=u, v=v, p_u=pu, p_v=pv, rho=rho, sigma=sigma, p_rho=prho,
                            p_sigma=psigma, E=omega**2 * (a * a - b * b),
                            A=omega**2 * a * a * b * b, omega=omega, singular=singular)
