"""Self-check suites behind ``e11super verify``.

Each suite returns ``{"suite", "cases", "max_error", "pass"}``.  ``max_error``
is the largest error divided by its own tolerance, so a suite passes
exactly when ``max_error <= 1``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import classical, invariants, quantum, specfun
from .model import (PhasePoint, RationalK, RegimeError, SystemParams,
                    cartesian_from_polar, hamiltonian_cartesian, hamiltonian_polar,
                    polar_from_cartesian, separation_constant, to_cartesian)
from .presets import PRESETS


class _Tally:
    def __init__(self, name):
        self.name = name
        self.cases = 0
        self.worst = 0.0

    def add(self, error, tol):
        self.cases += 1
        err = float(error)
        ratio = err / tol if math.isfinite(err) else math.inf
        self.worst = max(self.worst, ratio)

    def report(self):
        return {"suite": self.name, "cases": self.cases, "max_error": self.worst,
                "pass": bool(self.cases > 0 and self.worst <= 1.0)}


def _rel(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def suite_specfun(rng):
    t = _Tally("specfun")
    x = rng.uniform(0.05, 12.0, 40)
    for n in range(7):
        for a in rng.uniform(-0.9, 5.0, 3):
            poly = np.polynomial.Polynomial(specfun.laguerre_coefficients(n, a))
            t.add(_rel(specfun.laguerre(n, a, x), poly(x)), 1e-10)
            # x L'' + (a + 1 - x) L' + n L = 0
            ode = (x * specfun.laguerre_deriv(n, a, x, 2)
                   + (a + 1 - x) * specfun.laguerre_deriv(n, a, x, 1) + n * specfun.laguerre(n, a, x))
            t.add(float(np.max(np.abs(ode)) / max(1.0, np.max(np.abs(poly(x))))), 1e-10)
    theta = rng.uniform(0, math.pi, 40)
    for n in range(9):
        t.add(_rel(specfun.chebyshev_t(n, np.cos(theta)), np.cos(n * theta)), 1e-12)
        t.add(_rel(specfun.chebyshev_u(n, np.cos(theta)) * np.sin(theta), np.sin((n + 1) * theta)),
              1e-12)
        big = rng.uniform(-3, 3, 20)
        t.add(_rel(specfun.chebyshev_t(n, big), specfun.chebyshev_t_binomial(n, big)), 1e-12)
        t.add(_rel(specfun.chebyshev_u(n, big), specfun.chebyshev_u_binomial(n, big)), 1e-12)
    s = rng.uniform(0.1, 4.0, 30)
    for n in range(6):
        for a in (-1.5, 0.5, 2.0, 3.7):
            for b in (1.0, 2.0):
                y = specfun.bessel_poly(n, a, b, s)
                dy = specfun.bessel_poly_deriv(n, a, b, s)
                d2y = (np.asarray(specfun.bessel_poly_deriv(n - 1, a + 2, b, s)) * n * (n + a - 1) / b
                       if n else np.zeros_like(s))
                res = s**2 * d2y + (a * s + b) * dy - n * (n + a - 1) * y
                t.add(float(np.max(np.abs(res)) / max(1.0, np.max(np.abs(y)))), 1e-9)
    return t.report()


def suite_model(rng):
    t = _Tally("model")
    for _ in range(30):
        k = RationalK(*rng.choice([(1, 1), (2, 1), (1, 2), (3, 2), (1, 3)]))
        params = SystemParams(k, -rng.uniform(0.5, 3), rng.uniform(1, 8), rng.uniform(0.5, 4))
        y = np.array([rng.uniform(0.2, 3), rng.uniform(0.2, 3), rng.normal(), rng.normal()])
        cart = cartesian_from_polar(*y)
        back = polar_from_cartesian(*cart)
        t.add(_rel(back, y), 1e-12)
        h_polar = hamiltonian_polar(params, *y)
        h_cart = hamiltonian_cartesian(params, *cart)
        t.add(abs(h_polar - h_cart) / max(1.0, abs(h_polar)), 1e-11)
        # canonical check by complex step: J^T Omega J = Omega
        jac = np.empty((4, 4))
        hstep = 1e-30
        for i in range(4):
            yc = y.astype(complex)
            yc[i] += 1j * hstep
            jac[:, i] = np.imag(np.array(cartesian_from_polar(*yc))) / hstep
        omega = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        t.add(float(np.max(np.abs(jac.T @ omega @ jac - omega))), 1e-10)
    return t.report()


def suite_classical(rng):
    t = _Tally("classical")
    fig1 = PRESETS["fig1-k1"]
    r1, r2 = classical.rho_bounds(fig1.E, fig1.A, fig1.params.omega)
    lo, hi = classical.sigma_bounds(fig1.params, fig1.A)
    for got, want in ((r1, 0.051178), (r2, 2.171045), (lo, 0.354249), (hi, 5.645751)):
        t.add(abs(got - want), 1e-5)
    for preset in PRESETS.values():
        traj = classical.integrate(preset.params, preset.initial(), 2 * preset.radial_period,
                                   rel_tol=1e-10, dt_out=preset.radial_period / 200)
        for name in ("H", "A_phase", "L"):
            t.add(traj.relative_drift(name), 1e-6)
        t.add(float(np.max(np.abs(traj.curve_residual))), 1e-6)
        rho_cf = classical.rho_closed_form(traj.consts, preset.params.omega, traj.t)
        t.add(_rel(traj.states[:, 0], rho_cf), 1e-7)
        closure = classical.find_closure(preset.params, preset.initial(),
                                         4 * math.pi * preset.params.k.q / preset.params.omega)
        t.add(math.inf if closure is None else closure.max_abs_error, 1e-6)
    for _ in range(5):
        a, b, w = rng.uniform(1.2, 3), rng.uniform(0.1, 1.0), rng.uniform(0.5, 3)
        osc = classical.oscillator_trajectory(a, b, w, rng.uniform(0, 10, 50))
        t.add(_rel(osc.energy_phase, np.full(50, w * w * (a * a - b * b))), 1e-9)
        ok = ~osc.singular
        t.add(_rel(osc.separation_phase[ok], np.full(ok.sum(), (w * a * b) ** 2)), 1e-9)
    return t.report()


def random_bounded_point(rng, params: SystemParams, attempts: int = 10_000):
    """Polar phase point inside the bounded regime with D1, D2 safely positive."""
    for _ in range(attempts):
        y = np.array([rng.uniform(0.2, 3.0), rng.uniform(0.3, 3.0),
                      rng.normal(scale=1.0), rng.normal(scale=0.5)])
        h = float(hamiltonian_polar(params, *y))
        sep = float(4 * y[1] ** 2 * y[3] ** 2 - params.alpha * y[1] ** (2 * params.kval)
                    - params.beta * y[1] ** params.kval)
        try:
            classical.check_bounded_regime(params, h, sep)
        except RegimeError:
            continue
        d1 = h * h + 4 * params.omega**2 * sep
        d2 = params.beta**2 - 4 * params.alpha * sep
        if d1 > 1e-3 * h * h and d2 > 1e-3 * params.beta**2:
            return PhasePoint.polar(*y)
    raise RuntimeError("could not sample a bounded-regime point")


def random_params(rng, k) -> SystemParams:
    return SystemParams(k, -rng.uniform(0.5, 2.5), rng.uniform(2.0, 8.0), rng.uniform(0.5, 3.0))


def suite_invariants(rng):
    t = _Tally("invariants")
    for pq in ((1, 1), (2, 1), (1, 2), (3, 2), (1, 3), (3, 1)):
        params = random_params(rng, RationalK(*pq))
        for _ in range(10):
            pt = random_bounded_point(rng, params)
            a = invariants.extra_integral(params, pt)
            b = invariants.extra_integral_expanded(params, pt)
            t.add(abs(a - b) / max(1.0, abs(a)), 1e-9)
            cart = to_cartesian(pt)
            t.add(abs(invariants.extra_integral(params, cart) - a) / max(1.0, abs(a)), 1e-9)
    return t.report()


def bracket_ratio(f, g, point) -> float:
    gf = invariants.gradient(f, point)
    gg = invariants.gradient(g, point)
    return abs(invariants.bracket_from_gradients(gf, gg)) / (np.linalg.norm(gf) * np.linalg.norm(gg))


def suite_poisson(rng, points: int = 100):
    t = _Tally("poisson")
    for pq in ((1, 1), (2, 1), (1, 2), (3, 2)):
        params = random_params(rng, RationalK(*pq))
        h = lambda pt, params=params: float(hamiltonian_polar(params, *pt.as_array()))
        ell = lambda pt, params=params: invariants.extra_integral_expanded(params, pt)
        sep = lambda pt, params=params: separation_constant(params, pt)
        for i in range(points):
            pt = random_bounded_point(rng, params)
            t.add(bracket_ratio(ell, h, pt), 1e-5)
            if i % 10 == 0:
                t.add(bracket_ratio(sep, h, pt), 1e-5)
    return t.report()


def random_quantum_params(rng) -> SystemParams:
    k = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4)))
    alpha = -float(rng.uniform(0.3, 3.0))
    x = float(rng.uniform(1.2, 9.0))
    beta = 2 * float(k) * math.sqrt(-alpha) * x
    return SystemParams(RationalK(k.numerator, k.denominator), alpha, beta, float(rng.uniform(0.5, 3)))


def suite_quantum(rng):
    t = _Tally("quantum")
    ex = SystemParams(RationalK(1, 1), -1.0, 7.0, 1.0)
    spec = quantum.spectrum(ex)
    t.add(abs(spec.N - 1), 1e-12)
    for got, want in ((spec.B, 0.5), (spec.separation(0), -6.25), (spec.separation(1), -0.25),
                      (spec.energy(0, 0), 7.0), (spec.energy(1, 1), 7.0)):
        t.add(abs(got - want), 1e-12)
    for _ in range(50):
        params = random_quantum_params(rng)
        sp = quantum.spectrum(params, m_max=2)
        p, q = params.k.p, params.k.q
        for lv in sp.levels:
            t.add(abs(lv.E_mn - sp.energy_explicit(lv.m, lv.n)) / lv.E_mn, 1e-12)
            if lv.n + q <= sp.N:
                t.add(abs(lv.E_mn - sp.energy(lv.m + p, lv.n + q)) / lv.E_mn, 1e-12)
        t.add(0.0 if sp.lam(sp.N + 1) <= 0 < sp.lam(sp.N) else 1.0, 0.5)
    grid = np.geomspace(0.05, 12.0, 20)
    for params in (ex, SystemParams(RationalK(1, 2), -1.0, 9.0, 2.0),
                   SystemParams(RationalK(3, 2), -1.0, 20.0, 2.0),
                   SystemParams(RationalK(2, 1), -0.5, 15.0, 1.5)):
        sp = quantum.spectrum(params, m_max=3)
        k = params.kval
        xi, eta = np.meshgrid(grid, grid, indexing="ij")
        rho = xi / params.omega
        sigma = (k * eta / math.sqrt(-params.alpha)) ** (1 / k)
        for lv in sp.levels:
            t.add(float(np.max(np.abs(quantum.schrodinger_residual(params, lv, rho, sigma)))), 1e-9)
        gram = quantum.gram_matrix_S(params, sp)
        d = np.sqrt(np.diag(gram))
        off = np.abs(gram / np.outer(d, d) - np.eye(len(d)))
        t.add(float(off.max()), 1e-8)
        for n in range(sp.N + 1):
            gap = quantum.bessel_representation_check(params, sp, n, np.geomspace(0.2, 5, 9))
            t.add(float(np.max(gap)), 1e-9)
    return t.report()


def suite_ladder(rng):
    t = _Tally("ladder")
    x = np.array([0.5, 1.0, 2.0])
    for n in range(5):
        for a in (0.5, 1.0, 2.0):
            f = quantum.GaugedPolynomial.laguerre(n, a)
            const = (2 * n + 1 + a) / 2
            down = quantum.LadderOperator(a, const)(f)(x)
            want = -np.exp(-x / 2) * x ** (a / 2 + 1) * specfun.laguerre(n - 1, a + 2, x)
            t.add(_rel(down, want), 1e-10)
            up = quantum.LadderOperator(-a, const)(f)(x)
            want = (-(n + 1) * (n + a) * np.exp(-x / 2) * x ** (a / 2 - 1)
                    * specfun.laguerre(n + 1, a - 2, x))
            t.add(_rel(up, want), 1e-10)
            ln = specfun.laguerre(n, a, x)
            dl = specfun.laguerre_deriv(n, a, x)
            t.add(_rel(dl, -np.asarray(specfun.laguerre(n - 1, a + 1, x))), 1e-10)
            t.add(_rel(x * dl + (a - x) * ln, (n + 1) * np.asarray(specfun.laguerre(n + 1, a - 1, x))),
                  1e-10)
            t.add(_rel(x * dl + a * ln, (n + a) * np.asarray(specfun.laguerre(n, a - 1, x))), 1e-10)
            t.add(_rel(dl - ln, -np.asarray(specfun.laguerre(n, a + 1, x))), 1e-10)
    for params in (SystemParams(RationalK(1, 1), -1.0, 7.0, 1.0),
                   SystemParams(RationalK(1, 1), -1.0, 13.0, 1.0),
                   SystemParams(RationalK(3, 2), -1.0, 20.0, 2.0)):
        sp = quantum.spectrum(params, m_max=4)
        for m in range(5):
            for n in range(sp.N + 1):
                try:
                    rep = quantum.degeneracy_map_check(params, sp, m, n)
                except ValueError:
                    continue
                for d in rep.directions:
                    t.add(max(d.radial_variation, d.angular_variation, d.product_variation,
                              abs(d.radial_ratio / d.radial_expected - 1),
                              abs(d.angular_ratio / d.angular_expected - 1)), 1e-8)
                    t.add(abs(d.energy_partner - rep.energy) / rep.energy, 1e-12)
    return t.report()


SUITES = {
    "specfun": suite_specfun,
    "model": suite_model,
    "classical": suite_classical,
    "invariants": suite_invariants,
    "poisson": suite_poisson,
    "quantum": suite_quantum,
    "ladder": suite_ladder,
}


def run_suites(names, seed: int = 0, workers: int = 1):
    """Run the named suites, each with its own generator derived from ``seed``."""
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    seeds = np.random.SeedSequence(seed).spawn(len(names))

    def run(i):
        name = names[i]
        try:
            return SUITES[name](np.random.default_rng(seeds[i]))
        except Exception as exc:  # a crashing suite is a failing suite
            return {"suite": name, "cases": 0, "max_error": math.inf, "pass": False,
                    "error": f"{type(exc).__name__}: {exc}"}

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, range(len(names))))
    return [run(i) for i in range(len(names))]
