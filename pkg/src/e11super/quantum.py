"""Bound states, ladder operators and degeneracies of the quantum family.

With xi = omega rho and eta = sqrt(-alpha) sigma^k / k the separated
eigenfunctions are Laguerre functions

    R_{m,lam}(xi) = exp(-xi/2) xi^(lam/2) L_m^lam(xi),      lam = sqrt(-A_n)
    S_n(eta)      = exp(-eta/2) eta^(mu/2) L_n^mu(eta),      mu  = lam / k

with mu = B + 2(N - n) and E_{m,n} = 2 omega (2m + 1 + lam).  Normalisation
constants are 1 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad

from .model import RegimeError, SystemParams, angular_potential
from .specfun import bessel_poly, laguerre, laguerre_coefficients, laguerre_deriv


class NoBoundStateError(RegimeError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuantumLevel:
    m: int
    n: int
    A_n: float
    E_mn: float
    lam: float      # sqrt(-A_n), radial Laguerre parameter
    mu: float       # lam / k, angular Laguerre parameter


@dataclass(frozen=True)
class SpectrumData:
    params: SystemParams
    ratio: float    # beta / (2 k sqrt(-alpha))
    N: int
    B: float
    levels: tuple = field(default=(), repr=False)

    def mu(self, n) -> float:
        return self.B + 2 * (self.N - n)

    def lam(self, n) -> float:
        return self.params.kval * self.mu(n)

    def separation(self, n) -> float:
        return -self.lam(n) ** 2

    def energy(self, m, n) -> float:
        return 2 * self.params.omega * (2 * m + 1 + self.lam(n))

    def energy_explicit(self, m, n) -> float:
        """2 omega (2m - 2kn + 1 - k + beta/(2 sqrt(-alpha)))."""
        p = self.params
        k = p.kval
        return 2 * p.omega * (2 * m - 2 * k * n + 1 - k + p.beta / (2 * math.sqrt(-p.alpha)))

    def level(self, m, n) -> QuantumLevel:
        if not 0 <= n <= self.N:
            raise ValueError(f"n = {n} outside [0, {self.N}]")
        if m < 0:
            raise ValueError("m must be non-negative")
        return QuantumLevel(m=m, n=n, A_n=self.separation(n), E_mn=self.energy(m, n),
                            lam=self.lam(n), mu=self.mu(n))


def spectrum(params: SystemParams, m_max: int = 3) -> SpectrumData:
    """Finite angular ladder n = 0..N and radial levels m = 0..m_max.

    N is the largest n with sqrt(-A_n) > 0 strictly, so B lies in (0, 2].
    """
    if not (params.alpha < 0 and params.beta > 0):
        raise NoBoundStateError("bound states need alpha < 0 and beta > 0")
    x = params.beta / (2 * params.kval * math.sqrt(-params.alpha))
    if not x > 1:
        raise NoBoundStateError(
            f"no bound state: beta/(2k sqrt(-alpha)) = {x} must exceed 1")
    n_max = math.ceil((x - 1) / 2) - 1
    b = x - 2 * n_max - 1
    spec = SpectrumData(params=params, ratio=x, N=n_max, B=b)
    levels = tuple(spec.level(m, n) for n in range(n_max + 1) for m in range(m_max + 1))
    return SpectrumData(params=params, ratio=x, N=n_max, B=b, levels=levels)


def xi_of_rho(params: SystemParams, rho):
    return params.omega * np.asarray(rho, dtype=float)


def eta_of_sigma(params: SystemParams, sigma):
    k = params.kval
    return math.sqrt(-params.alpha) * np.asarray(sigma, dtype=float) ** k / k


# -- wavefunctions ------------------------------------------------------------

def laguerre_function(n: int, a: float, x):
    """exp(-x/2) x^(a/2) L_n^a(x)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-x / 2) * x ** (a / 2) * laguerre(n, a, x)
    return out if out.ndim else float(out)


def laguerre_function_derivs(n: int, a: float, x):
    """Value, first and second derivative of exp(-x/2) x^(a/2) L_n^a(x), exactly."""
    x = np.asarray(x, dtype=float)
    g = np.exp(-x / 2) * x ** (a / 2)
    h = -0.5 + a / (2 * x)
    dh = -a / (2 * x * x)
    l0 = np.asarray(laguerre(n, a, x))
    l1 = np.asarray(laguerre_deriv(n, a, x, 1))
    l2 = np.asarray(laguerre_deriv(n, a, x, 2))
    return g * l0, g * (h * l0 + l1), g * ((h * h + dh) * l0 + 2 * h * l1 + l2)


def wavefunction_R(params: SystemParams, m: int, lam: float, xi):
    """Radial factor for real lam > 0 (physical levels have lam = sqrt(-A_n))."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    return laguerre_function(m, lam, xi)


def wavefunction_S(params: SystemParams, spec: SpectrumData, n: int, eta):
    if not 0 <= n <= spec.N:
        raise ValueError(f"n = {n} outside [0, {spec.N}]")
    return laguerre_function(n, spec.mu(n), eta)


def _require_bound(params: SystemParams):
    if params.free:
        raise NoBoundStateError("alpha = beta = 0 has no bound states")


def radial_residual(params: SystemParams, level: QuantumLevel, rho):
    """[4 rho d^2 + 4 d - omega^2 rho + A/rho + E] R divided by |R|."""
    _require_bound(params)
    w = params.omega
    rho = np.asarray(rho, dtype=float)
    r0, r1, r2 = laguerre_function_derivs(level.m, level.lam, w * rho)
    op = 4 * rho * w * w * r2 + 4 * w * r1 + (-w * w * rho + level.A_n / rho + level.E_mn) * r0
    return op / np.maximum(np.abs(r0), 1e-300)


def schrodinger_residual(params: SystemParams, level: QuantumLevel, rho, sigma):
    """(H_k Psi - E Psi) / |Psi| with exact Laguerre derivatives."""
    _require_bound(params)
    w, k = params.omega, params.kval
    rho = np.asarray(rho, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    r0, r1, r2 = laguerre_function_derivs(level.m, level.lam, w * rho)
    eta = eta_of_sigma(params, sigma)
    s0, s1, s2 = laguerre_function_derivs(level.n, level.mu, eta)
    deta = k * eta / sigma
    d2eta = k * (k - 1) * eta / sigma**2
    psi = r0 * s0
    d_rho = w * r1 * s0
    d2_rho = w * w * r2 * s0
    d_sigma = r0 * s1 * deta
    d2_sigma = r0 * (s2 * deta**2 + s1 * d2eta)
    h_psi = (-4 * rho * d2_rho - 4 * d_rho + 4 * sigma**2 / rho * d2_sigma
             + 4 * sigma / rho * d_sigma + w * w * rho * psi
             + angular_potential(params, sigma) / rho * psi)
    out = (h_psi - level.E_mn * psi) / np.maximum(np.abs(psi), 1e-300)
    return out if out.ndim else float(out)


def gram_matrix_S(params: SystemParams, spec: SpectrumData, epsabs: float = 1e-12,
                  epsrel: float = 1e-10, return_error: bool = False):
    """G_{nn'} = int_0^inf S_n S_n' deta/eta, on t in (0, 1) with eta = t/(1-t)."""
    size = spec.N + 1
    gram = np.zeros((size, size))
    err = np.zeros((size, size))
    # diagonals first: they set the scale the off-diagonal errors are judged by
    pairs = [(i, i) for i in range(size)] + [(i, j) for i in range(size) for j in range(i + 1, size)]
    for i, j in pairs:
        def integrand(t, i=i, j=j):
            eta = t / (1 - t)
            return (wavefunction_S(params, spec, i, eta) * wavefunction_S(params, spec, j, eta)
                    / (eta * (1 - t) ** 2))

        val, est, *_ = quad(integrand, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel, limit=400,
                            full_output=1)
        scale = abs(val) if i == j else math.sqrt(gram[i, i] * gram[j, j])
        if not est <= 10 * max(epsabs, epsrel * scale):
            raise QuadratureError(
                f"Gram entry ({i},{j}) did not converge: estimate {val}, error {est}")
        gram[i, j] = gram[j, i] = val
        err[i, j] = err[j, i] = est
    return (gram, err) if return_error else gram


# -- generalized Bessel representation ---------------------------------------

def bessel_parameter(params: SystemParams) -> float:
    """The Bessel-polynomial parameter a of the angular factor, a = 2 - beta/(2k sqrt(-alpha)).

    It satisfies alpha = -beta^2 / (4 k^2 (a-2)^2).
    """
    k = params.kval
    a = 2 - params.beta / (2 * k * math.sqrt(-params.alpha))
    back = -params.beta**2 / (4 * k * k * (a - 2) ** 2)
    if a == 2 or not math.isclose(back, params.alpha, rel_tol=1e-12):
        raise ValueError("could not recover the Bessel parameter a from alpha, beta, k")
    return a


def bessel_form(params: SystemParams, n: int, s):
    """s^((a-1)/2) exp(-1/(2s)) y_n(s, a, 1)."""
    a = bessel_parameter(params)
    s = np.asarray(s, dtype=float)
    return s ** ((a - 1) / 2) * np.exp(-1 / (2 * s)) * np.asarray(bessel_poly(n, a, 1.0, s))


def bessel_representation_check(params: SystemParams, spec: SpectrumData, n: int, s,
                                s_ref: float = 1.0):
    """Relative gap between S_n(1/s) and c * bessel_form(n, s), c matched at s_ref."""
    ref_b = float(bessel_form(params, n, s_ref))
    if ref_b == 0:
        s_ref *= 1.37
        ref_b = float(bessel_form(params, n, s_ref))
    c = float(wavefunction_S(params, spec, n, 1 / s_ref)) / ref_b
    s = np.asarray(s, dtype=float)
    direct = np.asarray(wavefunction_S(params, spec, n, 1 / s))
    out = np.abs(direct - c * np.asarray(bessel_form(params, n, s))) / np.abs(direct)
    return out if out.ndim else float(out)


def angular_bessel_factor(spec: SpectrumData, n: int) -> Polynomial:
    """Polynomial factor s^n L_n^mu(1/s), normalised to 1 at s = 0."""
    coeffs = laguerre_coefficients(n, spec.mu(n))
    rev = coeffs[::-1]
    return Polynomial(rev / rev[0])


# -- ladder operators ---------------------------------------------------------

_X = Polynomial([0.0, 1.0])


@dataclass(frozen=True)
class GaugedPolynomial:
    """exp(-x/2) x^nu P(x) with an exact polynomial P; closed under the ladders."""

    nu: float
    poly: Polynomial

    @classmethod
    def laguerre(cls, n: int, a: float) -> "GaugedPolynomial":
        if n < 0:
            return cls(a / 2, Polynomial([0.0]))
        return cls(a / 2, Polynomial(laguerre_coefficients(n, a)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-x / 2) * x**self.nu * self.poly(x)

    def derivative(self) -> "GaugedPolynomial":
        # d/dx = exp(-x/2) x^(nu-1) [(nu - x/2) P + x P']
        return GaugedPolynomial(self.nu - 1, (self.nu - 0.5 * _X) * self.poly + _X * self.poly.deriv())

    def __mul__(self, c: float) -> "GaugedPolynomial":
        return GaugedPolynomial(self.nu, self.poly * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LadderOperator:
    """(1 + shift) d/dx + const - shift (1 + shift) / (2x)."""

    shift: float
    const: float

    def __call__(self, f: GaugedPolynomial) -> GaugedPolynomial:
        s = self.shift
        deriv = (f.nu - 0.5 * _X) * f.poly + _X * f.poly.deriv()
        poly = (1 + s) * deriv + self.const * _X * f.poly - 0.5 * s * (1 + s) * f.poly
        return GaugedPolynomial(f.nu - 1, poly)

    def apply(self, f, df, x):
        """Pointwise action on any function with a known derivative."""
        x = np.asarray(x, dtype=float)
        s = self.shift
        return (1 + s) * df(x) + (self.const - s * (1 + s) / (2 * x)) * f(x)


def k_operator(shift: float, energy: float, omega: float) -> LadderOperator:
    """Radial ladder in xi, with E held fixed: K_shift = (1+s) d + E/(4 omega) - s(1+s)/(2 xi)."""
    return LadderOperator(shift, energy / (4 * omega))


def j_operator(shift: float, params: SystemParams) -> LadderOperator:
    """Angular ladder in eta: J_shift = (1+s) d + beta/(4k sqrt(-alpha)) - s(1+s)/(2 eta)."""
    return LadderOperator(shift, params.beta / (4 * params.kval * math.sqrt(-params.alpha)))


LADDER_KINDS = ("K_plus_lambda", "K_minus_lambda", "J_plus", "J_minus")


def ladder_operator(kind: str, params: SystemParams, spec: SpectrumData, m: int, n: int) -> LadderOperator:
    lam, mu = spec.lam(n), spec.mu(n)
    if kind == "K_plus_lambda":
        return k_operator(lam, spec.energy(m, n), params.omega)
    if kind == "K_minus_lambda":
        return k_operator(-lam, spec.energy(m, n), params.omega)
    if kind == "J_plus":
        return j_operator(mu, params)
    if kind == "J_minus":
        return j_operator(-mu, params)
    raise ValueError(f"unknown ladder kind {kind!r}; expected one of {LADDER_KINDS}")


def ladder_apply(kind: str, params: SystemParams, spec: SpectrumData, m: int, n: int,
                 f: GaugedPolynomial) -> GaugedPolynomial:
    """Apply the ladder operator of level (m, n) to ``f``.

    On the basis: K_plus R_{m,lam} = -R_{m-1,lam+2}; K_minus R_{m,lam} =
    -(m+1)(m+lam) R_{m+1,lam-2}; J_plus S_n = -S_{n-1};
    J_minus S_n = -(n+1)(n+mu) S_{n+1}.
    """
    return ladder_operator(kind, params, spec, m, n)(f)


def k_power(lam: float, energy: float, omega: float, p: int, lowering: bool = True):
    """Operators of the p-fold radial composition, in order of application.

    Lowering m (raising lam by 2 per step) uses shifts lam, lam+2, ...; raising
    m uses -lam, -(lam-2), ...
    """
    if lowering:
        return [k_operator(lam + 2 * j, energy, omega) for j in range(p)]
    return [k_operator(-(lam - 2 * j), energy, omega) for j in range(p)]


def j_power(mu: float, params: SystemParams, q: int, lowering: bool = True):
    if lowering:
        return [j_operator(mu + 2 * j, params) for j in range(q)]
    return [j_operator(-(mu - 2 * j), params) for j in range(q)]


def compose(ops, f: GaugedPolynomial) -> GaugedPolynomial:
    for op in ops:
        f = op(f)
    return f


def _ratio_stats(result: GaugedPolynomial, target: GaugedPolynomial, x):
    r = result(x)
    t = target(x)
    keep = np.abs(t) > 1e-3 * np.max(np.abs(t))
    ratio = r[keep] / t[keep]
    mean = float(np.mean(ratio))
    variation = float(np.max(np.abs(ratio - mean)) / abs(mean)) if mean != 0 else float("inf")
    return mean, variation, int(keep.sum())


@dataclass
class DegeneracyDirection:
    direction: str                  # "lowering" (m-p, n-q) or "raising" (m+p, n+q)
    partner: tuple
    energy_partner: float
    radial_ratio: float
    radial_expected: float
    radial_variation: float
    angular_ratio: float
    angular_expected: float
    angular_variation: float
    product_variation: float
    samples: int

    @property
    def ok(self) -> bool:
        tol = 1e-8
        return (self.radial_variation < tol and self.angular_variation < tol
                and self.product_variation < tol
                and math.isclose(self.radial_ratio, self.radial_expected, rel_tol=tol)
                and math.isclose(self.angular_ratio, self.angular_expected, rel_tol=tol))


@dataclass
class DegeneracyReport:
    m: int
    n: int
    p: int
    q: int
    energy: float
    directions: list

    @property
    def ok(self) -> bool:
        return bool(self.directions) and all(
            d.ok and math.isclose(d.energy_partner, self.energy, rel_tol=1e-12, abs_tol=1e-12)
            for d in self.directions)


def degeneracy_map_check(params: SystemParams, spec: SpectrumData, m: int, n: int,
                         samples: int = 16) -> DegeneracyReport:
    """Verify E_{m,n} = E_{m+-p,n+-q} and that K^p, J^q map between the two states.

    Every direction whose partner is a valid state is checked; the composed
    operator images are compared pointwise with the partner wavefunctions.
    """
    p, q = params.k.p, params.k.q
    omega = params.omega
    energy = spec.energy(m, n)
    lam, mu = spec.lam(n), spec.mu(n)
    xs = np.linspace(0.3, 9.0, samples)
    found = []
    candidates = []
    if m - p >= 0 and n - q >= 0:
        candidates.append("lowering")
    if n + q <= spec.N:
        candidates.append("raising")
    if not candidates:
        raise ValueError(f"no partner state for (m, n) = ({m}, {n}) with p/q = {p}/{q}")
    for direction in candidates:
        lowering = direction == "lowering"
        m2, n2 = (m - p, n - q) if lowering else (m + p, n + q)
        r_img = compose(k_power(lam, energy, omega, p, lowering), GaugedPolynomial.laguerre(m, lam))
        s_img = compose(j_power(mu, params, q, lowering), GaugedPolynomial.laguerre(n, mu))
        r_tgt = GaugedPolynomial.laguerre(m2, spec.lam(n2))
        s_tgt = GaugedPolynomial.laguerre(n2, spec.mu(n2))
        r_ratio, r_var, used = _ratio_stats(r_img, r_tgt, xs)
        s_ratio, s_var, _ = _ratio_stats(s_img, s_tgt, xs)
        if lowering:
            r_exp, s_exp = (-1.0) ** p, (-1.0) ** q
        else:
            r_exp = math.prod(-(m + j + 1) * (m + j + lam - 2 * j) for j in range(p))
            s_exp = math.prod(-(n + j + 1) * (n + j + mu - 2 * j) for j in range(q))
        grid_x, grid_y = np.meshgrid(xs, xs, indexing="ij")
        prod_img = r_img(grid_x) * s_img(grid_y)
        prod_tgt = r_tgt(grid_x) * s_tgt(grid_y)
        keep = np.abs(prod_tgt) > 1e-3 * np.max(np.abs(prod_tgt))
        pr = prod_img[keep] / prod_tgt[keep]
        prod_var = float(np.max(np.abs(pr - pr.mean())) / abs(pr.mean()))
        found.append(DegeneracyDirection(
            direction=direction, partner=(m2, n2), energy_partner=spec.energy(m2, n2),
            radial_ratio=r_ratio, radial_expected=float(r_exp), radial_variation=r_var,
            angular_ratio=s_ratio, angular_expected=float(s_exp), angular_variation=s_var,
            product_variation=prod_var, samples=used))
    return DegeneracyReport(m=m, n=n, p=p, q=q, energy=energy, directions=found)
