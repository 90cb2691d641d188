"""Parameters, charts and Hamiltonian of the E(1,1) deformed-oscillator family.

Two charts are used:

* Cartesian ``(u, v, p_u, p_v)`` with kinetic energy ``p_u**2 - p_v**2``;
* modified pseudo-polar ``(rho, sigma, p_rho, p_sigma)`` with
  ``rho = u**2 - v**2`` and ``sigma = (u + v)/(u - v)``.

The family separates in the second chart:

    H = 4 rho p_rho**2 - 4 sigma**2/rho p_sigma**2 + omega**2 rho
        + (alpha sigma**(2k) + beta sigma**k)/rho
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np


class ChartError(ValueError):
    """A point lies outside the domain of the requested chart."""


class RegimeError(ValueError):
    """Parameters or conserved quantities violate a bounded-regime inequality."""


class Chart(enum.Enum):
    CARTESIAN = "cartesian"
    MODIFIED_POLAR = "modified_polar"


@dataclass(frozen=True)
class RationalK:
    """k = p/q in lowest terms."""

    p: int
    q: int

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError(f"k = {self.p}/{self.q} must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise ValueError(f"k = {self.p}/{self.q} is not in lowest terms")

    @classmethod
    def parse(cls, text) -> "RationalK":
        """Accept ``"p/q"``, a bare integer, a Fraction or an int.

        Decimal strings are rejected so that Chebyshev degrees stay exact.
        """
        if isinstance(text, RationalK):
            return text
        if isinstance(text, (int, Fraction)):
            frac = Fraction(text)
        else:
            s = str(text).strip()
            if "." in s or "e" in s.lower():
                raise ValueError(f"k must be given as p/q or an integer, got {s!r}")
            frac = Fraction(s)
        return cls(frac.numerator, frac.denominator)

    @property
    def value(self) -> float:
        return self.p / self.q

    def __float__(self):
        return self.value

    def __str__(self):
        return f"{self.p}" if self.q == 1 else f"{self.p}/{self.q}"


@dataclass(frozen=True)
class SystemParams:
    k: RationalK
    alpha: float
    beta: float
    omega: float

    def __post_init__(self):
        if not isinstance(self.k, RationalK):
            object.__setattr__(self, "k", RationalK.parse(self.k))
        if not self.omega > 0:
            raise RegimeError(f"omega must be positive, got {self.omega}")

    @property
    def kval(self) -> float:
        return self.k.value

    @property
    def free(self) -> bool:
        """alpha = beta = 0: the plain pseudo-Euclidean oscillator."""
        return self.alpha == 0 and self.beta == 0

    @property
    def bounded_couplings(self) -> bool:
        return self.alpha < 0 and self.beta > 0


@dataclass(frozen=True)
class PhasePoint:
    """Position and conjugate momentum in a tagged chart.

    ``q1, q2, p1, p2`` are ``(u, v, p_u, p_v)`` in the Cartesian chart and
    ``(rho, sigma, p_rho, p_sigma)`` in the modified polar chart.
    """

    chart: Chart
    q1: float
    q2: float
    p1: float
    p2: float

    @classmethod
    def cartesian(cls, u, v, pu, pv) -> "PhasePoint":
        return cls(Chart.CARTESIAN, float(u), float(v), float(pu), float(pv))

    @classmethod
    def polar(cls, rho, sigma, prho, psigma) -> "PhasePoint":
        return cls(Chart.MODIFIED_POLAR, float(rho), float(sigma), float(prho), float(psigma))

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2])

    def with_state(self, y) -> "PhasePoint":
        return replace(self, q1=float(y[0]), q2=float(y[1]), p1=float(y[2]), p2=float(y[3]))


# -- chart maps on raw arrays (complex-safe, no domain checks) ---------------

def polar_from_cartesian(u, v, pu, pv):
    d = u - v
    rho = u * u - v * v
    sigma = (u + v) / d
    # p_u = 2u p_rho - 2v/d^2 p_sigma,  p_v = -2v p_rho + 2u/d^2 p_sigma
    prho = (u * pu + v * pv) / (2 * rho)
    psigma = d * (v * pu + u * pv) / (2 * (u + v))
    return rho, sigma, prho, psigma


def cartesian_from_polar(rho, sigma, prho, psigma):
    root = np.sqrt(rho / sigma)
    u = 0.5 * (sigma + 1) * root
    v = 0.5 * (sigma - 1) * root
    d2 = rho / sigma
    pu = 2 * u * prho - 2 * v / d2 * psigma
    pv = -2 * v * prho + 2 * u / d2 * psigma
    return u, v, pu, pv


def to_modified_polar(point: PhasePoint) -> PhasePoint:
    if point.chart is Chart.MODIFIED_POLAR:
        return point
    u, v, pu, pv = point.q1, point.q2, point.p1, point.p2
    if u == v:
        raise ChartError("u = v lies on the removed line of the modified polar chart")
    if u == -v:
        # sigma = 0: the momentum solve degenerates
        raise ChartError("u = -v gives sigma = 0, outside the principal sheet")
    return PhasePoint.polar(*polar_from_cartesian(u, v, pu, pv))


def to_cartesian(point: PhasePoint) -> PhasePoint:
    if point.chart is Chart.CARTESIAN:
        return point
    rho, sigma = point.q1, point.q2
    if not (rho > 0 and sigma > 0):
        raise ChartError(f"to_cartesian needs rho > 0 and sigma > 0, got rho={rho}, sigma={sigma}")
    return PhasePoint.cartesian(*cartesian_from_polar(rho, sigma, point.p1, point.p2))


# -- Hamiltonian --------------------------------------------------------------

def sigma_powers(params: SystemParams, sigma):
    """(sigma**k, sigma**(2k)) on the principal sheet sigma > 0."""
    sk = np.exp(params.kval * np.log(sigma))
    return sk, sk * sk


def angular_potential(params: SystemParams, sigma):
    """alpha sigma^(2k) + beta sigma^k."""
    if params.free:
        return np.zeros_like(np.asarray(sigma, dtype=float)) + 0.0
    sk, s2k = sigma_powers(params, sigma)
    return params.alpha * s2k + params.beta * sk


def hamiltonian_polar(params: SystemParams, rho, sigma, prho, psigma):
    w2 = params.omega**2
    return (4 * rho * prho**2 - 4 * sigma**2 / rho * psigma**2 + w2 * rho
            + angular_potential(params, sigma) / rho)


def hamiltonian_cartesian(params: SystemParams, u, v, pu, pv):
    w2 = params.omega**2
    h = pu**2 - pv**2 + w2 * (u**2 - v**2)
    if params.free:
        return h
    rho = u**2 - v**2
    sigma = (u + v) / (u - v)
    return h + angular_potential(params, sigma) / rho


def _check_domain(params: SystemParams, point: PhasePoint):
    if point.chart is Chart.MODIFIED_POLAR:
        if params.free:
            if point.q1 == 0 or point.q2 == 0:
                raise ChartError("rho and sigma must be nonzero")
        elif not (point.q1 > 0 and point.q2 > 0):
            raise ChartError(
                f"with alpha or beta nonzero the chart is restricted to rho, sigma > 0 "
                f"(got rho={point.q1}, sigma={point.q2})")
    elif not params.free:
        u, v = point.q1, point.q2
        if u == v:
            raise ChartError("u = v is a coordinate singularity")
        if not (u * u - v * v > 0 and (u + v) / (u - v) > 0):
            raise ChartError("point lies outside the rho, sigma > 0 sheet")


def hamiltonian(params: SystemParams, point: PhasePoint) -> float:
    _check_domain(params, point)
    if point.chart is Chart.MODIFIED_POLAR:
        return float(hamiltonian_polar(params, point.q1, point.q2, point.p1, point.p2))
    return float(hamiltonian_cartesian(params, point.q1, point.q2, point.p1, point.p2))


def separation_constant(params: SystemParams, point: PhasePoint) -> float:
    """Phase-space separation constant 4 sigma^2 p_sigma^2 - alpha sigma^2k - beta sigma^k."""
    p = to_modified_polar(point)
    return float(4 * p.q2**2 * p.p2**2 - angular_potential(params, p.q2))


# -- maps between families ---------------------------------------------------

@dataclass(frozen=True)
class DeformedCoulombParams:
    """Data of the deformed-Coulomb partner obtained by coupling-constant metamorphosis."""

    coulomb: float
    alpha: float
    beta: float
    k: RationalK | float
    substitution: tuple[str, str] = ("rho = r**2/2", "phi = 2*theta")

    @staticmethod
    def coordinates(r, theta):
        """New polar coordinates (rho, phi) from the oscillator's (r, theta)."""
        return 0.5 * np.asarray(r) ** 2, 2 * np.asarray(theta)


def ccm_map(params: SystemParams, energy: float) -> DeformedCoulombParams:
    """Trade the oscillator energy for a Coulomb strength: K = -E/2, couplings / 4."""
    return DeformedCoulombParams(coulomb=-energy / 2, alpha=params.alpha / 4,
                                 beta=params.beta / 4, k=params.k)


PSI_CONSTANT = "constant-one"
PSI_INVERSE_SQUARE = "inverse-square"


@dataclass(frozen=True)
class SeparableSpec:
    """H = p1^2 + f1(q1) + psi(q1) (p2^2 + f2(q2)), psi in {1, 1/q1^2}."""

    f1: Callable[[float], float]
    f2: Callable[[float], float]
    psi: str = PSI_CONSTANT
    k: float = field(default=1.0, compare=False)

    def __post_init__(self):
        if self.psi not in (PSI_CONSTANT, PSI_INVERSE_SQUARE):
            raise ValueError(f"psi must be {PSI_CONSTANT!r} or {PSI_INVERSE_SQUARE!r}")

    def psi_value(self, q1):
        return 1.0 if self.psi == PSI_CONSTANT else 1.0 / np.asarray(q1) ** 2

    def potential(self, q1, q2):
        return self.f1(q1) + self.psi_value(q1) * self.f2(q2)


def embed_parameter(spec: SeparableSpec, k: float) -> SeparableSpec:
    """Return the family member with second potential q2 -> k^2 f2(k q2)."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k}")
    if k == 1:
        return spec
    f2 = spec.f2
    return SeparableSpec(f1=spec.f1, f2=lambda q2: k * k * f2(k * q2), psi=spec.psi,
                         k=spec.k * k)
