import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from e11super import invariants
from e11super.model import (PhasePoint, RationalK, RegimeError, SystemParams, hamiltonian,
                            hamiltonian_polar, separation_constant, to_cartesian)
from e11super.verify import bracket_ratio, random_bounded_point, random_params

FIG1 = SystemParams("1", -2.0, 6.0, 3.0)


def test_phase_invariants_worked_example():
    inv = invariants.phase_invariants(FIG1, PhasePoint.polar(1, 1, 0, 0))
    assert inv.A_phase == pytest.approx(-4.0)
    assert inv.H == pytest.approx(13.0)
    assert inv.D1 == pytest.approx(25.0)
    assert inv.D2 == pytest.approx(4.0)
    assert inv.Z == pytest.approx(1.0)
    assert inv.W == pytest.approx(-1.0)
    assert inv.sqrt_term == 0.0
    assert invariants.extra_integral(FIG1, PhasePoint.polar(1, 1, 0, 0)) == pytest.approx(-10.0)


def test_sqrt_term_vanishes_with_either_momentum():
    for pt in (PhasePoint.polar(1.2, 0.8, 0.0, 0.3), PhasePoint.polar(1.2, 0.8, 0.4, 0.0)):
        assert invariants.phase_invariants(FIG1, pt).sqrt_term == 0.0


def test_p_equals_q_equals_one_reduction():
    pt = PhasePoint.polar(1.2, 0.8, 0.0, 0.3)
    inv = invariants.phase_invariants(FIG1, pt)
    want = np.sqrt(inv.D1) * np.sqrt(inv.D2) * inv.W * inv.Z
    assert invariants.extra_integral(FIG1, pt) == pytest.approx(want)


def test_regime_errors():
    # with alpha < 0, D2 >= 0 automatically; alpha > 0 and A > 0 break it
    with pytest.raises(RegimeError, match="D2"):
        invariants.phase_invariants(SystemParams("1", 2.0, 1.0, 3.0), PhasePoint.polar(1.0, 1.0, 0.0, 3.0))
    # D1 = (4 rho p_rho^2 + omega^2 rho + A/rho)^2 - 16 p_rho^2 A is never negative for rho > 0


@given(seed=st.integers(0, 2**32 - 1), pq=st.sampled_from([(1, 1), (2, 1), (1, 2), (3, 2), (1, 3)]))
@settings(max_examples=60, deadline=None)
def test_sqrt_term_identity(seed, pq):
    rng = np.random.default_rng(seed)
    params = random_params(rng, RationalK(*pq))
    inv = invariants.phase_invariants(params, random_bounded_point(rng, params))
    rhs = (1 - inv.Z**2) * (1 - inv.W**2)
    assert inv.sqrt_term**2 == pytest.approx(rhs, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("p,q", [(p, q) for p, q in itertools.product(range(1, 5), repeat=2)
                                 if np.gcd(p, q) == 1])
def test_recurrence_and_binomial_forms_agree(p, q):
    rng = np.random.default_rng(100 * p + q)
    params = random_params(rng, RationalK(p, q))
    for _ in range(20):
        pt = random_bounded_point(rng, params)
        a = invariants.extra_integral(params, pt)
        b = invariants.extra_integral_expanded(params, pt)
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_chart_independence_of_extra_integral():
    params = SystemParams("3/2", -1.0, 3.0, 4.0)
    rng = np.random.default_rng(2)
    for _ in range(10):
        pt = random_bounded_point(rng, params)
        a = invariants.extra_integral(params, pt)
        assert invariants.extra_integral(params, to_cartesian(pt)) == pytest.approx(a, rel=1e-9)


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (1, 2), (3, 2), (1, 3)])
def test_extra_integral_is_polynomial_in_momenta(p, q):
    params = SystemParams(RationalK(p, q), -1.0, 5.0, 1.0)
    rho, sigma = 1.1, 0.9
    deg = 2 * p + 2 * q
    side = np.linspace(-0.45, 0.45, deg + 2)
    pr, ps = (g.ravel() for g in np.meshgrid(side, side, indexing="ij"))
    values = invariants.extra_integral_arrays(params, rho, sigma, pr, ps)
    assert np.all(np.isfinite(values))
    exps = [(i, j) for i in range(deg + 1) for j in range(deg + 1 - i)]
    design = np.column_stack([pr**i * ps**j for i, j in exps])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    resid = np.max(np.abs(design @ coef - values))
    assert resid < 1e-8 * np.max(np.abs(values))
    # matching against the square-root free expression confirms the fit is not an artefact
    assert np.allclose(values, invariants.extra_integral_expanded_arrays(params, rho, sigma, pr, ps),
                       rtol=1e-9, atol=1e-9 * np.max(np.abs(values)))


def test_poisson_bracket_basics():
    pt = PhasePoint.polar(1.3, 0.8, 0.2, -0.1)
    rho = lambda x: x.q1
    prho = lambda x: x.p1
    h = lambda x: hamiltonian(FIG1, x)
    assert invariants.poisson_bracket(rho, prho, pt) == pytest.approx(1.0, abs=1e-10)
    assert invariants.poisson_bracket(prho, rho, pt) == pytest.approx(-1.0, abs=1e-10)
    assert abs(invariants.poisson_bracket(h, h, pt)) < 1e-12


def test_poisson_bracket_flags_a_non_integral():
    pt = PhasePoint.polar(1.3, 0.8, 0.2, -0.1)
    h = lambda x: hamiltonian(FIG1, x)
    assert bracket_ratio(lambda x: x.q1, h, pt) > 1e-2


@pytest.mark.parametrize("k", ["1", "2", "1/2", "3/2"])
def test_extra_integral_commutes_with_hamiltonian(k):
    rng = np.random.default_rng(7)
    params = random_params(rng, RationalK.parse(k))
    h = lambda x: float(hamiltonian_polar(params, *x.as_array()))
    ell = lambda x: invariants.extra_integral(params, x)
    sep = lambda x: separation_constant(params, x)
    for _ in range(100):
        pt = random_bounded_point(rng, params)
        assert bracket_ratio(ell, h, pt) < 1e-5
        assert bracket_ratio(sep, h, pt) < 1e-5


@pytest.mark.parametrize("p,q", [(4, 1), (1, 4), (4, 3), (3, 4)])
def test_higher_degree_integrals_commute(p, q):
    rng = np.random.default_rng(p * 10 + q)
    params = random_params(rng, RationalK(p, q))
    h = lambda x: float(hamiltonian_polar(params, *x.as_array()))
    ell = lambda x: invariants.extra_integral_expanded(params, x)
    for _ in range(20):
        assert bracket_ratio(ell, h, random_bounded_point(rng, params)) < 1e-5


def test_bracket_in_cartesian_chart():
    params = SystemParams("2", -1.5, 4.0, 1.2)
    rng = np.random.default_rng(9)
    h = lambda x: hamiltonian(params, x)
    ell = lambda x: invariants.extra_integral(params, x)
    for _ in range(10):
        pt = to_cartesian(random_bounded_point(rng, params))
        assert bracket_ratio(ell, h, pt) < 1e-5


def test_gradient_reports_stencil_failure():
    pt = PhasePoint.polar(1.0, 1.0, 0.0, 0.0)
    with pytest.raises(FloatingPointError):
        invariants.gradient(lambda x: float("nan"), pt)
