import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from e11super import quantum, specfun
from e11super.model import RationalK, SystemParams
from e11super.verify import random_quantum_params

K1 = SystemParams("1", -1.0, 7.0, 1.0)
SETS = [K1, SystemParams("1/2", -1.0, 9.0, 2.0), SystemParams("3/2", -1.0, 20.0, 2.0),
        SystemParams("2", -0.5, 15.0, 1.5), SystemParams("1/3", -2.0, 5.0, 0.7)]


def test_k1_spectrum_example():
    spec = quantum.spectrum(K1)
    assert spec.N == 1 and spec.B == pytest.approx(0.5, abs=1e-12)
    assert spec.separation(0) == pytest.approx(-6.25, abs=1e-12)
    assert spec.separation(1) == pytest.approx(-0.25, abs=1e-12)
    for m in range(4):
        for n in range(2):
            assert spec.energy(m, n) == pytest.approx(4 * m - 4 * n + 7, abs=1e-12)
    assert spec.energy(0, 0) == spec.energy(1, 1) == 7.0


def test_k_three_halves_example():
    # beta/(2k sqrt(-alpha)) = 3: only n = 0 has sqrt(-A_n) > 0
    spec = quantum.spectrum(SystemParams("3/2", -1.0, 9.0, 2.0))
    assert spec.ratio == pytest.approx(3.0)
    assert spec.N == 0 and spec.B == pytest.approx(2.0)
    assert spec.separation(0) == pytest.approx(-9.0)
    assert spec.energy(0, 0) == pytest.approx(16.0)
    assert spec.lam(1) == pytest.approx(0.0)


@pytest.mark.parametrize("beta", [1.999, 2.0, 1.0])
def test_no_bound_state(beta):
    with pytest.raises(quantum.NoBoundStateError):
        quantum.spectrum(SystemParams("1", -1.0, beta, 1.0))


def test_bound_state_preconditions():
    with pytest.raises(quantum.NoBoundStateError):
        quantum.spectrum(SystemParams("1", 1.0, 7.0, 1.0))
    with pytest.raises(quantum.NoBoundStateError):
        quantum.spectrum(SystemParams("1", -1.0, -7.0, 1.0))
    with pytest.raises(ValueError):
        quantum.spectrum(K1).level(0, 2)


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_spectrum_invariants(seed):
    rng = np.random.default_rng(seed)
    params = random_quantum_params(rng)
    spec = quantum.spectrum(params, m_max=3)
    assert 0 < spec.B <= 2 + 1e-12
    assert spec.lam(spec.N) > 0 >= spec.lam(spec.N + 1) - 1e-12
    p, q = params.k.p, params.k.q
    for lv in spec.levels:
        assert lv.A_n == pytest.approx(
            -params.kval**2 * (spec.ratio - 2 * lv.n - 1) ** 2, rel=1e-12)
        assert lv.E_mn == pytest.approx(spec.energy_explicit(lv.m, lv.n), rel=1e-12)
        if lv.n + q <= spec.N:
            assert spec.energy(lv.m + p, lv.n + q) == pytest.approx(lv.E_mn, rel=1e-12)


def test_wavefunction_examples():
    spec = quantum.spectrum(K1)
    assert quantum.wavefunction_S(K1, spec, 0, 1.0) == pytest.approx(math.exp(-0.5), abs=1e-6)
    assert quantum.wavefunction_S(K1, spec, 1, 1.5) == pytest.approx(0.0, abs=1e-15)
    assert quantum.wavefunction_R(K1, 1, 2.5, 3.5) == pytest.approx(0.0, abs=1e-15)
    xi = np.linspace(0.1, 6, 7)
    assert np.allclose(quantum.wavefunction_R(K1, 0, 2.5, xi), np.exp(-xi / 2) * xi**1.25)
    assert abs(quantum.wavefunction_S(K1, spec, 0, 1e-8)) < 1e-9
    with pytest.raises(ValueError):
        quantum.wavefunction_S(K1, spec, 2, 1.0)


@pytest.mark.parametrize("m", range(5))
@pytest.mark.parametrize("lam", [0.5, 2.5, 3.7])
def test_radial_function_hypergeometric_form(m, lam):
    xi = np.linspace(0.1, 12.0, 20)
    r = quantum.wavefunction_R(K1, m, lam, xi)
    want = np.exp(-xi / 2) * xi ** (lam / 2) * special.hyp1f1(-m, 1 + lam, xi) * special.binom(m + lam, m)
    assert np.allclose(r, want, rtol=1e-10, atol=1e-12 * np.max(np.abs(want)))


@pytest.mark.parametrize("params", SETS, ids=lambda p: f"k={p.k}")
def test_schrodinger_residual_on_grid(params):
    spec = quantum.spectrum(params, m_max=3)
    grid = np.geomspace(0.05, 15.0, 20)
    xi, eta = np.meshgrid(grid, grid, indexing="ij")
    k = params.kval
    rho = xi / params.omega
    sigma = (k * eta / math.sqrt(-params.alpha)) ** (1 / k)
    for lv in spec.levels:
        assert np.max(np.abs(quantum.schrodinger_residual(params, lv, rho, sigma))) < 1e-9
        assert np.max(np.abs(quantum.radial_residual(params, lv, rho[:, 0]))) < 1e-9


def test_residual_detects_a_wrong_energy():
    spec = quantum.spectrum(K1)
    lv = spec.level(1, 0)
    wrong = quantum.QuantumLevel(lv.m, lv.n, lv.A_n, lv.E_mn + 0.5, lv.lam, lv.mu)
    assert abs(quantum.schrodinger_residual(K1, wrong, 0.7, 1.3)) == pytest.approx(0.5)


def test_residual_rejects_free_system():
    lv = quantum.spectrum(K1).level(0, 0)
    with pytest.raises(quantum.NoBoundStateError):
        quantum.schrodinger_residual(SystemParams("1", 0.0, 0.0, 1.0), lv, 1.0, 1.0)


@pytest.mark.parametrize("params", SETS, ids=lambda p: f"k={p.k}")
def test_gram_matrix(params):
    spec = quantum.spectrum(params)
    gram, err = quantum.gram_matrix_S(params, spec, return_error=True)
    assert gram.shape == (spec.N + 1, spec.N + 1)
    assert np.allclose(gram, gram.T)
    d = np.diag(gram)
    assert np.all(d > 0)
    off = np.abs(gram / np.sqrt(np.outer(d, d)) - np.eye(len(d)))
    assert off.max() < 1e-8
    # int x^(mu-1) e^-x [L_n^mu]^2 dx = Gamma(n+mu+1) / (n! mu)
    for n in range(spec.N + 1):
        mu = spec.mu(n)
        want = math.gamma(n + mu + 1) / (math.factorial(n) * mu)
        assert d[n] == pytest.approx(want, rel=1e-9)
    assert np.all(err < 1e-8 * np.sqrt(np.outer(d, d)))


def test_gram_single_state():
    params = SystemParams("3/2", -1.0, 9.0, 2.0)
    gram = quantum.gram_matrix_S(params, quantum.spectrum(params))
    assert gram.shape == (1, 1) and gram[0, 0] > 0


def test_gram_reports_nonconvergence():
    spec = quantum.spectrum(K1)
    with pytest.raises(quantum.QuadratureError):
        quantum.gram_matrix_S(K1, spec, epsabs=1e-300, epsrel=1e-300)


def test_bessel_parameter_round_trip():
    for params in SETS:
        a = quantum.bessel_parameter(params)
        assert -params.beta**2 / (4 * params.kval**2 * (a - 2) ** 2) == pytest.approx(params.alpha)


@pytest.mark.parametrize("params", SETS, ids=lambda p: f"k={p.k}")
def test_bessel_representation(params):
    spec = quantum.spectrum(params)
    s = np.array([0.2, 0.5, 1.0, 2.3, 5.0])
    for n in range(spec.N + 1):
        assert np.max(quantum.bessel_representation_check(params, spec, n, s)) < 1e-9


def test_bessel_representation_k1_n1():
    spec = quantum.spectrum(K1)
    gap = quantum.bessel_representation_check(K1, spec, 1, np.array([0.2, 1.0, 5.0]))
    assert np.max(gap) < 1e-9
    assert quantum.bessel_representation_check(K1, spec, 0, 3.3) < 1e-15


@pytest.mark.parametrize("params", SETS, ids=lambda p: f"k={p.k}")
def test_bessel_factor_satisfies_its_ode(params):
    spec = quantum.spectrum(params)
    a = quantum.bessel_parameter(params)
    s = np.array([0.25, 1.0, 4.0])
    for n in range(spec.N + 1):
        y = quantum.angular_bessel_factor(spec, n)
        res = s**2 * y.deriv(2)(s) + (a * s + 1) * y.deriv()(s) - n * (n + a - 1) * y(s)
        assert np.all(np.abs(res) < 1e-9 * np.maximum(1, np.abs(y(s))))
        assert np.allclose(y.coef, specfun.bessel_poly_coefficients(n, a, 1.0), rtol=1e-12)


# -- ladder operators ---------------------------------------------------------

X = np.array([0.5, 1.0, 2.0])


def _lag_fn(n, a, x, power):
    return np.exp(-x / 2) * x**power * np.asarray(specfun.laguerre(n, a, x))


@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_lowering_identity(n, a):
    op = quantum.LadderOperator(a, (2 * n + 1 + a) / 2)
    got = op(quantum.GaugedPolynomial.laguerre(n, a))(X)
    want = -_lag_fn(n - 1, a + 2, X, a / 2 + 1)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("n", range(5))
@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_raising_identity(n, a):
    op = quantum.LadderOperator(-a, (2 * n + 1 + a) / 2)
    got = op(quantum.GaugedPolynomial.laguerre(n, a))(X)
    want = -(n + 1) * (n + a) * _lag_fn(n + 1, a - 2, X, a / 2 - 1)
    assert np.allclose(got, want, rtol=1e-10, atol=1e-10)


def test_lowering_ground_state_vanishes():
    op = quantum.LadderOperator(1.5, (1 + 1.5) / 2)
    f = op(quantum.GaugedPolynomial.laguerre(0, 1.5))
    assert np.allclose(f(np.linspace(0.1, 5, 9)), 0.0, atol=1e-15)


def test_pointwise_apply_matches_polynomial_action():
    op = quantum.LadderOperator(2.5, 3.1)
    g = quantum.GaugedPolynomial.laguerre(3, 2.5)
    x = np.linspace(0.2, 7, 11)
    assert np.allclose(op.apply(g, g.derivative(), x), op(g)(x), rtol=1e-12)


def test_ladder_apply_kinds():
    spec = quantum.spectrum(K1, m_max=3)
    m, n = 1, 0
    lam, mu = spec.lam(n), spec.mu(n)
    R = quantum.GaugedPolynomial.laguerre(m, lam)
    S = quantum.GaugedPolynomial.laguerre(n, mu)
    x = np.linspace(0.3, 8, 10)
    down = quantum.ladder_apply("K_plus_lambda", K1, spec, m, n, R)(x)
    assert np.allclose(down, -quantum.laguerre_function(m - 1, lam + 2, x), rtol=1e-10)
    up = quantum.ladder_apply("K_minus_lambda", K1, spec, m, n, R)(x)
    assert np.allclose(up, -(m + 1) * (m + lam) * quantum.laguerre_function(m + 1, lam - 2, x),
                       rtol=1e-10)
    j_up = quantum.ladder_apply("J_minus", K1, spec, m, n, S)(x)
    assert np.allclose(j_up, -(n + 1) * (n + mu) * quantum.laguerre_function(n + 1, mu - 2, x),
                       rtol=1e-10)
    spec_n1 = 1
    S1 = quantum.GaugedPolynomial.laguerre(spec_n1, spec.mu(spec_n1))
    j_down = quantum.ladder_apply("J_plus", K1, spec, m, spec_n1, S1)(x)
    assert np.allclose(j_down, -quantum.laguerre_function(0, spec.mu(0), x), rtol=1e-10)
    with pytest.raises(ValueError):
        quantum.ladder_apply("K_sideways", K1, spec, m, n, R)


def test_single_step_keeps_energy():
    spec = quantum.spectrum(K1, m_max=3)
    omega = K1.omega
    for m in range(1, 4):
        for n in range(spec.N + 1):
            lam = spec.lam(n)
            energy = 2 * omega * (2 * m + 1 + lam)
            # lowering lands on (m-1, lam+2), raising on (m+1, lam-2)
            assert 2 * omega * (2 * (m - 1) + 1 + lam + 2) == pytest.approx(energy)
            assert 2 * omega * (2 * (m + 1) + 1 + lam - 2) == pytest.approx(energy)


def test_degeneracy_k1():
    spec = quantum.spectrum(K1, m_max=3)
    rep = quantum.degeneracy_map_check(K1, spec, 1, 1)
    assert rep.ok and rep.energy == 7.0
    (d,) = rep.directions
    assert d.direction == "lowering" and d.partner == (0, 0)
    assert d.radial_ratio == pytest.approx(-1.0) and d.angular_ratio == pytest.approx(-1.0)
    assert d.samples >= 10
    rep = quantum.degeneracy_map_check(K1, spec, 0, 0)
    (d,) = rep.directions
    assert rep.ok and d.direction == "raising" and d.partner == (1, 1)
    assert d.radial_ratio == pytest.approx(-(0 + 1) * (0 + 2.5))
    assert d.angular_ratio == pytest.approx(-(0 + 1) * (0 + 2.5))
    assert d.product_variation < 1e-8


def test_degeneracy_three_halves():
    params = SystemParams("3/2", -1.0, 20.0, 2.0)
    spec = quantum.spectrum(params, m_max=4)
    assert spec.energy(0, 0) - spec.energy(3, 2) == pytest.approx(0.0, abs=1e-12)
    for m in range(5):
        for n in range(spec.N + 1):
            try:
                rep = quantum.degeneracy_map_check(params, spec, m, n)
            except ValueError:
                continue
            assert rep.ok
            for d in rep.directions:
                assert d.radial_variation < 1e-8 and d.angular_variation < 1e-8


def test_degeneracy_partner_out_of_range():
    spec = quantum.spectrum(K1, m_max=3)
    with pytest.raises(ValueError):
        quantum.degeneracy_map_check(K1, spec, 0, 1)


def test_random_rational_degeneracies():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(30):
        params = random_quantum_params(rng)
        spec = quantum.spectrum(params, m_max=2)
        q = params.k.q
        if q > spec.N:
            continue
        rep = quantum.degeneracy_map_check(params, spec, 0, 0)
        assert rep.ok
        checked += 1
    assert checked > 5
