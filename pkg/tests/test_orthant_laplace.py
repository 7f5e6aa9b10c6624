from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from cornerem.orthant_laplace import (
    SIGMA,
    alpha_factorial,
    divides_sigma,
    divisibility_by_pattern,
    evaluate_rho,
    in_cone,
    laplace_exact,
    laplace_numeric,
    laplace_poly,
    laplace_via_I,
    orthant_quadrature,
    pattern_holds,
    sample_cone,
)
from cornerem.polycore import ContractViolation, HomoPoly, VecHomoPoly
from cornerem.sampling import constrained_basis, random_combination

V = VecHomoPoly.from_coeffs
ROT = V([{(0, 1, 0): 1}, {(1, 0, 0): -1}, {}], 1)  # (x2, -x1, 0)
DIAG = V([{(1, 0, 0): 1}, {(0, 1, 0): -1}, {}], 1)  # (x1, -x2, 0)
SYM = V([{(0, 1, 1): 1}, {(1, 0, 1): 1}, {(1, 1, 0): 1}], 2)  # (x2x3, x1x3, x1x2)


@pytest.mark.parametrize("alpha, value", [((0, 0, 0), 1), ((2, 1, 0), 2), ((3, 2, 1), 12)])
def test_alpha_factorial_is_product(alpha, value):
    assert alpha_factorial(alpha) == value


def test_canonical_fixtures():
    assert laplace_poly(DIAG).is_zero()
    assert laplace_poly(SYM) == SIGMA
    ok, C = divides_sigma(laplace_poly(SYM))
    assert ok and C == HomoPoly.constant(1)
    q = laplace_poly(ROT)
    assert q == HomoPoly(3, {(0, 2, 1): 1, (2, 0, 1): -1})
    assert divides_sigma(q) == (False, None)


def test_laplace_poly_rejects_divergent_input():
    with pytest.raises(ContractViolation):
        laplace_poly(VecHomoPoly.identity())


def _sympy_oracle(P: VecHomoPoly):
    """zeta . (orthant transform of P) as a numpy callable, by direct symbolic integration."""
    x = sympy.symbols("x1:4", positive=True)
    z = sympy.symbols("z1:4", positive=True)
    total = 0
    for j in range(3):
        for a, c in P.components[j].coeffs.items():
            mono = sympy.Integer(1)
            for i in range(3):
                mono *= sympy.integrate(x[i] ** a[i] * sympy.exp(-z[i] * x[i]), (x[i], 0, sympy.oo))
            coef = sympy.Rational(c.re.numerator, c.re.denominator) + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)
            total += z[j] * coef * mono
    return sympy.lambdify(z, total, "numpy")


@pytest.mark.parametrize("N", [1, 2, 3])
def test_rho_form_matches_direct_integration_on_variety(N, rng):
    P = random_combination(N, constrained_basis(N), rng)
    f = _sympy_oracle(P)
    for _ in range(3):
        zeta = sample_cone(rng)
        assert laplace_via_I(P, zeta) == pytest.approx(complex(f(*zeta)), rel=1e-10, abs=1e-12)


def test_closed_form_against_separable_quadrature():
    # zeta = (1, 2, 3), E0 = (1, 1, 1), P = (x2 x3, x1^2, -x3^2 / 2); hand value 37/108
    P = V([{(0, 1, 1): 1}, {(2, 0, 0): 1}, {(0, 0, 2): Fraction(-1, 2)}], 2)
    zeta = np.array([1.0, 2.0, 3.0])

    def one(power, z):
        return quad(lambda t: t**power * np.exp(-z * t), 0, np.inf)[0]

    expected = (
        one(0, 1) * one(1, 2) * one(1, 3) + one(2, 1) * one(0, 2) * one(0, 3) - 0.5 * one(0, 1) * one(0, 2) * one(2, 3)
    )
    assert expected == pytest.approx(37 / 108, rel=1e-10)
    assert laplace_exact(P, [1, 1, 1], zeta) == pytest.approx(37 / 108, rel=1e-14)


def test_closed_form_needs_positive_real_parts():
    with pytest.raises(ValueError):
        laplace_exact(ROT, [1, 0, 0], [1.0, -1.0, 1.0])


@pytest.mark.parametrize("region", ["ball", "cube"])
@pytest.mark.parametrize("N", [1, 2, 3])
def test_quadrature_matches_closed_form(region, N, rng):
    P = random_combination(N, constrained_basis(N), rng)
    zeta = sample_cone(rng)
    E0 = zeta / np.linalg.norm(zeta)
    exact = laplace_exact(P, E0, zeta)
    R, n = (400.0, 24) if region == "ball" else (150.0, 16)
    num = laplace_numeric(P, E0, zeta, R=R, region=region, n=n)
    X, W = orthant_quadrature(zeta, R, region, n)
    scale = float(np.sum(np.abs(W * (P.evaluate(X) @ E0))))
    assert abs(num - exact) <= 1e-9 * scale


def test_quadrature_weights_integrate_exponential():
    zeta = np.array([1.0 + 0.5j, 2.0, 0.5 - 0.2j])
    X, W = orthant_quadrature(zeta, 200.0, "cube", 20)
    assert np.sum(W) == pytest.approx(1 / np.prod(zeta), rel=1e-12)
    X, W = orthant_quadrature(zeta, 200.0, "ball", 24)
    assert np.sum(W) == pytest.approx(1 / np.prod(zeta), rel=1e-10)


def test_numeric_route_checks_the_cone():
    with pytest.raises(ValueError):
        laplace_numeric(ROT, [1, 0, 0], [1.0, 1.0, 1.0], R=10.0)


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 0.4))
def test_sample_cone_lands_in_cone(seed, c):
    z = sample_cone(np.random.default_rng(seed), c=c)
    assert in_cone(z, c)
    assert abs(np.sum(z * z)) < 1e-12


def test_cone_constant_range():
    with pytest.raises(ValueError):
        sample_cone(np.random.default_rng(0), c=0.5)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_pattern_prediction_matches_exact_divisibility(N, rng):
    for pattern in (False, True):
        basis = constrained_basis(N, curl_free=N % 2 == 0, pattern=pattern)
        for _ in range(4):
            P = random_combination(N, basis, rng)
            if P.is_zero():
                continue
            assert divisibility_by_pattern(P) == divides_sigma(laplace_poly(P))[0]


def test_even_degree_needs_curl_free():
    P = V([{(0, 1, 1): 1}, {(1, 0, 1): 2}, {(1, 1, 0): 3}], 2)
    assert pattern_holds(P)
    with pytest.raises(ContractViolation):
        divisibility_by_pattern(P)
    assert not divides_sigma(laplace_poly(P))[0]


def test_evaluate_rho_vectorised():
    rho = np.array([[1.0, 2.0, 3.0], [0.5, 0.5, 0.5]])
    np.testing.assert_allclose(evaluate_rho(SIGMA, rho), [4 * 9 + 9 + 4, 3 * 0.0625])


@given(st.integers(0, 2**32 - 1))
def test_divides_sigma_recovers_quotient(seed):
    rng = np.random.default_rng(seed)
    C = HomoPoly(2, {a: int(rng.integers(-3, 4)) for a in [(2, 0, 0), (0, 1, 1), (1, 0, 1)]})
    ok, Q = divides_sigma(SIGMA * C)
    assert ok and Q == C
