from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cornerem.polycore import (
    ContractViolation,
    GaussianRational,
    HomoPoly,
    VecHomoPoly,
    curl,
    curl_defects,
    divergence,
    divergence_defects,
    format_poly,
    format_vec,
    gradient,
    harmonic_defects,
    is_curl_free,
    is_divergence_free,
    is_harmonic,
    lowest_order_part,
    monomials,
    parse_poly,
    parse_vec,
)

small = st.integers(-6, 6)
gauss = st.builds(GaussianRational, small, small)


@st.composite
def homo(draw, degree=None):
    N = draw(st.integers(0, 4)) if degree is None else degree
    coeffs = {a: draw(gauss) for a in monomials(N) if draw(st.booleans())}
    return HomoPoly(N, coeffs)


@st.composite
def vec(draw, degree=None):
    N = draw(st.integers(1, 4)) if degree is None else degree
    return VecHomoPoly(tuple(draw(homo(N)) for _ in range(3)), N)


@pytest.mark.parametrize("N, count", [(0, 1), (1, 3), (2, 6), (3, 10), (6, 28)])
def test_monomial_count(N, count):
    assert len(monomials(N)) == count
    assert all(sum(a) == N for a in monomials(N))


@given(gauss, gauss, gauss)
def test_gaussian_rational_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a * a.conjugate()).im == 0
    assert (a * a.conjugate()).re == a.abs2()


def test_gaussian_rational_complex_conversion():
    z = GaussianRational(Fraction(1, 2), Fraction(-3, 4))
    assert complex(z) == complex(0.5, -0.75)


@given(homo(), homo())
def test_product_rule(p, q):
    for ax in (1, 2, 3):
        lhs = (p * q).differentiate(ax)
        rhs = p.differentiate(ax) * q + p * q.differentiate(ax)
        assert lhs == rhs


@given(homo())
def test_euler_identity(p):
    # x . grad p = deg(p) p for homogeneous p
    x = VecHomoPoly.identity()
    if p.degree == 0:
        return
    assert gradient(p).dot(x) == p.scale(p.degree)


@given(vec())
def test_div_curl_vanishes(P):
    assert divergence(curl(P)).is_zero()


@given(homo())
def test_curl_grad_vanishes(p):
    if p.degree >= 1:
        assert curl(gradient(p)).is_zero()


@given(vec())
def test_predicates_operator_and_coefficient_routes_agree(P):
    assert is_divergence_free(P, "operator") == is_divergence_free(P, "coefficients")
    assert is_curl_free(P, "operator") == is_curl_free(P, "coefficients")
    assert is_harmonic(P, "operator") == is_harmonic(P, "coefficients")


def test_known_fields():
    rot = VecHomoPoly.from_coeffs([{(0, 1, 0): 1}, {(1, 0, 0): -1}, {}], 1)
    assert is_divergence_free(rot) and not is_curl_free(rot) and is_harmonic(rot)
    x = VecHomoPoly.identity()
    assert is_curl_free(x) and not is_divergence_free(x)
    assert divergence_defects(x) == [(0, 0, 0)]
    sym = VecHomoPoly.from_coeffs([{(0, 1, 1): 1}, {(1, 0, 1): 1}, {(1, 1, 0): 1}], 2)
    assert curl_defects(sym) == [] and harmonic_defects(sym) == []


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        is_harmonic(VecHomoPoly.identity(), "bogus")


@given(homo())
def test_poly_text_round_trip(p):
    assert parse_poly(format_poly(p)) == p


@given(vec())
def test_vec_text_round_trip(P):
    assert parse_vec(format_vec(P)) == P


@pytest.mark.parametrize("bad", ["degree 2\n1 1 : 1 + 0 i\n", "1 0 0 : 1 + 0 i\n0 2 0 : 1 + 0 i\n"])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        parse_poly(bad)


@given(homo(), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_evaluate_matches_coefficients(p, x):
    pt = np.array(x)
    expected = sum(complex(c) * pt[0] ** a[0] * pt[1] ** a[1] * pt[2] ** a[2] for a, c in p.items())
    assert p.evaluate(pt[None, :])[0] == pytest.approx(expected, abs=1e-9)


def test_lowest_order_part_zeroing_convention():
    # component 1 starts at degree 1, component 2 at degree 2: only component 1 survives
    taylor = {(1, 0, 0): (1, 0, 0), (0, 1, 1): (0, 5, 0), (3, 0, 0): (2, 2, 2)}
    lp = lowest_order_part(taylor)
    assert lp.N == 1
    assert lp.component_orders == (1, 2, 3)
    assert lp.part[2].is_zero() and lp.part[3].is_zero()
    assert lp.part[1] == HomoPoly(1, {(1, 0, 0): 1})


def test_lowest_order_part_tolerance_and_gray_zone():
    taylor = {(0, 0, 0): (1e-14, 0, 0), (1, 0, 0): (0, 1, 0)}
    assert lowest_order_part(taylor).N == 0
    lp = lowest_order_part(taylor, tol=1e-12)
    assert lp.N == 1 and not lp.ambiguous
    gray = lowest_order_part({(0, 0, 0): (2e-12, 0, 0), (1, 0, 0): (0, 1, 0)}, tol=1e-12)
    assert gray.ambiguous


@pytest.mark.parametrize("taylor", [{}, {(0, 0, 0): (0, 0, 0)}])
def test_lowest_order_part_of_zero_raises(taylor):
    with pytest.raises(ValueError):
        lowest_order_part(taylor)


def test_contract_violation_is_value_error():
    assert issubclass(ContractViolation, ValueError)
