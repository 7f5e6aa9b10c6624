import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import sph_harm_y

from cornerem.harmonics import NormTag, legendre_coeffs, solid_Y, sphere_inner, vector_I, vector_N, vector_T
from cornerem.polycore import curl, divergence, is_curl_free, is_divergence_free, is_harmonic

LM = [(l, m) for l in range(0, 5) for m in range(-l, l + 1)]


@pytest.mark.parametrize("l", range(0, 8))
def test_legendre_coefficients_match_numpy(l):
    poly = np.polynomial.legendre.leg2poly([0] * l + [1])  # ascending powers
    ours = legendre_coeffs(l)  # ours[k] multiplies t^(l-k)
    for k, c in enumerate(ours):
        assert float(c) == pytest.approx(poly[l - k], abs=1e-12)


@pytest.mark.parametrize("l, m", LM)
def test_solid_Y_against_scipy(l, m):
    # our convention omits the Condon-Shortley phase for m > 0
    rng = np.random.default_rng(l * 10 + m + 50)
    p = rng.normal(size=(5, 3))
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    th = np.arccos(p[:, 2])
    ph = np.arctan2(p[:, 1], p[:, 0])
    ref = sph_harm_y(l, m, th, ph) * (-1) ** max(m, 0)
    np.testing.assert_allclose(solid_Y(l, m).evaluate(p), ref, atol=1e-12)


@pytest.mark.parametrize("l, m", [(l, m) for l in range(7) for m in range(-l, l + 1)])
def test_solid_Y_is_harmonic_exactly(l, m):
    assert solid_Y(l, m).body.laplacian().is_zero()


@pytest.mark.parametrize("l, m", [(l, m) for l in range(5) for m in range(-l - 1, l + 2)])
def test_vector_I_curl_div_harmonic(l, m):
    P = vector_I(l, m).body
    assert is_curl_free(P) and is_divergence_free(P) and is_harmonic(P)
    assert P.degree == l


@pytest.mark.parametrize("l, m", [(l, m) for l in range(1, 5) for m in range(-l, l + 1)])
def test_vector_T_is_tangential_and_divergence_free(l, m):
    from cornerem.polycore import VecHomoPoly

    T = vector_T(l, m).body
    assert T.dot(VecHomoPoly.identity()).is_zero()
    assert divergence(T).is_zero()


@pytest.mark.parametrize(
    "family, lmax, mshift",
    [(solid_Y, 3, 0), (vector_I, 2, 1), (vector_T, 3, 0), (vector_N, 3, -1)],
)
def test_sphere_orthonormality(family, lmax, mshift):
    lo = 1 if family in (vector_T, vector_N) else 0
    members = [family(l, m) for l in range(lo, lmax + 1) for m in range(-(l + mshift), l + mshift + 1)]
    G = np.array([[sphere_inner(a, b) for b in members] for a in members])
    np.testing.assert_allclose(G, np.eye(len(members)), atol=1e-10)


def test_families_mutually_orthogonal():
    a, b, c = vector_I(1, 0), vector_T(1, 0), vector_N(1, 0)
    assert abs(sphere_inner(b, c)) < 1e-12
    # I_1 and N_3 are both polynomial but of different degrees; on the sphere they are orthogonal
    assert abs(sphere_inner(a, vector_N(3, 0))) < 1e-12


def test_norm_tag_round_trip_and_value():
    t = NormTag(Fraction(7, 12), -1)
    assert NormTag.parse(t.format()) == t
    assert t.value() == pytest.approx(math.sqrt(7 / 12 / math.pi))
    with pytest.raises(ValueError):
        NormTag(Fraction(0))


@pytest.mark.parametrize("bad", [(-1, 0), (2, 3)])
def test_index_checks(bad):
    with pytest.raises(ValueError):
        solid_Y(*bad)


def test_curl_of_I_vanishes_but_T_is_not_gradient():
    assert curl(vector_I(2, 1).body).is_zero()
    assert not curl(vector_T(2, 1).body).is_zero()
