import numpy as np
import pytest

from cornerem.orthant_laplace import pattern_holds
from cornerem.polycore import is_curl_free, is_divergence_free, is_harmonic
from cornerem.sampling import coefficient_layout, constrained_basis, random_combination, random_vec_poly


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_divergence_free_harmonic_dimension(N):
    # harmonic vector fields have dimension 3(2N+1); divergence maps them onto
    # harmonic polynomials of degree N-1, a space of dimension 2N-1
    basis = constrained_basis(N)
    assert len(basis) == 3 * (2 * N + 1) - (2 * N - 1)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("curl_free", [False, True])
def test_random_combinations_satisfy_constraints(N, curl_free, rng):
    basis = constrained_basis(N, curl_free=curl_free)
    for _ in range(5):
        P = random_combination(N, basis, rng)
        assert is_divergence_free(P) and is_harmonic(P)
        if curl_free:
            assert is_curl_free(P)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_pattern_constrained_samples_match_pattern(N, rng):
    basis = constrained_basis(N, curl_free=N % 2 == 0, pattern=True)
    for _ in range(3):
        P = random_combination(N, basis, rng)
        assert pattern_holds(P)


def test_layout_and_unconstrained(rng):
    assert len(coefficient_layout(2)) == 18
    P = random_vec_poly(3, rng)
    assert P.degree == 3
