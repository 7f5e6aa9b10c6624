"""Random exact vector polynomials from constrained subspaces.

Subspaces are cut out by linear conditions on the coefficient vector
(divergence, Laplacian, curl, support) and computed as exact null spaces.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactla import nullspace
from .polycore import GaussianRational, HomoPoly, MultiIndex, VecHomoPoly, monomials

__all__ = ["constrained_basis", "random_combination", "random_vec_poly", "coefficient_layout"]


@lru_cache(maxsize=None)
def coefficient_layout(N: int) -> tuple[tuple[int, MultiIndex], ...]:
    """Ordering of unknowns: (component, alpha) for all |alpha| = N."""
    return tuple((j, a) for j in range(3) for a in monomials(N))


def _rows(N: int, divergence_free: bool, harmonic: bool, curl_free: bool, pattern: bool) -> list[list[int]]:
    layout = coefficient_layout(N)
    index = {key: i for i, key in enumerate(layout)}
    n = len(layout)
    rows: list[list[int]] = []

    def shift(a, j, d):
        b = list(a)
        b[j] += d
        return tuple(b)

    if divergence_free and N >= 1:
        for beta in monomials(N - 1):
            r = [0] * n
            for j in range(3):
                r[index[(j, shift(beta, j, 1))]] += beta[j] + 1
            rows.append(r)
    if harmonic and N >= 2:
        for beta in monomials(N - 2):
            for j in range(3):
                r = [0] * n
                for l in range(3):
                    r[index[(j, shift(beta, l, 2))]] += (beta[l] + 1) * (beta[l] + 2)
                rows.append(r)
    if curl_free and N >= 1:
        for beta in monomials(N - 1):
            for j in range(3):
                for l in range(j + 1, 3):
                    r = [0] * n
                    r[index[(j, shift(beta, l, 1))]] += beta[l] + 1
                    r[index[(l, shift(beta, j, 1))]] -= beta[j] + 1
                    rows.append(r)
    if pattern:
        for (j, a), i in index.items():
            if N % 2 == 1:
                bad = a[j] == 0
            else:
                bad = any(a[k] == 0 for k in range(3) if k != j)
            if bad:
                r = [0] * n
                r[i] = 1
                rows.append(r)
    return rows


@lru_cache(maxsize=None)
def constrained_basis(
    N: int,
    divergence_free: bool = True,
    harmonic: bool = True,
    curl_free: bool = False,
    pattern: bool = False,
) -> tuple[tuple[Fraction, ...], ...]:
    """Exact basis of the subspace of degree-N vector polynomials meeting the requested conditions."""
    layout = coefficient_layout(N)
    rows = _rows(N, divergence_free, harmonic, curl_free, pattern)
    return tuple(tuple(v) for v in nullspace(rows, len(layout)))


def _to_vec(N: int, vec: list[GaussianRational]) -> VecHomoPoly:
    layout = coefficient_layout(N)
    comps: list[dict[MultiIndex, GaussianRational]] = [{}, {}, {}]
    for (j, a), c in zip(layout, vec):
        if c:
            comps[j][a] = c
    return VecHomoPoly(tuple(HomoPoly(N, c) for c in comps), N)  # type: ignore[arg-type]


def random_combination(
    N: int,
    basis: tuple[tuple[Fraction, ...], ...],
    rng: np.random.Generator,
    max_coeff: int = 5,
    complex_coeffs: bool = True,
    density: float = 1.0,
) -> VecHomoPoly:
    """Random Gaussian-integer combination of basis vectors (each used with probability ``density``)."""
    n = len(coefficient_layout(N))
    acc = [GaussianRational(0, 0)] * n
    for b in basis:
        if rng.random() > density:
            continue
        re = int(rng.integers(-max_coeff, max_coeff + 1))
        im = int(rng.integers(-max_coeff, max_coeff + 1)) if complex_coeffs else 0
        if re == 0 and im == 0:
            continue
        g = GaussianRational(re, im)
        acc = [a + g * v if v else a for a, v in zip(acc, b)]
    return _to_vec(N, acc)


def random_vec_poly(N: int, rng: np.random.Generator, max_coeff: int = 4, density: float = 0.5) -> VecHomoPoly:
    """Unconstrained random degree-N vector polynomial with sparse Gaussian-integer coefficients."""
    comps = []
    for _ in range(3):
        coeffs = {}
        for a in monomials(N):
            if rng.random() < density:
                coeffs[a] = GaussianRational(int(rng.integers(-max_coeff, max_coeff + 1)), int(rng.integers(-max_coeff, max_coeff + 1)))
        comps.append(HomoPoly(N, coeffs))
    return VecHomoPoly(tuple(comps), N)  # type: ignore[arg-type]
