"""Laplace transform of homogeneous polynomials over the positive orthant.

For a divergence-free vector polynomial P of degree N the transform of
zeta . P over the orthant equals a polynomial in rho = 1/zeta,

    I[P](rho) = sum_j sum_{|alpha| = N, alpha_j = 0} p^(j)_alpha alpha! rho^(alpha_jhat + 1_jhat),

homogeneous of degree N + 2, where alpha! is the product of the factorials and
1_jhat is the all-ones index with a zero in slot j.  The module also decides
divisibility of such polynomials by sigma(rho) = rho2^2 rho3^2 + rho1^2 rho3^2 + rho1^2 rho2^2.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exactla import LeftSolver
from .polycore import (
    ContractViolation,
    GaussianRational,
    HomoPoly,
    MultiIndex,
    VecHomoPoly,
    curl_defects,
    divergence_defects,
    harmonic_defects,
    monomials,
)

__all__ = [
    "SIGMA",
    "alpha_factorial",
    "face_transform",
    "laplace_poly",
    "divides_sigma",
    "pattern_holds",
    "divisibility_by_pattern",
    "evaluate_rho",
    "laplace_exact",
    "laplace_via_I",
    "orthant_quadrature",
    "laplace_numeric",
    "sample_cone",
    "in_cone",
]

SIGMA = HomoPoly(4, {(0, 2, 2): 1, (2, 0, 2): 1, (2, 2, 0): 1})


def alpha_factorial(alpha: Sequence[int]) -> int:
    return math.factorial(alpha[0]) * math.factorial(alpha[1]) * math.factorial(alpha[2])


def face_transform(P: VecHomoPoly, l: int) -> dict[int, HomoPoly]:
    """Transforms of each component over the face x_l = 0.

    Returns, for each component j, a polynomial in rho whose coefficient at
    alpha_lhat + 1_lhat is p^(j)_alpha alpha! (only alpha with alpha_l = 0).
    """
    if l not in (1, 2, 3):
        raise ValueError("face index must be 1, 2 or 3")
    k = l - 1
    out: dict[int, HomoPoly] = {}
    for j in (1, 2, 3):
        coeffs: dict[MultiIndex, GaussianRational] = {}
        for a, c in P[j].coeffs.items():
            if a[k] != 0:
                continue
            e = tuple(a[i] + 1 if i != k else 0 for i in range(3))
            coeffs[e] = c * alpha_factorial(a)  # type: ignore[index]
        out[j] = HomoPoly(P.degree + 2, coeffs)
    return out


def laplace_poly(P: VecHomoPoly, check: bool = True) -> HomoPoly:
    """I[P](rho); requires div P = 0."""
    if check:
        bad = divergence_defects(P)
        if bad:
            raise ContractViolation(f"input is not divergence-free; first failing beta = {bad[0]}")
    out = HomoPoly.zero(P.degree + 2)
    for j in (1, 2, 3):
        out = out + face_transform(P, j)[j]
    return out


@lru_cache(maxsize=None)
def _sigma_solver(degree: int) -> tuple[list[MultiIndex], list[MultiIndex], LeftSolver]:
    rows = monomials(degree)
    cols = monomials(degree - 4)
    ridx = {a: i for i, a in enumerate(rows)}
    A = [[0] * len(cols) for _ in rows]
    for jc, b in enumerate(cols):
        for s in SIGMA.coeffs:
            A[ridx[(b[0] + s[0], b[1] + s[1], b[2] + s[2])]][jc] += 1
    return rows, cols, LeftSolver.build(A, len(cols))


def divides_sigma(q: HomoPoly) -> tuple[bool, HomoPoly | None]:
    """Exact test of q = sigma * C; returns (True, C) or (False, None)."""
    if q.is_zero():
        return True, HomoPoly.zero(max(q.degree - 4, 0))
    if q.degree < 4:
        return False, None
    rows, cols, solver = _sigma_solver(q.degree)
    re = solver.solve([q[a].re for a in rows])
    if re is None:
        return False, None
    im = solver.solve([q[a].im for a in rows])
    if im is None:
        return False, None
    C = HomoPoly(q.degree - 4, {b: GaussianRational(r, i) for b, r, i in zip(cols, re, im)})
    if SIGMA * C != q:  # defensive; the solve is exact
        raise AssertionError("sigma quotient failed to reproduce input")
    return True, C


def pattern_holds(P: VecHomoPoly) -> bool:
    """Odd degree: x_j divides P^(j).  Even degree >= 2: the other two variables divide P^(j)."""
    N = P.degree
    for j in range(3):
        for a in P.components[j].coeffs:
            if N % 2 == 1:
                if a[j] == 0:
                    return False
            elif any(a[i] == 0 for i in range(3) if i != j):
                return False
    return True


def divisibility_by_pattern(P: VecHomoPoly, N: int | None = None) -> bool:
    """Predicted divisibility of I[P] by sigma, read off from the support of P.

    Preconditions: N >= 1 and P divergence-free.  For even N, P must also be
    curl-free (hence harmonic): the even-degree equivalence uses the curl
    identity, and without it (a x2x3, b x1x3, c x1x2) with a, b, c distinct
    matches the pattern while I[P] is not a multiple of sigma.
    """
    N = P.degree if N is None else N
    if N != P.degree and not P.is_zero():
        raise ContractViolation(f"declared degree {N} differs from polynomial degree {P.degree}")
    if N < 1:
        raise ContractViolation("degree must be at least 1")
    bad = divergence_defects(P)
    if bad:
        raise ContractViolation(f"input is not divergence-free; first failing beta = {bad[0]}")
    if N % 2 == 0:
        hb = harmonic_defects(P)
        if hb:
            raise ContractViolation(f"even degree requires a harmonic input; first failing (beta, j) = {hb[0]}")
        cb = curl_defects(P)
        if cb:
            raise ContractViolation(f"even degree requires a curl-free input; first failing (beta, j, l) = {cb[0]}")
    return pattern_holds(P)


# ---------------------------------------------------------------------------
# Numeric evaluation


def evaluate_rho(q: HomoPoly, rho: np.ndarray) -> np.ndarray:
    return q.evaluate(np.asarray(rho, dtype=complex))


def laplace_exact(P: VecHomoPoly, E0: Sequence[complex], zeta: Sequence[complex]) -> complex:
    """Closed form of the orthant integral of exp(-x.zeta) E0.P(x), monomial by monomial.

    Uses int_K x^alpha exp(-x.zeta) dx = alpha! / zeta^(alpha+1), valid for Re zeta_j > 0.
    """
    z = np.asarray(zeta, dtype=complex)
    if np.any(z.real <= 0):
        raise ValueError("closed form needs Re zeta_j > 0 for all j")
    total = 0j
    for j in range(3):
        e = complex(E0[j])
        if e == 0:
            continue
        for a, c in P.components[j].coeffs.items():
            total += e * complex(c) * alpha_factorial(a) / np.prod(z ** (np.array(a) + 1))
    return complex(total)


def laplace_via_I(P: VecHomoPoly, zeta: Sequence[complex]) -> complex:
    """zeta . (orthant transform of P) = I[P](1/zeta)."""
    z = np.asarray(zeta, dtype=complex)
    q = laplace_poly(P)
    return complex(evaluate_rho(q, 1.0 / z))


def in_cone(zeta: Sequence[complex], c: float = 0.2, tol: float = 1e-10) -> bool:
    z = np.asarray(zeta, dtype=complex)
    nz = np.linalg.norm(z)
    return abs(np.sum(z * z)) <= tol * nz**2 and bool(np.all(z.real / nz > c))


def sample_cone(rng: np.random.Generator, c: float = 0.2, scale: float = 1.0, max_tries: int = 10000) -> np.ndarray:
    """Random zeta = s (w + i w_perp) with |w| = |w_perp|, w . w_perp = 0 and min_j Re zeta_j / |zeta| > c."""
    if not 0 < c < 1 / math.sqrt(6):
        raise ValueError("cone constant must lie in (0, 1/sqrt(6))")
    for _ in range(max_tries):
        w = rng.normal(size=3)
        w = np.abs(w)
        w /= np.linalg.norm(w)
        v = rng.normal(size=3)
        v -= v.dot(w) * w
        v /= np.linalg.norm(v)
        zeta = scale * (w + 1j * v) / math.sqrt(2)
        if in_cone(zeta, c):
            return zeta
    raise RuntimeError("could not sample the cone; lower c")


def _gl_panels(length: float, scale: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [0, length], panels graded geometrically from 0 with first width ~scale."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = [0.0]
    h = min(scale, length)
    while edges[-1] < length:
        edges.append(min(edges[-1] + h, length))
        h *= 2.0
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def orthant_quadrature(
    zeta: Sequence[complex], R: float, region: str = "ball", n: int = 24
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrating f(x) exp(-x.zeta) over the orthant cut at radius R.

    The returned weights already include exp(-x.zeta).  ``region`` is "ball"
    (|x| < R, spherical coordinates over the octant) or "cube" ([0, R]^3,
    tensor rule).  Radial/axial panels are graded to resolve exp(-x.zeta).
    """
    z = np.asarray(zeta, dtype=complex)
    if region == "cube":
        axes = []
        for j in range(3):
            x, w = _gl_panels(R, 1.0 / max(z[j].real, 1e-300), n)
            axes.append((x, w * np.exp(-x * z[j])))
        X = np.stack(np.meshgrid(axes[0][0], axes[1][0], axes[2][0], indexing="ij"), axis=-1).reshape(-1, 3)
        W = np.einsum("i,j,k->ijk", axes[0][1], axes[1][1], axes[2][1]).reshape(-1)
        return X, W
    if region != "ball":
        raise ValueError("region must be 'ball' or 'cube'")
    t, wt = np.polynomial.legendre.leggauss(n)
    # octant: theta, phi in [0, pi/2]; polar angle kept explicit so the rule stays smooth at the pole
    ang = 0.25 * np.pi * (t + 1)
    wang1 = 0.25 * np.pi * wt
    TH, PHI = np.meshgrid(ang, ang, indexing="ij")
    S = np.sin(TH)
    dirs = np.stack([S * np.cos(PHI), S * np.sin(PHI), np.cos(TH)], axis=-1).reshape(-1, 3)
    wang = (np.outer(wang1, wang1) * S).reshape(-1)
    a = dirs @ z  # decay rate along each ray
    # per-ray radial panels in the scaled variable rho = |a| r
    rho, wrho = _gl_panels(R * float(np.max(np.abs(a))), 1.0, n)
    scale = 1.0 / np.abs(a)
    r = np.minimum(scale[:, None] * rho[None, :], R)
    wr = scale[:, None] * wrho[None, :] * (scale[:, None] * rho[None, :] <= R)
    X = (r[:, :, None] * dirs[:, None, :]).reshape(-1, 3)
    W = (wang[:, None] * wr * r**2 * np.exp(-a[:, None] * r)).reshape(-1)
    return X, W


def laplace_numeric(
    P: VecHomoPoly,
    E0: Sequence[complex],
    zeta: Sequence[complex],
    R: float,
    c: float = 0.2,
    region: str = "ball",
    n: int = 24,
    variety_tol: float = 1e-10,
) -> complex:
    """Quadrature of the orthant integral of exp(-x.zeta) E0.P(x) over |x| < R (or [0,R]^3)."""
    z = np.asarray(zeta, dtype=complex)
    if not in_cone(z, c, variety_tol):
        raise ValueError("zeta must satisfy zeta.zeta = 0 and lie in the admissible cone")
    e = np.asarray(E0, dtype=complex)
    if not np.any(e):
        return 0j
    X, W = orthant_quadrature(z, R, region, n)
    vals = P.evaluate(X) @ e
    return complex(np.sum(W * vals))


def tail_bound(zeta: Sequence[complex], R: float, c: float = 0.2) -> float:
    """exp(-c R |zeta|): the size of the discarded tail up to polynomial factors."""
    return math.exp(-c * R * float(np.linalg.norm(zeta)))
