import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cornerem.cgo import (
    FaddeevSolver,
    Grid,
    MediumProfile,
    NonContraction,
    ResonantLattice,
    build_matrices,
    contraction_threshold,
    factorization_residual,
    fit_slope,
    helmholtz_zeta,
    lp_norm,
    maxwell_residual,
    neumann_cgo,
    p_mp,
    p_mp_grad,
    p_pm,
    random_medium,
    random_smooth_field,
    spectral_laplacian,
    z0_from_constants,
)

G32 = Grid(32)
G48 = Grid(48)
ETA = np.cross([1.0, 1.0, 1.0], [1.0, -1.0, 0.0]) / math.sqrt(6)

cvec = st.tuples(*[st.floats(-2, 2)] * 6).map(lambda t: np.array(t[:3]) + 1j * np.array(t[3:]))


@given(cvec, st.integers(0, 2**32 - 1))
def test_symbol_product_is_scalar(xi, seed):
    # both symbols square to (xi . xi) I on C^8
    X = np.random.default_rng(seed).normal(size=8) + 0j
    tol = 1e-12 * (1 + np.linalg.norm(xi) ** 2) * np.linalg.norm(X)
    for P in (p_mp, p_pm):
        Y = P(xi, xi, P(xi, xi, X[:, None]))[:, 0]
        np.testing.assert_allclose(Y, np.dot(xi, xi) * X, atol=tol)


def test_symbol_squared_is_laplacian(rng):
    X = random_smooth_field(G32, rng)
    lhs = p_mp_grad(p_mp_grad(X, G32), G32)
    rhs = np.stack([spectral_laplacian(c, G32) for c in X])
    assert np.max(np.abs(lhs - rhs)) <= 1e-11 * np.max(np.abs(rhs))


@pytest.mark.parametrize("ratio", [2.0, 8.0, 32.0])
def test_faddeev_round_trip(ratio, rng):
    solver = FaddeevSolver.build(G32, helmholtz_zeta(ratio, 1.0))
    g = random_smooth_field(G32, rng, comps=1)[0]
    np.testing.assert_allclose(solver.apply_operator(solver.solve(g)), g, atol=1e-12)


def test_faddeev_solution_satisfies_quasi_periodic_equation(rng):
    zeta = helmholtz_zeta(4.0, 1.0)
    solver = FaddeevSolver.build(G32, zeta)
    psi = random_smooth_field(G32, rng, comps=1)[0]
    # apply Delta + 2 zeta.grad to exp(i theta x) psi via shifted wavevectors
    F = np.fft.fftn(psi)
    xi = [k + t for k, t in zip(G32.wavevectors(), solver.theta)]
    sym = -(xi[0] ** 2 + xi[1] ** 2 + xi[2] ** 2) + 2j * sum(z * x for z, x in zip(zeta, xi))
    np.testing.assert_allclose(np.fft.ifftn(sym * F), solver.apply_operator(psi), atol=1e-10)


def test_resonant_lattice_is_reported():
    zeta = np.array([1.0, 0.0, 0.0]) + 1j * np.array([0.0, 1.0, 0.0])
    with pytest.raises(ResonantLattice):
        FaddeevSolver.build(G32, zeta, theta=np.zeros(3))
    with pytest.raises(ValueError):
        FaddeevSolver.build(G32, np.array([1.0, 0, 0]))


@pytest.mark.parametrize("norm, k", [(2.0, 1.0), (64.0, 1.0), (5.0, 3.0)])
def test_helmholtz_zeta_lies_on_variety(norm, k):
    z = helmholtz_zeta(norm, k)
    assert np.dot(z, z) == pytest.approx(-k * k, abs=1e-10 * norm**2)
    assert np.linalg.norm(z) == pytest.approx(norm)
    with pytest.raises(ValueError):
        helmholtz_zeta(k, k)


def test_medium_validation():
    n = G32.n
    one = np.ones((n,) * 3, complex)
    with pytest.raises(ValueError):
        MediumProfile(G32, np.ones((4, 4, 4), complex), one)
    with pytest.raises(ValueError):
        MediumProfile(G32, -one, one)
    with pytest.raises(ValueError):
        MediumProfile(G32, 2 * one, one)  # contrast reaches the boundary
    with pytest.raises(ValueError):
        MediumProfile.bump(G32, width=G32.L / 4)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_factorization_identities(seed):
    m = random_medium(G48, np.random.default_rng(seed))
    res = factorization_residual(m, 1.0, trials=2, rng=np.random.default_rng(seed))
    assert res["max"] < 1e-8


def test_factorization_detects_wrong_coefficients():
    m = random_medium(G48, np.random.default_rng(5))
    M = build_matrices(m, 1.0)
    bad = type(M)(**{**M.__dict__, "grad_kappa": -M.grad_kappa})
    assert factorization_residual(m, 1.0, trials=1, matrices=bad)["max"] > 1e-3


def test_homogeneous_cgo_is_exact_exponential():
    m = MediumProfile.homogeneous(G32, eps0=2.0)
    k = m.background_k(1.0)
    zeta = helmholtz_zeta(8 * k, k)
    sol = neumann_cgo(m, 1.0, zeta, z0_from_constants(zeta, ETA, k=k))
    assert np.max(np.abs(sol.w)) == 0.0
    # E0 = zeta_hat up to the O(k^2 / |zeta|^2) side-condition correction
    np.testing.assert_allclose(sol.leading_E(), zeta / np.linalg.norm(zeta), atol=(k / np.linalg.norm(zeta)) ** 2)
    Et, _ = sol.remainders()
    assert np.max(np.abs(Et)) < 1e-12
    assert sol.diagnostics["side_ok"]
    assert max(maxwell_residual(sol)) < 1e-12


@pytest.fixture(scope="module")
def bump_solution():
    m = MediumProfile.bump(Grid(64))
    zeta = helmholtz_zeta(8.0, 1.0)
    return neumann_cgo(m, 1.0, zeta, z0_from_constants(zeta, ETA, k=1.0))


def test_cgo_solves_maxwell(bump_solution):
    d = bump_solution.diagnostics
    assert d["side_ok"] and d["maxwell_r1"] < 1e-6 and d["maxwell_r2"] < 1e-6
    assert d["contraction_rate"] < 1.0


def test_wrongly_scaled_H_is_caught(bump_solution):
    assert max(maxwell_residual(bump_solution, H_scale=2.0)) > 1e-2


def test_cgo_rejects_zeta_off_variety():
    m = MediumProfile.bump(Grid(64))
    zeta = helmholtz_zeta(8.0, 2.0)
    with pytest.raises(ValueError):
        neumann_cgo(m, 1.0, zeta, z0_from_constants(zeta, ETA, k=1.0))


def test_contraction_threshold_doubles_until_contracting():
    m = MediumProfile.bump(G48, gamma_amp=3.0, mu_amp=2.0)
    out = contraction_threshold(m, 1.0, start_ratio=1.1)
    assert out["rate"] < 0.5
    ratios = [h["ratio"] for h in out["history"]]
    assert all(b == 2 * a for a, b in zip(ratios, ratios[1:]))
    assert all(h["rate"] >= 0.5 for h in out["history"][:-1])
    with pytest.raises(NonContraction):
        contraction_threshold(m, 1.0, factor=1e-9, max_doublings=1)


def test_lp_norm_of_constant():
    f = np.full((3,) + (G32.n,) * 3, 1.0 / math.sqrt(3))
    assert lp_norm(f, G32, 4.0) == pytest.approx(G32.L ** (3 / 4))


def test_fit_slope_recovers_power_law():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    fit = fit_slope(x, 3.0 * x**-1.5)
    assert fit["slope"] == pytest.approx(-1.5)
    assert fit["ci"][0] - 1e-12 <= -1.5 <= fit["ci"][1] + 1e-12
