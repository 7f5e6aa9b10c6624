import math

import numpy as np
import pytest

from cornerem.cgo import Grid, MediumProfile, helmholtz_zeta, neumann_cgo, z0_from_constants
from cornerem.evidence import (
    CSV_COLUMNS,
    AnalyticPair,
    CgoPair,
    CornerConfig,
    I0_scaling,
    contradiction_report,
    expansion_pair,
    layered_pair,
    ortho_identity_check,
    orthant_tail_bound,
    plane_wave_pair,
    report_csv,
    sampler_residual,
)
from cornerem.orthant_laplace import laplace_exact, orthant_quadrature, sample_cone
from cornerem.polycore import VecHomoPoly
from cornerem.sampling import constrained_basis, random_combination
from cornerem.wavefields import FieldExpansion, WaveParams

P = WaveParams(1.0)
V = VecHomoPoly.from_coeffs
ROT = V([{(0, 1, 0): 1}, {(1, 0, 0): -1}, {}], 1)
DIAG = V([{(1, 0, 0): 1}, {(0, 1, 0): -1}, {}], 1)
PTS = np.random.default_rng(7).uniform(-0.5, 0.5, (8, 3))


def _plane():
    return plane_wave_pair([1, 0, 0], [0, 1j / math.sqrt(2), 1 / math.sqrt(2)], P)


def _scaled_H(pair, s):
    return AnalyticPair("bad", pair.E, lambda X: s * pair.H(X), pair.gamma, pair.mu, pair.omega)


@pytest.mark.parametrize(
    "pair",
    [
        _plane(),
        layered_pair(P),
        expansion_pair(FieldExpansion({(1, 1): (1.0, 0.5j), (2, -1): (0.0, 1.0)}), P),
        layered_pair(WaveParams(2.0, 1.5, 0.7), amp_e=0.2, amp_h=0.5),
    ],
    ids=["plane", "layered", "expansion", "layered-scaled"],
)
def test_samplers_solve_maxwell(pair):
    assert sampler_residual(pair, PTS) < 1e-7


def test_sampler_residual_flags_wrong_pair():
    assert sampler_residual(_scaled_H(layered_pair(P), 2.0), PTS) > 1e-2


def test_plane_wave_needs_transverse_polarisation():
    with pytest.raises(ValueError):
        plane_wave_pair([1, 0, 0], [1, 0, 0], P)


def test_ortho_identity_layered():
    out = ortho_identity_check(_plane(), layered_pair(P), lo=(-0.5, -0.5, 0.0))
    assert out["discrepancy"] < 1e-10
    assert abs(complex(*out["lhs"])) > 1e-3  # the check is not vacuous


def test_ortho_identity_between_background_waves():
    bg = expansion_pair(FieldExpansion({(1, 0): (1.0, 0.0)}), P)
    out = ortho_identity_check(_plane(), bg)
    # both sides vanish for two background solutions
    assert out["discrepancy"] < 1e-10


def test_ortho_identity_mutation_is_detected():
    bad = _scaled_H(layered_pair(P), 2.0)
    out = ortho_identity_check(_plane(), bad, lo=(-0.5, -0.5, 0.0), verify=False)
    assert out["discrepancy"] > 1e-2
    with pytest.raises(ValueError):
        ortho_identity_check(_plane(), bad, lo=(-0.5, -0.5, 0.0))


def test_ortho_identity_requires_homogeneous_background():
    with pytest.raises(ValueError):
        ortho_identity_check(layered_pair(P), layered_pair(P), lo=(-0.5, -0.5, 0.0))


def test_cgo_pair_interpolates_solution():
    m = MediumProfile.homogeneous(Grid(32))
    zeta = helmholtz_zeta(4.0, 1.0)
    eta = np.cross([1.0, 1, 1], [1.0, -1, 0]) / math.sqrt(6)
    sol = neumann_cgo(m, 1.0, zeta, z0_from_constants(zeta, eta, k=1.0))
    pair = CgoPair(sol)
    assert sampler_residual(pair, 0.3 * PTS) < 1e-8
    E, _ = pair.fields(PTS)
    expected = np.exp(-(PTS @ zeta))[:, None] * sol.leading_E()
    np.testing.assert_allclose(E, expected, rtol=1e-10)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_tail_bound_dominates_true_tail(N, rng):
    Pn = random_combination(N, constrained_basis(N, curl_free=N % 2 == 0), rng)
    z = 4 * sample_cone(rng)
    e = z / np.linalg.norm(z)
    full = laplace_exact(Pn, e, z)
    for R in (0.5, 1.0, 2.0):
        X, W = orthant_quadrature(z, R, "ball", 24)
        inside = complex(np.sum(W * (Pn.evaluate(X) @ e)))
        assert abs(full - inside) <= orthant_tail_bound(Pn, e, z, R) * (1 + 1e-9)
    assert orthant_tail_bound(Pn, e, z, 0.5) > orthant_tail_bound(Pn, e, z, 1.0)


def test_I0_scaling_rotation_field(rng):
    out = I0_scaling(ROT, sample_cone(rng))
    assert out["witness"]
    assert out["fit"]["slope"] == pytest.approx(-4, abs=0.05)
    assert complex(*out["doubling_ratio"]) == pytest.approx(1.0, abs=1e-12)
    for row in out["rows"]:
        assert row["quad_vs_exact"] <= row["tail_bound"] + 1e-6 * row["abs_exact"]
        assert row["scaling_error"] < 1e-12


def test_I0_scaling_without_witness(rng):
    out = I0_scaling(DIAG, sample_cone(rng))
    assert not out["witness"] and "no dominance witness" in out["message"]


def test_I0_scaling_rejects_outside_cone():
    with pytest.raises(ValueError):
        I0_scaling(ROT, np.array([1.0, 1.0, 1.0]))


def test_corner_config_validation():
    with pytest.raises(ValueError):
        CornerConfig(epsilon=2.0, a=1.5)
    with pytest.raises(ValueError):
        CornerConfig(a=4.0)


@pytest.fixture(scope="module")
def flat_report():
    cfg = CornerConfig(gamma_amp=0.0, mu_amp=0.0, grid_n=32)
    return contradiction_report(cfg, ratios=(8, 16, 32))


def test_no_contrast_is_inconclusive(flat_report):
    assert flat_report["no_contrast"] and flat_report["inconclusive"]
    assert all(row["abs_I0"] == 0 for row in flat_report["rows"])
    assert flat_report["incident_verdict"]["status"] == "Admissible"


def test_report_csv_layout(flat_report):
    text = report_csv(flat_report)
    lines = text.strip().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len([ln for ln in lines if not ln.startswith("#")]) == 1 + len(flat_report["rows"])
