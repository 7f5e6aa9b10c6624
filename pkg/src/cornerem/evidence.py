"""Numerical checks of the corner-scattering argument at desk scale.

* ortho_identity_check: the integration-by-parts identity
      i w int_D [(mu - mu0) H0.H - (gamma - eps0) E0.E] = int_{dD} n.(E^H0 + H^E0)
  for a background pair (E0, H0) and a pair (E, H) solving Maxwell in the medium.
* I0_scaling: homogeneity of the orthant Laplace term in |zeta|.
* contradiction_report: sizes of the four terms I0..I3 along a zeta sweep,
  with a CGO pair built on a smooth corner medium.  The ratio
  (|I1| + |I2| + |I3|) / |I0| shrinking as |zeta| grows is a numerical
  shadow of the argument, not a proof.

Integration domains are cubes: D = [0, a]^3 and the corner neighbourhood
N = [0, eps]^3, so tensor Gauss-Legendre rules apply.
"""

from __future__ import annotations

import logging
import math
import csv
import io
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .admissibility import classify_expansion
from .cgo import (
    CgoSolution,
    Grid,
    MediumProfile,
    _fft,
    build_matrices,
    fit_slope,
    helmholtz_zeta,
    neumann_cgo,
    z0_from_constants,
)
from .orthant_laplace import in_cone, laplace_exact, orthant_quadrature
from .polycore import VecHomoPoly
from .wavefields import FieldExpansion, WaveParams, lowest_E_formula, lowest_H_formula, wavefunction_values

__all__ = [
    "FieldPair",
    "AnalyticPair",
    "CgoPair",
    "plane_wave_pair",
    "expansion_pair",
    "layered_pair",
    "sampler_residual",
    "ortho_identity_check",
    "I0_scaling",
    "CornerConfig",
    "contradiction_report",
    "report_csv",
    "orthant_tail_bound",
    "SHADOW_STATEMENT",
]

log = logging.getLogger(__name__)

SHADOW_STATEMENT = (
    "This is a numerical shadow of the contradiction argument at finitely many |zeta|; "
    "it does not prove the corner scattering theorem."
)


# ---------------------------------------------------------------------------
# Field samplers


class FieldPair:
    """A field pair (E, H) together with the medium (gamma, mu) it solves Maxwell in."""

    # plain class attributes; subclasses set name, omega, eps0, mu0 and
    # scale (a typical wavenumber that sets finite-difference steps)
    name = "pair"
    omega = 1.0
    eps0 = 1.0
    mu0 = 1.0
    scale = 1.0

    def fields(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def medium(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def fields_tensor(self, xs, ys, zs) -> tuple[np.ndarray, np.ndarray]:
        """Fields on the tensor grid xs x ys x zs, shape (nx, ny, nz, 3)."""
        P = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1)
        return self.fields(P)

    def medium_tensor(self, xs, ys, zs) -> tuple[np.ndarray, np.ndarray]:
        P = np.stack(np.meshgrid(xs, ys, zs, indexing="ij"), axis=-1)
        return self.medium(P)


class AnalyticPair(FieldPair):
    """Pair given by callables on arrays of points of shape (..., 3)."""

    def __init__(self, name, E, H, gamma, mu, omega=1.0, eps0=1.0, mu0=1.0, scale=1.0):
        self.name = name
        self.E, self.H = E, H
        self.gamma, self.mu = gamma, mu
        self.omega, self.eps0, self.mu0, self.scale = omega, eps0, mu0, scale

    def fields(self, points):
        return self.E(points), self.H(points)

    def medium(self, points):
        return self.gamma(points), self.mu(points)


def _const(value: float):
    return lambda P: np.full(np.asarray(P).shape[:-1], value, dtype=complex)


def plane_wave_pair(d: Sequence[float], p: Sequence[complex], params: WaveParams) -> AnalyticPair:
    """E = exp(ik d.x) p, H = sqrt(eps0/mu0) exp(ik d.x) d x p in the background medium."""
    d = np.asarray(d, float)
    p = np.asarray(p, complex)
    if abs(np.linalg.norm(d) - 1) > 1e-12 or abs(np.dot(d, p)) > 1e-12:
        raise ValueError("need a unit direction d orthogonal to p")
    k = params.k
    hdir = params.admittance * np.cross(d, p)

    def phase(P):
        return np.exp(1j * k * (np.asarray(P) @ d))[..., None]

    return AnalyticPair(
        "plane_wave",
        lambda P: phase(P) * p,
        lambda P: phase(P) * hdir,
        _const(params.eps0),
        _const(params.mu0),
        params.omega,
        params.eps0,
        params.mu0,
        k,
    )


def expansion_pair(F: FieldExpansion, params: WaveParams) -> AnalyticPair:
    """Entire background pair sum a (E_lm, H_lm) + b (-(mu0/eps0) H_lm, E_lm), evaluated in closed form."""
    ratio = params.mu0 / params.eps0

    def both(P):
        P = np.asarray(P, float)
        E = np.zeros(P.shape, complex)
        H = np.zeros(P.shape, complex)
        for (l, m), (a, b) in F.entries.items():
            El, Hl = wavefunction_values(l, m, P, params)
            E += a * El - b * ratio * Hl
            H += a * Hl + b * El
        return E, H

    return AnalyticPair(
        "expansion",
        lambda P: both(P)[0],
        lambda P: both(P)[1],
        _const(params.eps0),
        _const(params.mu0),
        params.omega,
        params.eps0,
        params.mu0,
        params.k,
    )


def layered_pair(
    params: WaveParams,
    amp_e: float = 0.4,
    amp_h: float = -0.3,
    center: float = 0.5,
    width: float = 0.3,
) -> AnalyticPair:
    """Manufactured exact pair in a medium varying along x3.

    With u = exp(i k x3 + s1) and v = sqrt(eps0/mu0) exp(i k x3 + s2), the pair
    E = (u, 0, 0), H = (0, v, 0) solves Maxwell for
    mu = mu0 (1 + s1'/(ik)) exp(s1 - s2) and gamma = eps0 (1 + s2'/(ik)) exp(s2 - s1).
    s1, s2 are Gaussian bumps, so the medium tends to the background away from x3 = center.
    """
    k = params.k

    def s(a, t):
        return a * np.exp(-((t - center) ** 2) / (2 * width**2))

    def ds(a, t):
        return -(t - center) / width**2 * s(a, t)

    def E(P):
        t = np.asarray(P)[..., 2]
        out = np.zeros(np.shape(P), complex)
        out[..., 0] = np.exp(1j * k * t + s(amp_e, t))
        return out

    def H(P):
        t = np.asarray(P)[..., 2]
        out = np.zeros(np.shape(P), complex)
        out[..., 1] = params.admittance * np.exp(1j * k * t + s(amp_h, t))
        return out

    def mu(P):
        t = np.asarray(P)[..., 2]
        return params.mu0 * (1 + ds(amp_e, t) / (1j * k)) * np.exp(s(amp_e, t) - s(amp_h, t))

    def gamma(P):
        t = np.asarray(P)[..., 2]
        return params.eps0 * (1 + ds(amp_h, t) / (1j * k)) * np.exp(s(amp_h, t) - s(amp_e, t))

    return AnalyticPair("layered", E, H, gamma, mu, params.omega, params.eps0, params.mu0, max(k, 1.0 / width))


class CgoPair(FieldPair):
    """Physical CGO fields E = exp(-zeta.x) E_hat, H likewise, by trigonometric interpolation."""

    def __init__(self, sol: CgoSolution, name: str = "cgo"):
        self.sol = sol
        self.name = name
        self.omega = sol.omega
        self.eps0 = sol.eps0
        self.mu0 = sol.mu0
        self.scale = float(np.linalg.norm(sol.zeta))
        (Ep, Eq), (Hp, Hq) = sol.conjugated_fields()
        self._F = {key: _fft(v) for key, v in (("Ep", Ep), ("Eq", Eq), ("Hp", Hp), ("Hq", Hq))}
        self._Fg = _fft(sol.gamma - sol.eps0)
        self._Fm = _fft(sol.mu - sol.mu0)

    def _axis(self, x):
        g = self.sol.grid
        x = np.asarray(x, float)
        return np.exp(1j * np.outer(x + g.L / 2, g.k1)) / g.n

    def _tensor(self, F, xs, ys, zs):
        Ax, Ay, Az = self._axis(xs), self._axis(ys), self._axis(zs)
        t = np.tensordot(F, Az, axes=([-1], [1]))
        t = np.tensordot(t, Ay, axes=([-2], [1]))
        t = np.tensordot(t, Ax, axes=([-3], [1]))
        # axes now (..., z, y, x); reorder to (..., x, y, z)
        return np.swapaxes(t, -1, -3)

    def fields_tensor(self, xs, ys, zs):
        z = self.sol.zeta
        th = self.sol.theta
        xs, ys, zs = (np.atleast_1d(np.asarray(v, float)) for v in (xs, ys, zs))
        ex = np.exp(-z[0] * xs)[:, None, None] * np.exp(-z[1] * ys)[None, :, None] * np.exp(-z[2] * zs)[None, None, :]
        qx = np.exp(1j * th[0] * xs)[:, None, None] * np.exp(1j * th[1] * ys)[None, :, None] * np.exp(1j * th[2] * zs)[None, None, :]
        E = ex * (self._tensor(self._F["Ep"], xs, ys, zs) + qx * self._tensor(self._F["Eq"], xs, ys, zs))
        H = ex * (self._tensor(self._F["Hp"], xs, ys, zs) + qx * self._tensor(self._F["Hq"], xs, ys, zs))
        return np.moveaxis(E, 0, -1), np.moveaxis(H, 0, -1)

    def medium_tensor(self, xs, ys, zs):
        xs, ys, zs = (np.atleast_1d(np.asarray(v, float)) for v in (xs, ys, zs))
        g = self.sol.eps0 + self._tensor(self._Fg, xs, ys, zs)
        m = self.sol.mu0 + self._tensor(self._Fm, xs, ys, zs)
        return g, m

    def remainders_tensor(self, xs, ys, zs):
        """(E_tilde, H_tilde) at tensor nodes, without the exp(-zeta.x) factor."""
        sol = self.sol
        if not hasattr(self, "_Frem"):
            Et, Ht = sol.remainders()
            self._Frem = (_fft(Et), _fft(Ht))
        xs, ys, zs = (np.atleast_1d(np.asarray(v, float)) for v in (xs, ys, zs))
        Et = self._tensor(self._Frem[0], xs, ys, zs)
        Ht = self._tensor(self._Frem[1], xs, ys, zs)
        return np.moveaxis(Et, 0, -1), np.moveaxis(Ht, 0, -1)

    def fields(self, points):
        P = np.asarray(points, float)
        flat = P.reshape(-1, 3)
        E = np.empty(flat.shape, complex)
        H = np.empty(flat.shape, complex)
        for i, p in enumerate(flat):
            e, h = self.fields_tensor(p[0:1], p[1:2], p[2:3])
            E[i], H[i] = e[0, 0, 0], h[0, 0, 0]
        return E.reshape(P.shape), H.reshape(P.shape)

    def medium(self, points):
        P = np.asarray(points, float)
        flat = P.reshape(-1, 3)
        g = np.empty(len(flat), complex)
        m = np.empty(len(flat), complex)
        for i, p in enumerate(flat):
            gg, mm = self.medium_tensor(p[0:1], p[1:2], p[2:3])
            g[i], m[i] = gg[0, 0, 0], mm[0, 0, 0]
        return g.reshape(P.shape[:-1]), m.reshape(P.shape[:-1])


def sampler_residual(pair: FieldPair, points: np.ndarray, step: float | None = None) -> float:
    """Relative Maxwell residual of a sampler by fourth-order central differences."""
    P = np.asarray(points, float).reshape(-1, 3)
    h = 1e-2 / max(pair.scale, 1.0) if step is None else step
    jac_E = np.zeros((len(P), 3, 3), complex)  # [p, a, c] = d_a F_c
    jac_H = np.zeros_like(jac_E)
    for a in range(3):
        e = np.zeros(3)
        e[a] = h
        vals = [pair.fields(P + s * e) for s in (-2, -1, 1, 2)]
        for idx, jac in ((0, jac_E), (1, jac_H)):
            f = [v[idx] for v in vals]
            jac[:, a, :] = (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)
    E, H = pair.fields(P)
    g, m = pair.medium(P)

    def curl(J):
        return np.stack([J[:, 1, 2] - J[:, 2, 1], J[:, 2, 0] - J[:, 0, 2], J[:, 0, 1] - J[:, 1, 0]], axis=-1)

    w = pair.omega
    cE, cH = curl(jac_E), curl(jac_H)
    r1 = np.linalg.norm(cE - 1j * w * m[:, None] * H) / (np.linalg.norm(cE) + np.linalg.norm(w * m[:, None] * H))
    r2 = np.linalg.norm(cH + 1j * w * g[:, None] * E) / (np.linalg.norm(cH) + np.linalg.norm(w * g[:, None] * E))
    return float(max(r1, r2))


# ---------------------------------------------------------------------------
# Quadrature on cubes


def _panels(a: float, b: float, first: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre on [a, b]; panel widths start at ``first`` and double."""
    x, w = np.polynomial.legendre.leggauss(n)
    edges = [a]
    h = min(first, b - a)
    while edges[-1] < b - 1e-15:
        edges.append(min(edges[-1] + h, b))
        h *= 2.0
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _uniform_panels(a: float, b: float, panels: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(a, b, panels + 1)
    nodes = np.concatenate([0.5 * (hi - lo) * x + 0.5 * (hi + lo) for lo, hi in zip(edges[:-1], edges[1:])])
    weights = np.concatenate([0.5 * (hi - lo) * w for lo, hi in zip(edges[:-1], edges[1:])])
    return nodes, weights


def _face_integral(pair_a: FieldPair, pair_b: FieldPair, lo, side, axis, at_high, rule):
    """int over one face of n.(E_b ^ H_a + H_b ^ E_a), plus the integral of its absolute terms."""
    xs = [rule[0] + lo[j] for j in range(3)]
    ws = [rule[1]] * 3
    fixed = lo[axis] + (side if at_high else 0.0)
    xs[axis] = np.array([fixed])
    ws = [ws[j] if j != axis else np.array([1.0]) for j in range(3)]
    Ea, Ha = pair_a.fields_tensor(*xs)
    Eb, Hb = pair_b.fields_tensor(*xs)
    sign = 1.0 if at_high else -1.0
    t1 = sign * np.cross(Eb, Ha)[..., axis]
    t2 = sign * np.cross(Hb, Ea)[..., axis]
    W = ws[0][:, None, None] * ws[1][None, :, None] * ws[2][None, None, :]
    return complex(np.sum(W * (t1 + t2))), float(np.sum(W * (np.abs(t1) + np.abs(t2))))


def ortho_identity_check(
    background: FieldPair,
    interior: FieldPair,
    lo: Sequence[float] = (0.0, 0.0, 0.0),
    side: float = 1.0,
    n: int = 16,
    panels: int = 2,
    verify: bool = True,
    residual_tol: float = 1e-5,
) -> dict:
    """Both sides of the integration-by-parts identity on the cube lo + [0, side]^3.

    Only the identity is checked; the vanishing of either side would require
    matched interior transmission data, which is not constructed here.
    """
    lo = np.asarray(lo, float)
    if verify:
        rng = np.random.default_rng(12345)
        pts = lo + side * rng.random((6, 3))
        for pair in (background, interior):
            r = sampler_residual(pair, pts)
            if r > residual_tol:
                raise ValueError(f"sampler {pair.name!r} fails its Maxwell residual check ({r:.2e})")
        gb, mb = background.medium(pts)
        if np.max(np.abs(gb - background.eps0)) > 1e-12 or np.max(np.abs(mb - background.mu0)) > 1e-12:
            raise ValueError("background pair must live in the homogeneous medium")
    rule = _uniform_panels(0.0, side, panels, n)
    xs = [rule[0] + lo[j] for j in range(3)]
    W = rule[1][:, None, None] * rule[1][None, :, None] * rule[1][None, None, :]
    E0, H0 = background.fields_tensor(*xs)
    E, H = interior.fields_tensor(*xs)
    g, m = interior.medium_tensor(*xs)
    w = interior.omega
    tm = (m - interior.mu0) * np.sum(H0 * H, axis=-1)
    tg = (g - interior.eps0) * np.sum(E0 * E, axis=-1)
    lhs = complex(1j * w * np.sum(W * (tm - tg)))
    vol_abs = float(abs(w) * np.sum(W * (np.abs(tm) + np.abs(tg))))
    rhs = 0j
    bnd_abs = 0.0
    for axis in range(3):
        for high in (False, True):
            v, a = _face_integral(background, interior, lo, side, axis, high, rule)
            rhs += v
            bnd_abs += a
    scale = vol_abs + bnd_abs
    return {
        "lhs": [lhs.real, lhs.imag],
        "rhs": [rhs.real, rhs.imag],
        "discrepancy": abs(lhs - rhs) / scale if scale > 0 else abs(lhs - rhs),
        "scale": scale,
        "background": background.name,
        "interior": interior.name,
        "scope": "integration-by-parts identity only; no transmission-eigenfunction matching",
    }


# ---------------------------------------------------------------------------
# I0 homogeneity


def _poly_abs_bound(P: VecHomoPoly, E0: np.ndarray) -> float:
    """Upper bound of |E0 . P(x)| on the unit sphere."""
    return float(sum(abs(E0[j]) * sum(abs(complex(c)) for c in P.components[j].coeffs.values()) for j in range(3)))


def orthant_tail_bound(P: VecHomoPoly, E0, zeta, R: float) -> float:
    """Bound of the orthant integral over |x| > R, using Re(x.zeta) >= min_j Re zeta_j |x|."""
    z = np.asarray(zeta, complex)
    a = float(np.min(z.real))
    N = P.degree
    M = _poly_abs_bound(P, np.asarray(E0, complex))
    # (pi/2) int_R^inf r^(N+2) exp(-a r) dr
    return float(0.5 * math.pi * M * special.gammaincc(N + 3, a * R) * special.gamma(N + 3) / a ** (N + 3))


def I0_scaling(
    P: VecHomoPoly,
    zeta_star,
    radii: Sequence[float] = (32, 64, 128, 256),
    eps: float = 1.0,
    E0=None,
    c: float = 0.2,
    n: int = 24,
    zero_tol: float = 1e-12,
) -> dict:
    """I0(r zeta*) = int_{|x|<eps, x in K} exp(-r x.zeta*) E0.P(x) dx over the radii.

    E0 defaults to zeta*/|zeta*|.  Returns the exact orthant values, the quadrature
    values, tail bounds, the fitted quadrature slope and the exact doubling ratio.
    """
    z = np.asarray(zeta_star, complex)
    if not in_cone(z, c):
        raise ValueError("zeta* must lie on the variety and in the admissible cone")
    e = z / np.linalg.norm(z) if E0 is None else np.asarray(E0, complex)
    N = P.degree
    base = laplace_exact(P, e, z)
    scale = _poly_abs_bound(P, e) * math.factorial(N + 2) / float(np.min(z.real)) ** (N + 3)
    if abs(base) <= zero_tol * max(scale, 1e-300):
        return {
            "N": N,
            "witness": False,
            "message": "no dominance witness at this zeta*",
            "exact": [0.0] * len(radii),
            "radii": list(map(float, radii)),
        }
    rows = []
    for r in radii:
        zr = r * z
        exact = laplace_exact(P, e, zr)
        X, W = orthant_quadrature(zr, eps, "ball", n)
        quad = complex(np.sum(W * (P.evaluate(X) @ e)))
        tail = orthant_tail_bound(P, e, zr, eps)
        rows.append(
            {
                "r": float(r),
                "exact": [exact.real, exact.imag],
                "quad": [quad.real, quad.imag],
                "abs_exact": abs(exact),
                "abs_quad": abs(quad),
                "tail_bound": tail,
                "quad_vs_exact": abs(quad - exact),
                "scaling_error": abs(exact * r ** (N + 3) - base) / abs(base),
            }
        )
    fit = fit_slope([row["r"] for row in rows], [row["abs_quad"] for row in rows])
    doubling = laplace_exact(P, e, 2 * z) * 2 ** (N + 3) / base
    return {
        "N": N,
        "witness": True,
        "rows": rows,
        "fit": fit,
        "expected_slope": -(N + 3),
        "doubling_ratio": [doubling.real, doubling.imag],
    }


# ---------------------------------------------------------------------------
# Contradiction report


@dataclass
class CornerConfig:
    """Smooth medium whose restriction to the corner cube D = [0, a]^3 has contrast at the vertex.

    The medium on D is the restriction of Gaussian bumps centred at ``center``
    (slightly outside the orthant so gamma has a nonzero gradient at the vertex);
    the CGO solutions use that smooth extension, which agrees with the medium on D.
    """

    epsilon: float = 1.0
    a: float = 1.5
    gamma_amp: float = 0.5
    mu_amp: float = 0.3
    center: tuple[float, float, float] = (-0.15, -0.15, -0.15)
    width: float | None = None
    omega: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    grid_n: int = 64
    box: float = 2 * math.pi
    incident: tuple[tuple[int, int, float, float], ...] = ((1, 1, 0.0, 1.0),)
    quad_n: int = 12

    def __post_init__(self):
        if not 0 < self.epsilon < self.a:
            raise ValueError("need 0 < epsilon < a")
        if self.a >= self.box / 2:
            raise ValueError("corner cube must fit inside the periodic box")

    def expansion(self) -> FieldExpansion:
        return FieldExpansion({(l, m): (complex(a), complex(b)) for l, m, a, b in self.incident})

    def params(self) -> WaveParams:
        return WaveParams(self.omega, self.eps0, self.mu0)

    def medium(self) -> MediumProfile:
        g = Grid(self.grid_n, self.box)
        return MediumProfile.bump(g, self.gamma_amp, self.mu_amp, self.center, self.width, None, self.eps0, self.mu0)


def _lowest_E_part(F: FieldExpansion, params: WaveParams) -> tuple[int, Callable[[np.ndarray], np.ndarray], list]:
    """Lowest-order part of the E field of an expansion as a numeric callable plus exact pieces."""
    ratio = params.mu0 / params.eps0
    pieces = []  # (degree, constant, Normalized)
    for (l, m), (a, b) in F.entries.items():
        if a != 0:
            c, T = lowest_E_formula(l, m, params)
            pieces.append((l + 1, a * c, T))
        if b != 0:
            c, I = lowest_H_formula(l, m, params)
            pieces.append((l, -ratio * b * c, I))
    N = min(p[0] for p in pieces)
    low = [(c, Tn) for d, c, Tn in pieces if d == N]

    def P(X):
        return sum(c * Tn.evaluate(X) for c, Tn in low)

    return N, P, low


def contradiction_report(
    cfg: CornerConfig | None = None,
    ratios: Sequence[float] = (8, 16, 32, 64),
) -> dict:
    """Tabulate |I0|..|I3| over |zeta| = r k for the corner configuration."""
    cfg = CornerConfig() if cfg is None else cfg
    params = cfg.params()
    F = cfg.expansion()
    verdict = classify_expansion(F, params)
    N, PN, low = _lowest_E_part(F, params)
    background = expansion_pair(F, params)
    m = cfg.medium()
    M = build_matrices(m, cfg.omega)
    k = M.k
    gamma0 = complex(cfg.eps0 * (1 + cfg.gamma_amp * math.exp(-sum(c * c for c in cfg.center) / (2 * (m.params["width"]) ** 2))))
    c_e = gamma0 / cfg.eps0
    c0 = (c_e - 1) * c_e ** (-0.5) * math.sqrt(cfg.eps0)
    no_contrast = abs(c_e - 1) < 1e-14
    rows = []
    inconclusive = False
    eta = np.cross([1.0, 1.0, 1.0], [1.0, -1.0, 0.0])
    eta /= np.linalg.norm(eta)
    for r in ratios:
        zeta = helmholtz_zeta(r * k, k)
        sol = neumann_cgo(m, cfg.omega, zeta, z0_from_constants(zeta, eta, c1E=1.0, k=k), matrices=M)
        diag = sol.diagnostics
        ok = diag["side_ok"] and diag["maxwell_r1"] < 1e-6 and diag["maxwell_r2"] < 1e-6
        inconclusive |= not ok
        pair = CgoPair(sol)
        E0 = sol.leading_E()
        first = [1.0 / max(zeta[j].real, 1e-12) for j in range(3)]
        rules = []
        for j in range(3):
            xa, wa = _panels(0.0, cfg.epsilon, first[j], cfg.quad_n)
            xb, wb = _panels(cfg.epsilon, cfg.a, first[j], cfg.quad_n)
            rules.append((np.concatenate([xa, xb]), np.concatenate([wa, wb]), len(xa)))
        xs = [rl[0] for rl in rules]
        W = rules[0][1][:, None, None] * rules[1][1][None, :, None] * rules[2][1][None, None, :]
        inN = np.zeros(W.shape, bool)
        inN[: rules[0][2], : rules[1][2], : rules[2][2]] = True
        X = np.stack(np.meshgrid(*xs, indexing="ij"), axis=-1)
        ex = np.exp(-(X @ zeta))
        Einc, Hinc = background.fields_tensor(*xs)
        g, mu = pair.medium_tensor(*xs)
        Et, Ht = pair.remainders_tensor(*xs)
        P = PN(X)
        gt = g - cfg.eps0
        mt = mu - cfg.mu0
        isg = g ** (-0.5)
        E0P = P @ E0
        lead = isg[..., None] * E0
        I0 = c0 * np.sum((W * ex * E0P)[inN])
        f1 = gt * ex * np.sum(Einc * (lead + Et), axis=-1) - mt * ex * np.sum(Hinc * Ht, axis=-1)
        I1 = np.sum((W * f1)[~inN])
        f2 = isg * ex * ((gt - c0 * np.sqrt(g)) * E0P + gt * ((Einc - P) @ E0))
        I2 = np.sum((W * f2)[inN])
        f3 = gt * ex * np.sum(Et * Einc, axis=-1) - mt * ex * np.sum(Ht * Hinc, axis=-1)
        I3 = np.sum((W * f3)[inN])
        total = I0 + I1 + I2 + I3
        direct = np.sum(W * ex * (gt * np.sum(Einc * (lead + Et), axis=-1) - mt * np.sum(Hinc * Ht, axis=-1)))
        exact_orthant = c0 * sum(
            c * Tn.norm.value() * laplace_exact(Tn.body, E0, zeta) for c, Tn in low
        )
        tail = abs(c0) * sum(abs(c) * Tn.norm.value() * orthant_tail_bound(Tn.body, E0, zeta, cfg.epsilon) for c, Tn in low)
        ratio = (abs(I1) + abs(I2) + abs(I3)) / abs(I0) if abs(I0) > 0 else float("inf")
        rows.append(
            {
                "zeta_norm": float(np.linalg.norm(zeta)),
                "abs_I0": float(abs(I0)),
                "abs_I1": float(abs(I1)),
                "abs_I2": float(abs(I2)),
                "abs_I3": float(abs(I3)),
                "ratio": float(ratio),
                "I0_exact_orthant": float(abs(exact_orthant)),
                "I0_rel_vs_exact": float(abs(I0 - exact_orthant) / abs(exact_orthant)) if exact_orthant != 0 else None,
                "I0_tail_bound": float(tail),
                "I0_anchor_ok": bool(abs(I0 - exact_orthant) <= tail + 1e-6 * abs(exact_orthant)),
                "decomposition_error": float(abs(total - direct) / max(abs(direct), 1e-300)),
                "cgo_ok": bool(ok),
                "side_h": diag["side_h"],
                "maxwell_r1": diag["maxwell_r1"],
                "iterations": diag["iterations"],
            }
        )
    rs = [row["ratio"] for row in rows]
    decreasing = len(rs) >= 3 and rs[-3] > rs[-2] > rs[-1]
    fits = {
        name: fit_slope([row["zeta_norm"] for row in rows], [row[name] for row in rows])
        for name in ("abs_I0", "abs_I2", "abs_I3")
        if all(row[name] > 0 for row in rows)
    }
    # the first sweep point is pre-asymptotic; the tail fit uses the last three
    tail_fits = {
        name: fit_slope([row["zeta_norm"] for row in rows[-3:]], [row[name] for row in rows[-3:]])
        for name in fits
        if len(rows) >= 3
    }
    return {
        "config": {key: (list(v) if isinstance(v, tuple) else v) for key, v in asdict(cfg).items()},
        "incident_verdict": verdict.to_json(),
        "N": N,
        "c0": [c0.real, c0.imag],
        "no_contrast": no_contrast,
        "rows": rows,
        "ratio_strictly_decreasing_last3": bool(decreasing),
        "fits": fits,
        "fits_last3": tail_fits,
        "predicted": {"I0": -(N + 3), "I2": -(N + 4), "I3": f"< {-(N + 3)}"},
        "inconclusive": bool(inconclusive or no_contrast),
        "statement": SHADOW_STATEMENT,
    }


CSV_COLUMNS = ("zeta_norm", "abs_I0", "abs_I1", "abs_I2", "abs_I3", "ratio", "I0_exact_orthant", "I0_tail_bound")


def report_csv(report: dict) -> str:
    """Plot-ready CSV of the sweep rows, with fitted slopes as trailing comment lines."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report["rows"]:
        w.writerow([repr(row[c]) for c in CSV_COLUMNS])
    for name, fit in report.get("fits", {}).items():
        buf.write(f"# slope {name} {fit['slope']:.6f}\n")
    return buf.getvalue()
