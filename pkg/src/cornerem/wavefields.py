"""Truncated Taylor expansions of Maxwell wavefunctions and incident waves.

E_{l,m} = j_{l+1}(k|x|) T_{l+1}^m and H_{l,m} = -(i/(omega mu0)) curl E_{l,m},
expanded about the origin.  The spherical Bessel series

    j_L(t) = sum_n (-1)^n (L+n)! 2^L / (n! (2L+2n+1)!) t^(L+2n)

turns each wavefunction into a sum of |x|^(2n) times a fixed solid vector
harmonic, so every homogeneous part is an exact polynomial body times one
float factor.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import spherical_jn

from .harmonics import Normalized, vector_I, vector_N, vector_T
from .polycore import HomoPoly, MultiIndex, VecHomoPoly, monomials

__all__ = [
    "WaveParams",
    "TaylorField",
    "FieldExpansion",
    "bessel_coeff",
    "wavefunction_E",
    "wavefunction_H",
    "lowest_E_formula",
    "lowest_H_formula",
    "plane_wave_taylor",
    "point_wave_taylor",
    "green_taylor",
    "synthesize",
    "wavefunction_values",
]


@dataclass(frozen=True)
class WaveParams:
    omega: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        for name in ("omega", "eps0", "mu0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def k(self) -> float:
        return self.omega * math.sqrt(self.mu0 * self.eps0)

    @property
    def admittance(self) -> float:
        """sqrt(eps0 / mu0)."""
        return math.sqrt(self.eps0 / self.mu0)


@dataclass
class TaylorField:
    """Truncated vector Taylor series: multi-index -> complex 3-vector."""

    max_degree: int
    coeffs: dict[MultiIndex, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for a, c in self.coeffs.items():
            a = tuple(int(v) for v in a)
            if sum(a) > self.max_degree:
                raise ValueError(f"term {a} exceeds truncation order {self.max_degree}")
            c = np.asarray(c, dtype=complex).reshape(3)
            clean[a] = c
        self.coeffs = clean

    def add_poly(self, P: VecHomoPoly, factor: complex) -> None:
        """Accumulate factor * P (exact body) into the series."""
        if P.degree > self.max_degree:
            return
        for j in range(3):
            for a, c in P.components[j].coeffs.items():
                v = self.coeffs.setdefault(a, np.zeros(3, dtype=complex))
                v[j] += factor * complex(c)

    def degree_part(self, n: int) -> dict[MultiIndex, np.ndarray]:
        return {a: c for a, c in self.coeffs.items() if sum(a) == n}

    def as_mapping(self) -> dict[MultiIndex, tuple[complex, complex, complex]]:
        return {a: tuple(complex(v) for v in c) for a, c in self.coeffs.items()}  # type: ignore[misc]

    def scaled(self, s: complex) -> "TaylorField":
        return TaylorField(self.max_degree, {a: s * c for a, c in self.coeffs.items()})

    def __add__(self, other: "TaylorField") -> "TaylorField":
        out = TaylorField(min(self.max_degree, other.max_degree))
        for src in (self, other):
            for a, c in src.coeffs.items():
                if sum(a) <= out.max_degree:
                    out.coeffs[a] = out.coeffs.get(a, np.zeros(3, dtype=complex)) + c
        return out

    def truncated(self, n: int) -> "TaylorField":
        return TaylorField(n, {a: c.copy() for a, c in self.coeffs.items() if sum(a) <= n})

    def derivative(self, axis: int) -> "TaylorField":
        """d/dx_axis, valid through degree max_degree - 1."""
        j = axis - 1
        out = {}
        for a, c in self.coeffs.items():
            if a[j] == 0:
                continue
            b = list(a)
            b[j] -= 1
            out[tuple(b)] = a[j] * c
        return TaylorField(max(self.max_degree - 1, 0), out)

    def component(self, j: int) -> dict[MultiIndex, complex]:
        return {a: complex(c[j - 1]) for a, c in self.coeffs.items()}

    def curl(self) -> "TaylorField":
        d = {ax: self.derivative(ax) for ax in (1, 2, 3)}
        keys = set().union(*(v.coeffs for v in d.values()))
        out = {}
        zero = np.zeros(3, dtype=complex)
        for a in keys:
            g = [d[ax].coeffs.get(a, zero) for ax in (1, 2, 3)]  # g[ax][comp] = d_ax P_comp
            out[a] = np.array([g[1][2] - g[2][1], g[2][0] - g[0][2], g[0][1] - g[1][0]])
        return TaylorField(max(self.max_degree - 1, 0), out)

    def divergence(self) -> dict[MultiIndex, complex]:
        out: dict[MultiIndex, complex] = {}
        for ax in (1, 2, 3):
            for a, c in self.derivative(ax).coeffs.items():
                out[a] = out.get(a, 0j) + c[ax - 1]
        return out

    def laplacian(self) -> "TaylorField":
        out = TaylorField(max(self.max_degree - 2, 0))
        for ax in (1, 2, 3):
            out = out + self.derivative(ax).derivative(ax)
        return out

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        out = np.zeros(pts.shape[:-1] + (3,), dtype=complex)
        for a, c in self.coeffs.items():
            mono = pts[..., 0] ** a[0] * pts[..., 1] ** a[1] * pts[..., 2] ** a[2]
            out += mono[..., None] * c
        return out

    def to_json(self) -> dict:
        terms = [
            {"alpha": list(a), "c": [[float(v.real), float(v.imag)] for v in c]}
            for a, c in sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), tuple(-x for x in kv[0])))
        ]
        return {"max_degree": self.max_degree, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping) -> "TaylorField":
        if "max_degree" not in data or "terms" not in data:
            raise ValueError("TaylorField JSON needs 'max_degree' and 'terms'")
        coeffs = {}
        for t in data["terms"]:
            a = tuple(int(v) for v in t["alpha"])
            c = np.array([complex(re, im) for re, im in t["c"]])
            if len(a) != 3 or c.shape != (3,):
                raise ValueError(f"malformed term {t!r}")
            coeffs[a] = coeffs.get(a, np.zeros(3, dtype=complex)) + c
        return cls(int(data["max_degree"]), coeffs)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def bessel_coeff(L: int, n: int) -> Fraction:
    """Coefficient of t^(L+2n) in the spherical Bessel function j_L(t)."""
    return Fraction((-1) ** n * math.factorial(L + n) * 2**L, math.factorial(n) * math.factorial(2 * L + 2 * n + 1))


def _radial_series(
    out: TaylorField, base: Normalized, L: int, k_offset: int, prefactor: complex, k: float
) -> None:
    """Add prefactor * sum_n c_{L,n} k^(k_offset+2n) |x|^(2n) base to out."""
    r2 = HomoPoly.r2()
    body = base.body
    norm = base.norm.value()
    n = 0
    while base.degree + 2 * n <= out.max_degree:
        term = body if n == 0 else body * (r2**n)
        factor = prefactor * norm * float(bessel_coeff(L, n)) * k ** (k_offset + 2 * n)
        out.add_poly(term, factor)
        n += 1


def wavefunction_E(l: int, m: int, trunc: int, params: WaveParams) -> TaylorField:
    """Taylor series of j_{l+1}(k|x|) T_{l+1}^m through total degree ``trunc``."""
    if l < 0 or abs(m) > l + 1:
        raise ValueError(f"index out of range: l={l}, m={m}")
    if trunc < l + 1:
        raise ValueError("truncation below lowest order")
    out = TaylorField(trunc)
    _radial_series(out, vector_T(l + 1, m), l + 1, l + 1, 1.0, params.k)
    return out


def wavefunction_H(l: int, m: int, trunc: int, params: WaveParams) -> TaylorField:
    """Taylor series of H_{l,m} through degree ``trunc``.

    H_{l,m} = -i sqrt(eps0/mu0) / sqrt(2l+3) (sqrt(l+2) j_l(k|x|) I_l^m + sqrt(l+1) j_{l+2}(k|x|) N_{l+2}^m).
    """
    if l < 0 or abs(m) > l + 1:
        raise ValueError(f"index out of range: l={l}, m={m}")
    if trunc < l:
        raise ValueError("truncation below lowest order")
    out = TaylorField(trunc)
    pre = -1j * params.admittance / math.sqrt(2 * l + 3)
    _radial_series(out, vector_I(l, m), l, l, pre * math.sqrt(l + 2), params.k)
    _radial_series(out, vector_N(l + 2, m), l + 2, l + 2, pre * math.sqrt(l + 1), params.k)
    return out


def _radial_factor(L: int, k: float, r: np.ndarray) -> np.ndarray:
    """j_L(k r) / r^L, by its power series for small k r and by scipy otherwise."""
    t = k * r
    out = np.empty_like(r, dtype=float)
    small = t < 2.0
    ts = t[small]
    acc = np.zeros_like(ts)
    for n in range(30):
        acc += float(bessel_coeff(L, n)) * ts ** (2 * n)
    out[small] = acc * k**L
    big = ~small
    out[big] = spherical_jn(L, t[big]) / r[big] ** L
    return out


def wavefunction_values(l: int, m: int, points: np.ndarray, params: WaveParams) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (E_{l,m}, H_{l,m}) from the closed forms with scipy spherical Bessel functions."""
    if l < 0 or abs(m) > l + 1:
        raise ValueError(f"index out of range: l={l}, m={m}")
    pts = np.asarray(points, dtype=float)
    r = np.linalg.norm(pts, axis=-1)
    k = params.k
    T = vector_T(l + 1, m).evaluate(pts)
    E = _radial_factor(l + 1, k, r)[..., None] * T
    pre = -1j * params.admittance / math.sqrt(2 * l + 3)
    I = vector_I(l, m).evaluate(pts)
    Nf = vector_N(l + 2, m).evaluate(pts)
    H = pre * (
        math.sqrt(l + 2) * _radial_factor(l, k, r)[..., None] * I
        + math.sqrt(l + 1) * _radial_factor(l + 2, k, r)[..., None] * Nf
    )
    return E, H


def _lowest_const(l: int) -> float:
    return 2**l * math.factorial(l) / math.factorial(2 * l + 1)


def lowest_E_formula(l: int, m: int, params: WaveParams) -> tuple[complex, Normalized]:
    """(constant, T_{l+1}^m |x|^{l+1}) with the degree-(l+1) part of E_{l,m} equal to constant * that field."""
    c = _lowest_const(l) / (2 * l + 3) * params.k ** (l + 1)
    return complex(c), vector_T(l + 1, m)


def lowest_H_formula(l: int, m: int, params: WaveParams) -> tuple[complex, Normalized]:
    """(constant, I_l^m |x|^l) with the degree-l part of H_{l,m} equal to constant * that field."""
    c = -1j * params.admittance * math.sqrt((l + 2) / (2 * l + 3)) * _lowest_const(l) * params.k**l
    return complex(c), vector_I(l, m)


def plane_wave_taylor(
    d: Sequence[float], dperp: Sequence[complex], trunc: int, params: WaveParams, tol: float = 1e-12
) -> tuple[TaylorField, TaylorField]:
    """E = exp(ik x.d) dperp and H = sqrt(eps0/mu0) exp(ik x.d) d x dperp."""
    d = np.asarray(d, dtype=float)
    dp = np.asarray(dperp, dtype=complex)
    if abs(np.linalg.norm(d) - 1) > tol or abs(np.linalg.norm(dp) - 1) > tol:
        raise ValueError("d and dperp must be unit vectors")
    if abs(np.dot(d, dp)) > tol:
        raise ValueError("d and dperp must be orthogonal")
    k = params.k
    h = params.admittance * np.cross(d, dp)
    E, H = TaylorField(trunc), TaylorField(trunc)
    for n in range(trunc + 1):
        for a in monomials(n):
            s = (1j * k) ** n * np.prod(d ** np.array(a)) / (math.factorial(a[0]) * math.factorial(a[1]) * math.factorial(a[2]))
            E.coeffs[a] = s * dp
            H.coeffs[a] = s * h
    return E, H


# ---------------------------------------------------------------------------
# Point waves: truncated power-series composition


class _Series:
    """Dense truncated scalar power series in three variables, |alpha| <= D."""

    def __init__(self, D: int, a: np.ndarray | None = None):
        self.D = D
        self.a = np.zeros((D + 1,) * 3, dtype=complex) if a is None else a
        i = np.arange(D + 1)
        self.mask = (i[:, None, None] + i[None, :, None] + i[None, None, :]) <= D
        self.a = self.a * self.mask

    def __add__(self, o: "_Series") -> "_Series":
        return _Series(self.D, self.a + o.a)

    def scale(self, s: complex) -> "_Series":
        return _Series(self.D, self.a * s)

    def __mul__(self, o: "_Series") -> "_Series":
        D = self.D
        full = fftconvolve(self.a, o.a)[: D + 1, : D + 1, : D + 1]
        return _Series(D, full)

    @classmethod
    def constant(cls, D: int, c: complex) -> "_Series":
        s = cls(D)
        s.a[0, 0, 0] = c
        return s

    def compose(self, coeffs: Iterable[complex]) -> "_Series":
        """sum_n coeffs[n] self^n; self must have zero constant term."""
        coeffs = list(coeffs)
        out = _Series.constant(self.D, 0)
        power = _Series.constant(self.D, 1)
        for n, c in enumerate(coeffs):
            if n > 0:
                power = power * self
            out = out + power.scale(c)
        return out


def green_taylor(y: Sequence[float], k: float, D: int) -> np.ndarray:
    """Taylor coefficients of exp(ik|x-y|)/(4 pi |x-y|) about x = 0 through degree D.

    Returned as a dense (D+1)^3 array indexed by the exponent.  Built from
    s = |y| (1+u)^(1/2) with u = (|x|^2 - 2 x.y)/|y|^2 by series composition;
    the result is exact up to floating-point rounding.
    """
    y = np.asarray(y, dtype=float)
    ry = float(np.linalg.norm(y))
    u = _Series(D)
    u.a[2, 0, 0] = u.a[0, 2, 0] = u.a[0, 0, 2] = 1 / ry**2
    u.a[1, 0, 0], u.a[0, 1, 0], u.a[0, 0, 1] = (-2 * y / ry**2).tolist()
    u = _Series(D, u.a)
    half = [complex(_binom(0.5, n)) for n in range(D + 1)]
    g = u.compose([0.0] + half[1:])  # (1+u)^(1/2) - 1
    inv_sqrt = u.compose([_binom(-0.5, n) for n in range(D + 1)])
    ex = g.compose([(1j * k * ry) ** n / math.factorial(n) for n in range(D + 1)])
    phi = (ex * inv_sqrt).scale(np.exp(1j * k * ry) / (4 * np.pi * ry))
    return phi.a


def _binom(a: float, n: int) -> float:
    out = 1.0
    for i in range(n):
        out *= (a - i) / (i + 1)
    return out


def point_wave_taylor(
    a: Sequence[complex], y: Sequence[float], trunc: int, params: WaveParams, min_radius: float = 0.5
) -> tuple[TaylorField, TaylorField]:
    """E = curl(a Phi_y), H = curl curl(a Phi_y) / (i omega mu0), as Taylor series about 0."""
    y = np.asarray(y, dtype=float)
    if np.linalg.norm(y) < min_radius:
        raise ValueError("source inside expansion neighborhood")
    a = np.asarray(a, dtype=complex)
    D = trunc + 2
    phi = green_taylor(y, params.k, D)
    P = TaylorField(D)
    for n in range(D + 1):
        for al in monomials(n):
            P.coeffs[al] = phi[al] * a
    E = P.curl().truncated(trunc + 1)
    H = E.curl().scaled(1 / (1j * params.omega * params.mu0)).truncated(trunc)
    return E.truncated(trunc), H


# ---------------------------------------------------------------------------
# Expansions in the (EH)/(HE) basis


@dataclass(frozen=True)
class FieldExpansion:
    """(E, H) = sum a_{l,m} (E_{l,m}, H_{l,m}) + b_{l,m} (-(mu0/eps0) H_{l,m}, E_{l,m})."""

    entries: Mapping[tuple[int, int], tuple[complex, complex]]

    def __post_init__(self):
        clean = {}
        for (l, m), (a, b) in self.entries.items():
            if l < 0 or abs(m) > l + 1:
                raise ValueError(f"index out of range: l={l}, m={m}")
            a, b = complex(a), complex(b)
            if a != 0 or b != 0:
                clean[(int(l), int(m))] = (a, b)
        if not clean:
            raise ValueError("empty expansion")
        object.__setattr__(self, "entries", clean)

    @property
    def l_min(self) -> int:
        return min(l for l, _ in self.entries)

    def block(self, l: int) -> dict[int, tuple[complex, complex]]:
        return {m: ab for (ll, m), ab in self.entries.items() if ll == l}

    def scaled(self, s: complex) -> "FieldExpansion":
        return FieldExpansion({key: (s * a, s * b) for key, (a, b) in self.entries.items()})

    def to_json(self) -> dict:
        return {
            "entries": [
                {"l": l, "m": m, "a": [a.real, a.imag], "b": [b.real, b.imag]} for (l, m), (a, b) in sorted(self.entries.items())
            ]
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FieldExpansion":
        ent = {}
        for e in data["entries"]:
            ent[(int(e["l"]), int(e["m"]))] = (complex(*e["a"]), complex(*e["b"]))
        return cls(ent)


def synthesize(F: FieldExpansion, trunc: int, params: WaveParams) -> tuple[TaylorField, TaylorField]:
    """Taylor series of the field pair described by F."""
    E, H = TaylorField(trunc), TaylorField(trunc)
    ratio = params.mu0 / params.eps0
    for (l, m), (a, b) in sorted(F.entries.items()):
        if l > trunc:
            continue
        El = wavefunction_E(l, m, max(trunc, l + 1), params).truncated(trunc)
        Hl = wavefunction_H(l, m, trunc, params)
        E = E + El.scaled(a) + Hl.scaled(-ratio * b)
        H = H + Hl.scaled(a) + El.scaled(b)
    return E, H
