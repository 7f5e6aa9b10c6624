"""Solid spherical harmonics and the vector families T, I, N as exact polynomials.

Convention: Y_l^m = c_{l,m} P_l^{|m|}(cos theta) e^{i m phi} with
c_{l,m}^2 = (2l+1)/(4 pi) (l-|m|)!/(l+|m|)! and P_l^m(t) = (1-t^2)^{m/2} d^m P_l/dt^m
(no Condon-Shortley phase), so Y_l^{-m} is the complex conjugate of Y_l^m.

Every object is returned as ``norm * body`` where the body has Gaussian
rational coefficients and the norm is sqrt(r * pi^k) with r rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .polycore import GaussianRational, HomoPoly, VecHomoPoly, gradient

__all__ = [
    "NormTag",
    "Normalized",
    "legendre_coeffs",
    "solid_Y",
    "vector_I",
    "vector_T",
    "vector_N",
    "sphere_quadrature",
    "sphere_inner",
]


@dataclass(frozen=True)
class NormTag:
    """The positive constant sqrt(rational * pi**pi_power)."""

    rational: Fraction
    pi_power: int = 0

    def __post_init__(self):
        r = Fraction(self.rational)
        if r <= 0:
            raise ValueError("NormTag rational must be positive")
        object.__setattr__(self, "rational", r)

    @property
    def squared(self) -> tuple[Fraction, int]:
        return self.rational, self.pi_power

    def value(self) -> float:
        return math.sqrt(float(self.rational) * math.pi ** self.pi_power)

    def times_sq(self, r: Fraction) -> "NormTag":
        """Multiply the constant by sqrt(r)."""
        return NormTag(self.rational * Fraction(r), self.pi_power)

    def __mul__(self, other: "NormTag") -> "NormTag":
        return NormTag(self.rational * other.rational, self.pi_power + other.pi_power)

    def format(self) -> str:
        return f"norm: {self.rational.numerator}/{self.rational.denominator} ; pi^{self.pi_power}"

    @classmethod
    def parse(cls, line: str) -> "NormTag":
        body = line.split(":", 1)[1]
        r, p = body.split(";")
        return cls(Fraction(r.strip()), int(p.strip().removeprefix("pi^")))


Body = Union[HomoPoly, VecHomoPoly]


@dataclass(frozen=True)
class Normalized:
    """A polynomial body times an exact irrational constant."""

    body: Body
    norm: NormTag

    @property
    def degree(self) -> int:
        return self.body.degree

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.norm.value() * self.body.evaluate(points)


@lru_cache(maxsize=None)
def legendre_coeffs(l: int) -> tuple[Fraction, ...]:
    """p_l^{(k)}, k = 0..l: the coefficient of t^{l-k} in P_l(t)."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    out = [Fraction(0)] * (l + 1)
    for k in range(l // 2 + 1):
        out[2 * k] = Fraction((-1) ** k * math.comb(l, k) * math.comb(2 * l - 2 * k, l), 2**l)
    return tuple(out)


def _check_lm(l: int, m: int, mmax: int) -> None:
    if l < 0 or abs(m) > mmax:
        raise ValueError(f"index out of range: l={l}, m={m}")


def _cnorm_sq(l: int, m: int) -> Fraction:
    """c_{l,m}^2 without the 1/pi factor."""
    am = abs(m)
    return Fraction((2 * l + 1) * math.factorial(l - am), 4 * math.factorial(l + am))


@lru_cache(maxsize=None)
def _solid_body(l: int, m: int) -> HomoPoly:
    am = abs(m)
    x1, x2, x3 = (HomoPoly.variable(j) for j in (1, 2, 3))
    z = x1 + x2.scale(GaussianRational(0, 1))
    zm = z**am
    r2 = HomoPoly.r2()
    coeffs = legendre_coeffs(l)
    body = HomoPoly.zero(l)
    for n in range(am, l + 1):
        c = coeffs[l - n]
        if c == 0:
            continue
        # d^m/dt^m of t^n gives n!/(n-m)! t^{n-m}
        fac = Fraction(math.factorial(n), math.factorial(n - am))
        term = zm * (x3 ** (n - am)) * (r2 ** ((l - n) // 2))
        body = body + term.scale(c * fac)
    return body.conjugate() if m < 0 else body


def solid_Y(l: int, m: int) -> Normalized:
    """Y_l^m(x/|x|) |x|^l."""
    _check_lm(l, m, l)
    return Normalized(_solid_body(l, m), NormTag(_cnorm_sq(l, m), -1))


def vector_I(l: int, m: int) -> Normalized:
    """I_l^m(x/|x|) |x|^l = grad(Y_{l+1}^m |x|^{l+1}) / sqrt((l+1)(2l+3))."""
    _check_lm(l, m, l + 1)
    y = solid_Y(l + 1, m)
    return Normalized(gradient(y.body), y.norm.times_sq(Fraction(1, (l + 1) * (2 * l + 3))))


def vector_T(l: int, m: int) -> Normalized:
    """T_l^m(x/|x|) |x|^l = sqrt((2l+1)/(l+1)) (I_{l-1}^m |x|^{l-1}) x."""
    if l < 1:
        raise ValueError("T_l is defined for l >= 1")
    _check_lm(l, m, l)
    i = vector_I(l - 1, m)
    body = i.body.cross(VecHomoPoly.identity())
    return Normalized(body, i.norm.times_sq(Fraction(2 * l + 1, l + 1)))


def vector_N(l: int, m: int) -> Normalized:
    """N_l^m(x/|x|) |x|^l with the 1/sqrt(l(2l-1)) normalization.

    Assembled as -sqrt((l-1)/l) |x|^2 (I_{l-2}^m |x|^{l-2}) + sqrt((2l-1)/l) (Y_{l-1}^m |x|^{l-1}) x,
    which in bodies reads (-|x|^2 grad y + (2l-1) y x) with y the body of Y_{l-1}^m.
    """
    if l < 1:
        raise ValueError("N_l is defined for l >= 1")
    _check_lm(l, m, l - 1)
    y = solid_Y(l - 1, m)
    radial = VecHomoPoly.identity() * y.body.scale(2 * l - 1)
    if l >= 2:
        body = radial - gradient(y.body) * HomoPoly.r2()
    else:
        body = radial
    return Normalized(body, y.norm.times_sq(Fraction(1, l * (2 * l - 1))))


# ---------------------------------------------------------------------------
# Numeric sphere quadrature (cross-check only)


@lru_cache(maxsize=16)
def sphere_quadrature(n: int = 32) -> tuple[np.ndarray, np.ndarray]:
    """Product rule: Gauss-Legendre in cos(theta) times the trapezoid rule in phi.

    Exact for spherical polynomials of degree < min(2n, 2n).
    Returns (points (M,3), weights (M,)).
    """
    t, wt = np.polynomial.legendre.leggauss(n)
    nphi = 2 * n
    phi = 2 * np.pi * np.arange(nphi) / nphi
    wphi = np.full(nphi, 2 * np.pi / nphi)
    T, PHI = np.meshgrid(t, phi, indexing="ij")
    S = np.sqrt(1 - T**2)
    pts = np.stack([S * np.cos(PHI), S * np.sin(PHI), T], axis=-1).reshape(-1, 3)
    w = np.outer(wt, wphi).reshape(-1)
    return pts, w


def sphere_inner(a: Normalized, b: Normalized, n: int = 32) -> complex:
    """<a, b> = integral over the unit sphere of a . conj(b)."""
    pts, w = sphere_quadrature(n)
    fa = a.evaluate(pts)
    fb = b.evaluate(pts)
    if fa.ndim == 1:
        return complex(np.sum(w * fa * np.conj(fb)))
    return complex(np.sum(w[:, None] * fa * np.conj(fb)))
