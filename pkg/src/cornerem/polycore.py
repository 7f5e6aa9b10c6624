"""Exact homogeneous (vector) polynomials in three variables.

Coefficients live in the Gaussian rationals Q(i).  Every object here is
immutable; arithmetic returns new objects.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

MultiIndex = tuple[int, int, int]

__all__ = [
    "ContractViolation",
    "GaussianRational",
    "HomoPoly",
    "VecHomoPoly",
    "LowestOrderPart",
    "monomials",
    "differentiate",
    "divergence",
    "curl",
    "gradient",
    "is_divergence_free",
    "is_curl_free",
    "is_harmonic",
    "divergence_defects",
    "curl_defects",
    "harmonic_defects",
    "lowest_order_part",
    "format_poly",
    "parse_poly",
    "format_vec",
    "parse_vec",
]


class ContractViolation(ValueError):
    """Raised when an operation's precondition does not hold."""


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(float(x)):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(float(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class GaussianRational:
    """Exact complex rational re + i*im."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (complex, np.complexfloating)):
            return cls(float(x.real), float(x.imag))
        return cls(x, 0)

    def __add__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __mul__(self, other):
        o = GaussianRational.coerce(other)
        return GaussianRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.coerce(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational((self.re * o.re + self.im * o.im) / d, (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __eq__(self, other) -> bool:
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        return f"{_fmt_frac(self.re)} + {_fmt_frac(self.im)} i"


Scalar = Union[GaussianRational, Fraction, int, complex, float]

ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I_UNIT = GaussianRational(0, 1)


def monomials(degree: int) -> list[MultiIndex]:
    """All exponents of total order ``degree``, in descending lexicographic order."""
    if degree < 0:
        return []
    out = []
    for a1 in range(degree, -1, -1):
        for a2 in range(degree - a1, -1, -1):
            out.append((a1, a2, degree - a1 - a2))
    return out


def _add_idx(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _unit(j: int) -> MultiIndex:
    return tuple(1 if i == j else 0 for i in range(3))  # type: ignore[return-value]


@dataclass(frozen=True)
class HomoPoly:
    """Homogeneous polynomial of a fixed total degree.

    The zero polynomial keeps a degree tag from its context; it is
    compatible with any degree in sums.
    """

    degree: int
    coeffs: Mapping[MultiIndex, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        clean: dict[MultiIndex, GaussianRational] = {}
        for alpha, c in self.coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != 3 or min(alpha) < 0:
                raise ValueError(f"bad multi-index {alpha}")
            if sum(alpha) != self.degree:
                raise ValueError(f"multi-index {alpha} has order {sum(alpha)} != degree {self.degree}")
            c = GaussianRational.coerce(c)
            if c:
                clean[alpha] = c
        object.__setattr__(self, "coeffs", clean)

    # construction helpers
    @classmethod
    def zero(cls, degree: int = 0) -> "HomoPoly":
        return cls(degree, {})

    @classmethod
    def monomial(cls, alpha: Sequence[int], c: Scalar = 1) -> "HomoPoly":
        alpha = tuple(alpha)
        return cls(sum(alpha), {alpha: GaussianRational.coerce(c)})

    @classmethod
    def variable(cls, j: int) -> "HomoPoly":
        """x_j for j in 1..3."""
        return cls.monomial(_unit(j - 1))

    @classmethod
    def constant(cls, c: Scalar) -> "HomoPoly":
        return cls(0, {(0, 0, 0): GaussianRational.coerce(c)})

    @classmethod
    def r2(cls) -> "HomoPoly":
        """|x|^2 = x1^2 + x2^2 + x3^2."""
        return cls(2, {(2, 0, 0): ONE, (0, 2, 0): ONE, (0, 0, 2): ONE})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HomoPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        if self.is_zero():
            return hash("zero-poly")
        return hash((self.degree, frozenset(self.coeffs.items())))

    def __getitem__(self, alpha: MultiIndex) -> GaussianRational:
        return self.coeffs.get(tuple(alpha), ZERO)

    def items(self) -> Iterator[tuple[MultiIndex, GaussianRational]]:
        return iter(sorted(self.coeffs.items(), reverse=True))

    def _merge_degree(self, other: "HomoPoly") -> int:
        if self.is_zero():
            return other.degree
        if other.is_zero():
            return self.degree
        if self.degree != other.degree:
            raise ValueError(f"degree mismatch {self.degree} vs {other.degree}")
        return self.degree

    def __add__(self, other: "HomoPoly") -> "HomoPoly":
        deg = self._merge_degree(other)
        out = dict(self.coeffs)
        for a, c in other.coeffs.items():
            out[a] = out.get(a, ZERO) + c
        return HomoPoly(deg, out)

    def __neg__(self) -> "HomoPoly":
        return HomoPoly(self.degree, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other: "HomoPoly") -> "HomoPoly":
        return self + (-other)

    def scale(self, c: Scalar) -> "HomoPoly":
        c = GaussianRational.coerce(c)
        return HomoPoly(self.degree, {a: v * c for a, v in self.coeffs.items()})

    def __mul__(self, other) -> "HomoPoly":
        if isinstance(other, HomoPoly):
            out: dict[MultiIndex, GaussianRational] = {}
            for a, ca in self.coeffs.items():
                for b, cb in other.coeffs.items():
                    k = _add_idx(a, b)
                    out[k] = out.get(k, ZERO) + ca * cb
            return HomoPoly(self.degree + other.degree, out)
        return self.scale(other)

    def __rmul__(self, other) -> "HomoPoly":
        return self.scale(other)

    def __pow__(self, n: int) -> "HomoPoly":
        result = HomoPoly.constant(1)
        for _ in range(n):
            result = result * self
        return result

    def conjugate(self) -> "HomoPoly":
        return HomoPoly(self.degree, {a: c.conjugate() for a, c in self.coeffs.items()})

    def differentiate(self, axis: int) -> "HomoPoly":
        return differentiate(self, axis)

    def laplacian(self) -> "HomoPoly":
        out = HomoPoly.zero(max(self.degree - 2, 0))
        for j in (1, 2, 3):
            out = out + differentiate(differentiate(self, j), j)
        return out

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at points of shape (..., 3); returns complex array of shape (...)."""
        pts = np.asarray(points)
        out = np.zeros(pts.shape[:-1], dtype=complex)
        if self.is_zero():
            return out
        x1, x2, x3 = pts[..., 0], pts[..., 1], pts[..., 2]
        pw = [[np.ones_like(x, dtype=complex if np.iscomplexobj(x) else float)] for x in (x1, x2, x3)]
        for k, x in enumerate((x1, x2, x3)):
            for _ in range(self.degree):
                pw[k].append(pw[k][-1] * x)
        for (a1, a2, a3), c in self.coeffs.items():
            out = out + complex(c) * pw[0][a1] * pw[1][a2] * pw[2][a3]
        return out

    def to_complex_dict(self) -> dict[MultiIndex, complex]:
        return {a: complex(c) for a, c in self.coeffs.items()}

    def __repr__(self) -> str:
        if self.is_zero():
            return f"HomoPoly(0; degree {self.degree})"
        terms = " + ".join(f"({c.re}{'+' if c.im >= 0 else ''}{c.im}i)x^{a}" for a, c in self.items())
        return f"HomoPoly({terms})"


def differentiate(p: HomoPoly, axis: int) -> HomoPoly:
    """Partial derivative with respect to x_axis (axis in 1..3)."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    j = axis - 1
    out: dict[MultiIndex, GaussianRational] = {}
    for a, c in p.coeffs.items():
        if a[j] == 0:
            continue
        b = list(a)
        b[j] -= 1
        out[tuple(b)] = c * a[j]  # type: ignore[index]
    return HomoPoly(max(p.degree - 1, 0), out)


@dataclass(frozen=True)
class VecHomoPoly:
    """Three homogeneous polynomials sharing a degree."""

    components: tuple[HomoPoly, HomoPoly, HomoPoly]
    degree: int = -1

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 3:
            raise ValueError("a vector polynomial has exactly three components")
        degs = {c.degree for c in comps if not c.is_zero()}
        if len(degs) > 1:
            raise ValueError(f"nonzero components have different degrees {sorted(degs)}")
        deg = self.degree
        if degs:
            d = degs.pop()
            if deg >= 0 and deg != d:
                raise ValueError(f"declared degree {deg} but components have degree {d}")
            deg = d
        elif deg < 0:
            deg = comps[0].degree
        comps = tuple(c if not c.is_zero() else HomoPoly.zero(deg) for c in comps)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "degree", deg)

    @classmethod
    def from_coeffs(cls, comps: Sequence[Mapping[MultiIndex, Scalar]], degree: int) -> "VecHomoPoly":
        return cls(tuple(HomoPoly(degree, dict(c)) for c in comps), degree)  # type: ignore[arg-type]

    @classmethod
    def zero(cls, degree: int = 0) -> "VecHomoPoly":
        z = HomoPoly.zero(degree)
        return cls((z, z, z), degree)

    @classmethod
    def identity(cls) -> "VecHomoPoly":
        """The position field x = (x1, x2, x3)."""
        return cls(tuple(HomoPoly.variable(j) for j in (1, 2, 3)), 1)  # type: ignore[arg-type]

    def __getitem__(self, j: int) -> HomoPoly:
        """Component j, 1-based."""
        return self.components[j - 1]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VecHomoPoly):
            return NotImplemented
        return all(a == b for a, b in zip(self.components, other.components))

    def __hash__(self) -> int:
        return hash(self.components)

    def __add__(self, other: "VecHomoPoly") -> "VecHomoPoly":
        return VecHomoPoly(tuple(a + b for a, b in zip(self.components, other.components)))  # type: ignore[arg-type]

    def __neg__(self) -> "VecHomoPoly":
        return VecHomoPoly(tuple(-a for a in self.components), self.degree)  # type: ignore[arg-type]

    def __sub__(self, other: "VecHomoPoly") -> "VecHomoPoly":
        return self + (-other)

    def scale(self, c: Scalar) -> "VecHomoPoly":
        return VecHomoPoly(tuple(a.scale(c) for a in self.components), self.degree)  # type: ignore[arg-type]

    def __mul__(self, other) -> "VecHomoPoly":
        """Scalar or scalar-polynomial multiple."""
        if isinstance(other, HomoPoly):
            deg = self.degree + other.degree
            return VecHomoPoly(tuple(a * other for a in self.components), deg)  # type: ignore[arg-type]
        return self.scale(other)

    __rmul__ = __mul__

    def conjugate(self) -> "VecHomoPoly":
        return VecHomoPoly(tuple(a.conjugate() for a in self.components), self.degree)  # type: ignore[arg-type]

    def dot(self, other: "VecHomoPoly") -> HomoPoly:
        out = HomoPoly.zero(self.degree + other.degree)
        for a, b in zip(self.components, other.components):
            out = out + a * b
        return out

    def cross(self, other: "VecHomoPoly") -> "VecHomoPoly":
        a, b = self.components, other.components
        deg = self.degree + other.degree
        return VecHomoPoly(
            (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]), deg
        )

    def laplacian(self) -> "VecHomoPoly":
        return VecHomoPoly(tuple(c.laplacian() for c in self.components), max(self.degree - 2, 0))  # type: ignore[arg-type]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Shape (..., 3) complex."""
        return np.stack([c.evaluate(points) for c in self.components], axis=-1)

    def support(self) -> list[tuple[int, MultiIndex]]:
        return [(j + 1, a) for j, c in enumerate(self.components) for a in sorted(c.coeffs, reverse=True)]

    def __repr__(self) -> str:
        return f"VecHomoPoly(degree={self.degree}, {list(self.components)})"


def gradient(p: HomoPoly) -> VecHomoPoly:
    return VecHomoPoly(tuple(differentiate(p, j) for j in (1, 2, 3)), max(p.degree - 1, 0))  # type: ignore[arg-type]


def divergence(P: VecHomoPoly) -> HomoPoly:
    out = HomoPoly.zero(max(P.degree - 1, 0))
    for j in (1, 2, 3):
        out = out + differentiate(P[j], j)
    return out


def curl(P: VecHomoPoly) -> VecHomoPoly:
    d = differentiate
    return VecHomoPoly(
        (d(P[3], 2) - d(P[2], 3), d(P[1], 3) - d(P[3], 1), d(P[2], 1) - d(P[1], 2)),
        max(P.degree - 1, 0),
    )


# Coefficient-level identities.  These never call differentiate(); they read
# coefficients directly so that they form an independent route.

def divergence_defects(P: VecHomoPoly) -> list[MultiIndex]:
    """Multi-indices beta (|beta| = N-1) where sum_j (beta_j+1) p^(j)_{beta+e_j} != 0."""
    if P.degree == 0:
        return []
    bad = []
    for beta in monomials(P.degree - 1):
        s = ZERO
        for j in range(3):
            s = s + P.components[j][_add_idx(beta, _unit(j))] * (beta[j] + 1)
        if s:
            bad.append(beta)
    return bad


def curl_defects(P: VecHomoPoly) -> list[tuple[MultiIndex, int, int]]:
    """Triples (beta, j, l) violating (beta_l+1) p^(j)_{beta+e_l} = (beta_j+1) p^(l)_{beta+e_j}."""
    if P.degree == 0:
        return []
    bad = []
    for beta in monomials(P.degree - 1):
        for j in range(3):
            for l in range(j + 1, 3):
                lhs = P.components[j][_add_idx(beta, _unit(l))] * (beta[l] + 1)
                rhs = P.components[l][_add_idx(beta, _unit(j))] * (beta[j] + 1)
                if lhs != rhs:
                    bad.append((beta, j + 1, l + 1))
    return bad


def harmonic_defects(P: VecHomoPoly) -> list[tuple[MultiIndex, int]]:
    """Pairs (beta, j) with sum_l (beta_l+1)(beta_l+2) p^(j)_{beta+2e_l} != 0."""
    if P.degree < 2:
        return []
    bad = []
    for beta in monomials(P.degree - 2):
        for j in range(3):
            s = ZERO
            for l in range(3):
                two = tuple(2 if i == l else 0 for i in range(3))
                s = s + P.components[j][_add_idx(beta, two)] * ((beta[l] + 1) * (beta[l] + 2))  # type: ignore[arg-type]
            if s:
                bad.append((beta, j + 1))
    return bad


def is_divergence_free(P: VecHomoPoly, method: str = "operator") -> bool:
    if method == "operator":
        return divergence(P).is_zero()
    if method == "coefficients":
        return not divergence_defects(P)
    raise ValueError(f"unknown method {method!r}")


def is_curl_free(P: VecHomoPoly, method: str = "operator") -> bool:
    if method == "operator":
        return curl(P).is_zero()
    if method == "coefficients":
        return not curl_defects(P)
    raise ValueError(f"unknown method {method!r}")


def is_harmonic(P: VecHomoPoly, method: str = "operator") -> bool:
    if method == "operator":
        return P.laplacian().is_zero()
    if method == "coefficients":
        return not harmonic_defects(P)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# Lowest-order part of a Taylor series

GRAY_FACTOR = 100.0


@dataclass(frozen=True)
class LowestOrderPart:
    """Degree-N part of a Taylor series, zeroed per component as needed.

    ``component_orders[j]`` is the lowest surviving degree of component j
    (``None`` if the component vanishes through the truncation order).
    ``confident[j]`` is False when the decision for component j relied on a
    coefficient within a factor GRAY_FACTOR of the threshold.
    """

    N: int
    part: VecHomoPoly
    component_orders: tuple[int | None, int | None, int | None]
    confident: tuple[bool, bool, bool]
    tol: float

    @property
    def ambiguous(self) -> bool:
        return not all(self.confident)


def _nz(c) -> bool:
    if isinstance(c, GaussianRational):
        return bool(c)
    return complex(c) != 0


def _abs(c) -> float:
    if isinstance(c, GaussianRational):
        return math.hypot(float(c.re), float(c.im))
    return abs(complex(c))


def lowest_order_part(taylor: Mapping[MultiIndex, Sequence[Scalar]], tol: float = 0.0) -> LowestOrderPart:
    """Lowest-order homogeneous part of a vector Taylor series.

    With ``tol == 0`` only exact zeros are dropped.  With ``tol > 0`` a degree
    counts as present for a component when its largest coefficient exceeds
    ``tol`` times the largest coefficient of the whole field; inside the
    selected degree a coefficient is zero when it is at most ``tol`` times the
    largest coefficient of that degree.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if not taylor:
        raise ValueError("zero field has no lowest-order part")
    entries = {tuple(int(v) for v in a): [c for c in cs] for a, cs in taylor.items()}
    for a, cs in entries.items():
        if len(cs) != 3:
            raise ValueError(f"coefficient at {a} is not a triple")
    global_max = max((_abs(c) for cs in entries.values() for c in cs), default=0.0)
    if global_max == 0.0:
        raise ValueError("zero field has no lowest-order part")

    by_degree: dict[int, dict[MultiIndex, list]] = {}
    for a, cs in entries.items():
        by_degree.setdefault(sum(a), {})[a] = cs  # type: ignore[index]

    degree_max = {d: max(_abs(c) for cs in terms.values() for c in cs) for d, terms in by_degree.items()}

    orders: list[int | None] = [None, None, None]
    confident = [True, True, True]
    for j in range(3):
        for d in sorted(by_degree):
            if tol == 0.0:
                if any(_nz(cs[j]) for cs in by_degree[d].values()):
                    orders[j] = d
                    break
                continue
            mj = max(_abs(cs[j]) for cs in by_degree[d].values())
            thr = tol * global_max
            if mj > thr:
                orders[j] = d
                if mj <= GRAY_FACTOR * thr:
                    confident[j] = False
                break
            if mj > thr / GRAY_FACTOR:
                confident[j] = False
    present = [o for o in orders if o is not None]
    if not present:
        raise ValueError("zero field has no lowest-order part")
    N = min(present)
    terms = by_degree[N]
    dmax = degree_max[N]
    comps = []
    for j in range(3):
        coeffs: dict[MultiIndex, GaussianRational] = {}
        if orders[j] == N:
            for a, cs in terms.items():
                c = cs[j]
                mag = _abs(c)
                if tol > 0.0:
                    if mag <= tol * dmax:
                        if mag > tol * dmax / GRAY_FACTOR:
                            confident[j] = False
                        continue
                    if mag <= GRAY_FACTOR * tol * dmax:
                        confident[j] = False
                elif not _nz(c):
                    continue
                coeffs[a] = GaussianRational.coerce(c)
        comps.append(HomoPoly(N, coeffs))
    part = VecHomoPoly(tuple(comps), N)  # type: ignore[arg-type]
    return LowestOrderPart(N, part, tuple(orders), tuple(confident), float(tol))  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Text format

_TERM_RE = re.compile(
    r"^\s*(\d+)\s+(\d+)\s+(\d+)\s*:\s*([+-]?\d+(?:/\d+)?)\s*\+\s*([+-]?\d+(?:/\d+)?)\s*i\s*$"
)


def _fmt_frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def format_poly(p: HomoPoly) -> str:
    """Canonical text: a degree header, then one term per line in descending order."""
    lines = [f"degree {p.degree}"]
    for a, c in p.items():
        lines.append(f"{a[0]} {a[1]} {a[2]} : {_fmt_frac(c.re)} + {_fmt_frac(c.im)} i")
    return "\n".join(lines) + "\n"


def _parse_terms(lines: Iterable[str]) -> tuple[int | None, dict[MultiIndex, GaussianRational]]:
    degree = None
    coeffs: dict[MultiIndex, GaussianRational] = {}
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("degree"):
            degree = int(line.split()[1])
            continue
        m = _TERM_RE.match(line)
        if not m:
            raise ValueError(f"malformed polynomial term: {raw!r}")
        a = (int(m.group(1)), int(m.group(2)), int(m.group(3)))
        c = GaussianRational(Fraction(m.group(4)), Fraction(m.group(5)))
        coeffs[a] = coeffs.get(a, ZERO) + c
    return degree, coeffs


def parse_poly(text: str) -> HomoPoly:
    degree, coeffs = _parse_terms(text.splitlines())
    if degree is None:
        degs = {sum(a) for a in coeffs}
        if len(degs) != 1:
            raise ValueError("cannot infer degree; add a 'degree N' line")
        degree = degs.pop()
    return HomoPoly(degree, coeffs)


def format_vec(P: VecHomoPoly) -> str:
    out = [f"degree {P.degree}"]
    for j in (1, 2, 3):
        out.append(f"component {j}")
        out.extend(format_poly(P[j]).splitlines()[1:])
    return "\n".join(out) + "\n"


def parse_vec(text: str) -> VecHomoPoly:
    blocks: dict[int, list[str]] = {1: [], 2: [], 3: []}
    header: list[str] = []
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith("component"):
            parts = line.split()
            if len(parts) != 2 or parts[1] not in ("1", "2", "3"):
                raise ValueError(f"bad component label: {raw!r}")
            current = int(parts[1])
            continue
        if current is None:
            header.append(raw)
        else:
            blocks[current].append(raw)
    degree, extra = _parse_terms(header)
    if extra:
        raise ValueError("terms must follow a 'component j' label")
    parsed = [_parse_terms(blocks[j])[1] for j in (1, 2, 3)]
    if degree is None:
        degs = {sum(a) for c in parsed for a in c}
        if len(degs) != 1:
            raise ValueError("cannot infer degree; add a 'degree N' line")
        degree = degs.pop()
    return VecHomoPoly(tuple(HomoPoly(degree, c) for c in parsed), degree)  # type: ignore[arg-type]
