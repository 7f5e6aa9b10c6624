"""Admissible / inadmissible classification of incident field pairs.

Two independent routes:

* pattern view: extract the lowest-order homogeneous parts of E and H from
  their Taylor data, keep those attaining the minimal order N, and test the
  parity pattern (odd N: x_j | P^(j); even N: the other two variables divide P^(j)).
* expansion view: read the verdict off the coefficients of the lowest block
  of a wavefunction expansion.  The inadmissible blocks are spanned by
  I_l^{2m} + s_l I_l^{-2m} with s_l = (-1)^(l+1) and 2m in the index set
  below; for odd l these are real parts and for even l imaginary parts of
  I_l^{2m}, the only combinations that satisfy the parity patterns.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

from .orthant_laplace import pattern_holds
from .polycore import ContractViolation, LowestOrderPart, MultiIndex, VecHomoPoly, lowest_order_part
from .wavefields import FieldExpansion, TaylorField, WaveParams

__all__ = [
    "Verdict",
    "pattern_odd",
    "pattern_even",
    "first_pattern_violation",
    "classify_taylor",
    "classify_single",
    "classify_expansion",
    "family_indices",
    "family_sign",
    "family_member",
]

log = logging.getLogger(__name__)

Status = Literal["Admissible", "Inadmissible", "Undetermined"]


@dataclass(frozen=True)
class Verdict:
    status: Status
    N: int | None
    S: tuple[str, ...]
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == "Inadmissible" and (self.N is None or self.N < 1):
            raise ValueError("an inadmissible verdict needs N >= 1")

    def to_json(self) -> dict:
        return {"status": self.status, "N": self.N, "S": list(self.S), "witness": self.witness}


def pattern_odd(P: VecHomoPoly) -> bool:
    if P.degree % 2 != 1:
        raise ContractViolation("pattern_odd needs odd degree")
    return pattern_holds(P)


def pattern_even(P: VecHomoPoly) -> bool:
    if P.degree % 2 != 0 or P.degree < 2:
        raise ContractViolation("pattern_even needs even degree >= 2")
    return pattern_holds(P)


def first_pattern_violation(P: VecHomoPoly) -> tuple[int, MultiIndex] | None:
    N = P.degree
    for j in range(3):
        for a in sorted(P.components[j].coeffs, reverse=True):
            if N % 2 == 1 and a[j] == 0:
                return j + 1, a
            if N % 2 == 0 and any(a[i] == 0 for i in range(3) if i != j):
                return j + 1, a
    return None


def _lowest(F: TaylorField, tol: float) -> LowestOrderPart | None:
    data = F.as_mapping()
    if not data or all(v == 0 for c in data.values() for v in c):
        return None
    return lowest_order_part(data, tol)


def _judge(parts: dict[str, LowestOrderPart]) -> Verdict:
    N = min(p.N for p in parts.values())
    S = tuple(sorted(name for name, p in parts.items() if p.N == N))
    orders = {name: p.N for name, p in parts.items()}
    if any(parts[s].ambiguous for s in S):
        return Verdict("Undetermined", N, S, {"reason": "lowest order within tolerance band", "orders": orders})
    if N == 0:
        return Verdict("Admissible", 0, S, {"reason": "lowest order is 0", "orders": orders})
    for s in S:
        bad = first_pattern_violation(parts[s].part)
        if bad is not None:
            j, a = bad
            return Verdict(
                "Admissible", N, S, {"field": s, "component": j, "monomial": list(a), "orders": orders}
            )
    form = "odd" if N % 2 else "even"
    return Verdict("Inadmissible", N, S, {"pattern": form, "orders": orders})


def classify_taylor(E: TaylorField, H: TaylorField, tol: float = 0.0) -> Verdict:
    """Pattern-view classification of the pair (E, H)."""
    parts = {}
    for name, F in (("E", E), ("H", H)):
        lp = _lowest(F, tol)
        if lp is not None:
            parts[name] = lp
    if not parts:
        raise ValueError("both fields are zero")
    return _judge(parts)


def classify_single(E: TaylorField, tol: float = 0.0) -> Verdict:
    """Single-field variant: the field plays both roles."""
    lp = _lowest(E, tol)
    if lp is None:
        raise ValueError("field is zero")
    return _judge({"E": lp})


def family_indices(l0: int) -> list[int]:
    """Values 2m for m = (l0+1) mod 2, ..., floor((l0+1)/2)."""
    lo = (l0 + 1) % 2
    hi = (l0 + 1) // 2
    return [2 * m for m in range(lo, hi + 1)]


def family_sign(l0: int) -> int:
    """s with I^{2m} + s I^{-2m} inadmissible: +1 for odd l0, -1 for even l0."""
    return 1 if l0 % 2 else -1


def _block_in_family(coeffs: dict[int, complex], l0: int, rel_tol: float) -> tuple[bool, dict]:
    scale = max((abs(c) for c in coeffs.values()), default=0.0)
    if scale == 0.0:
        return True, {}
    thr = rel_tol * scale
    allowed = set()
    for m2 in family_indices(l0):
        allowed.update({m2, -m2})
    for m, c in sorted(coeffs.items()):
        if abs(c) > thr and m not in allowed:
            return False, {"m": m, "reason": "coefficient outside the index set"}
    s = family_sign(l0)
    weights = {}
    for m2 in family_indices(l0):
        cp = coeffs.get(m2, 0j)
        if m2 == 0:
            weights[0] = cp
            continue
        cm = coeffs.get(-m2, 0j)
        if abs(cm - s * cp) > thr:
            return False, {"m": m2, "reason": f"coefficient at -{m2} is not {s:+d} times the one at {m2}"}
        weights[m2] = cp
    return True, {"weights": {str(k): [v.real, v.imag] for k, v in weights.items() if abs(v) > thr}}


def classify_expansion(F: FieldExpansion, params: WaveParams | None = None, rel_tol: float = 1e-10) -> Verdict:
    """Expansion-view classification from the l = l_min block of F."""
    l0 = F.l_min
    block = F.block(l0)
    a = {m: ab[0] for m, ab in block.items() if ab[0] != 0}
    b = {m: ab[1] for m, ab in block.items() if ab[1] != 0}
    idx = family_indices(l0)
    log.debug("l0=%d index set 2m in %s (sign %+d)", l0, idx, family_sign(l0))
    S = tuple(sorted((["H"] if a else []) + (["E"] if b else [])))
    witness: dict = {"l0": l0, "index_set": idx, "sign": family_sign(l0)}
    if l0 == 0:
        witness["reason"] = "lowest order is 0"
        return Verdict("Admissible", 0, S, witness)
    for name, coeffs in (("H", a), ("E", b)):
        if not coeffs:
            continue
        ok, info = _block_in_family(coeffs, l0, rel_tol)
        witness[name] = info
        if not ok:
            return Verdict("Admissible", l0, S, witness)
    witness["pattern"] = "odd" if l0 % 2 else "even"
    return Verdict("Inadmissible", l0, S, witness)


def family_member(l0: int, m2: int, coeff: complex = 1.0, kind: str = "EH") -> FieldExpansion:
    """The expansion coeff * [(EH)_{l0,m2} + s (EH)_{l0,-m2}] (or the (HE) analogue)."""
    s = family_sign(l0)
    ent: dict[tuple[int, int], tuple[complex, complex]] = {}
    pos = 0 if kind == "EH" else 1
    for m, w in ((m2, 1.0), (-m2, s)):
        cur = list(ent.get((l0, m), (0j, 0j)))
        cur[pos] += coeff * w
        ent[(l0, m)] = (cur[0], cur[1])
    return FieldExpansion(ent)

