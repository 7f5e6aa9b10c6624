"""Small exact linear algebra over the rationals (row reduction, null spaces)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

__all__ = ["rref", "nullspace", "LeftSolver"]

Matrix = list[list[Fraction]]


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    A = [[Fraction(v) for v in r] for r in rows]
    if not A:
        return [], []
    n = ncols if ncols is not None else len(A[0])
    pivots: list[int] = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        row_r = [v * inv for v in A[r]]
        A[r] = row_r
        nz = [k for k in range(c, n) if row_r[k] != 0]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                row_i = A[i]
                for k in nz:
                    row_i[k] -= f * row_r[k]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A[:r], pivots


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Basis of {v : A v = 0}, one vector per free column."""
    R, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(piv):
            v[pc] = -R[i][f]
        basis.append(v)
    return basis


@dataclass
class LeftSolver:
    """Precomputed exact solver for A c = q with a fixed rectangular A.

    ``T`` is the row transform with T A = rref(A); consistency requires the
    rows of T q beyond the rank to vanish.
    """

    T: Matrix
    pivots: list[int]
    rank: int
    ncols: int

    @classmethod
    def build(cls, A: Sequence[Sequence], ncols: int) -> "LeftSolver":
        T, piv = _full_transform(A, ncols)
        return cls(T=T, pivots=piv, rank=len(piv), ncols=ncols)

    def solve(self, q: Sequence[Fraction]) -> list[Fraction] | None:
        tq = [sum((t * v for t, v in zip(row, q) if t != 0 and v != 0), Fraction(0)) for row in self.T]
        if any(v != 0 for v in tq[self.rank:]):
            return None
        c = [Fraction(0)] * self.ncols
        for i, pc in enumerate(self.pivots):
            c[pc] = tq[i]
        return c


def _full_transform(A: Sequence[Sequence], ncols: int) -> tuple[Matrix, list[int]]:
    """Row reduce [A | I] keeping every row, so T A is rref(A) padded with zero rows."""
    m = len(A)
    M = [[Fraction(v) for v in A[i]] + [Fraction(1 if j == i else 0) for j in range(m)] for i in range(m)]
    width = ncols + m
    r = 0
    pivots = []
    for c in range(ncols):
        p = next((i for i in range(r, m) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        nz = [k for k in range(width) if M[r][k] != 0]
        for i in range(m):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                for k in nz:
                    M[i][k] -= f * M[r][k]
        pivots.append(c)
        r += 1
    return [row[ncols:] for row in M], pivots
