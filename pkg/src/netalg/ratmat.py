"""Matrices over the fraction field: closed-loop maps, clearing, minors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterator, Sequence

from .errors import MalformedInputError, PreconditionError, WellPosednessError
from .polyalg import MonomialOrder, Polynomial, RationalFunction, VariableRing, exact_div


class RationalMatrix:
    """Dense ``rows x cols`` grid of :class:`RationalFunction` in one ring."""

    def __init__(self, ring: VariableRing, entries: Sequence[Sequence[RationalFunction]], rows: int | None = None, cols: int | None = None):
        self.ring = ring
        self.entries = [list(r) for r in entries]
        self.rows = len(self.entries) if rows is None else rows
        self.cols = (len(self.entries[0]) if self.entries else 0) if cols is None else cols
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise MalformedInputError("ragged rational matrix")
        for row in self.entries:
            for e in row:
                if e.ring != ring:
                    raise MalformedInputError("matrix entries from different rings")

    @classmethod
    def zeros(cls, ring: VariableRing, rows: int, cols: int, order: MonomialOrder | None = None) -> "RationalMatrix":
        z = RationalFunction.from_poly(ring.const(0, order))
        return cls(ring, [[z] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, ring: VariableRing, n: int, order: MonomialOrder | None = None) -> "RationalMatrix":
        z = RationalFunction.from_poly(ring.const(0, order))
        o = RationalFunction.from_poly(ring.const(1, order))
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_polys(cls, ring: VariableRing, grid: Sequence[Sequence[Polynomial]], cols: int | None = None) -> "RationalMatrix":
        return cls(ring, [[RationalFunction.from_poly(p) for p in row] for row in grid], len(grid), cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> RationalFunction:
        i, j = ij
        return self.entries[i][j]

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise MalformedInputError(f"shape mismatch {self.shape} + {other.shape}")
        return RationalMatrix(self.ring, [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)], self.rows, self.cols)

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise MalformedInputError(f"shape mismatch {self.shape} - {other.shape}")
        return RationalMatrix(self.ring, [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)], self.rows, self.cols)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise MalformedInputError(f"shape mismatch {self.shape} @ {other.shape}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = None
                for k in range(self.cols):
                    a, b = self.entries[i][k], other.entries[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    term = a * b
                    acc = term if acc is None else acc + term
                if acc is None:
                    acc = RationalFunction.from_poly(self.ring.const(0, self._order()))
                row.append(acc)
            out.append(row)
        return RationalMatrix(self.ring, out, self.rows, other.cols)

    def _order(self) -> MonomialOrder | None:
        for row in self.entries:
            for e in row:
                return e.num.order
        return None

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(self.ring, [list(c) for c in zip(*self.entries)] if self.rows else [], self.cols, self.rows)

    def select(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "RationalMatrix":
        rows = range(self.rows) if rows is None else rows
        cols = range(self.cols) if cols is None else cols
        rows, cols = list(rows), list(cols)
        return RationalMatrix(self.ring, [[self.entries[i][j] for j in cols] for i in rows], len(rows), len(cols))

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.entries for e in row)

    def equals(self, other: "RationalMatrix") -> bool:
        """Exact equality by cross-multiplication of every entry."""
        return self.shape == other.shape and all(a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    def evaluate(self, values) -> list[list]:
        return [[e.evaluate(values) for e in row] for row in self.entries]

    def evaluate_mod(self, point, p: int) -> list[list[int]]:
        return [[e.evaluate_mod(point, p) for e in row] for row in self.entries]

    def free_variables(self) -> list[str]:
        used: set[int] = set()
        for row in self.entries:
            for e in row:
                used |= e.num.support() | e.den.support()
        return [self.ring.names[i] for i in sorted(used)]

    def to_text(self) -> list[list[str]]:
        return [[str(e) for e in row] for row in self.entries]

    def __repr__(self) -> str:
        return f"RationalMatrix({self.rows}x{self.cols})"


@dataclass
class ClearedMatrix:
    """Row-cleared polynomial matrix: ``polys[i][j] = row_denoms[i] * A[i][j]``."""

    polys: list[list[Polynomial]]
    row_denoms: list[Polynomial]
    denom_product: Polynomial
    factors: list[Polynomial]

    @property
    def rows(self) -> int:
        return len(self.polys)

    @property
    def cols(self) -> int:
        return len(self.polys[0]) if self.polys else 0


def bareiss_det(grid: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Determinant of a square polynomial matrix by fraction-free elimination."""
    n = len(grid)
    if n == 0:
        raise PreconditionError("determinant of an empty matrix")
    a = [list(r) for r in grid]
    if any(len(r) != n for r in a):
        raise PreconditionError("determinant of a non-square matrix")
    one = a[0][0].one()
    sign = 1
    prev = one
    for k in range(n - 1):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return one.zero()
        pivot = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            for j in range(k + 1, n):
                val = pivot * a[i][j]
                if aik and a[k][j]:
                    val = val - aik * a[k][j]
                a[i][j] = exact_div(val, prev) if val else val
            a[i][k] = one.zero()
        prev = pivot
    det = a[n - 1][n - 1]
    return -det if sign < 0 else det


def _polynomial_rows(A: RationalMatrix, B: RationalMatrix | None = None) -> list[list[Polynomial]]:
    """Scale each row of ``[A | B]`` by its denominator product to get polynomials."""
    rows = []
    for i in range(A.rows):
        entries = list(A.entries[i]) + (list(B.entries[i]) if B is not None else [])
        dens = _distinct_denominators(entries)
        scale = _product(dens, entries[0].num.one()) if entries else None
        row = []
        for e in entries:
            if e.is_zero():
                row.append(e.num)
            elif e.den.is_constant():
                row.append(e.num.scale(1 / e.den.constant_value()) * scale)
            else:
                row.append(e.num * exact_div(scale, e.den))
        rows.append(row)
    return rows


def _distinct_denominators(entries: Sequence[RationalFunction]) -> list[Polynomial]:
    dens: list[Polynomial] = []
    for e in entries:
        if e.is_zero() or e.den.is_constant():
            continue
        if not any(e.den == d for d in dens):
            dens.append(e.den)
    return dens


def _product(polys: Sequence[Polynomial], one: Polynomial) -> Polynomial:
    out = one
    for p in polys:
        out = out * p
    return out


def fraction_free_solve(P: RationalMatrix, Q: RationalMatrix) -> RationalMatrix:
    """Solve ``P X = Q`` exactly by fraction-free Gauss-Jordan elimination.

    After elimination the left block is ``det(P) * I`` and the right block is
    ``det(P) * X``; every intermediate division is exact.
    """
    n = P.rows
    if P.cols != n:
        raise PreconditionError("P must be square")
    if Q.rows != n:
        raise MalformedInputError(f"P is {n}x{n} but Q has {Q.rows} rows")
    if n == 0:
        return RationalMatrix(P.ring, [], 0, Q.cols)
    a = _polynomial_rows(P, Q)
    width = n + Q.cols
    one = a[0][0].one()
    prev = one
    for k in range(n):
        if not a[k][k]:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    break
            else:
                raise WellPosednessError("det(P) vanishes identically: the network is not well-posed")
        pivot = a[k][k]
        for i in range(n):
            if i == k:
                continue
            aik = a[i][k]
            for j in range(width):
                if j == k:
                    continue
                val = pivot * a[i][j]
                if aik and a[k][j]:
                    val = val - aik * a[k][j]
                a[i][j] = exact_div(val, prev) if val and not prev.is_constant() else (val.scale(1 / prev.constant_value()) if val else val)
            a[i][k] = one.zero()
        prev = pivot
    out = []
    for i in range(n):
        d = a[i][i]
        out.append([RationalFunction(a[i][n + j], d) for j in range(Q.cols)])
    return RationalMatrix(P.ring, out, n, Q.cols)


def determinant(A: RationalMatrix) -> RationalFunction:
    """Determinant over the fraction field (rows cleared first)."""
    if A.rows != A.cols:
        raise PreconditionError("determinant of a non-square matrix")
    grid = _polynomial_rows(A)
    scale = None
    for i in range(A.rows):
        dens = _distinct_denominators(A.entries[i])
        s = _product(dens, grid[0][0].one())
        scale = s if scale is None else scale * s
    return RationalFunction(bareiss_det(grid), scale)


def build_pi(P: RationalMatrix, Q: RationalMatrix, R: RationalMatrix, S: RationalMatrix) -> RationalMatrix:
    """Closed-loop map ``R P^-1 Q + S``."""
    if R.cols != P.rows or S.shape != (R.rows, Q.cols):
        raise MalformedInputError("inconsistent block shapes for R P^-1 Q + S")
    X = fraction_free_solve(P, Q)
    return R @ X + S


def clear_denominators(A: RationalMatrix) -> ClearedMatrix:
    """Multiply each row by the product of its distinct denominators.

    The product stands in for the least common multiple: both vanish on the
    same set, which is all the saturation step needs.
    """
    ring = A.ring
    one = None
    for row in A.entries:
        for e in row:
            one = e.num.one()
            break
        if one is not None:
            break
    if one is None:
        one = ring.const(1)
    polys, row_denoms, factors = [], [], []
    for row in A.entries:
        dens = _distinct_denominators(row)
        d_i = _product(dens, one)
        for d in dens:
            if not any(d == f for f in factors):
                factors.append(d)
        out = []
        for e in row:
            if e.is_zero():
                out.append(one.zero())
            elif e.den.is_constant():
                out.append(e.num.scale(1 / e.den.constant_value()) * d_i)
            else:
                out.append(e.num * exact_div(d_i, e.den))
        polys.append(out)
        row_denoms.append(d_i)
    return ClearedMatrix(polys, row_denoms, _product(factors, one), factors)


def k_minors(A: ClearedMatrix | Sequence[Sequence[Polynomial]], k: int) -> Iterator[Polynomial]:
    """All ``k x k`` minors, rows-then-columns in lexicographic index order.

    A generator, so callers can stop early.
    """
    grid = A.polys if isinstance(A, ClearedMatrix) else [list(r) for r in A]
    rows = len(grid)
    cols = len(grid[0]) if rows else 0
    if k < 1 or k > min(rows, cols):
        raise PreconditionError(f"minor size {k} outside 1..{min(rows, cols)}")
    zero = grid[0][0].zero()
    zero_rows = [all(not p for p in grid[i]) for i in range(rows)]
    zero_cols = [all(not grid[i][j] for i in range(rows)) for j in range(cols)]
    for rsel in combinations(range(rows), k):
        row_dead = any(zero_rows[i] for i in rsel)
        for csel in combinations(range(cols), k):
            if row_dead or any(zero_cols[j] for j in csel):
                yield zero
                continue
            yield bareiss_det([[grid[i][j] for j in csel] for i in rsel])


def minor_count(rows: int, cols: int, k: int) -> int:
    from math import comb

    return comb(rows, k) * comb(cols, k)


def map_entries(A: RationalMatrix, fn: Callable[[RationalFunction], RationalFunction]) -> RationalMatrix:
    return RationalMatrix(A.ring, [[fn(e) for e in row] for row in A.entries], A.rows, A.cols)
