"""Independent randomized and brute-force checks for the symbolic engines.

The rank probe substitutes random rationals (or residues modulo a large
prime) and takes an exact numeric rank. The dimension oracle runs a fresh
grevlex basis through sympy and scans every variable subset, so it shares no
code with :mod:`netalg.groebner`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import gmpy2
from gmpy2 import mpq, mpz

from .errors import DegenerateStructureError, PreconditionError
from .groebner import Ideal
from .netmodel import MMatrix
from .polyalg import Polynomial

DEFAULT_PRIME = 2_147_483_647  # 2^31 - 1


@dataclass
class ProbeConfig:
    trials: int = 5
    bound: int = 10**4
    seed: int = 0
    modulus: int | None = None
    retries: int = 50

    def __post_init__(self):
        if self.trials < 1:
            raise PreconditionError("probe needs at least one trial")
        if self.bound < 1:
            raise PreconditionError("coefficient bound must be positive")
        if self.modulus is not None and (self.modulus <= 10**6 or not gmpy2.is_prime(self.modulus)):
            raise PreconditionError(f"modulus {self.modulus} must be a prime above 10^6")

    def describe(self) -> dict:
        pool = f"Z/{self.modulus}" if self.modulus else f"a/b with 1 <= a, b <= {self.bound}"
        return {"trials": self.trials, "seed": self.seed, "pool": pool}


def rank_rational(rows: Sequence[Sequence]) -> int:
    """Exact rank of a rational matrix by fraction-free integer elimination."""
    grid = []
    for row in rows:
        qs = [mpq(int(x.numerator), int(x.denominator)) if isinstance(x, Fraction) else mpq(x) for x in row]
        den = mpz(1)
        for q in qs:
            den = gmpy2.lcm(den, q.denominator)
        grid.append([mpz(q * den) for q in qs])
    if not grid or not grid[0]:
        return 0
    m, n = len(grid), len(grid[0])
    rank, prev = 0, mpz(1)
    for col in range(n):
        pivot = next((r for r in range(rank, m) if grid[r][col]), None)
        if pivot is None:
            continue
        grid[rank], grid[pivot] = grid[pivot], grid[rank]
        p = grid[rank][col]
        for r in range(rank + 1, m):
            a = grid[r][col]
            row_r, row_p = grid[r], grid[rank]
            # Bareiss step: exact division by the previous pivot
            for c in range(col, n):
                row_r[c] = (p * row_r[c] - a * row_p[c]) // prev
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def rank_mod(rows: Sequence[Sequence[int]], p: int) -> int:
    grid = [[x % p for x in row] for row in rows]
    if not grid or not grid[0]:
        return 0
    m, n = len(grid), len(grid[0])
    rank = 0
    for col in range(n):
        pivot = next((r for r in range(rank, m) if grid[r][col]), None)
        if pivot is None:
            continue
        grid[rank], grid[pivot] = grid[pivot], grid[rank]
        inv = pow(grid[rank][col], -1, p)
        row_p = [x * inv % p for x in grid[rank]]
        grid[rank] = row_p
        for r in range(m):
            if r != rank and grid[r][col]:
                a = grid[r][col]
                grid[r] = [(x - a * y) % p for x, y in zip(grid[r], row_p)]
        rank += 1
        if rank == m:
            break
    return rank


def _draw(rng: random.Random, cfg: ProbeConfig):
    if cfg.modulus:
        return rng.randrange(1, cfg.modulus)
    return mpq(rng.randint(1, cfg.bound), rng.randint(1, cfg.bound))


def _numeric_rows(A, point: dict, cfg: ProbeConfig):
    """Evaluate ``A`` (RationalMatrix or MMatrix) at ``point``."""
    if isinstance(A, MMatrix):
        rows = A.numeric(point)
        if cfg.modulus:
            p = cfg.modulus
            return [[int(Fraction(x).numerator) * pow(int(Fraction(x).denominator), -1, p) % p for x in row] for row in rows]
        return rows
    if cfg.modulus:
        vec = [point[n] for n in A.ring.names]
        return A.evaluate_mod(vec, cfg.modulus)
    return A.evaluate(point)


def probe_ranks(A, cfg: ProbeConfig | None = None) -> list[int]:
    """Numeric rank at each of ``cfg.trials`` random points."""
    cfg = cfg or ProbeConfig()
    rng = random.Random(cfg.seed)
    names = A.free_names() if isinstance(A, MMatrix) else list(A.ring.names)
    ranks = []
    for _ in range(cfg.trials):
        for _attempt in range(cfg.retries):
            point = {n: _draw(rng, cfg) for n in names}
            try:
                rows = _numeric_rows(A, point, cfg)
            except ZeroDivisionError:
                continue
            break
        else:
            raise DegenerateStructureError(f"every one of {cfg.retries} random points hit a vanishing denominator")
        ranks.append(rank_mod(rows, cfg.modulus) if cfg.modulus else rank_rational(rows))
    return ranks


def random_rank_probe(A, cfg: ProbeConfig | None = None) -> int:
    """Maximum numeric rank over the probe's random points."""
    ranks = probe_ranks(A, cfg)
    return max(ranks) if ranks else 0


# dimension oracle


def _to_sympy(p: Polynomial, syms):
    import sympy

    expr = sympy.Integer(0)
    for exps, c in p.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for s, e in zip(syms, exps):
            if e:
                term *= s**e
        expr += term
    return expr


def brute_force_dimension(ideal: Ideal, max_vars: int = 12) -> int:
    """Dimension from a sympy grevlex basis by scanning all variable subsets."""
    import sympy

    ring = ideal.ring
    n = ring.arity
    if n > max_vars:
        raise PreconditionError(f"ring has {n} variables; the oracle handles at most {max_vars}")
    if ideal.is_zero():
        return n
    syms = sympy.symbols(list(ring.names))
    if n == 1:
        syms = (syms,) if not isinstance(syms, (list, tuple)) else syms
    exprs = [_to_sympy(g, syms) for g in ideal.generators]
    gb = sympy.groebner(exprs, *syms, order="grevlex")
    polys = [sympy.Poly(e, *syms) for e in gb.exprs]
    if any(p.is_ground and not p.is_zero for p in polys):
        return -1
    leads = []
    for p in polys:
        mono = p.monoms(order="grevlex")[0]
        leads.append({i for i, e in enumerate(mono) if e})
    for size in range(n, -1, -1):
        for subset in combinations(range(n), size):
            chosen = set(subset)
            if not any(lead <= chosen for lead in leads):
                return size
    return -1
