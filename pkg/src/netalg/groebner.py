"""Buchberger's algorithm, elimination ideals and variety dimension."""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import MalformedInputError, PreconditionError, ResourceExhaustedError
from .polyalg import FIELD_BITS, FIELD_MASK, MonomialOrder, Polynomial, VariableRing, render

log = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 10**7
EXACT_SEARCH_VARS = 20


@dataclass
class Ideal:
    ring: VariableRing
    generators: list[Polynomial]

    def __post_init__(self):
        gens = []
        for g in self.generators:
            if g.ring != self.ring:
                raise MalformedInputError("ideal generator from a different ring")
            if g:
                gens.append(g)
        self.generators = gens

    def is_zero(self) -> bool:
        return not self.generators


@dataclass
class GroebnerBasis:
    order: MonomialOrder
    elements: list[Polynomial]
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def ring(self) -> VariableRing:
        return self.order.ring

    def is_unit(self) -> bool:
        return len(self.elements) == 1 and self.elements[0].is_constant()

    def reduce(self, f: Polynomial) -> Polynomial:
        """Normal form of ``f`` modulo the basis."""
        f = f.reorder(self.order)
        reducers = [e._terms for e in self.elements]
        out, _ = _reduce(f._terms, reducers, self.ring, budget=None)
        return Polynomial(self.ring, self.order, out)

    def contains(self, f: Polynomial) -> bool:
        return not self.reduce(f)

    def dump(self) -> str:
        """Header line naming the order, then one polynomial per line."""
        lines = [f"# order: {self.order.describe()}", f"# elements: {len(self.elements)}"]
        lines.extend(render(e) for e in self.elements)
        return "\n".join(lines) + "\n"


def lcm_exps(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return tuple(max(x, y) for x, y in zip(a, b))


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder | None = None) -> Polynomial:
    if not f or not g:
        raise MalformedInputError("S-polynomial of a zero polynomial")
    order = order or f.order
    f, g = f.reorder(order), g.reorder(order)
    lcm = lcm_exps(f.lm, g.lm)
    mf = tuple(a - b for a, b in zip(lcm, f.lm))
    mg = tuple(a - b for a, b in zip(lcm, g.lm))
    return f.mul_term(mf, 1 / f.lc) - g.mul_term(mg, 1 / g.lc)


def _reduce(terms: tuple, reducers: list[tuple], ring: VariableRing, budget: list | None, top_only: bool = False):
    """Fully reduce ``terms`` by monic ``reducers``; returns ``(terms, steps)``.

    Uses a dictionary accumulator plus a max-heap of pending keys so each
    reduction step touches only the reducer's terms.
    """
    if not terms:
        return (), 0
    divides = ring.divides
    leads = [(r[0][0], r[0][1]) for r in reducers]
    acc = {k: [m, c] for k, m, c in terms}
    heap = [-k for k in acc]
    heapq.heapify(heap)
    out = []
    steps = 0
    while heap:
        k = -heapq.heappop(heap)
        slot = acc.pop(k, None)
        if slot is None:
            continue
        m, c = slot
        if not c:
            continue
        for idx, (lk, lm) in enumerate(leads):
            if divides(lm, m):
                r = reducers[idx]
                dk, dm = k - lk, m - lm
                for tk, tm, tc in r[1:]:
                    nk = tk + dk
                    s = acc.get(nk)
                    if s is None:
                        acc[nk] = [tm + dm, -c * tc]
                        heapq.heappush(heap, -nk)
                    else:
                        s[1] -= c * tc
                steps += 1
                break
        else:
            out.append((k, m, c))
            if top_only:
                for kk in sorted(acc, reverse=True):
                    mm, cc = acc[kk]
                    if cc:
                        out.append((kk, mm, cc))
                break
        if budget is not None and steps and steps % 1024 == 0:
            budget[0] -= 1024
            steps_left = budget[0]
            if steps_left < 0:
                raise ResourceExhaustedError("reduction step budget exhausted")
    if budget is not None:
        budget[0] -= steps % 1024
        if budget[0] < 0:
            raise ResourceExhaustedError("reduction step budget exhausted")
    return tuple(out), steps


def _monic(terms: tuple) -> tuple:
    lc = terms[0][2]
    if lc == 1:
        return terms
    inv = 1 / lc
    return tuple((k, m, c * inv) for k, m, c in terms)


class _Buchberger:
    def __init__(self, ring: VariableRing, order: MonomialOrder, budget: int, strategy: str = "normal"):
        self.ring = ring
        self.order = order
        self.strategy = strategy
        self.polys: list[tuple] = []
        self.exps: list[tuple[int, ...]] = []
        self.sugar: list[int] = []
        self.active: list[int] = []
        self.pairs: dict[tuple[int, int], tuple[int, ...]] = {}
        self.heap: list = []
        self.budget = [budget]
        self.initial_budget = budget
        self.stats = {"pairs_considered": 0, "zero_reductions": 0, "product_criterion": 0, "chain_criterion": 0}

    def lead(self, i: int) -> tuple[int, ...]:
        return self.exps[i]

    def _pair_key(self, i: int, j: int, lcm: tuple[int, ...]):
        degree = sum(lcm)
        if self.strategy == "sugar":
            sugar = max(self.sugar[i] + degree - sum(self.exps[i]), self.sugar[j] + degree - sum(self.exps[j]))
            return (sugar, degree, self.order.key(lcm), i, j)
        return (degree, self.order.key(lcm), i, j)

    def add(self, terms: tuple, sugar: int) -> int:
        """Insert a new monic element and update pairs (Gebauer-Moeller)."""
        h = len(self.polys)
        self.polys.append(terms)
        lm_h = self.ring.unpack(terms[0][1])
        self.exps.append(lm_h)
        self.sugar.append(sugar)

        candidates = []
        for g in self.active:
            lcm = lcm_exps(self.exps[g], lm_h)
            candidates.append((g, lcm, _coprime(self.exps[g], lm_h)))

        # criterion M: drop (g, h) when another new lcm properly divides it
        survivors = []
        for g, lcm, coprime in candidates:
            if any(l2 != lcm and _divides_exp(l2, lcm) for _, l2, _ in candidates):
                self.stats["chain_criterion"] += 1
                continue
            survivors.append((g, lcm, coprime))
        # criterion F plus product criterion: one pair per lcm, none if any is coprime
        groups: dict[tuple[int, ...], list] = {}
        for g, lcm, coprime in survivors:
            groups.setdefault(lcm, []).append((g, coprime))
        kept = []
        for lcm, members in groups.items():
            if any(c for _, c in members):
                self.stats["product_criterion"] += len(members)
                continue
            self.stats["chain_criterion"] += len(members) - 1
            kept.append((min(g for g, _ in members), lcm, False))

        # old pairs: drop (a, b) when lm(h) | lcm(a, b) strictly inside
        for pair, lcm in list(self.pairs.items()):
            a, b = pair
            if (
                _divides_exp(lm_h, lcm)
                and lcm_exps(self.exps[a], lm_h) != lcm
                and lcm_exps(self.exps[b], lm_h) != lcm
            ):
                del self.pairs[pair]
                self.stats["chain_criterion"] += 1

        for g, lcm, _ in kept:
            pair = (g, h)
            self.pairs[pair] = lcm
            heapq.heappush(self.heap, (self._pair_key(g, h, lcm), pair))

        self.active = [g for g in self.active if not _divides_exp(lm_h, self.exps[g])]
        self.active.append(h)
        return h

    def reducers(self) -> list[tuple]:
        return [self.polys[i] for i in self.active]

    def spoly(self, i: int, j: int, lcm: tuple[int, ...]) -> tuple:
        fi, fj = self.polys[i], self.polys[j]
        ei, ej = self.exps[i], self.exps[j]
        mi = tuple(a - b for a, b in zip(lcm, ei))
        mj = tuple(a - b for a, b in zip(lcm, ej))
        ki, pi = self.order.key(mi), self.ring.pack(mi)
        kj, pj = self.order.key(mj), self.ring.pack(mj)
        acc = {}
        for k, m, c in fi[1:]:
            acc[k + ki] = [m + pi, c]
        for k, m, c in fj[1:]:
            nk = k + kj
            s = acc.get(nk)
            if s is None:
                acc[nk] = [m + pj, -c]
            else:
                s[1] -= c
        terms = [(k, m, c) for k, (m, c) in acc.items() if c]
        terms.sort(reverse=True)
        return tuple(terms)

    def run(self, generators: Iterable[Polynomial]) -> None:
        gens = sorted((g._terms for g in generators if g), key=lambda t: t[0][0])
        for terms in gens:
            red, _ = _reduce(terms, self.reducers(), self.ring, self.budget)
            if not red:
                continue
            red = _monic(red)
            sugar = max(sum(self.ring.unpack(m)) for _, m, _ in red)
            self.add(red, sugar)
            if red[0][1] == 0:
                return
        while self.heap:
            _, pair = heapq.heappop(self.heap)
            lcm = self.pairs.pop(pair, None)
            if lcm is None:
                continue
            i, j = pair
            self.stats["pairs_considered"] += 1
            s = self.spoly(i, j, lcm)
            try:
                red, _ = _reduce(s, self.reducers(), self.ring, self.budget)
            except ResourceExhaustedError as exc:
                exc.state.update(self.partial_state())
                raise
            if self.stats["pairs_considered"] % 500 == 0:
                log.debug("buchberger progress: %s", self.partial_state())
            if not red:
                self.stats["zero_reductions"] += 1
                continue
            red = _monic(red)
            sugar = max(self.sugar[i] + sum(lcm) - sum(self.exps[i]), self.sugar[j] + sum(lcm) - sum(self.exps[j]))
            self.add(red, sugar)
            if red[0][1] == 0:
                return

    def partial_state(self) -> dict:
        return {
            "basis_size": len(self.active),
            "pairs_remaining": len(self.pairs),
            "steps_used": self.initial_budget - self.budget[0],
            **self.stats,
        }


def _coprime(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x == 0 or y == 0 for x, y in zip(a, b))


def _divides_exp(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _interreduce(polys: list[tuple], ring: VariableRing) -> list[tuple]:
    """Minimal basis, then full tail reduction of each element by the rest."""
    unique: dict[int, tuple] = {}
    for p in polys:
        unique.setdefault(p[0][1], p)
    items = sorted(unique.values(), key=lambda t: t[0][0])
    divides = ring.divides
    minimal = []
    for idx, p in enumerate(items):
        m = p[0][1]
        if any(divides(q[0][1], m) for jdx, q in enumerate(items) if jdx != idx):
            continue
        minimal.append(p)
    reduced = []
    for idx, p in enumerate(minimal):
        others = [q for jdx, q in enumerate(minimal) if jdx != idx]
        tail, _ = _reduce(p[1:], others, ring, budget=None)
        reduced.append(_monic((p[0],) + tail))
    reduced.sort(key=lambda t: t[0][0], reverse=True)
    return reduced


def groebner_basis(ideal: Ideal, order: MonomialOrder, budget: int = DEFAULT_STEP_BUDGET, strategy: str | None = None) -> GroebnerBasis:
    """Reduced Groebner basis of ``ideal`` under ``order``.

    Pairs are processed by smallest lcm total degree (``"normal"``) or by
    smallest sugar degree (``"sugar"``), with Buchberger's product and chain
    criteria. The default is normal selection for plain grevlex and sugar
    for lex and block orders, where the lcm degree says little about cost. ``budget`` bounds the number of reduction
    steps; exceeding it raises :class:`ResourceExhaustedError`.
    """
    if order.ring != ideal.ring:
        raise MalformedInputError("order and ideal live in different rings")
    ring = ideal.ring
    if ideal.is_zero():
        return GroebnerBasis(order, [], {"steps_used": 0})
    if strategy is None:
        strategy = "normal" if order.is_graded else "sugar"
    if strategy not in ("normal", "sugar"):
        raise PreconditionError(f"unknown pair selection strategy {strategy!r}")
    engine = _Buchberger(ring, order, budget, strategy)
    engine.run(g.reorder(order) for g in ideal.generators)
    elements = [engine.polys[i] for i in engine.active]
    if any(p[0][1] == 0 for p in elements):
        result = [((0, 0, mpq(1)),)]
    else:
        result = _interreduce(elements, ring)
    stats = engine.partial_state()
    stats["basis_size"] = len(result)
    log.debug("groebner basis: %s", stats)
    return GroebnerBasis(order, [Polynomial(ring, order, t) for t in result], stats)


def is_reduced(gb: GroebnerBasis) -> bool:
    ring = gb.ring
    for i, p in enumerate(gb.elements):
        if p.lc != 1:
            return False
        for j, q in enumerate(gb.elements):
            if i == j:
                continue
            for _, m, _ in p._terms:
                if ring.divides(q.lm_packed, m):
                    return False
    return True


def elimination_ideal(gb: GroebnerBasis, keep: Iterable[str]) -> Ideal:
    """Basis elements involving only the variables in ``keep``.

    ``gb`` must come from an elimination order for the complement of
    ``keep``: lex with every eliminated variable above every kept one, or a
    block order whose leading blocks hold exactly the eliminated variables.
    """
    ring = gb.ring
    keep_idx = {ring.index(n) for n in keep}
    order = gb.order
    eliminated = [i for i in order.priority if i not in keep_idx]
    if order.kind == "lex":
        if list(order.priority[: len(eliminated)]) != eliminated:
            raise PreconditionError("lex order must rank every eliminated variable above every kept variable")
    else:
        sizes, start, ok = order.blocks, 0, False
        for size in sizes:
            start += size
            if set(order.priority[:start]) == set(eliminated):
                ok = True
                break
        if not ok and eliminated:
            raise PreconditionError("order is not an elimination order for the requested variables")
    kept = [e for e in gb.elements if e.support() <= keep_idx]
    return Ideal(ring, kept)


@dataclass
class DimensionResult:
    dimension: int
    independent_set: tuple[str, ...]
    heuristic: bool = False


def max_independent_set(supports: Iterable[frozenset[int]], n: int, node_budget: int = 200_000) -> tuple[frozenset[int], bool]:
    """Largest variable set containing no support; returns ``(set, heuristic)``.

    Solved as a minimum hitting set of the (minimal) supports by branch and
    bound. Rings with more than :data:`EXACT_SEARCH_VARS` variables fall
    back to a greedy cover when the search exceeds ``node_budget``.
    """
    sups = sorted({frozenset(s) for s in supports}, key=lambda s: (len(s), sorted(s)))
    minimal: list[frozenset[int]] = []
    for s in sups:
        if not any(t <= s for t in minimal):
            minimal.append(s)
    universe = frozenset(range(n))
    if not minimal:
        return universe, False

    greedy: set[int] = set()
    pending = list(minimal)
    while pending:
        counts: dict[int, int] = {}
        for s in pending:
            for v in s:
                counts[v] = counts.get(v, 0) + 1
        v = min(counts, key=lambda x: (-counts[x], x))
        greedy.add(v)
        pending = [s for s in pending if v not in s]

    best = [frozenset(greedy)]
    nodes = [0]
    limit = node_budget if n > EXACT_SEARCH_VARS else None

    def search(chosen: frozenset[int]) -> None:
        nodes[0] += 1
        if limit is not None and nodes[0] > limit:
            raise _SearchAborted
        if len(chosen) >= len(best[0]):
            return
        unhit = None
        for s in minimal:
            if not (s & chosen):
                if unhit is None or len(s) < len(unhit):
                    unhit = s
                    if len(s) == 1:
                        break
        if unhit is None:
            best[0] = chosen
            return
        if len(chosen) + 1 >= len(best[0]):
            return
        for v in sorted(unhit):
            search(chosen | {v})

    heuristic = False
    try:
        search(frozenset())
    except _SearchAborted:
        heuristic = True
    return universe - best[0], heuristic


class _SearchAborted(Exception):
    pass


def dimension_from_basis(gb: GroebnerBasis) -> DimensionResult:
    """Dimension from the leading monomials of a reduced basis."""
    ring = gb.ring
    if gb.is_unit():
        return DimensionResult(-1, ())
    free, heuristic = max_independent_set([lead_support(e) for e in gb.elements], ring.arity)
    return DimensionResult(len(free), tuple(ring.names[i] for i in sorted(free)), heuristic)


def ideal_dimension(ideal: Ideal, budget: int = DEFAULT_STEP_BUDGET, detail: bool = False):
    """Krull dimension of the variety of ``ideal`` (``-1`` if empty).

    Computed from the leading monomials of a grevlex reduced basis as the
    size of a largest set of variables containing none of their supports.
    """
    ring = ideal.ring
    if ideal.is_zero():
        res = DimensionResult(ring.arity, ring.names)
        return res if detail else res.dimension
    gb = groebner_basis(ideal, MonomialOrder.grevlex(ring), budget)
    res = dimension_from_basis(gb)
    return res if detail else res.dimension


def lead_support(p: Polynomial) -> frozenset[int]:
    m = p.lm_packed
    return frozenset(i for i in range(p.ring.arity) if (m >> (FIELD_BITS * i)) & FIELD_MASK)


def parse_dump(text: str, ring: VariableRing | None = None) -> GroebnerBasis:
    """Inverse of :meth:`GroebnerBasis.dump`.

    Without ``ring`` the variables are taken from the order header, in
    priority order.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("# order:"):
        raise MalformedInputError("basis dump must start with an order header")
    desc = lines[0][len("# order:"):].strip()
    kind, _, rest = desc.partition(" ")
    if kind == "block-grevlex":
        groups = [g.strip(" ()").split(" > ") for g in rest.split(" >> ")]
    elif kind in ("lex", "grevlex"):
        groups = [rest.split(" > ")]
    else:
        raise MalformedInputError(f"unknown order in dump header: {desc!r}")
    groups = [[n.strip() for n in g] for g in groups]
    if ring is None:
        ring = VariableRing([n for g in groups for n in g])
    if kind == "block-grevlex":
        order = MonomialOrder.block(ring, groups)
    elif kind == "lex":
        order = MonomialOrder.lex(ring, groups[0])
    else:
        order = MonomialOrder.grevlex(ring, groups[0])
    body = [ln for ln in lines[1:] if not ln.startswith("#")]
    return GroebnerBasis(order, [ring.parse(ln, order) for ln in body])
