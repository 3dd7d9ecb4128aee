"""Generic rank of the closed-loop map and the informativity verdict.

Three independent routes to the generic rank:

* graph: maximum number of vertex-disjoint input-to-measurement paths in the
  graph of M, by unit-capacity max-flow on the vertex-split graph;
* groebner: classify the ideal of k-minors of the row-cleared matrix
  saturated by ``1 - t*D``;
* numeric: exact rank at random rational points (see :mod:`netalg.oracle`).
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from gmpy2 import mpq

from .errors import InconsistencyError, PreconditionError
from .groebner import DEFAULT_STEP_BUDGET, GroebnerBasis, Ideal, groebner_basis
from .netmodel import MMatrix, NetworkSpec, assemble_informativity_M, clear_constraints
from .oracle import ProbeConfig, probe_ranks, rank_rational
from .polyalg import MonomialOrder, Polynomial, VariableRing, render
from .ratmat import RationalMatrix, clear_denominators, k_minors, minor_count

log = logging.getLogger(__name__)

FREE_ENTRY_CAVEAT = (
    "graph count equals the generic rank only when every non-zero entry of M is an "
    "independent free variable; constants or shared names make it an upper bound"
)
SPECTRUM_CAVEAT = "spectrum assumption unasserted"


# graph route


@dataclass
class FlowGraph:
    """Directed graph on U (inputs), W (nodes) and Z (measurements).

    There is an edge ``a -> b`` whenever the entry of M in row ``b`` and
    column ``a`` is structurally non-zero; diagonal entries of P give no
    self-loops.
    """

    sources: list[str]
    internal: list[str]
    sinks: list[str]
    edges: list[tuple[str, str]]

    @classmethod
    def from_M(cls, M: MMatrix) -> "FlowGraph":
        n = M.n
        W = [f"W:{x}" for x in M.row_labels[:n]]
        U = [f"U:{x}" for x in M.u_labels]
        Z = [f"Z:{x}" for x in M.z_labels]
        col_vertex = W + U
        row_vertex = W + Z
        edges = []
        for i, row in enumerate(M.grid):
            for j, e in enumerate(row):
                if e.is_zero or (i < n and i == j):
                    continue
                edges.append((col_vertex[j], row_vertex[i]))
        return cls(U, W, Z, edges)

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {v: [] for v in self.sources + self.internal + self.sinks}
        for a, b in self.edges:
            succ[a].append(b)
        return succ


class _Dinic:
    def __init__(self, size: int):
        self.adj: list[list[int]] = [[] for _ in range(size)]
        self.to: list[int] = []
        self.cap: list[int] = []

    def add_edge(self, u: int, v: int, c: int) -> int:
        self.adj[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.adj[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0)
        return len(self.to) - 2

    def _levels(self, s: int, t: int) -> list[int] | None:
        level = [-1] * len(self.adj)
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for eid in self.adj[u]:
                v = self.to[eid]
                if self.cap[eid] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level if level[t] >= 0 else None

    def max_flow(self, s: int, t: int) -> int:
        flow = 0
        while True:
            level = self._levels(s, t)
            if level is None:
                return flow
            it = [0] * len(self.adj)
            while True:
                pushed = self._augment(s, t, level, it)
                if not pushed:
                    break
                flow += pushed

    def _augment(self, s: int, t: int, level: list[int], it: list[int]) -> int:
        # iterative DFS along the level graph; capacities are 0/1 or large
        stack = [s]
        path: list[int] = []
        while stack:
            u = stack[-1]
            if u == t:
                amount = min(self.cap[e] for e in path)
                for e in path:
                    self.cap[e] -= amount
                    self.cap[e ^ 1] += amount
                return amount
            advanced = False
            while it[u] < len(self.adj[u]):
                eid = self.adj[u][it[u]]
                v = self.to[eid]
                if self.cap[eid] > 0 and level[v] == level[u] + 1:
                    stack.append(v)
                    path.append(eid)
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                stack.pop()
                level[u] = -1  # dead end for this phase
                if path:
                    path.pop()
                    it[stack[-1]] += 1
        return 0


def max_disjoint_paths(M: MMatrix) -> tuple[int, list[list[str]], list[str]]:
    """Maximum number of vertex-disjoint U-to-Z paths with a witness.

    Returns ``(count, paths, caveats)``; each path lists vertex labels
    ``U:...``, ``W:...``, ``Z:...``.
    """
    g = FlowGraph.from_M(M)
    vertices = g.sources + g.internal + g.sinks
    index = {v: i for i, v in enumerate(vertices)}
    nv = len(vertices)
    source, sink = 2 * nv, 2 * nv + 1
    net = _Dinic(2 * nv + 2)
    big = nv + 1
    for v, i in index.items():
        net.add_edge(2 * i, 2 * i + 1, 1)  # vertex split: in -> out
    arc_ids = {}
    for a, b in g.edges:
        arc_ids[(a, b)] = net.add_edge(2 * index[a] + 1, 2 * index[b], big)
    for u in g.sources:
        net.add_edge(source, 2 * index[u], 1)
    for z in g.sinks:
        net.add_edge(2 * index[z] + 1, sink, 1)
    count = net.max_flow(source, sink)

    # read the paths off the saturated arcs
    used: dict[str, list[str]] = {}
    for (a, b), eid in arc_ids.items():
        flow = net.cap[eid ^ 1]
        for _ in range(flow):
            used.setdefault(a, []).append(b)
    paths = []
    for u in g.sources:
        v = u
        path = [u]
        while v in used and used[v]:
            v = used[v].pop()
            path.append(v)
        if len(path) > 1 and path[-1].startswith("Z:"):
            paths.append(path)
    caveats = []
    if not M.all_free():
        caveats.append(FREE_ENTRY_CAVEAT)
    return count, paths, caveats


def witness_is_valid(M: MMatrix, paths: Sequence[Sequence[str]]) -> bool:
    g = FlowGraph.from_M(M)
    edges = set(g.edges)
    seen: set[str] = set()
    for path in paths:
        if not path or not path[0].startswith("U:") or not path[-1].startswith("Z:"):
            return False
        if any(v in seen for v in path) or len(set(path)) != len(path):
            return False
        seen.update(path)
        if any((a, b) not in edges for a, b in zip(path, path[1:])):
            return False
    return True


# groebner route


class RankVerdict(str, Enum):
    ALWAYS_AT_LEAST_K = "AlwaysAtLeastK"
    GENERICALLY_LESS_THAN_K = "GenericallyLessThanK"
    GENERICALLY_AT_LEAST_K = "GenericallyAtLeastK"


@dataclass
class RankCase:
    k: int
    verdict: RankVerdict
    degenerate_locus: list[Polynomial] = field(default_factory=list)
    minors_used: int = 0
    basis_size: int = 0
    stats: dict = field(default_factory=dict)
    basis: GroebnerBasis | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if bool(self.degenerate_locus) != (self.verdict is RankVerdict.GENERICALLY_AT_LEAST_K):
            raise InconsistencyError("degenerate locus must be present exactly for the generic case")

    @property
    def at_least_k(self) -> bool:
        return self.verdict is not RankVerdict.GENERICALLY_LESS_THAN_K

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "case": self.verdict.value,
            "degenerate_locus": [render(p) for p in self.degenerate_locus],
            "minors_used": self.minors_used,
        }


@dataclass
class _RankRing:
    ring: VariableRing
    order: MonomialOrder
    base: list[Polynomial]  # 1 - t*D plus constraint generators
    eliminate: set[int]  # t and auxiliary variables


def _rank_ring(pi: RationalMatrix, D: Polynomial, constraints: Sequence[str]) -> _RankRing:
    x_names = list(pi.ring.names)
    nums, dens = clear_constraints(constraints, pi.ring) if constraints else ([], [])
    aux = [f"a{i + 1}" for i in range(len(dens))]
    needs_t = not D.is_constant()
    head = (["t"] if needs_t else []) + aux
    while any(h in x_names for h in head):
        head = [h + "_" for h in head]
    names = head + x_names
    tags = (["saturation-t"] if needs_t else []) + ["auxiliary"] * len(aux) + ["unknown-X"] * len(x_names)
    ring = VariableRing(names, tags)
    order = MonomialOrder.lex(ring)
    base = []
    if needs_t:
        base.append(ring.const(1, order) - ring.gen(head[0], order) * D.to_ring(ring, order))
    for a, d in zip(head[1:] if needs_t else head, dens):
        base.append(ring.const(1, order) - ring.gen(a, order) * d.to_ring(ring, order))
    for c in nums:
        base.append(c.to_ring(ring, order))
    return _RankRing(ring, order, base, {ring.index(h) for h in head})


def _free_part(gb: GroebnerBasis, eliminate: set[int]) -> list[Polynomial]:
    return [e for e in gb.elements if not (e.support() & eliminate)]


def groebner_rank_case(pi: RationalMatrix, k: int, budget: int = DEFAULT_STEP_BUDGET,
                       constraints: Sequence[str] = (), cleared=None) -> RankCase:
    """Classify ``rank pi >= k`` with the saturated ideal of k-minors.

    The basis is computed in lex with ``t`` (and constraint auxiliaries)
    largest. Minors are fed in growing batches so an early ``{1}`` stops
    the enumeration.
    """
    rows, cols = pi.shape
    if k < 1 or k > min(rows, cols):
        raise PreconditionError(f"rank test k={k} outside 1..{min(rows, cols)}")
    cleared = cleared or clear_denominators(pi)
    rr = _rank_ring(pi, cleared.denom_product, constraints)
    baseline_gb = groebner_basis(Ideal(rr.ring, list(rr.base)), rr.order, budget) if rr.base else None
    if baseline_gb is not None and baseline_gb.is_unit():
        raise PreconditionError("constraints and the saturation leave no admissible entries")
    baseline = _free_part(baseline_gb, rr.eliminate) if baseline_gb else []

    minors: list[Polynomial] = []
    seen: set = set()
    gb = None
    batch = 1
    total = minor_count(rows, cols, k)
    stream = k_minors(cleared, k)
    exhausted = False
    while not exhausted:
        while len(minors) < batch:
            m = next(stream, None)
            if m is None:
                exhausted = True
                break
            if not m:
                continue
            m = m.to_ring(rr.ring, rr.order).monic()
            if m in seen:
                continue
            seen.add(m)
            minors.append(m)
        if not minors:
            break
        gb = groebner_basis(Ideal(rr.ring, rr.base + minors), rr.order, budget)
        if gb.is_unit():
            return RankCase(k, RankVerdict.ALWAYS_AT_LEAST_K, [], len(minors), 1, gb.stats, gb)
        batch *= 2
    if not minors:
        return RankCase(k, RankVerdict.GENERICALLY_LESS_THAN_K, [], 0, len(baseline), {"minors_total": total})
    free = _free_part(gb, rr.eliminate)
    if _same_polys(free, baseline):
        return RankCase(k, RankVerdict.GENERICALLY_LESS_THAN_K, [], len(minors), len(gb.elements), gb.stats, gb)
    extra = [p.to_ring(pi.ring) for p in free if not any(p == b for b in baseline)]
    return RankCase(k, RankVerdict.GENERICALLY_AT_LEAST_K, extra, len(minors), len(gb.elements), gb.stats, gb)


def _same_polys(a: list[Polynomial], b: list[Polynomial]) -> bool:
    return len(a) == len(b) and all(any(x == y for y in b) for x in a)


# orchestration


class Method(str, Enum):
    GRAPH = "graph"
    GROEBNER = "groebner"
    NUMERIC = "numeric"
    ALL = "all"


@dataclass
class RankResult:
    method: str
    rank: int
    cases: list[RankCase] = field(default_factory=list)
    paths: list[list[str]] = field(default_factory=list)
    probe: list[int] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)


def groebner_generic_rank(pi: RationalMatrix, budget: int = DEFAULT_STEP_BUDGET, constraints: Sequence[str] = (),
                          k_max: int | None = None) -> RankResult:
    """Largest k whose case is not GenericallyLessThanK, searching downward."""
    rows, cols = pi.shape
    top = min(rows, cols) if k_max is None else min(k_max, rows, cols)
    cases = []
    if top == 0 or pi.is_zero():
        return RankResult("groebner", 0, cases)
    cleared = clear_denominators(pi)
    for k in range(top, 0, -1):
        case = groebner_rank_case(pi, k, budget, constraints, cleared)
        cases.append(case)
        if case.at_least_k:
            return RankResult("groebner", k, cases)
    return RankResult("groebner", 0, cases)


def numeric_generic_rank(pi: RationalMatrix, cfg: ProbeConfig | None = None) -> RankResult:
    cfg = cfg or ProbeConfig()
    ranks = probe_ranks(pi, cfg)
    best = max(ranks)
    if cfg.modulus:
        # a modular rank can only undershoot; confirm in Q when it looks short
        exact = probe_ranks(pi, ProbeConfig(cfg.trials, cfg.bound, cfg.seed, None, cfg.retries))
        best = max(best, max(exact))
    return RankResult("numeric", best, probe=ranks)


def graph_generic_rank(M: MMatrix) -> RankResult:
    count, paths, caveats = max_disjoint_paths(M)
    return RankResult("graph", count, paths=paths, caveats=caveats)


def generic_rank(M: MMatrix, method: Method | str = Method.GROEBNER, budget: int = DEFAULT_STEP_BUDGET,
                 probe: ProbeConfig | None = None, constraints: Sequence[str] = ()) -> dict[str, RankResult]:
    """Generic rank of the closed-loop map of ``M`` by one or all methods.

    With ``Method.ALL`` the symbolic and numeric answers must agree; the
    graph count must also agree when every entry of M is an independent
    free variable, and otherwise only bounds the rank from above.
    """
    method = Method(method)
    results: dict[str, RankResult] = {}
    pi = None
    if method in (Method.GROEBNER, Method.NUMERIC, Method.ALL):
        pi = M.pi()
    if method in (Method.GRAPH, Method.ALL):
        results["graph"] = graph_generic_rank(M)
    if method in (Method.GROEBNER, Method.ALL):
        results["groebner"] = groebner_generic_rank(pi, budget, constraints)
    if method in (Method.NUMERIC, Method.ALL):
        results["numeric"] = numeric_generic_rank(pi, probe)
        if constraints:
            results["numeric"].caveats.append("numeric probe ignores constraints")
    if method is Method.ALL:
        g, n = results["groebner"].rank, results["numeric"].rank
        if not constraints and g != n:
            raise InconsistencyError(f"groebner rank {g} disagrees with numeric rank {n}")
        graph = results["graph"]
        if graph.rank != g:
            if M.all_free() and not constraints:
                raise InconsistencyError(f"graph count {graph.rank} disagrees with groebner rank {g} on an all-free M")
            graph.caveats.append(f"graph count {graph.rank} differs from the symbolic rank {g}")
    return results


def block_identity_holds(M: MMatrix, cfg: ProbeConfig | None = None) -> bool:
    """Numeric check that rank M = rank Pi + n at random points."""
    cfg = cfg or ProbeConfig()
    rng = random.Random(cfg.seed)

    ring = M.ring()
    pi = M.pi(ring)
    P = M.rational_blocks(ring)[0]
    for _ in range(cfg.trials):
        point = {nm: mpq(rng.randint(1, cfg.bound), rng.randint(1, cfg.bound)) for nm in ring.names}
        try:
            if rank_rational(P.evaluate(point)) < M.n:
                continue
            pi_val = pi.evaluate(point)
        except ZeroDivisionError:
            continue
        if rank_rational(M.numeric(point)) != rank_rational(pi_val) + M.n:
            return False
    return True


@dataclass
class InformativityReport:
    method: str
    generic_rank: int
    required_rank: int
    informative: bool
    assumption_asserted: bool
    ranks: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)
    M_shape: tuple[int, int] = (0, 0)
    pi_shape: tuple[int, int] = (0, 0)
    notes: list[str] = field(default_factory=list)
    basis: GroebnerBasis | None = field(default=None, repr=False, compare=False)

    @property
    def verdict(self) -> str:
        return "informative" if self.informative else "not-informative-by-this-test"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "method": self.method,
            "generic_rank": self.generic_rank,
            "required_rank": self.required_rank,
            "ranks": self.ranks,
            "witness": self.witness,
            "assumption": {"spectrum_positive_definite": self.assumption_asserted},
            "M_shape": list(self.M_shape),
            "pi_shape": list(self.pi_shape),
            "caveats": self.caveats,
            "notes": self.notes,
        }


def informativity_from_M(M: MMatrix, assumption: bool, method: Method | str = Method.ALL,
                         budget: int = DEFAULT_STEP_BUDGET, probe: ProbeConfig | None = None,
                         constraints: Sequence[str] = ()) -> InformativityReport:
    method = Method(method)
    results = generic_rank(M, method, budget, probe, constraints)
    rows_pi, cols_pi = len(M.z_labels), len(M.u_labels)
    if "groebner" in results:
        rank = results["groebner"].rank
    elif "numeric" in results:
        rank = results["numeric"].rank
    else:
        rank = results["graph"].rank
    caveats = []
    for r in results.values():
        caveats.extend(c for c in r.caveats if c not in caveats)
    if not assumption:
        caveats.append(SPECTRUM_CAVEAT)
    if rows_pi > cols_pi:
        caveats.append(f"Pi has more rows ({rows_pi}) than columns ({cols_pi}); full row rank is impossible")
    witness = {}
    if "graph" in results:
        witness["paths"] = results["graph"].paths
    if "groebner" in results:
        witness["cases"] = [c.to_json() for c in results["groebner"].cases]
    if "numeric" in results:
        witness["probe_ranks"] = results["numeric"].probe
    informative = assumption and rank == rows_pi
    return InformativityReport(
        method=method.value,
        generic_rank=rank,
        required_rank=rows_pi,
        informative=informative,
        assumption_asserted=assumption,
        ranks={k: v.rank for k, v in results.items()},
        witness=witness,
        caveats=caveats,
        M_shape=(M.rows, M.cols),
        pi_shape=(rows_pi, cols_pi),
        notes=list(M.notes),
        basis=results["groebner"].cases[-1].basis if "groebner" in results and results["groebner"].cases else None,
    )


def informativity_verdict(spec: NetworkSpec, method: Method | str = Method.ALL, drop_inputs=(), drop_predictor_rows=(),
                          budget: int = DEFAULT_STEP_BUDGET, probe: ProbeConfig | None = None) -> InformativityReport:
    M = assemble_informativity_M(spec, drop_inputs, drop_predictor_rows)
    return informativity_from_M(M, spec.spectrum_positive_definite, method, budget, probe, spec.constraints)
