"""Generic local identifiability: compare dim V_o with dim V_c.

``V_o`` is the parameter space of the unknown entries X (dimension k, or the
dimension of the constraint variety). ``V_c`` is the closure of the image of
the closed-loop map F. Its ideal is the elimination ideal of

    < T_ij * g_ij - S_ij,  1 - t*D,  constraints >

onto the fresh variables g, where ``F_ij = S_ij / T_ij`` and D multiplies the
distinct denominators.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InconsistencyError, MalformedInputError, PreconditionError
from .groebner import DEFAULT_STEP_BUDGET, GroebnerBasis, Ideal, elimination_ideal, groebner_basis, ideal_dimension
from .netmodel import NetworkSpec, clear_constraints, generic_constants, resample_generic
from .polyalg import MonomialOrder, Polynomial, RationalFunction, VariableRing, parse_rational, render, to_q
from .ratmat import RationalMatrix, build_pi

log = logging.getLogger(__name__)

ORDERS = ("block", "lex")


def build_F(spec: NetworkSpec) -> tuple[RationalMatrix, list[str]]:
    """``F = Ry P^-1 Qr + Syr`` over the ring of unknown names, and those names."""
    names = spec.unknown_names()
    ring = VariableRing(names, ["unknown-X"] * len(names))
    order = MonomialOrder.grevlex(ring)

    def conv(grid, rows, cols):
        return RationalMatrix(ring, [[RationalFunction.from_poly(e.to_poly(ring, order)) for e in row] for row in grid], rows, cols)

    P = conv(spec.P, spec.n, spec.n)
    Qr = conv(spec.Qr, spec.n, spec.m_r)
    Ry = conv(spec.Ry, spec.p_y, spec.n)
    Syr = conv(spec.Syr, spec.p_y, spec.m_r)
    return build_pi(P, Qr, Ry, Syr), names


@dataclass
class IdentIdeal:
    ring: VariableRing
    order: MonomialOrder
    generators: list[Polynomial]
    x_names: list[str]
    g_names: list[str]
    aux_names: list[str]
    t_name: str | None
    kept_columns: list[int]
    dropped_columns: list[int]
    constraints: list[str] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    @property
    def eliminated(self) -> list[str]:
        return ([self.t_name] if self.t_name else []) + self.x_names + self.aux_names

    def describe_order(self) -> str:
        return self.order.describe()


def _fresh(name: str, taken: set[str]) -> str:
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def build_identifiability_ideal(F: RationalMatrix, knowns: Mapping[str, object] | None = None,
                                constraints: Sequence[str] = (), keep_columns: Sequence[int] | None = None,
                                order_kind: str = "block") -> IdentIdeal:
    """Polynomial ideal whose elimination onto g cuts out the closure of F's image.

    ``order_kind`` is ``"lex"`` (t > X > auxiliaries > g) or ``"block"``,
    the same variable priority grouped as two grevlex blocks with the g block
    last. Both eliminate everything but g.
    """
    if order_kind not in ORDERS:
        raise PreconditionError(f"unknown order {order_kind!r}; expected one of {ORDERS}")
    knowns = dict(knowns or {})
    for name in knowns:
        if name not in F.ring:
            raise PreconditionError(f"known entry {name!r} is not an unknown of F")
    cols = list(range(F.cols)) if keep_columns is None else sorted(set(keep_columns))
    if not cols:
        raise PreconditionError("keep_columns must not be empty")
    if any(not 0 <= j < F.cols for j in cols):
        raise PreconditionError(f"column index out of range 0..{F.cols - 1}")
    dropped = [j for j in range(F.cols) if j not in cols]
    x_names = [n for n in F.ring.names if n not in knowns]
    x_ring = VariableRing(x_names, ["unknown-X"] * len(x_names))
    x_order = MonomialOrder.grevlex(x_ring)

    entries = []
    for i in range(F.rows):
        for j in cols:
            e = F.entries[i][j]
            if knowns:
                e = e.substitute(knowns)
            entries.append((i, j, e.num.to_ring(x_ring, x_order), e.den.to_ring(x_ring, x_order)))

    caveats = []
    x_set = set(x_names)
    probe_ring = VariableRing(list(F.ring.names) + [n for n in _names_in(constraints) if n not in F.ring])
    kept_constraints = []
    for c in constraints:
        used = set(parse_rational(c, probe_ring).num.variables()) | set(parse_rational(c, probe_ring).den.variables())
        if used <= x_set:
            kept_constraints.append(c)
        else:
            caveats.append(f"constraint {c!r} ignored: mentions names outside the unknowns")
    nums, dens = clear_constraints(kept_constraints, x_ring) if kept_constraints else ([], [])

    taken = set(x_names)
    t_dens: list[Polynomial] = []
    for _, _, _, den in entries:
        if not den.is_constant() and not any(den == d for d in t_dens):
            t_dens.append(den)
    t_name = _fresh("t", taken) if t_dens else None
    aux_names = [_fresh(f"a{k + 1}", taken) for k in range(len(dens))]
    g_names = [_fresh(f"g{i + 1}_{j + 1}", taken) for i, j, _, _ in entries]
    names = ([t_name] if t_name else []) + x_names + aux_names + g_names
    tags = (["saturation-t"] if t_name else []) + ["unknown-X"] * len(x_names) + ["auxiliary"] * len(aux_names) + ["closed-loop-g"] * len(g_names)
    ring = VariableRing(names, tags)
    head = ([t_name] if t_name else []) + x_names + aux_names
    if order_kind == "lex" or not head:
        order = MonomialOrder.lex(ring)
    else:
        order = MonomialOrder.block(ring, [head, g_names])

    gens = []
    for (_, _, num, den), g in zip(entries, g_names):
        gens.append(den.to_ring(ring, order) * ring.gen(g, order) - num.to_ring(ring, order))
    if t_name:
        D = ring.const(1, order)
        for d in t_dens:
            D = D * d.to_ring(ring, order)
        gens.append(ring.const(1, order) - ring.gen(t_name, order) * D)
    for a, d in zip(aux_names, dens):
        gens.append(ring.const(1, order) - ring.gen(a, order) * d.to_ring(ring, order))
    gens.extend(c.to_ring(ring, order) for c in nums)
    return IdentIdeal(ring, order, gens, x_names, g_names, aux_names, t_name, cols, dropped, kept_constraints, caveats)


def _names_in(texts: Sequence[str]) -> list[str]:
    import re

    out: list[str] = []
    for t in texts:
        for tok in re.findall(r"[A-Za-z_][A-Za-z_0-9]*", t):
            if tok not in out:
                out.append(tok)
    return out


def dim_Vo(x_names: Sequence[str], constraints: Sequence[str] = (), budget: int = DEFAULT_STEP_BUDGET) -> int:
    """Dimension of the parameter variety: k, or that of the constraint variety."""
    if not constraints:
        return len(x_names)
    x_ring = VariableRing(list(x_names))
    nums, dens = clear_constraints(constraints, x_ring)
    aux = [f"a{k + 1}" for k in range(len(dens))]
    while any(a in x_names for a in aux):
        aux = [a + "_" for a in aux]
    ring = VariableRing(list(x_names) + aux)
    order = MonomialOrder.grevlex(ring)
    gens = [p.to_ring(ring, order) for p in nums]
    gens += [ring.const(1, order) - ring.gen(a, order) * d.to_ring(ring, order) for a, d in zip(aux, dens)]
    dim = ideal_dimension(Ideal(ring, gens), budget)
    if dim < 0:
        raise InconsistencyError("empty parameter variety: the constraints have no admissible solution")
    return dim


@dataclass
class VcResult:
    dimension: int
    elimination: list[Polynomial]
    heuristic: bool
    independent_set: tuple[str, ...]
    stats: dict
    basis: GroebnerBasis | None = field(default=None, repr=False)


def dim_Vc(ideal: IdentIdeal, budget: int = DEFAULT_STEP_BUDGET) -> VcResult:
    """Eliminate t, X and auxiliaries, then take the dimension in the g ring."""
    gb = groebner_basis(Ideal(ideal.ring, ideal.generators), ideal.order, budget)
    if gb.is_unit():
        raise InconsistencyError("the identifiability ideal is the whole ring: no admissible parameters")
    elim = elimination_ideal(gb, ideal.g_names)
    g_ring = VariableRing(ideal.g_names, ["closed-loop-g"] * len(ideal.g_names))
    g_order = MonomialOrder.grevlex(g_ring)
    gens = [p.to_ring(g_ring, g_order) for p in elim.generators]
    res = ideal_dimension(Ideal(g_ring, gens), budget, detail=True)
    return VcResult(res.dimension, gens, res.heuristic, res.independent_set, dict(gb.stats), gb)


@dataclass
class IdentifiabilityReport:
    dim_Vo: int
    dim_Vc: int
    identifiable: bool
    x_names: list[str]
    g_names: list[str]
    order: str
    elimination: list[str]
    dropped_columns: list[int] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    basis: GroebnerBasis | None = field(default=None, repr=False, compare=False)

    @property
    def fiber_dim(self) -> int:
        return self.dim_Vo - self.dim_Vc

    @property
    def verdict(self) -> str:
        return "generically-locally-identifiable" if self.identifiable else "not-identifiable"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "dim_Vo": self.dim_Vo,
            "dim_Vc": self.dim_Vc,
            "fiber_dim": self.fiber_dim,
            "unknowns": self.x_names,
            "g_variables": self.g_names,
            "order": self.order,
            "elimination_generators": self.elimination,
            "dropped_columns": self.dropped_columns,
            "caveats": self.caveats,
            "notes": self.notes,
            "engine": self.stats,
        }


def identifiability_from_F(F: RationalMatrix, knowns: Mapping[str, object] | None = None,
                           constraints: Sequence[str] = (), keep_columns: Sequence[int] | None = None,
                           order_kind: str = "block", budget: int = DEFAULT_STEP_BUDGET) -> IdentifiabilityReport:
    ideal = build_identifiability_ideal(F, knowns, constraints, keep_columns, order_kind)
    vo = dim_Vo(ideal.x_names, ideal.constraints, budget)
    t0 = time.perf_counter()
    vc = dim_Vc(ideal, budget)
    log.debug("dim V_c computed in %.2fs", time.perf_counter() - t0)
    caveats = list(ideal.caveats)
    if vc.heuristic:
        caveats.append("dimension search exceeded its node budget; dim V_c is a greedy lower bound")
    if vc.dimension > vo:
        raise InconsistencyError(f"dim V_c = {vc.dimension} exceeds dim V_o = {vo}")
    return IdentifiabilityReport(
        dim_Vo=vo,
        dim_Vc=vc.dimension,
        identifiable=vo == vc.dimension,
        x_names=list(ideal.x_names),
        g_names=list(ideal.g_names),
        order=ideal.describe_order(),
        elimination=[render(p) for p in vc.elimination],
        dropped_columns=list(ideal.dropped_columns),
        caveats=caveats,
        stats=dict(vc.stats),
        basis=vc.basis,
    )


def identifiability_verdict(spec: NetworkSpec, keep_columns: Sequence[int] | None = None, order_kind: str = "block",
                            budget: int = DEFAULT_STEP_BUDGET) -> IdentifiabilityReport:
    F, _ = build_F(spec)
    report = identifiability_from_F(F, None, spec.constraints, keep_columns, order_kind, budget)
    if generic_constants(spec):
        report.notes.append("known entries enter as fixed rational samples")
    return report


def resample_check(spec: NetworkSpec, samples: int, seed: int, run) -> list[str]:
    """Re-run ``run(spec)`` with fresh values for the known constants.

    Returns warnings when the verdict changes across samples.
    """
    if samples <= 0 or not generic_constants(spec):
        return []
    rng = random.Random(seed)
    base = run(spec)
    warnings = []
    for s in range(samples):
        other = run(resample_generic(spec, rng))
        if other != base:
            warnings.append(f"verdict changed under resampled known values (sample {s + 1}): {base} vs {other}")
    return warnings


def parse_knowns(items: Sequence[str]) -> dict[str, object]:
    """``NAME=value`` pairs with rational values."""
    out = {}
    for item in items:
        if "=" not in item:
            raise MalformedInputError(f"known entry {item!r} must look like NAME=value")
        name, value = item.split("=", 1)
        name = name.strip()
        try:
            out[name] = to_q(value.strip())
        except (ValueError, ZeroDivisionError, TypeError):
            raise MalformedInputError(f"known entry {item!r}: malformed rational value") from None
    return out
