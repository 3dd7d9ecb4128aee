"""Network descriptions, the informativity matrix M, and sub-network rewrites.

A network file is a JSON document::

    {
      "dims": {"n": 4, "m_r": 1, "m_e": 2, "p_y": 2},
      "P": [[1, {"free": "G1", "coef": "-1"}, 0, 0], ...],
      "Qr": ..., "Qe": ..., "Ry": ..., "Syr": ..., "Sye": ...,
      "constraints": ["G1 - G2"],
      "assumptions": {"spectrum_positive_definite": true}
    }

Entries are ``0``, ``1``, a quoted rational such as ``"3/4"``, a free
transfer function ``{"free": "G12"}`` (optionally scaled with ``"coef"``),
or a known generic constant ``{"const": "2/7", "generic": true}``.
Optional keys: ``names`` (labels for nodes, r, e and y signals) and
``identifiability`` (a default sub-network view for the ``check`` command).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .errors import MalformedInputError, PreconditionError
from .polyalg import MonomialOrder, Polynomial, RationalFunction, VariableRing, parse_rational, to_q

BLOCKS = ("P", "Qr", "Qe", "Ry", "Syr", "Sye")


class SpecValidationError(MalformedInputError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class EntrySpec:
    kind: str  # "zero" | "one" | "const" | "free"
    value: Fraction = Fraction(0)
    name: str | None = None
    generic: bool = False

    @staticmethod
    def zero() -> "EntrySpec":
        return EntrySpec("zero")

    @staticmethod
    def one() -> "EntrySpec":
        return EntrySpec("one", Fraction(1))

    @staticmethod
    def const(value, generic: bool = False) -> "EntrySpec":
        value = Fraction(value)
        if value == 0 and not generic:
            return EntrySpec.zero()
        if value == 1 and not generic:
            return EntrySpec.one()
        return EntrySpec("const", value, generic=generic)

    @staticmethod
    def free(name: str, coef=1) -> "EntrySpec":
        coef = Fraction(coef)
        if coef == 0:
            raise MalformedInputError(f"free entry {name} with zero coefficient")
        return EntrySpec("free", coef, name)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    @property
    def is_free(self) -> bool:
        return self.kind == "free"

    def negate(self) -> "EntrySpec":
        if self.kind == "zero":
            return self
        if self.kind == "free":
            return EntrySpec("free", -self.value, self.name)
        return EntrySpec("const", -self.value, generic=self.generic)

    def to_json(self):
        if self.kind == "zero":
            return 0
        if self.kind == "one":
            return 1
        if self.kind == "const":
            if self.generic:
                return {"const": str(self.value), "generic": True}
            return str(self.value)
        if self.value == 1:
            return {"free": self.name}
        return {"free": self.name, "coef": str(self.value)}

    def text(self) -> str:
        if self.kind == "free":
            if self.value == 1:
                return self.name
            if self.value == -1:
                return f"-{self.name}"
            return f"{self.value}*{self.name}"
        return str(self.value)

    def to_poly(self, ring: VariableRing, order: MonomialOrder | None = None, knowns: Mapping[str, Fraction] | None = None) -> Polynomial:
        if self.kind == "free":
            if knowns and self.name in knowns:
                return ring.const(to_q(self.value) * to_q(knowns[self.name]), order)
            return ring.gen(self.name, order).scale(to_q(self.value))
        return ring.const(to_q(self.value), order)


def parse_entry(raw: Any, where: str) -> EntrySpec:
    if isinstance(raw, bool):
        raise MalformedInputError(f"{where}: boolean is not a valid entry")
    if isinstance(raw, int):
        return EntrySpec.const(raw)
    if isinstance(raw, str):
        try:
            return EntrySpec.const(Fraction(raw.strip()))
        except (ValueError, ZeroDivisionError):
            raise MalformedInputError(f"{where}: malformed rational constant {raw!r}") from None
    if isinstance(raw, dict):
        if "free" in raw:
            name = raw["free"]
            if not isinstance(name, str) or not name.isidentifier():
                raise MalformedInputError(f"{where}: invalid free name {name!r}")
            try:
                coef = Fraction(str(raw.get("coef", 1)))
            except (ValueError, ZeroDivisionError):
                raise MalformedInputError(f"{where}: malformed coefficient {raw.get('coef')!r}") from None
            return EntrySpec.free(name, coef)
        if "const" in raw:
            try:
                value = Fraction(str(raw["const"]))
            except (ValueError, ZeroDivisionError):
                raise MalformedInputError(f"{where}: malformed rational constant {raw['const']!r}") from None
            return EntrySpec.const(value, bool(raw.get("generic", False)))
    raise MalformedInputError(f"{where}: unrecognised entry {raw!r}")


Grid = list[list[EntrySpec]]


def zero_grid(rows: int, cols: int) -> Grid:
    return [[EntrySpec.zero() for _ in range(cols)] for _ in range(rows)]


def identity_grid(n: int) -> Grid:
    return [[EntrySpec.one() if i == j else EntrySpec.zero() for j in range(n)] for i in range(n)]


@dataclass
class NetworkSpec:
    n: int
    m_r: int
    m_e: int
    p_y: int
    P: Grid
    Qr: Grid
    Qe: Grid
    Ry: Grid
    Syr: Grid
    Sye: Grid
    node_names: list[str] = field(default_factory=list)
    r_names: list[str] = field(default_factory=list)
    e_names: list[str] = field(default_factory=list)
    y_names: list[str] = field(default_factory=list)
    constraints: list[str] = field(default_factory=list)
    spectrum_positive_definite: bool = False
    identifiability: dict | None = None
    notices: list[str] = field(default_factory=list, compare=False)

    def __post_init__(self):
        self.node_names = self.node_names or [f"w{i + 1}" for i in range(self.n)]
        self.r_names = self.r_names or [f"r{i + 1}" for i in range(self.m_r)]
        self.e_names = self.e_names or [f"e{i + 1}" for i in range(self.m_e)]
        self.y_names = self.y_names or [f"y{i + 1}" for i in range(self.p_y)]

    def block(self, name: str) -> Grid:
        return getattr(self, name)

    def block_shapes(self) -> dict[str, tuple[int, int]]:
        n, mr, me, py = self.n, self.m_r, self.m_e, self.p_y
        return {"P": (n, n), "Qr": (n, mr), "Qe": (n, me), "Ry": (py, n), "Syr": (py, mr), "Sye": (py, me)}

    def occurrences(self, blocks: Sequence[str] = BLOCKS) -> dict[str, list[tuple[str, int, int]]]:
        """Free name -> positions, in declaration order (block, row, column)."""
        seen: dict[str, list[tuple[str, int, int]]] = {}
        for b in blocks:
            for i, row in enumerate(self.block(b)):
                for j, e in enumerate(row):
                    if e.is_free:
                        seen.setdefault(e.name, []).append((b, i, j))
        return seen

    def free_names(self, blocks: Sequence[str] = BLOCKS) -> list[str]:
        return list(self.occurrences(blocks))

    def unknown_names(self) -> list[str]:
        """Free names of ``(P, Qr, Ry, Syr)``: the unknowns of the identifiability map."""
        return self.free_names(("P", "Qr", "Ry", "Syr"))

    def shared_names(self) -> list[str]:
        return [name for name, pos in self.occurrences().items() if len(pos) > 1]

    def ring(self, extra: Sequence[str] = ()) -> VariableRing:
        names = self.free_names() + [x for x in extra if x not in self.free_names()]
        return VariableRing(names, ["unknown-X"] * len(names))


def _names_section(raw: dict, key: str, count: int, default_prefix: str, violations: list[str]) -> list[str]:
    names = raw.get("names", {}).get(key)
    if names is None:
        return [f"{default_prefix}{i + 1}" for i in range(count)]
    if not isinstance(names, list) or len(names) != count or not all(isinstance(x, str) for x in names):
        violations.append(f"names.{key}: expected {count} strings")
        return [f"{default_prefix}{i + 1}" for i in range(count)]
    if len(set(names)) != len(names):
        violations.append(f"names.{key}: duplicate labels")
    return list(names)


def validate_spec(raw: Mapping[str, Any]) -> NetworkSpec:
    """Check a parsed network document and build a :class:`NetworkSpec`.

    Collects every violation before raising :class:`SpecValidationError`.
    """
    violations: list[str] = []
    if not isinstance(raw, Mapping):
        raise SpecValidationError(["network document must be a JSON object"])
    dims = raw.get("dims")
    if not isinstance(dims, Mapping):
        raise SpecValidationError(["missing 'dims' header with n, m_r, m_e, p_y"])
    sizes = {}
    for key in ("n", "m_r", "m_e", "p_y"):
        v = dims.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            violations.append(f"dims.{key}: expected a non-negative integer, got {v!r}")
            v = 0
        sizes[key] = v
    if sizes["n"] == 0 and not violations:
        violations.append("dims.n: the network needs at least one node")
    n, mr, me, py = sizes["n"], sizes["m_r"], sizes["m_e"], sizes["p_y"]
    shapes = {"P": (n, n), "Qr": (n, mr), "Qe": (n, me), "Ry": (py, n), "Syr": (py, mr), "Sye": (py, me)}
    grids: dict[str, Grid] = {}
    for b, (rows, cols) in shapes.items():
        data = raw.get(b)
        if data is None:
            if rows * cols == 0 or b in ("Syr", "Sye"):
                grids[b] = zero_grid(rows, cols)
                continue
            violations.append(f"{b}: missing block (expected {rows}x{cols})")
            grids[b] = zero_grid(rows, cols)
            continue
        if not isinstance(data, list) or len(data) != rows or any(not isinstance(r, list) or len(r) != cols for r in data):
            got_r = len(data) if isinstance(data, list) else "?"
            got_c = len(data[0]) if isinstance(data, list) and data and isinstance(data[0], list) else "?"
            violations.append(f"{b}: expected {rows}x{cols}, got {got_r}x{got_c}")
            grids[b] = zero_grid(rows, cols)
            continue
        grid = []
        for i, row in enumerate(data):
            out = []
            for j, x in enumerate(row):
                try:
                    out.append(parse_entry(x, f"{b}[{i}][{j}]"))
                except MalformedInputError as exc:
                    violations.append(str(exc))
                    out.append(EntrySpec.zero())
            grid.append(out)
        grids[b] = grid
    names = {
        "node_names": _names_section(raw, "nodes", n, "w", violations),
        "r_names": _names_section(raw, "r", mr, "r", violations),
        "e_names": _names_section(raw, "e", me, "e", violations),
        "y_names": _names_section(raw, "y", py, "y", violations),
    }
    constraints = raw.get("constraints", [])
    if not isinstance(constraints, list) or not all(isinstance(c, str) for c in constraints):
        violations.append("constraints: expected a list of polynomial strings")
        constraints = []
    assumptions = raw.get("assumptions", {})
    spd = bool(assumptions.get("spectrum_positive_definite", False)) if isinstance(assumptions, Mapping) else False
    ident = raw.get("identifiability")
    if ident is not None and not isinstance(ident, Mapping):
        violations.append("identifiability: expected an object")
        ident = None
    spec = NetworkSpec(n, mr, me, py, **grids, **names, constraints=list(constraints),
                       spectrum_positive_definite=spd, identifiability=dict(ident) if ident else None)
    registry = spec.free_names()
    if registry:
        ring = VariableRing(registry)
        for c in constraints:
            try:
                parse_rational(c, ring)
            except MalformedInputError as exc:
                violations.append(f"constraint {c!r}: {exc}")
    elif constraints:
        violations.append("constraints given but the network has no free entries")
    if ident:
        for node in ident.get("a_nodes", []):
            if node not in names["node_names"]:
                violations.append(f"identifiability.a_nodes: unknown node {node!r}")
    if violations:
        raise SpecValidationError(violations)
    for name in spec.shared_names():
        spots = ", ".join(f"{b}[{i}][{j}]" for b, i, j in spec.occurrences()[name])
        spec.notices.append(f"shared entry: {name} appears at {spots}")
    return spec


def clear_constraints(texts: Sequence[str], ring: VariableRing) -> tuple[list[Polynomial], list[Polynomial]]:
    """Split rational constraints ``n/d = 0`` into numerators and denominators.

    Returns the numerators and the distinct non-constant denominators; the
    caller saturates each denominator with an auxiliary variable.
    """
    nums: list[Polynomial] = []
    dens: list[Polynomial] = []
    for text in texts:
        rf = parse_rational(text, ring)
        if rf.num:
            nums.append(rf.num)
        if not rf.den.is_constant() and not any(rf.den == d for d in dens):
            dens.append(rf.den)
    return nums, dens


def load_spec(path: str) -> NetworkSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"{path}: invalid JSON ({exc})") from exc
    return validate_spec(raw)


def serialize_spec(spec: NetworkSpec) -> dict:
    doc: dict[str, Any] = {"dims": {"n": spec.n, "m_r": spec.m_r, "m_e": spec.m_e, "p_y": spec.p_y}}
    doc["names"] = {"nodes": spec.node_names, "r": spec.r_names, "e": spec.e_names, "y": spec.y_names}
    for b in BLOCKS:
        doc[b] = [[e.to_json() for e in row] for row in spec.block(b)]
    doc["constraints"] = list(spec.constraints)
    doc["assumptions"] = {"spectrum_positive_definite": spec.spectrum_positive_definite}
    if spec.identifiability:
        doc["identifiability"] = spec.identifiability
    return doc


def dumps_spec(spec: NetworkSpec) -> str:
    """Canonical, byte-stable text form."""
    return json.dumps(serialize_spec(spec), indent=1, sort_keys=False) + "\n"


def apply_knowns(spec: NetworkSpec, knowns: Mapping[str, Any]) -> NetworkSpec:
    """Replace free names by known rational values (entries become constants)."""
    if not knowns:
        return spec
    registry = set(spec.free_names())
    values = {}
    for name, v in knowns.items():
        if name not in registry:
            raise PreconditionError(f"known entry {name!r} is not a free name of the network")
        values[name] = Fraction(str(v)) if not isinstance(v, Fraction) else v
    new = copy.deepcopy(spec)
    for b in BLOCKS:
        grid = new.block(b)
        for i, row in enumerate(grid):
            for j, e in enumerate(row):
                if e.is_free and e.name in values:
                    grid[i][j] = EntrySpec.const(e.value * values[e.name], generic=True)
    if spec.constraints:
        ring = spec.ring()
        out = []
        for c in spec.constraints:
            rf = parse_rational(c, ring).substitute({k: v for k, v in values.items()})
            if rf.is_zero():
                continue
            if not rf.num.support():
                raise PreconditionError(f"constraint {c!r} is violated by the known values")
            out.append(str(rf))
        new.constraints = out
    new.notices = list(spec.notices) + [f"known entry {k} = {v}" for k, v in values.items()]
    return new


def generic_constants(spec: NetworkSpec) -> list[tuple[str, int, int]]:
    return [(b, i, j) for b in BLOCKS for i, row in enumerate(spec.block(b)) for j, e in enumerate(row) if e.kind == "const" and e.generic]


def resample_generic(spec: NetworkSpec, rng) -> NetworkSpec:
    """Fresh random rationals for every generic known constant."""
    new = copy.deepcopy(spec)
    for b, i, j in generic_constants(spec):
        num = rng.randint(1, 10**4) * rng.choice((-1, 1))
        den = rng.randint(1, 10**4)
        new.block(b)[i][j] = EntrySpec.const(Fraction(num, den), generic=True)
    return new


# the M matrix


def _as_fraction(x) -> Fraction:
    # Fraction(mpq) keeps mpz parts, which mpq() later rejects
    if isinstance(x, (int, str)):
        return Fraction(x)
    return Fraction(int(x.numerator), int(x.denominator))

@dataclass
class MMatrix:
    """Block matrix ``[[P, Q], [R, S]]`` with labelled rows and columns.

    Rows are the ``n`` node equations followed by the measured signals z;
    columns are the ``n`` nodes followed by the inputs u. Stored with the
    measurement block R as written in the network (``z = R w + S u``); the
    rank identity uses ``[[P, Q], [-R, S]]``.
    """

    grid: Grid
    n: int
    row_labels: list[str]
    col_labels: list[str]
    notes: list[str] = field(default_factory=list)

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.col_labels)

    @property
    def z_labels(self) -> list[str]:
        return self.row_labels[self.n:]

    @property
    def u_labels(self) -> list[str]:
        return self.col_labels[self.n:]

    def blocks(self) -> tuple[Grid, Grid, Grid, Grid]:
        n = self.n
        P = [row[:n] for row in self.grid[:n]]
        Q = [row[n:] for row in self.grid[:n]]
        R = [row[:n] for row in self.grid[n:]]
        S = [row[n:] for row in self.grid[n:]]
        return P, Q, R, S

    def free_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for row in self.grid:
            for e in row:
                if e.is_free:
                    seen.setdefault(e.name, None)
        return list(seen)

    def ring(self) -> VariableRing:
        names = self.free_names()
        return VariableRing(names, ["unknown-X"] * len(names))

    def rational_blocks(self, ring: VariableRing | None = None, order: MonomialOrder | None = None):
        from .ratmat import RationalMatrix

        ring = ring or self.ring()
        order = order or MonomialOrder.grevlex(ring)

        def conv(grid: Grid, rows: int, cols: int):
            return RationalMatrix(ring, [[RationalFunction.from_poly(e.to_poly(ring, order)) for e in row] for row in grid], rows, cols)

        P, Q, R, S = self.blocks()
        n, m, p = self.n, self.cols - self.n, self.rows - self.n
        return conv(P, n, n), conv(Q, n, m), conv(R, p, n), conv(S, p, m)

    def pi(self, ring: VariableRing | None = None, order: MonomialOrder | None = None):
        from .ratmat import build_pi

        return build_pi(*self.rational_blocks(ring, order))

    def numeric(self, values: Mapping[str, Any], negate_measurements: bool = True) -> list[list[Fraction]]:
        """Evaluate at a point; by default returns ``[[P, Q], [-R, S]]``."""
        out = []
        for i, row in enumerate(self.grid):
            vals = []
            for j, e in enumerate(row):
                if e.kind == "free":
                    v = e.value * _as_fraction(values[e.name])
                else:
                    v = e.value
                if negate_measurements and i >= self.n and j < self.n:
                    v = -v
                vals.append(v)
            out.append(vals)
        return out

    def text(self) -> list[list[str]]:
        return [[e.text() for e in row] for row in self.grid]

    def all_free(self) -> bool:
        """True when every structural non-zero outside P's diagonal and the
        pass-through identity rows is a distinct free name."""
        seen: set[str] = set()
        for i, row in enumerate(self.grid):
            passthrough = i >= self.n and self.row_labels[i].startswith(("r:", "wB:"))
            for j, e in enumerate(row):
                if e.is_zero or (i < self.n and i == j) or passthrough:
                    continue
                if not e.is_free or e.name in seen:
                    return False
                seen.add(e.name)
        return True

    def to_json(self) -> dict:
        return {"n": self.n, "rows": self.row_labels, "cols": self.col_labels, "grid": [[e.to_json() for e in row] for row in self.grid], "notes": self.notes}


def _resolve(labels: Sequence[str], wanted: Iterable, what: str) -> list[int]:
    out = []
    for w in wanted:
        if isinstance(w, int):
            if not 0 <= w < len(labels):
                raise PreconditionError(f"{what} index {w} out of range 0..{len(labels) - 1}")
            out.append(w)
        else:
            if w not in labels:
                raise PreconditionError(f"unknown {what} {w!r}; expected one of {list(labels)}")
            out.append(labels.index(w))
    return sorted(set(out))


def _assemble(n: int, top: list[list[EntrySpec]], bottom: list[list[EntrySpec]], row_labels, col_labels,
              drop_inputs: Iterable = (), drop_predictor_rows: Iterable = ()) -> MMatrix:
    grid = [list(r) for r in top] + [list(r) for r in bottom]
    u_labels = col_labels[n:]
    z_labels = row_labels[n:]
    drop_u = _resolve(u_labels, drop_inputs, "input")
    notes = []
    # an unexcited r is a zero signal, so its pass-through row goes too
    auto_rows = [f"r:{u_labels[j]}" for j in drop_u if f"r:{u_labels[j]}" in z_labels]
    drop_z = _resolve(z_labels, list(drop_predictor_rows) + auto_rows, "predictor row")
    if auto_rows:
        notes.append("pass-through rows removed with their inputs: " + ", ".join(auto_rows))
    if drop_u and len(drop_u) == len(u_labels):
        raise PreconditionError("no excitation columns remain")
    keep_cols = list(range(n)) + [n + j for j in range(len(u_labels)) if j not in drop_u]
    keep_rows = list(range(n)) + [n + i for i in range(len(z_labels)) if i not in drop_z]
    if drop_u:
        notes.append("dropped inputs: " + ", ".join(u_labels[j] for j in drop_u))
    if drop_z:
        notes.append("dropped predictor rows: " + ", ".join(z_labels[i] for i in drop_z))
    grid = [[grid[i][j] for j in keep_cols] for i in keep_rows]
    return MMatrix(grid, n, [row_labels[i] for i in keep_rows], [col_labels[j] for j in keep_cols], notes)


def assemble_informativity_M(spec: NetworkSpec, drop_inputs: Iterable = (), drop_predictor_rows: Iterable = ()) -> MMatrix:
    """``[[P, Qr, Qe], [Ry, Syr, Sye], [0, I, 0]]`` minus the requested columns/rows.

    Inputs are addressed by their labels (``r1``, ``e2``) or column index
    among the inputs; predictor rows by label (``y1``, ``r:r1``) or index
    among the measured rows. Dropping an r input also removes its
    pass-through row.
    """
    n, mr, me = spec.n, spec.m_r, spec.m_e
    top = [spec.P[i] + spec.Qr[i] + spec.Qe[i] for i in range(n)]
    bottom = [spec.Ry[i] + spec.Syr[i] + spec.Sye[i] for i in range(spec.p_y)]
    for k in range(mr):
        bottom.append([EntrySpec.zero()] * n + [EntrySpec.one() if j == k else EntrySpec.zero() for j in range(mr)] + [EntrySpec.zero()] * me)
    row_labels = list(spec.node_names) + list(spec.y_names) + [f"r:{r}" for r in spec.r_names]
    col_labels = list(spec.node_names) + list(spec.r_names) + list(spec.e_names)
    return _assemble(n, top, bottom, row_labels, col_labels, drop_inputs, drop_predictor_rows)


def prune(grid: Grid, rule: str) -> tuple[Grid, list[int]]:
    """Remove structurally zero rows (``"rows"``) or columns (``"cols"``).

    Returns the pruned grid and the original indices that were kept.
    """
    if rule not in ("rows", "cols"):
        raise PreconditionError(f"unknown prune rule {rule!r}")
    if rule == "rows":
        keep = [i for i, row in enumerate(grid) if any(not e.is_zero for e in row)]
        return [list(grid[i]) for i in keep], keep
    cols = len(grid[0]) if grid else 0
    keep = [j for j in range(cols) if any(not row[j].is_zero for row in grid)]
    return [[row[j] for j in keep] for row in grid], keep


@dataclass
class SubnetworkResult:
    ident_spec: NetworkSpec
    info_M: MMatrix
    index_map: dict
    notes: list[str] = field(default_factory=list)


def _sub(grid: Grid, rows: Sequence[int], cols: Sequence[int]) -> Grid:
    return [[grid[i][j] for j in cols] for i in rows]


def subnetwork_transform(spec: NetworkSpec, a_nodes: Sequence, mode: str = "nodes",
                         assignment: Mapping[str, str] | None = None,
                         drop_inputs: Iterable = (), drop_predictor_rows: Iterable = ()) -> SubnetworkResult:
    """Rewrite the network so only the A-part dynamics are unknown.

    ``mode`` is ``"nodes"`` (B-node signals are measured), ``"combinations"``
    (the mixtures ``-P_AB w_B`` and ``R_yB w_B`` are measured) or ``"mixed"``
    where ``assignment`` maps every B node to ``"nodes"`` or
    ``"combinations"``.
    """
    a_idx = _resolve(spec.node_names, a_nodes, "node")
    if not a_idx:
        raise PreconditionError("the A-part needs at least one node")
    b_idx = [i for i in range(spec.n) if i not in a_idx]
    if not b_idx:
        M = assemble_informativity_M(spec, drop_inputs, drop_predictor_rows)
        return SubnetworkResult(spec, M, {"a_nodes": [spec.node_names[i] for i in a_idx], "b_nodes": []},
                                ["A-part is the whole network; full-network analysis"])
    if mode not in ("nodes", "combinations", "mixed"):
        raise PreconditionError(f"unknown sub-network mode {mode!r}")
    if mode == "mixed":
        assignment = dict(assignment or {})
        missing = [spec.node_names[i] for i in b_idx if spec.node_names[i] not in assignment]
        if missing:
            raise PreconditionError(f"mixed mode leaves B nodes unassigned: {', '.join(missing)}")
        bad = {k: v for k, v in assignment.items() if v not in ("nodes", "combinations")}
        if bad:
            raise PreconditionError(f"invalid assignment {bad}")
        b_nodes = [i for i in b_idx if assignment[spec.node_names[i]] == "nodes"]
        b_comb = [i for i in b_idx if assignment[spec.node_names[i]] == "combinations"]
    elif mode == "nodes":
        b_nodes, b_comb = b_idx, []
    else:
        b_nodes, b_comb = [], b_idx

    nA, py = len(a_idx), spec.p_y
    all_r = list(range(spec.m_r))
    all_y = list(range(py))
    P_A = _sub(spec.P, a_idx, a_idx)
    negP_AB_nodes = [[e.negate() for e in row] for row in _sub(spec.P, a_idx, b_nodes)]
    negP_AB_comb = [[e.negate() for e in row] for row in _sub(spec.P, a_idx, b_comb)]
    Q_Ar = _sub(spec.Qr, a_idx, all_r)
    Q_Ae = _sub(spec.Qe, a_idx, list(range(spec.m_e)))
    R_yA = _sub(spec.Ry, all_y, a_idx)
    R_yB_nodes = _sub(spec.Ry, all_y, b_nodes)
    R_yB_comb = _sub(spec.Ry, all_y, b_comb)
    S_yr, S_ye = spec.Syr, spec.Sye
    notes: list[str] = []

    # y rows with R_yA and S_yr both zero carry no information on the A-part
    keep_y = [i for i in all_y if any(not e.is_zero for e in R_yA[i] + S_yr[i])]
    if len(keep_y) < py:
        notes.append("removed zero rows of [R_yA S_yr]: " + ", ".join(spec.y_names[i] for i in all_y if i not in keep_y))

    # input columns of the rewritten problem, each as (label, column over A rows, column over y rows)
    columns: list[tuple[str, list[EntrySpec], list[EntrySpec], str]] = []
    for k, b in enumerate(b_nodes):
        col_a = [row[k] for row in negP_AB_nodes]
        col_y = [R_yB_nodes[i][k] for i in all_y]
        columns.append((spec.node_names[b], col_a, col_y, "node"))
    tilde_rows = [i for i in range(nA) if any(not e.is_zero for e in negP_AB_comb[i])]
    hat_rows = [i for i in all_y if any(not e.is_zero for e in R_yB_comb[i])]
    for i in range(nA):
        col_a = [EntrySpec.one() if r == i else EntrySpec.zero() for r in range(nA)]
        columns.append((f"wt:{spec.node_names[a_idx[i]]}", col_a, [EntrySpec.zero()] * py, "tilde"))
    for i in all_y:
        col_y = [EntrySpec.one() if r == i else EntrySpec.zero() for r in all_y]
        columns.append((f"wh:{spec.y_names[i]}", [EntrySpec.zero()] * nA, col_y, "hat"))
    for k in all_r:
        columns.append((spec.r_names[k], [row[k] for row in Q_Ar], [S_yr[i][k] for i in all_y], "r"))

    kept_cols = []
    for label, col_a, col_y, kind in columns:
        if kind == "tilde":
            keep = int(label.split(":", 1)[1] in [spec.node_names[a_idx[i]] for i in tilde_rows])
        elif kind == "hat":
            yi = spec.y_names.index(label.split(":", 1)[1])
            keep = yi in hat_rows and yi in keep_y
        else:
            keep = any(not e.is_zero for e in col_a + col_y)
        if keep:
            kept_cols.append((label, col_a, col_y, kind))
        else:
            notes.append(f"removed zero input column {label}")

    new_r = [c[0] for c in kept_cols]
    Qr_new = [[c[1][i] for c in kept_cols] for i in range(nA)]
    Syr_new = [[c[2][i] for c in kept_cols] for i in keep_y]
    ident = NetworkSpec(
        nA, len(kept_cols), spec.m_e, len(keep_y),
        P=P_A, Qr=Qr_new, Qe=Q_Ae, Ry=[R_yA[i] for i in keep_y], Syr=Syr_new, Sye=[S_ye[i] for i in keep_y],
        node_names=[spec.node_names[i] for i in a_idx], r_names=new_r, e_names=list(spec.e_names),
        y_names=[spec.y_names[i] for i in keep_y],
        constraints=[c for c in spec.constraints], spectrum_positive_definite=spec.spectrum_positive_definite,
    )
    # constraints may mention names that vanished from the A-part
    kept_names = set(ident.free_names())
    ring_all = spec.ring()
    ident.constraints = []
    for c in spec.constraints:
        used = set(parse_rational(c, ring_all).num.variables()) | set(parse_rational(c, ring_all).den.variables())
        if used <= kept_names:
            ident.constraints.append(c)
        else:
            notes.append(f"constraint {c!r} dropped: mentions B-part names")

    # informativity matrix over the whole network
    n, mr, me = spec.n, spec.m_r, spec.m_e
    width = n + mr + me
    top = [spec.P[i] + spec.Qr[i] + spec.Qe[i] for i in range(n)]
    bottom = [spec.Ry[i] + spec.Syr[i] + spec.Sye[i] for i in keep_y]
    row_labels = list(spec.node_names) + [spec.y_names[i] for i in keep_y]
    for k, b in enumerate(b_nodes):
        col_nonzero = any(not row[k].is_zero for row in negP_AB_nodes) or any(not R_yB_nodes[i][k].is_zero for i in all_y)
        if not col_nonzero:
            continue
        row = [EntrySpec.zero()] * width
        row[b] = EntrySpec.one()
        bottom.append(row)
        row_labels.append(f"wB:{spec.node_names[b]}")
    for i in tilde_rows:
        row = [EntrySpec.zero()] * width
        for k, b in enumerate(b_comb):
            row[b] = negP_AB_comb[i][k]
        bottom.append(row)
        row_labels.append(f"wt:{spec.node_names[a_idx[i]]}")
    for i in hat_rows:
        row = [EntrySpec.zero()] * width
        for k, b in enumerate(b_comb):
            row[b] = R_yB_comb[i][k]
        bottom.append(row)
        row_labels.append(f"wh:{spec.y_names[i]}")
    for k in range(mr):
        row = [EntrySpec.zero()] * width
        row[n + k] = EntrySpec.one()
        bottom.append(row)
        row_labels.append(f"r:{spec.r_names[k]}")
    col_labels = list(spec.node_names) + list(spec.r_names) + list(spec.e_names)
    M = _assemble(n, top, bottom, row_labels, col_labels, drop_inputs, drop_predictor_rows)
    index_map = {
        "a_nodes": [spec.node_names[i] for i in a_idx],
        "b_nodes": [spec.node_names[i] for i in b_idx],
        "measured_nodes": [spec.node_names[i] for i in b_nodes],
        "combination_nodes": [spec.node_names[i] for i in b_comb],
        "kept_outputs": [spec.y_names[i] for i in keep_y],
        "inputs": new_r,
    }
    return SubnetworkResult(ident, M, index_map, notes + M.notes)
