"""Sparse multivariate polynomials and rational functions over the rationals.

Monomials are stored twice per term: as a packed exponent integer (one
16-bit field per variable, top bit of each field is a guard bit) and as a
packed sort key for the active monomial order. Both encodings are linear in
the exponent vector, so multiplying monomials is integer addition and
comparing monomials is integer comparison.
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from gmpy2 import mpq

from .errors import MalformedInputError

FIELD_BITS = 16
FIELD_MASK = (1 << FIELD_BITS) - 1
MAX_EXPONENT = (1 << (FIELD_BITS - 1)) - 1

TAGS = ("saturation-t", "unknown-X", "closed-loop-g", "auxiliary")


def to_q(value) -> mpq:
    """Convert an int, Fraction, mpq or rational string such as ``"3/4"``."""
    if isinstance(value, str):
        try:
            return mpq(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise MalformedInputError(f"malformed rational constant {value!r}") from exc
    if isinstance(value, float):
        raise MalformedInputError(f"floating point constant {value!r} is not exact")
    return mpq(value)


class Comparison(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class VariableRing:
    """Ordered set of variable names with a partition tag per variable."""

    __slots__ = ("names", "tags", "_index", "_guard")

    def __init__(self, names: Sequence[str], tags: Sequence[str] | None = None):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise MalformedInputError(f"duplicate variable names in {names}")
        tags = tuple(tags) if tags is not None else ("auxiliary",) * len(names)
        if len(tags) != len(names):
            raise MalformedInputError("one partition tag per variable is required")
        for tag in tags:
            if tag not in TAGS:
                raise MalformedInputError(f"unknown variable tag {tag!r}")
        if tags.count("saturation-t") > 1:
            raise MalformedInputError("at most one saturation variable is allowed")
        self.names = names
        self.tags = tags
        self._index = {name: i for i, name in enumerate(names)}
        guard = 0
        for i in range(len(names)):
            guard |= 1 << (FIELD_BITS * i + FIELD_BITS - 1)
        self._guard = guard

    @property
    def arity(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise MalformedInputError(f"unknown variable {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, VariableRing) and self.names == other.names and self.tags == other.tags

    def __hash__(self) -> int:
        return hash((self.names, self.tags))

    def __repr__(self) -> str:
        return f"VariableRing({list(self.names)})"

    def with_tag(self, tag: str) -> list[str]:
        return [n for n, t in zip(self.names, self.tags) if t == tag]

    # packed monomial helpers

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.arity:
            raise MalformedInputError(f"exponent vector {tuple(exps)} does not match arity {self.arity}")
        mono = 0
        for i, e in enumerate(exps):
            if e < 0 or e > MAX_EXPONENT:
                raise MalformedInputError(f"exponent {e} out of range")
            mono |= e << (FIELD_BITS * i)
        return mono

    def unpack(self, mono: int) -> tuple[int, ...]:
        return tuple((mono >> (FIELD_BITS * i)) & FIELD_MASK for i in range(self.arity))

    def divides(self, a: int, b: int) -> bool:
        """True iff packed monomial ``a`` divides packed monomial ``b``."""
        g = self._guard
        return ((b | g) - a) & g == g

    def lex_order(self, priority: Sequence[str] | None = None) -> "MonomialOrder":
        return MonomialOrder.lex(self, priority)

    def grevlex_order(self, priority: Sequence[str] | None = None) -> "MonomialOrder":
        return MonomialOrder.grevlex(self, priority)

    def gen(self, name: str, order: "MonomialOrder | None" = None) -> "Polynomial":
        exps = [0] * self.arity
        exps[self.index(name)] = 1
        return Polynomial.from_dict(self, {tuple(exps): 1}, order)

    def gens(self, order: "MonomialOrder | None" = None) -> list["Polynomial"]:
        return [self.gen(n, order) for n in self.names]

    def const(self, value, order: "MonomialOrder | None" = None) -> "Polynomial":
        return Polynomial.from_dict(self, {(0,) * self.arity: value}, order)

    def parse(self, text: str, order: "MonomialOrder | None" = None) -> "Polynomial":
        return parse_polynomial(text, self, order)


class MonomialOrder:
    """Lex or grevlex order with an explicit variable priority (highest first).

    ``blocks`` optionally splits the priority list into consecutive groups
    compared one after another, each group graded reverse lexicographically
    inside. A single block is plain grevlex.
    """

    __slots__ = ("ring", "kind", "priority", "blocks", "_fields")

    def __init__(self, ring: VariableRing, kind: str, priority: Sequence[int], blocks: Sequence[int] | None = None):
        if kind not in ("lex", "grevlex"):
            raise MalformedInputError(f"unknown order kind {kind!r}")
        priority = tuple(priority)
        if sorted(priority) != list(range(ring.arity)):
            raise MalformedInputError("priority must be a permutation of the ring variables")
        if blocks is None:
            blocks = (ring.arity,)
        blocks = tuple(b for b in blocks if b > 0)
        if kind == "lex":
            blocks = (ring.arity,)
        if sum(blocks) != ring.arity:
            raise MalformedInputError("block sizes must sum to the arity")
        self.ring = ring
        self.kind = kind
        self.priority = priority
        self.blocks = blocks
        # each key field is a list of variable indices whose exponents are summed
        fields: list[tuple[int, ...]] = []
        if kind == "lex":
            fields = [(v,) for v in priority]
        else:
            start = 0
            for size in blocks:
                block = priority[start:start + size]
                for j in range(size, 0, -1):
                    fields.append(tuple(block[:j]))
                start += size
        self._fields = tuple(fields)

    @classmethod
    def lex(cls, ring: VariableRing, priority: Sequence[str] | None = None) -> "MonomialOrder":
        names = ring.names if priority is None else priority
        return cls(ring, "lex", [ring.index(n) for n in names])

    @classmethod
    def grevlex(cls, ring: VariableRing, priority: Sequence[str] | None = None) -> "MonomialOrder":
        names = ring.names if priority is None else priority
        return cls(ring, "grevlex", [ring.index(n) for n in names])

    @classmethod
    def block(cls, ring: VariableRing, groups: Sequence[Sequence[str]]) -> "MonomialOrder":
        """Elimination order: earlier groups dominate, grevlex inside a group."""
        priority = [ring.index(n) for g in groups for n in g]
        return cls(ring, "grevlex", priority, [len(g) for g in groups])

    @property
    def is_graded(self) -> bool:
        """True when total degree decides first (plain grevlex)."""
        return self.kind == "grevlex" and len(self.blocks) == 1

    def key(self, exps: Sequence[int]) -> int:
        k = 0
        for field in self._fields:
            k = (k << FIELD_BITS) | sum(exps[i] for i in field)
        return k

    def describe(self) -> str:
        names = [self.ring.names[i] for i in self.priority]
        if self.kind == "lex":
            return "lex " + " > ".join(names)
        if len(self.blocks) == 1:
            return "grevlex " + " > ".join(names)
        parts, start = [], 0
        for size in self.blocks:
            parts.append("(" + " > ".join(names[start:start + size]) + ")")
            start += size
        return "block-grevlex " + " >> ".join(parts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MonomialOrder)
            and self.ring == other.ring
            and self.kind == other.kind
            and self.priority == other.priority
            and self.blocks == other.blocks
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.priority, self.blocks))

    def __repr__(self) -> str:
        return f"MonomialOrder({self.describe()})"


@dataclass(frozen=True)
class Monomial:
    exponents: tuple[int, ...]

    def __post_init__(self):
        if any(e < 0 for e in self.exponents):
            raise MalformedInputError("negative exponent")

    @property
    def degree(self) -> int:
        return sum(self.exponents)


def mono_compare(a: Monomial | Sequence[int], b: Monomial | Sequence[int], order: MonomialOrder) -> Comparison:
    ea = a.exponents if isinstance(a, Monomial) else tuple(a)
    eb = b.exponents if isinstance(b, Monomial) else tuple(b)
    n = order.ring.arity
    if len(ea) != n or len(eb) != n:
        raise MalformedInputError("monomial arity does not match the ring")
    ka, kb = order.key(ea), order.key(eb)
    if ka == kb:
        return Comparison.EQUAL
    return Comparison.GREATER if ka > kb else Comparison.LESS


class Polynomial:
    """Immutable polynomial; ``_terms`` is a tuple of ``(key, mono, coeff)``
    sorted by strictly decreasing key under ``order``."""

    __slots__ = ("ring", "order", "_terms", "_hash")

    def __init__(self, ring: VariableRing, order: MonomialOrder, terms: tuple):
        self.ring = ring
        self.order = order
        self._terms = terms
        self._hash = None

    # construction

    @classmethod
    def from_dict(cls, ring: VariableRing, data: Mapping[tuple[int, ...], object], order: MonomialOrder | None = None) -> "Polynomial":
        order = order or MonomialOrder.grevlex(ring)
        terms = []
        for exps, c in data.items():
            c = to_q(c)
            if c:
                terms.append((order.key(exps), ring.pack(exps), c))
        terms.sort(reverse=True)
        return cls(ring, order, tuple(terms))

    @classmethod
    def _from_packed(cls, ring: VariableRing, order: MonomialOrder, acc: dict) -> "Polynomial":
        """Build from ``{key: (mono, coeff)}`` dropping zero coefficients."""
        terms = [(k, m, c) for k, (m, c) in acc.items() if c]
        terms.sort(reverse=True)
        return cls(ring, order, tuple(terms))

    def zero(self) -> "Polynomial":
        return Polynomial(self.ring, self.order, ())

    def one(self) -> "Polynomial":
        return Polynomial(self.ring, self.order, ((0, 0, mpq(1)),))

    def constant(self, c) -> "Polynomial":
        c = to_q(c)
        return Polynomial(self.ring, self.order, ((0, 0, c),) if c else ())

    def reorder(self, order: MonomialOrder) -> "Polynomial":
        if order == self.order:
            return self
        if order.ring != self.ring:
            raise MalformedInputError("order belongs to a different ring")
        unpack = self.ring.unpack
        terms = sorted(((order.key(unpack(m)), m, c) for _, m, c in self._terms), reverse=True)
        return Polynomial(self.ring, order, tuple(terms))

    def to_ring(self, ring: VariableRing, order: MonomialOrder | None = None) -> "Polynomial":
        """Re-express in another ring that contains every variable in the support."""
        order = order or MonomialOrder.grevlex(ring)
        positions = []
        for i, name in enumerate(self.ring.names):
            positions.append(ring.index(name) if name in ring else None)
        data: dict = {}
        for exps, c in self.items():
            new = [0] * ring.arity
            for i, e in enumerate(exps):
                if e:
                    if positions[i] is None:
                        raise MalformedInputError(f"variable {self.ring.names[i]} is not in the target ring")
                    new[positions[i]] = e
            data[tuple(new)] = data.get(tuple(new), 0) + c
        return Polynomial.from_dict(ring, data, order)

    # inspection

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][1] == 0)

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return self._terms[0][2] if self._terms else mpq(0)

    def items(self) -> Iterator[tuple[tuple[int, ...], mpq]]:
        unpack = self.ring.unpack
        for _, m, c in self._terms:
            yield unpack(m), c

    def terms(self) -> list[tuple[mpq, Monomial]]:
        return [(c, Monomial(e)) for e, c in self.items()]

    def as_dict(self) -> dict[tuple[int, ...], mpq]:
        return dict(self.items())

    @property
    def lc(self) -> mpq:
        return self._terms[0][2]

    @property
    def lm(self) -> tuple[int, ...]:
        return self.ring.unpack(self._terms[0][1])

    @property
    def lm_packed(self) -> int:
        return self._terms[0][1]

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e, _ in self.items())

    def support(self) -> frozenset[int]:
        """Indices of the variables that occur."""
        used = 0
        for _, m, _ in self._terms:
            used |= m
        out = set()
        for i in range(self.ring.arity):
            if (used >> (FIELD_BITS * i)) & FIELD_MASK:
                out.add(i)
        return frozenset(out)

    def variables(self) -> list[str]:
        return [self.ring.names[i] for i in sorted(self.support())]

    # arithmetic

    def _check(self, other: "Polynomial") -> None:
        if self.ring != other.ring:
            raise MalformedInputError("polynomials belong to different rings")
        if self.order != other.order:
            raise MalformedInputError("polynomials use different monomial orders; reorder explicitly")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, str)) or isinstance(other, mpq):
            return self.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = {k: [m, c] for k, m, c in self._terms}
        for k, m, c in other._terms:
            slot = acc.get(k)
            if slot is None:
                acc[k] = [m, c]
            else:
                slot[1] += c
        return Polynomial._from_packed(self.ring, self.order, acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.ring, self.order, tuple((k, m, -c) for k, m, c in self._terms))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return poly_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Polynomial":
        if e < 0:
            raise ValueError("negative power")
        result, base = self.one(), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def scale(self, c) -> "Polynomial":
        c = to_q(c)
        if not c:
            return self.zero()
        return Polynomial(self.ring, self.order, tuple((k, m, v * c) for k, m, v in self._terms))

    def mul_term(self, exps: Sequence[int], c) -> "Polynomial":
        c = to_q(c)
        if not c:
            return self.zero()
        dk, dm = self.order.key(exps), self.ring.pack(exps)
        return Polynomial(self.ring, self.order, tuple((k + dk, m + dm, v * c) for k, m, v in self._terms))

    def monic(self) -> "Polynomial":
        if not self._terms:
            return self
        return self.scale(1 / self.lc)

    def primitive_sign(self) -> "Polynomial":
        """Scale so the leading coefficient is positive."""
        if self._terms and self.lc < 0:
            return -self
        return self

    def monomial_content(self) -> tuple[int, ...]:
        """Exponent-wise minimum over all terms (the largest monomial factor)."""
        if not self._terms:
            return (0,) * self.ring.arity
        exps = [e for e, _ in self.items()]
        return tuple(min(col) for col in zip(*exps))

    def div_monomial(self, exps: Sequence[int]) -> "Polynomial":
        dk, dm = self.order.key(exps), self.ring.pack(exps)
        for _, m, _ in self._terms:
            if not self.ring.divides(dm, m):
                raise ValueError("monomial does not divide every term")
        return Polynomial(self.ring, self.order, tuple((k - dk, m - dm, c) for k, m, c in self._terms))

    def evaluate(self, values: Mapping[str, object] | Sequence):
        """Evaluate at a point; ``values`` maps names (or positions) to numbers.

        Works with any numeric type supporting ``+`` and ``*`` (mpq, Fraction,
        ints modulo a prime are handled by :func:`evaluate_mod`).
        """
        if isinstance(values, Mapping):
            point = [values[n] for n in self.ring.names]
        else:
            point = list(values)
        total = 0
        for exps, c in self.items():
            term = c
            for v, e in zip(point, exps):
                if e:
                    term = term * v ** e
            total = total + term
        return total

    def evaluate_mod(self, point: Sequence[int], p: int) -> int:
        total = 0
        for exps, c in self.items():
            num = int(c.numerator) % p
            den = int(c.denominator) % p
            term = num * pow(den, -1, p) % p
            for v, e in zip(point, exps):
                if e:
                    term = term * pow(v, e, p) % p
            total = (total + term) % p
        return total

    def substitute(self, values: Mapping[str, object]) -> "Polynomial":
        """Replace some variables by rational constants, staying in the same ring."""
        idx = {self.ring.index(n): to_q(v) for n, v in values.items()}
        data: dict = {}
        for exps, c in self.items():
            new = list(exps)
            for i, v in idx.items():
                if new[i]:
                    c = c * v ** new[i]
                    new[i] = 0
            key = tuple(new)
            data[key] = data.get(key, 0) + c
        return Polynomial.from_dict(self.ring, data, self.order)

    # comparison and rendering

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            if self.ring != other.ring:
                return False
            if self.order == other.order:
                return self._terms == other._terms
            return self.as_dict() == other.as_dict()
        if isinstance(other, (int, Fraction)) or isinstance(other, mpq):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.as_dict().items()))
        return self._hash

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"Polynomial({render(self)!r})"


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    p._check(q)
    if not p._terms or not q._terms:
        return p.zero()
    if len(p._terms) < len(q._terms):
        p, q = q, p
    acc: dict = {}
    qt = q._terms
    for k1, m1, c1 in p._terms:
        for k2, m2, c2 in qt:
            k = k1 + k2
            slot = acc.get(k)
            if slot is None:
                acc[k] = [m1 + m2, c1 * c2]
            else:
                slot[1] += c1 * c2
    return Polynomial._from_packed(p.ring, p.order, acc)


def poly_divmod(f: Polynomial, divisors: Sequence[Polynomial], order: MonomialOrder | None = None) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division: ``f = sum(q_i * d_i) + r``.

    Leading terms are divided by the first divisor whose leading monomial
    divides them; otherwise the term moves to the remainder.
    """
    order = order or f.order
    f = f.reorder(order)
    divs = [d.reorder(order) for d in divisors]
    for d in divs:
        if d.ring != f.ring:
            raise MalformedInputError("divisor from a different ring")
        if not d:
            raise MalformedInputError("division by the zero polynomial")
    ring = f.ring
    divides = ring.divides
    quots: list[dict] = [{} for _ in divs]
    rem: dict = {}
    acc = {k: [m, c] for k, m, c in f._terms}
    keys = sorted(acc, reverse=True)
    heap = [-k for k in keys]
    heapq.heapify(heap)
    while heap:
        k = -heapq.heappop(heap)
        slot = acc.pop(k, None)
        if slot is None or not slot[1]:
            continue
        m, c = slot
        for i, d in enumerate(divs):
            dk, dm, dc = d._terms[0]
            if divides(dm, m):
                qk, qm, qc = k - dk, m - dm, c / dc
                prev = quots[i].get(qk)
                quots[i][qk] = [qm, qc] if prev is None else [qm, prev[1] + qc]
                for tk, tm, tc in d._terms[1:]:
                    nk = qk + tk
                    s = acc.get(nk)
                    if s is None:
                        acc[nk] = [qm + tm, -qc * tc]
                        heapq.heappush(heap, -nk)
                    else:
                        s[1] -= qc * tc
                break
        else:
            rem[k] = [m, c]
    q_polys = [Polynomial._from_packed(ring, order, q) for q in quots]
    return q_polys, Polynomial._from_packed(ring, order, rem)


def exact_div(f: Polynomial, d: Polynomial) -> Polynomial:
    """Quotient ``f / d`` when ``d`` divides ``f``; raises otherwise."""
    if d.is_constant():
        return f.scale(1 / d.constant_value())
    (q,), r = poly_divmod(f, [d])
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def try_exact_div(f: Polynomial, d: Polynomial) -> Polynomial | None:
    if d.is_constant():
        return f.scale(1 / d.constant_value())
    (q,), r = poly_divmod(f, [d])
    return None if r else q


# rendering and parsing

def _fmt_coeff(c: mpq) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def render(p: Polynomial) -> str:
    """Canonical text such as ``3/2*x^2*y - 1`` (terms in the active order)."""
    if not p._terms:
        return "0"
    names = p.ring.names
    parts = []
    for exps, c in p.items():
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mag = abs(c)
        if factors:
            body = "*".join(factors) if mag == 1 else _fmt_coeff(mag) + "*" + "*".join(factors)
        else:
            body = _fmt_coeff(mag)
        parts.append(("-" if c < 0 else "+", body))
    sign, body = parts[0]
    out = ("-" if sign == "-" else "") + body
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MalformedInputError(f"cannot parse {text!r} at position {pos}")
        num, name, op = m.groups()
        if num is not None:
            tokens.append(("num", num))
        elif name is not None:
            tokens.append(("name", name))
        else:
            tokens.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return tokens


class _Parser:
    """Recursive-descent parser for ``+ - * / ^`` expressions.

    Produces a :class:`RationalFunction`; polynomial parsing checks that the
    denominator is constant.
    """

    def __init__(self, text: str, ring: VariableRing, order: MonomialOrder | None):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.ring = ring
        self.order = order or MonomialOrder.grevlex(ring)
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self) -> "RationalFunction":
        if not self.tokens:
            raise MalformedInputError("empty expression")
        value = self.expr()
        if self.pos != len(self.tokens):
            raise MalformedInputError(f"trailing input in {self.text!r}")
        return value

    def expr(self):
        value = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            _, op = self.take()
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            _, op = self.take()
            rhs = self.unary()
            value = value * rhs if op == "*" else value / rhs
        return value

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, tok = self.take()
            if kind != "num" or "/" in tok:
                raise MalformedInputError(f"exponent must be a non-negative integer in {self.text!r}")
            return base ** int(tok)
        return base

    def atom(self):
        kind, tok = self.take()
        if kind == "num":
            return RationalFunction.from_poly(Polynomial.from_dict(self.ring, {(0,) * self.ring.arity: to_q(tok)}, self.order))
        if kind == "name":
            return RationalFunction.from_poly(self.ring.gen(tok, self.order))
        if tok == "(":
            value = self.expr()
            if self.take() != ("op", ")"):
                raise MalformedInputError(f"unbalanced parentheses in {self.text!r}")
            return value
        raise MalformedInputError(f"unexpected token {tok!r} in {self.text!r}")


def parse_rational(text: str, ring: VariableRing, order: MonomialOrder | None = None) -> "RationalFunction":
    try:
        return _Parser(text, ring, order).parse()
    except ZeroDivisionError as exc:
        raise MalformedInputError(f"division by zero in {text!r}") from exc


def parse_polynomial(text: str, ring: VariableRing, order: MonomialOrder | None = None) -> Polynomial:
    rf = parse_rational(text, ring, order)
    if not rf.den.is_constant():
        raise MalformedInputError(f"{text!r} is not a polynomial")
    return rf.num.scale(1 / rf.den.constant_value())


# rational functions

class RationalFunction:
    """``num/den`` kept unreduced except for monomial content and scaling.

    The denominator is monic (so its leading coefficient is positive); a zero
    numerator forces the denominator to 1. Equality is decided by
    cross-multiplication.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial | None = None, normalize: bool = True):
        if den is None:
            den = num.one()
        num._check(den)
        if not den:
            raise ZeroDivisionError("zero denominator")
        if normalize:
            num, den = _normalize(num, den)
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: Polynomial) -> "RationalFunction":
        return cls(p, p.one(), normalize=False)

    @property
    def ring(self) -> VariableRing:
        return self.num.ring

    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction.from_poly(other)
        if isinstance(other, (int, Fraction)) or isinstance(other, mpq):
            return RationalFunction.from_poly(self.num.constant(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rat_arith("add", self, other)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, normalize=False)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rat_arith("add", self, -other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rat_arith("add", other, -self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rat_arith("mul", self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return rat_arith("mul", self, rat_arith("inv", other))

    def __pow__(self, e: int):
        if e < 0:
            return rat_arith("inv", self) ** (-e)
        return RationalFunction(self.num ** e, self.den ** e)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None  # equality is cross-multiplication, no canonical hash

    def evaluate(self, values):
        den = self.den.evaluate(values)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return self.num.evaluate(values) / den

    def evaluate_mod(self, point, p: int) -> int:
        den = self.den.evaluate_mod(point, p)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes modulo p")
        return self.num.evaluate_mod(point, p) * pow(den, -1, p) % p

    def substitute(self, values) -> "RationalFunction":
        den = self.den.substitute(values)
        if not den:
            raise ZeroDivisionError("substitution makes a denominator vanish")
        return RationalFunction(self.num.substitute(values), den)

    def reorder(self, order: MonomialOrder) -> "RationalFunction":
        return RationalFunction(self.num.reorder(order), self.den.reorder(order), normalize=False)

    def __str__(self) -> str:
        if self.den.is_constant() and self.den.constant_value() == 1:
            return render(self.num)
        return f"({render(self.num)})/({render(self.den)})"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


def _normalize(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if not num:
        return num, num.one()
    if den.is_constant():
        return num.scale(1 / den.constant_value()), den.one()
    content = [min(a, b) for a, b in zip(num.monomial_content(), den.monomial_content())]
    if any(content):
        num, den = num.div_monomial(content), den.div_monomial(content)
        if den.is_constant():
            return num.scale(1 / den.constant_value()), den.one()
    q = try_exact_div(num, den)
    if q is not None:
        return q, den.one()
    lc = den.lc
    if lc != 1:
        num, den = num.scale(1 / lc), den.scale(1 / lc)
    return num, den


def rat_arith(kind: str, a: RationalFunction, b: RationalFunction | None = None) -> RationalFunction:
    """Field operations ``add``, ``mul`` and ``inv`` on rational functions."""
    if kind == "inv":
        if a.is_zero():
            raise ZeroDivisionError("inverse of the zero rational function")
        return RationalFunction(a.den, a.num)
    if b is None:
        raise MalformedInputError(f"{kind} needs two operands")
    if a.ring != b.ring:
        raise MalformedInputError("rational functions belong to different rings")
    if kind == "add":
        if a.is_zero():
            return b
        if b.is_zero():
            return a
        if a.den == b.den:
            return RationalFunction(a.num + b.num, a.den)
        return RationalFunction(a.num * b.den + b.num * a.den, a.den * b.den)
    if kind == "mul":
        if a.is_zero() or b.is_zero():
            return RationalFunction(a.num.zero(), a.num.one(), normalize=False)
        if a.den == b.num and not a.den.is_constant():
            return RationalFunction(a.num, b.den)
        if b.den == a.num and not b.den.is_constant():
            return RationalFunction(b.num, a.den)
        return RationalFunction(a.num * b.num, a.den * b.den)
    raise MalformedInputError(f"unknown rational operation {kind!r}")


def polys_in(ring: VariableRing, texts: Iterable[str], order: MonomialOrder | None = None) -> list[Polynomial]:
    return [parse_polynomial(t, ring, order) for t in texts]
