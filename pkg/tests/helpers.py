"""Shared generators for the property tests and the acceptance suite."""

from __future__ import annotations

import random
from importlib import resources

from netalg.groebner import Ideal
from netalg.netmodel import load_spec, validate_spec
from netalg.polyalg import MonomialOrder, Polynomial, VariableRing


def example_path(name: str) -> str:
    return str(resources.files("netalg") / "data" / f"{name}.net")


def example(name: str):
    return load_spec(example_path(name))


def random_polynomial(rng: random.Random, ring: VariableRing, order: MonomialOrder, max_deg: int = 3,
                      max_terms: int = 3, coef: int = 5) -> Polynomial:
    data = {}
    for _ in range(rng.randint(1, max_terms)):
        deg = rng.randint(0, max_deg)
        exps = [0] * ring.arity
        for _ in range(deg):
            exps[rng.randrange(ring.arity)] += 1
        c = rng.randint(-coef, coef) or 1
        data[tuple(exps)] = data.get(tuple(exps), 0) + c
    return Polynomial.from_dict(ring, data, order)


def random_ideal(rng: random.Random, max_vars: int = 4, max_gens: int = 3, max_deg: int = 3,
                 order_kind: str | None = None, max_terms: int = 3) -> tuple[Ideal, MonomialOrder]:
    n = rng.randint(1, max_vars)
    ring = VariableRing([f"x{i}" for i in range(n)])
    kind = order_kind or rng.choice(["lex", "grevlex"])
    order = MonomialOrder.lex(ring) if kind == "lex" else MonomialOrder.grevlex(ring)
    gens = [random_polynomial(rng, ring, order, max_deg, max_terms) for _ in range(rng.randint(1, max_gens))]
    return Ideal(ring, gens), order


def random_all_free_network(rng: random.Random, max_free: int = 10):
    """Small network whose every structural entry is a distinct free name
    (P keeps a unit diagonal)."""
    n = rng.randint(2, 4)
    mr = rng.randint(0, 2)
    me = rng.randint(1, 3)
    py = rng.randint(1, 3)
    count = [0]

    def entry(prob: float, name: str, coef=None):
        if count[0] >= max_free or rng.random() >= prob:
            return 0
        count[0] += 1
        return {"free": name, "coef": coef} if coef else {"free": name}

    raw = {"dims": {"n": n, "m_r": mr, "m_e": me, "p_y": py}}
    raw["Ry"] = [[entry(0.5, f"R{i}{j}") for j in range(n)] for i in range(py)]
    raw["Qr"] = [[entry(0.5, f"Qr{i}{j}") for j in range(mr)] for i in range(n)]
    raw["Qe"] = [[entry(0.5, f"Qe{i}{j}") for j in range(me)] for i in range(n)]
    raw["P"] = [[1 if i == j else entry(0.3, f"G{i}{j}", "-1") for j in range(n)] for i in range(n)]
    raw["Sye"] = [[entry(0.1, f"S{i}{j}") for j in range(me)] for i in range(py)]
    raw["assumptions"] = {"spectrum_positive_definite": True}
    return validate_spec(raw)


ACCEPTANCE_LINES: list[str] = []
