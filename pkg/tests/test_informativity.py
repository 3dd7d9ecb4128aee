import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import example, random_all_free_network
from netalg.errors import InconsistencyError, PreconditionError
from netalg.informativity import (
    FREE_ENTRY_CAVEAT,
    SPECTRUM_CAVEAT,
    FlowGraph,
    Method,
    RankCase,
    RankVerdict,
    block_identity_holds,
    generic_rank,
    groebner_rank_case,
    informativity_from_M,
    informativity_verdict,
    max_disjoint_paths,
    witness_is_valid,
)
from netalg.netmodel import apply_knowns, assemble_informativity_M, validate_spec
from netalg.polyalg import parse_rational


def networkx_paths(M):
    """Vertex-disjoint U-to-Z path count from networkx max-flow."""
    g = FlowGraph.from_M(M)
    G = nx.DiGraph()
    for v in g.sources + g.internal + g.sinks:
        G.add_edge(("in", v), ("out", v), capacity=1)
    for a, b in g.edges:
        G.add_edge(("out", a), ("in", b), capacity=len(g.internal) + 1)
    for u in g.sources:
        G.add_edge("s", ("in", u), capacity=1)
    for z in g.sinks:
        G.add_edge(("out", z), "t", capacity=1)
    if "s" not in G or "t" not in G:
        return 0
    return nx.maximum_flow_value(G, "s", "t")


def random_structure(rng):
    """Random M pattern, constants and shared names allowed."""
    n = rng.randint(1, 5)
    mr, me, py = rng.randint(0, 2), rng.randint(1, 3), rng.randint(1, 3)

    def e(p):
        r = rng.random()
        if r >= p:
            return 0
        return rng.choice([1, {"free": f"x{rng.randint(0, 3)}"}])

    raw = {"dims": {"n": n, "m_r": mr, "m_e": me, "p_y": py},
           "P": [[1 if i == j else e(0.3) for j in range(n)] for i in range(n)],
           "Qr": [[e(0.4) for _ in range(mr)] for _ in range(n)],
           "Qe": [[e(0.4) for _ in range(me)] for _ in range(n)],
           "Ry": [[e(0.4) for _ in range(n)] for _ in range(py)],
           "Sye": [[e(0.1) for _ in range(me)] for _ in range(py)]}
    return validate_spec(raw)


@given(st.integers(0, 10**9))
@settings(max_examples=150, deadline=None)
def test_flow_count_matches_networkx(seed):
    M = assemble_informativity_M(random_structure(random.Random(seed)))
    count, paths, _ = max_disjoint_paths(M)
    assert count == networkx_paths(M)
    assert len(paths) == count
    assert witness_is_valid(M, paths)


def test_witness_validation_rejects_shared_vertices():
    M = assemble_informativity_M(example("example1"))
    _, paths, _ = max_disjoint_paths(M)
    assert witness_is_valid(M, paths)
    assert not witness_is_valid(M, [paths[0], paths[0]])
    assert not witness_is_valid(M, [["U:r1", "Z:y1"]])  # no such edge


def test_example1_ranks_with_free_noise_filters():
    M = assemble_informativity_M(example("example1"))
    results = generic_rank(M, Method.ALL)
    assert {k: v.rank for k, v in results.items()} == {"graph": 3, "groebner": 3, "numeric": 3}
    case = results["groebner"].cases[0]
    assert case.verdict is RankVerdict.GENERICALLY_AT_LEAST_K
    locus = case.degenerate_locus
    assert len(locus) == 1 and locus[0] == parse_rational("H1*H2", locus[0].ring).num
    assert FREE_ENTRY_CAVEAT in results["graph"].caveats


def test_example1_ranks_with_known_filters():
    M = assemble_informativity_M(apply_knowns(example("example1"), {"H1": 1, "H2": 1}))
    case = groebner_rank_case(M.pi(), 3)
    assert case.verdict is RankVerdict.ALWAYS_AT_LEAST_K
    assert case.degenerate_locus == []


def test_rank_deficient_case():
    # a single measured row, so the rank is at most 1
    raw = {"dims": {"n": 1, "m_r": 0, "m_e": 2, "p_y": 1}, "P": [[1]], "Qe": [[{"free": "a"}, {"free": "b"}]],
           "Ry": [[{"free": "c"}]]}
    M = assemble_informativity_M(validate_spec(raw))
    with pytest.raises(PreconditionError):
        groebner_rank_case(M.pi(), 2)
    assert groebner_rank_case(M.pi(), 1).verdict is RankVerdict.GENERICALLY_AT_LEAST_K
    raw["Ry"] = [[0]]
    M0 = assemble_informativity_M(validate_spec(raw))
    assert groebner_rank_case(M0.pi(), 1).verdict is RankVerdict.GENERICALLY_LESS_THAN_K


def test_constraints_can_kill_rank():
    raw = {"dims": {"n": 1, "m_r": 0, "m_e": 2, "p_y": 2}, "P": [[1]],
           "Qe": [[{"free": "a"}, 0]], "Ry": [[{"free": "c"}], [0]], "Sye": [[0, 0], [0, {"free": "d"}]],
           "constraints": ["d"]}
    M = assemble_informativity_M(validate_spec(raw))
    free = generic_rank(M, Method.GROEBNER)["groebner"].rank
    constrained = generic_rank(M, Method.GROEBNER, constraints=["d"])["groebner"].rank
    assert (free, constrained) == (2, 1)


def test_rank_case_invariant():
    with pytest.raises(InconsistencyError):
        RankCase(2, RankVerdict.GENERICALLY_AT_LEAST_K, [])


def test_report_fields_and_spectrum_caveat():
    spec = example("example1")
    rep = informativity_verdict(spec, Method.GRAPH)
    assert rep.informative and rep.verdict == "informative"
    spec.spectrum_positive_definite = False
    rep = informativity_verdict(spec, Method.NUMERIC)
    assert not rep.informative
    assert SPECTRUM_CAVEAT in rep.caveats
    body = rep.to_json()
    assert body["pi_shape"] == [3, 3] and body["generic_rank"] == 3


def test_more_rows_than_columns_is_flagged():
    spec = example("example1")
    M = assemble_informativity_M(spec, drop_inputs=["e2"])
    rep = informativity_from_M(M, True, Method.ALL)
    assert not rep.informative
    assert any("more rows" in c for c in rep.caveats)


@given(st.integers(0, 10**9))
@settings(max_examples=15, deadline=None)
def test_all_free_methods_agree(seed):
    M = assemble_informativity_M(random_all_free_network(random.Random(seed)))
    assert M.all_free()
    ranks = {k: v.rank for k, v in generic_rank(M, Method.ALL).items()}
    assert len(set(ranks.values())) == 1
    assert block_identity_holds(M)
