import copy
import json
import random
from fractions import Fraction

import pytest

from helpers import example, example_path
from netalg.errors import PreconditionError
from netalg.identifiability import build_F
from netalg.netmodel import (
    EntrySpec,
    SpecValidationError,
    apply_knowns,
    assemble_informativity_M,
    dumps_spec,
    generic_constants,
    prune,
    resample_generic,
    serialize_spec,
    subnetwork_transform,
    validate_spec,
)
from netalg.polyalg import parse_rational

TINY = {
    "dims": {"n": 2, "m_r": 1, "m_e": 1, "p_y": 1},
    "P": [[1, {"free": "a", "coef": "-1"}], [0, 1]],
    "Qr": [[0], [{"free": "b"}]],
    "Qe": [[1], [0]],
    "Ry": [[1, 0]],
}


def test_defaults_and_names():
    spec = validate_spec(TINY)
    assert spec.node_names == ["w1", "w2"] and spec.r_names == ["r1"]
    assert all(e.is_zero for row in spec.Syr + spec.Sye for e in row)
    assert spec.free_names() == ["a", "b"]
    assert spec.unknown_names() == ["a", "b"]


def test_all_violations_are_collected():
    raw = copy.deepcopy(TINY)
    raw["P"] = [[1, 0]]
    raw["Qr"][0][0] = 0.5
    raw["Ry"][0][0] = {"free": "1bad"}
    with pytest.raises(SpecValidationError) as info:
        validate_spec(raw)
    text = " ".join(info.value.violations)
    assert len(info.value.violations) >= 3
    assert "P" in text and "Qr[0][0]" in text


def test_shared_entries_are_noticed():
    raw = copy.deepcopy(TINY)
    raw["Qe"][0][0] = {"free": "b"}
    spec = validate_spec(raw)
    assert spec.shared_names() == ["b"]
    assert any("shared entry: b" in n for n in spec.notices)


def test_serialization_roundtrip():
    spec = example("example5")
    again = validate_spec(json.loads(json.dumps(serialize_spec(spec))))
    assert dumps_spec(again) == dumps_spec(spec)


def test_example1_M_layout():
    M = assemble_informativity_M(example("example1"))
    assert (M.rows, M.cols) == (7, 7)
    assert M.z_labels == ["y1", "y2", "r:r1"]
    assert M.u_labels == ["r1", "e1", "e2"]
    assert not M.all_free()  # the unit path w2 -> w3 and w4 -> w1


def test_dropping_inputs():
    spec = example("example5")
    M = assemble_informativity_M(spec, drop_inputs=["r4", "e1"])
    assert "r4" not in M.u_labels and "e1" not in M.u_labels
    assert "r:r4" not in M.z_labels
    assert any("pass-through" in n for n in M.notes)
    with pytest.raises(PreconditionError):
        assemble_informativity_M(spec, drop_inputs=spec.r_names + spec.e_names)
    with pytest.raises(PreconditionError):
        assemble_informativity_M(spec, drop_inputs=["r9"])


def test_numeric_negates_measurements():
    M = assemble_informativity_M(validate_spec(TINY))
    rows = M.numeric({"a": Fraction(2), "b": Fraction(3)})
    assert rows[0][:2] == [1, -2]
    assert rows[2][0] == -1  # y row, R block sign flipped


def test_knowns_become_generic_constants():
    spec = example("example1")
    known = apply_knowns(spec, {"H1": 1, "H2": Fraction(2, 3)})
    assert "H1" not in known.free_names()
    assert len(generic_constants(known)) == 2
    with pytest.raises(PreconditionError):
        apply_knowns(spec, {"nope": 1})
    resampled = resample_generic(known, random.Random(1))
    assert resampled.Qe[0][0].kind == "const" and resampled.Qe[0][0].value != 1


def test_knowns_substitute_into_constraints():
    raw = copy.deepcopy(TINY)
    raw["constraints"] = ["a - 2*b"]
    spec = validate_spec(raw)
    assert apply_knowns(spec, {"b": 1}).constraints == ["a - 2"]
    with pytest.raises(PreconditionError):
        apply_knowns(validate_spec({**raw, "constraints": ["a - 2"]}), {"a": 3})


def test_prune():
    z, o = EntrySpec.zero(), EntrySpec.one()
    grid = [[z, o], [z, z]]
    assert prune(grid, "rows")[1] == [0]
    assert prune(grid, "cols")[1] == [1]


def test_example1_node_view_gives_expected_F():
    spec = example("example1")
    res = subnetwork_transform(spec, ["w1", "w2"], "nodes")
    F, names = build_F(res.ident_spec)
    assert names == ["G1", "Q1"]
    assert F.shape == (1, 2)
    ring = F.ring
    assert F[0, 0] == parse_rational("G1", ring)
    assert F[0, 1] == parse_rational("G1*Q1", ring)
    assert res.index_map["measured_nodes"] == ["w3", "w4"]


def test_example5_combination_view():
    spec = example("example5")
    res = subnetwork_transform(spec, ["w1", "w2"], "combinations")
    assert res.ident_spec.r_names == ["wt:w2", "r1", "r2", "r3"]
    assert sorted(res.ident_spec.unknown_names()) == ["G12", "Q1", "Q2", "R1"]
    assert "wt:w2" in res.info_M.z_labels
    assert (res.info_M.rows, res.info_M.cols) == (13, 15)


def test_mixed_mode_needs_full_assignment():
    spec = example("example5")
    with pytest.raises(PreconditionError):
        subnetwork_transform(spec, ["w1", "w2"], "mixed", {"w3": "nodes"})
    res = subnetwork_transform(spec, ["w1", "w2"], "mixed",
                               {"w3": "nodes", "w4": "combinations", "w5": "combinations"})
    assert res.index_map["measured_nodes"] == ["w3"]


def test_fixture_files_load():
    for name in ("example1", "example4", "example5"):
        assert example_path(name).endswith(".net")
        example(name)
