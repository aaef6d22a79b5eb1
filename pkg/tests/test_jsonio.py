import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amalgam.construct import amalgamate
from amalgam.core import CAUSAL, URQUHART, MaxAntichain, Structure, Theory, UNION_OF_CHAINS
from amalgam.fixtures import fixture, names
from amalgam.jsonio import (JsonInputError, amalgam_from_json, amalgam_to_json, load_file,
                            structure_from_json, structure_to_json, theory_from_json, theory_to_json,
                            vformation_from_json, vformation_to_json)

from conftest import diag


def test_structure_roundtrip_with_ops():
    s = Structure.build("ab", leq=diag("ab") + [("a", "b")], ll=[("a", "b")], ops={"f": {"a": "b", "b": "b"}})
    assert structure_from_json(json.loads(json.dumps(structure_to_json(s)))) == s


@pytest.mark.parametrize("obj,fragment", [
    ({"universe": ["a"], "leq": [["a", "a"], ["a", "a"]]}, "duplicate pair"),
    ({"universe": ["a"], "foo": []}, "unknown key"),
    ({"universe": ["a", "a"]}, "duplicate labels"),
    ({"universe": ["a"], "leq": [["a"]]}, "two labels"),
    ({"leq": []}, "missing key"),
])
def test_structure_errors(obj, fragment):
    with pytest.raises(JsonInputError) as e:
        structure_from_json(obj)
    assert fragment in str(e.value)


@pytest.mark.parametrize("theory", [
    CAUSAL, URQUHART, Theory(P={2, 5}, N={"C"}, extras={UNION_OF_CHAINS, MaxAntichain(2)}),
    Theory(P={2}, op_sig={"f": ["LEQ", "LL"]}), Theory(P={3}, transitive=False),
])
def test_theory_roundtrip(theory):
    assert theory_from_json(theory_to_json(theory)) == theory


@pytest.mark.parametrize("obj", [
    {"P": [7]}, {"N": ["Z"]}, {"extras": ["V"]}, {"extras": [{"maxAntichain": 0}]},
    {"opSig": {"f": ["X"]}}, {"P": [2, 4]}, {"P": [True]},
])
def test_theory_errors(obj):
    with pytest.raises(JsonInputError):
        theory_from_json(obj)


def test_vformation_with_embeddings_normalizes():
    obj = {
        "A": {"universe": ["u", "v"], "leq": [["u", "u"], ["v", "v"], ["u", "v"]]},
        "B": {"universe": ["u", "w"], "leq": [["u", "u"], ["w", "w"]]},
        "C": {"universe": ["p"], "leq": [["p", "p"]]},
        "i1": {"p": "v"}, "k1": {"p": "w"},
    }
    v = vformation_from_json(obj)
    assert set(v.C.universe) == {"p"}
    assert v.A.holds("leq", "u@a", "p")
    assert vformation_from_json(vformation_to_json(v)).origin == v.origin


@pytest.mark.parametrize("name", names())
def test_fixture_vformations_roundtrip(name):
    v = fixture(name).vformation
    back = vformation_from_json(vformation_to_json(v))
    assert (back.A, back.B, back.C) == (v.A, v.B, v.C)


def test_amalgam_roundtrip():
    v = vformation_from_json({
        "A": {"universe": ["a", "c"], "leq": [["a", "a"], ["c", "c"], ["a", "c"]], "ll": [["a", "c"]]},
        "B": {"universe": ["b", "c"], "leq": [["b", "b"], ["c", "c"], ["c", "b"]]},
        "C": {"universe": ["c"], "leq": [["c", "c"]]},
    })
    w = amalgamate(v, CAUSAL)
    back = amalgam_from_json(amalgam_to_json(w))
    assert back.D == w.D and back.iota == w.iota


def test_load_file_reports_location(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"universe": [}', encoding="utf-8")
    with pytest.raises(JsonInputError) as e:
        load_file(str(p))
    assert str(p) + ":1:" in str(e.value)


labels = st.sampled_from(["a", "b", "c", "d"])


@settings(max_examples=100, deadline=None)
@given(st.sets(labels, min_size=1), st.data())
def test_structure_roundtrip_property(universe, data):
    u = sorted(universe)
    pair = st.tuples(st.sampled_from(u), st.sampled_from(u))
    s = Structure.build(u, data.draw(st.sets(pair)), data.draw(st.sets(pair)))
    assert structure_from_json(structure_to_json(s)) == s
