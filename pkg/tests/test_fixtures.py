import json

import pytest

from amalgam.core import validate
from amalgam.errors import UnknownFixture
from amalgam.fixtures import INVALID, export, fixture, names, run_fixture
from amalgam.oracle import EXHAUSTED, WITNESS

EXPECTED = {
    "urquhart-5.1": EXHAUSTED,
    "urquhart-free-5.3": WITNESS,
    "aux-op-3.3b": EXHAUSTED,
    "tuc-6.1b": EXHAUSTED,
    "tucn-6.2b": EXHAUSTED,
    "antichain-6.3": EXHAUSTED,
    "c2-fails-6.4-sap": EXHAUSTED,
    "c2-fails-6.4-ap": EXHAUSTED,
}


def test_all_eight_registered():
    assert sorted(names()) == sorted(EXPECTED)
    assert all(fixture(n).expected == e for n, e in EXPECTED.items())


@pytest.mark.parametrize("name", [n for n in EXPECTED if n != "c2-fails-6.4-ap"])
def test_fixture_reproduces(name):
    res = run_fixture(name)
    assert res.ok, (res.outcome, res.result)


def test_valid_fixtures_have_model_pieces():
    for n in names():
        fx = fixture(n)
        if n == "c2-fails-6.4-ap":
            continue
        for s in (fx.vformation.A, fx.vformation.B, fx.vformation.C):
            assert validate(s, fx.theory).ok


def test_literal_ap_instance_is_not_a_model():
    # c <= a1 <= d in the first arm while c <= d is denied
    res = run_fixture("c2-fails-6.4-ap")
    assert res.outcome == INVALID
    assert res.result.get("A.leq.TRANSITIVE").witness == ("c", "a1", "d")


def test_unknown_fixture():
    with pytest.raises(UnknownFixture):
        fixture("nope")


def test_export_matches_shipped_data(tmp_path):
    paths = export(tmp_path)
    assert len(paths) == 8
    for p in paths:
        obj = json.loads(p.read_text(encoding="utf-8"))
        assert obj["name"] == p.stem
        assert obj["expected"] == EXPECTED[p.stem]
