import numpy as np
import pytest

from amalgam.construct import AmalgamMode, amalgamate, amalgamate_leq, verify
from amalgam.core import COARSER_ORDER, POSETS, URQUHART, Amalgam, Structure, Theory, VFormation
from amalgam.errors import InvalidInput, TimeBudgetExceeded
from amalgam.fixtures import C2_THEORY, fixture
from amalgam.oracle import (EXHAUSTED, WITNESS, SearchConfig, check_complete,
                            decide_superamalgamation_over_union, iter_witnesses, random_extension,
                            random_model, search)

from conftest import diag, random_vformation


def test_disjoint_singletons_amalgamate():
    A = Structure.build("a", leq=diag("a"), ll=diag("a"))
    B = Structure.build("b", leq=diag("b"), ll=diag("b"))
    res = decide_superamalgamation_over_union(VFormation(A, B, Structure.empty()), POSETS)
    assert res.found and res.genuine
    assert res.amalgam.D.pairs("leq") == {("a", "a"), ("b", "b")}


def test_first_witness_is_least():
    # over the union with no constraints linking a and b, the least amalgam adds nothing
    A = Structure.build("ac", leq=diag("ac"))
    B = Structure.build("bc", leq=diag("bc"))
    v = VFormation(A, B, A.restrict("c"))
    res = search(v, Theory(P={2, 5}), AmalgamMode.AP)
    assert res.amalgam.D.pairs("leq") == {("a", "a"), ("b", "b"), ("c", "c")}


def test_identified_points_in_general_mode():
    v = fixture("c2-fails-6.4-sap").vformation
    assert search(v, C2_THEORY, AmalgamMode.SAP).outcome == EXHAUSTED
    res = search(v, C2_THEORY, AmalgamMode.AP, SearchConfig(allow_identification=True))
    assert res.found
    assert res.amalgam.iota["a1"] == res.amalgam.kappa["a2"]
    assert verify(v, res.amalgam, C2_THEORY, AmalgamMode.AP).ok


def test_urquhart_exhausted_in_bounded_general_mode():
    v = fixture("urquhart-5.1").vformation
    res = search(v, URQUHART, AmalgamMode.AP, SearchConfig(allow_identification=True, extra_elements=2))
    assert res.outcome == EXHAUSTED and res.genuine
    assert res.stats.configurations > 1


def test_bounded_ap_without_identification_is_not_genuine():
    v = fixture("urquhart-5.1").vformation
    res = search(v, URQUHART, AmalgamMode.AP)
    assert res.outcome == EXHAUSTED and not res.genuine


def test_time_budget():
    v = fixture("urquhart-5.1").vformation
    with pytest.raises(TimeBudgetExceeded):
        search(v, URQUHART, AmalgamMode.AP,
               SearchConfig(allow_identification=True, extra_elements=2, time_budget=1e-9))


def test_search_rejects_invalid_pieces():
    A = Structure.build("ab", leq=[("a", "b")])
    with pytest.raises(InvalidInput):
        search(VFormation(A, A, A), POSETS)


def test_monotone_in_mode(theories, rng):
    seen = 0
    while seen < 40:
        t, _ = theories[int(rng.integers(len(theories)))]
        v = random_vformation(t, rng, arm_max=3)
        if v is None:
            continue
        found = [search(v, t, m).found for m in (AmalgamMode.SUPER, AmalgamMode.SAP, AmalgamMode.AP)]
        assert found == sorted(found)
        seen += 1


def test_witnesses_pass_both_verifiers(theories, rng):
    seen = 0
    while seen < 40:
        t, _ = theories[int(rng.integers(len(theories)))]
        v = random_vformation(t, rng, arm_max=3)
        if v is None:
            continue
        for k, w in enumerate(iter_witnesses(v, t)):
            assert verify(v, w, t).ok
            assert check_complete(v, w, t).ok
            if k == 5:
                break
        seen += 1


def test_search_is_deterministic():
    v = fixture("c2-fails-6.4-sap").vformation
    cfg = SearchConfig(allow_identification=True, extra_elements=1)
    a = search(v, C2_THEORY, AmalgamMode.AP, cfg)
    b = search(v, C2_THEORY, AmalgamMode.AP, cfg)
    assert a.amalgam.D == b.amalgam.D and a.stats.nodes == b.stats.nodes


def test_distinct_leq_yields_each_order_once():
    A = Structure.build("ac", leq=diag("ac"), ll=diag("ac"))
    B = Structure.build("bc", leq=diag("bc"), ll=diag("bc"))
    v = VFormation(A, B, A.restrict("c"))
    orders = [w.D.pairs("leq") for w in iter_witnesses(v, COARSER_ORDER, AmalgamMode.SAP, distinct_leq=True)]
    assert len(orders) == len(set(orders)) == 3  # a, b incomparable, a < b, b < a


def test_check_complete_detects_faults():
    C = Structure.build("c", leq=diag("c"))
    A = Structure.build("ac", leq=diag("ac") + [("a", "c")])
    B = Structure.build("bc", leq=diag("bc") + [("c", "b")])
    v = VFormation(A, B, C)
    t = Theory(P={2, 5})
    w = amalgamate(v, t)
    assert check_complete(v, w, t).ok
    D = w.D.replace(leq=amalgamate_leq(v).matrix & ~np.eye(3, dtype=bool) | np.eye(3, dtype=bool))
    bad = D.replace(leq=D.leq & ~(np.arange(3)[:, None] == 0) | np.eye(3, dtype=bool))
    assert not check_complete(v, Amalgam(bad, w.iota, w.kappa), t).ok
    glued = Amalgam(Structure.build("cx", leq=diag("cx")), {"a": "x", "c": "c"}, {"b": "x", "c": "c"})
    assert "SAP" in check_complete(VFormation(A.replace(leq=np.eye(2, dtype=bool)),
                                              B.replace(leq=np.eye(2, dtype=bool)), C),
                                   glued, t, AmalgamMode.SAP).axioms()


def test_random_models_are_models(theories, rng):
    from amalgam.core import validate

    for t, _ in theories[::7]:
        m = random_model(t, ["x", "y", "z"], rng)
        if m is not None:
            assert validate(m, t).ok
            e = random_extension(m, t, ["w"], rng)
            assert e is None or (validate(e, t).ok and e.restrict(m.universe) == m)
