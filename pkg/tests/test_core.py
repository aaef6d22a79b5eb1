import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amalgam import relalg
from amalgam.core import (AUXILIARY, CAUSAL, COARSER_ORDER, POSETS, URQUHART, Amalgam, BinRel, MaxAntichain,
                          Structure, Theory, VFormation, are_isomorphic, canonical_form, canonize,
                          check_rel_props, compose, is_embedding, normalize_instance, transitive_closure,
                          validate)
from amalgam.errors import NotAnEmbedding

from conftest import diag


def test_theory_normalizes_codes_and_conditions():
    t = Theory(P=[2, 5], Q={4}, N=["F", "A1", "A2"])
    assert t == CAUSAL
    assert str(t) == "P={2,5} Q={4} N={A1,A2,F}"


@pytest.mark.parametrize("kwargs", [
    {"P": {1}}, {"P": {7}}, {"Q": {2, 4}}, {"N": {"X"}}, {"extras": {"V"}},
    {"op_sig": {"f": []}}, {"op_sig": {"f": ["LT"]}},
])
def test_theory_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        Theory(**kwargs)


def test_degeneracies():
    assert Theory(N={"F", "C"}).degeneracies()
    assert "C" in Theory(Q={2}, N={"A1"}).effective_N()
    assert Theory(P={2}, Q={4}, N={"C"}).degeneracies()
    assert AUXILIARY.degeneracies() == []


def test_structure_build_and_pairs():
    s = Structure.build(["b", "a"], leq=diag("ab") + [("a", "b")])
    assert s.universe == ("a", "b")
    assert s.holds("leq", "a", "b") and not s.holds("leq", "b", "a")
    assert s.pairs("ll") == frozenset()
    with pytest.raises(ValueError):
        Structure.build(["a"], leq=[("a", "z")])


def test_restrict_and_relabel_roundtrip():
    s = Structure.build("abc", leq=diag("abc") + [("a", "b"), ("b", "c"), ("a", "c")], ll=[("a", "c")])
    r = s.restrict(["a", "c"])
    assert r.pairs("ll") == {("a", "c")}
    t = s.relabel({"a": "x", "b": "y", "c": "z"})
    assert t.holds("ll", "x", "z")
    assert are_isomorphic(s, t)


def test_validate_reports_least_witness():
    s = Structure.build("abc", leq=diag("abc") + [("a", "b"), ("b", "c")])
    rep = validate(s, POSETS)
    assert not rep.ok
    assert rep.get("leq.TRANSITIVE").witness == ("a", "b", "c")


def test_validate_a1_quadruple_free_theory():
    # w <= x << y without w << y
    s = Structure.build("wxy", leq=diag("wxy") + [("w", "x")], ll=[("x", "y")])
    rep = validate(s, Theory(P={2, 5}, N={"A1"}))
    assert rep.axioms() == ["A1"]
    assert rep.get("A1").witness == ("w", "x", "y")


def test_validate_urquhart_and_antichain():
    s = Structure.build("ab", leq=diag("ab") + [("a", "b")], ll=diag("ab") + [("a", "b")])
    assert "U" in validate(s, URQUHART).axioms()
    anti = Structure.build("abc", leq=diag("abc"), ll=diag("abc"))
    rep = validate(anti, Theory(P={2, 5}, N={"F", "C"}, extras={MaxAntichain(2)}))
    assert rep.get("MAX_ANTICHAIN(2)").witness == ("a", "b", "c")


def test_validate_operations():
    t = Theory(P={2, 5}, op_sig={"f": ["LEQ"]})
    s = Structure.build("ab", leq=diag("ab") + [("a", "b")], ops={"f": {"a": "b", "b": "a"}})
    assert validate(s, t).axioms() == ["f.PRESERVES_LEQ"]
    assert validate(Structure.build("a", leq=diag("a")), t).axioms() == ["f.MISSING"]


def test_named_theories_accept_examples():
    chain = Structure.build("ab", leq=diag("ab") + [("a", "b")], ll=diag("ab") + [("a", "b")])
    assert validate(chain, COARSER_ORDER).ok
    causal = Structure.build("ab", leq=diag("ab") + [("a", "b")], ll=[("a", "b")])
    assert validate(causal, CAUSAL).ok
    assert validate(causal, AUXILIARY).ok


def test_compose_and_closure():
    r = BinRel.from_pairs("abc", [("a", "b"), ("b", "c")])
    assert compose(r, r).pairs == {("a", "c")}
    assert transitive_closure(r).pairs == {("a", "b"), ("b", "c"), ("a", "c")}
    assert check_rel_props(transitive_closure(r), {5}).ok
    assert not check_rel_props(r).ok


def test_is_embedding_reports():
    s = Structure.build("ab", leq=diag("ab") + [("a", "b")])
    t = Structure.build("xyz", leq=diag("xyz") + [("x", "y")])
    assert is_embedding({"a": "x", "b": "y"}, s, t).ok
    assert "leq.PRESERVE" in is_embedding({"a": "y", "b": "x"}, s, t).axioms()
    assert "INJECTIVE" in is_embedding({"a": "x", "b": "x"}, s, t).axioms()
    assert is_embedding({"a": "x"}, s, t).axioms() == ["TOTAL"]


def test_vformation_invariants():
    C = Structure.build("c", leq=diag("c"))
    A = Structure.build("ac", leq=diag("ac") + [("a", "c")])
    B = Structure.build("bc", leq=diag("bc"))
    v = VFormation(A, B, C)
    assert v.new_a == ("a",) and v.new_b == ("b",)
    with pytest.raises(ValueError):
        VFormation(A, B, Structure.build("c", leq=[]))
    assert VFormation.over(A, B).C == C


def test_normalize_instance_relabels():
    C = Structure.build(["p"], leq=diag("p"))
    A = Structure.build(["u", "v"], leq=diag("uv") + [("u", "v")])
    B = Structure.build(["u", "w"], leq=diag("uw") + [("w", "u")])
    v = normalize_instance(A, B, C, {"p": "v"}, {"p": "w"})
    assert set(v.A.universe) == {"p", "u@a"} and set(v.B.universe) == {"p", "u@b"}
    assert v.A.holds("leq", "u@a", "p") and v.B.holds("leq", "p", "u@b")
    assert v.origin == {"u@a": "u", "u@b": "u"}
    with pytest.raises(NotAnEmbedding):
        normalize_instance(A, B, C, {"p": "zz"}, {"p": "w"})


def test_amalgam_rejects_noninjective_maps():
    D = Structure.build("x", leq=diag("x"))
    with pytest.raises(ValueError):
        Amalgam(D, {"a": "x", "b": "x"}, {})


def _random_structure(draw_bits, n):
    leq = np.array(draw_bits[: n * n], dtype=bool).reshape(n, n)
    ll = np.array(draw_bits[n * n: 2 * n * n], dtype=bool).reshape(n, n)
    return Structure(tuple(f"e{i}" for i in range(n)), leq, ll)


structures = st.integers(1, 4).flatmap(
    lambda n: st.lists(st.booleans(), min_size=2 * n * n, max_size=2 * n * n).map(
        lambda bits: _random_structure(bits, n)))


@settings(max_examples=200, deadline=None)
@given(structures, st.randoms(use_true_random=False))
def test_canonical_form_is_relabelling_invariant(s, rnd):
    labels = list(s.universe)
    shuffled = labels[:]
    rnd.shuffle(shuffled)
    t = s.relabel(dict(zip(labels, [f"z{x}" for x in shuffled])))
    assert canonical_form(s) == canonical_form(t)
    assert canonize(s) == canonize(t)


@settings(max_examples=100, deadline=None)
@given(structures, structures)
def test_isomorphism_agrees_with_brute_force(s, t):
    from itertools import permutations

    brute = s.n == t.n and any(
        np.array_equal(s.leq[np.ix_(p, p)], t.leq) and np.array_equal(s.ll[np.ix_(p, p)], t.ll)
        for p in map(list, permutations(range(s.n))))
    assert are_isomorphic(s, t) == brute


@settings(max_examples=100, deadline=None)
@given(structures)
def test_batched_kernels_agree_with_single(s):
    stack_leq = np.stack([s.leq, s.leq.T])
    stack_ll = np.stack([s.ll, s.ll.T])
    flags = relalg.transitive_ok(stack_leq)
    assert bool(flags[0]) == check_rel_props(s.leq_rel).ok
    assert bool(flags[1]) == check_rel_props(BinRel(s.universe, s.leq.T)).ok
    a2 = relalg.a2_violations(stack_leq, stack_ll)
    assert bool(a2[0].any()) == ("A2" in validate(s, Theory(N={"A2"}, transitive=False)).axioms())
