from itertools import permutations, product

import numpy as np
import pytest

from amalgam.construct import AmalgamMode
from amalgam.core import (AUXILIARY, COARSER_ORDER, POSETS, MaxAntichain, Structure, Theory, are_isomorphic,
                          validate)
from amalgam.errors import SizeBoundExceeded
from amalgam.fraisse import (check_ap_at_size, enumerate_models, extension_report, extensions,
                             iter_vformations, saturate)

from conftest import diag


def _transitive(m):
    n = len(m)
    return all(m[i][k] for i in range(n) for j in range(n) for k in range(n) if m[i][j] and m[j][k])


def brute_force_count(theory, n):
    """Isomorphism classes of n-point models, from every labelled pair of transitive relations."""
    labels = tuple(f"e{i}" for i in range(n))
    perms = [list(p) for p in permutations(range(n))]
    rels = [np.array(bits, dtype=bool).reshape(n, n) for bits in product((False, True), repeat=n * n)]
    rels = [r for r in rels if _transitive(r.tolist())]
    seen = set()
    for leq in rels:
        for ll in rels:
            if not validate(Structure(labels, leq, ll), theory).ok:
                continue
            seen.add(min(leq[np.ix_(p, p)].tobytes() + ll[np.ix_(p, p)].tobytes() for p in perms))
    return len(seen)


@pytest.mark.parametrize("theory,n,expected", [
    (POSETS, 0, 1), (POSETS, 1, 1), (POSETS, 2, 2), (POSETS, 3, 5), (POSETS, 4, 16),
])
def test_poset_counts(theory, n, expected):
    assert len(enumerate_models(theory, n)) == expected


@pytest.mark.parametrize("theory", [COARSER_ORDER, AUXILIARY, Theory(P={2, 5}, Q={4}, N={"F", "A2"})])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_counts_match_brute_force(theory, n):
    assert len(enumerate_models(theory, n)) == brute_force_count(theory, n)


def test_enumerated_models_are_distinct_models():
    models = enumerate_models(AUXILIARY, 3)
    assert all(validate(m, AUXILIARY).ok for m in models)
    for i, m in enumerate(models):
        for k in models[i + 1:]:
            assert not are_isomorphic(m, k)


def test_enumeration_with_operations():
    t = Theory(P={2, 5}, N={"F", "C"}, op_sig={"f": ["LEQ"]})
    # antichain: identity, swap, constant; chain: identity and the two constants
    assert len(enumerate_models(t, 1)) == 1
    assert len(enumerate_models(t, 2)) == 6


def test_enumeration_bound():
    with pytest.raises(SizeBoundExceeded):
        enumerate_models(POSETS, 7)


def test_extensions_over_a_point():
    base = Structure.build(["p"], leq=diag("p"), ll=diag("p"))
    ext = extensions(base, COARSER_ORDER, 1)
    # x below, above or incomparable in <=, with << refining the incomparable case three ways
    assert len(ext) == 5
    assert all(e.restrict(["p"]) == base for e in ext)


def test_iter_vformations_unordered():
    vs = list(iter_vformations(POSETS, 2))
    assert vs
    assert all(v.A.n <= 2 and v.B.n <= 2 for v in vs)


def test_check_ap_coarser_order_super():
    assert check_ap_at_size(COARSER_ORDER, 2, AmalgamMode.SUPER).ok


def test_check_ap_finds_antichain_failures():
    t = Theory(P={2, 5}, N={"F", "C"}, extras={MaxAntichain(2)})
    assert check_ap_at_size(t, 3, AmalgamMode.AP).ok
    rep = check_ap_at_size(t, 4, AmalgamMode.AP, max_failures=1)
    assert not rep.ok
    v = rep.violations[0].detail
    assert v.A.n <= 4 and v.B.n <= 4


def test_saturate_one_round():
    start = Structure.build(["e1"], leq=diag(["e1"]), ll=diag(["e1"]))
    m, rep = saturate(start, COARSER_ORDER, 1, budget=20, rounds=1)
    assert validate(m, COARSER_ORDER).ok
    assert m.n == 6 and len(rep.added) == 5


def test_extension_report_on_finite_chain():
    # the least element of a finite chain has nothing below it
    s = Structure.build("ab", leq=diag("ab") + [("a", "b")], ll=diag("ab") + [("a", "b")])
    realized, unrealized = extension_report(s, COARSER_ORDER, 1)
    assert unrealized
    assert realized
