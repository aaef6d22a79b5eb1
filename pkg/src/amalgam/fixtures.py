"""Concrete counterexamples and positive instances, with their expected search outcomes.

Each fixture is a normalized V-formation, a theory, an amalgamation level,
a search configuration and the expected outcome.  ``run_fixture`` decides
it with the oracle (or with free amalgamation where designated) and
compares.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

from .construct import AmalgamMode, free_amalgamate, verify
from .core import (UNION_OF_CHAINS, URQUHART, MaxAntichain, Report, Structure, Theory, U, VFormation,
                   Violation, validate)
from .errors import UnknownFixture
from .oracle import EXHAUSTED, WITNESS, SearchConfig, search

GENERAL = SearchConfig(allow_identification=True)
#: Outcome when a fixture's pieces are not models of its theory.
INVALID = "INVALID"


@dataclass(frozen=True)
class Fixture:
    name: str
    vformation: VFormation
    theory: Theory
    mode: AmalgamMode
    config: SearchConfig
    expected: str
    runner: str = "oracle"  # or "free"
    note: str = ""


def _diag(xs):
    return [(x, x) for x in xs]


def _urquhart_instance() -> VFormation:
    # <= plays the first preorder, << the second
    C = Structure.build("cd", leq=_diag("cd"), ll=_diag("cd"))
    A = Structure.build("acd", leq=_diag("acd") + [("a", "c")], ll=_diag("acd") + [("a", "d")])
    B = Structure.build("bcd", leq=_diag("bcd") + [("c", "b")], ll=_diag("bcd") + [("d", "b")])
    return VFormation(A, B, C)


def _aux_op() -> Fixture:
    c3 = ["c", "c1", "c2"]
    swap = {"c": "c", "c1": "c2", "c2": "c1"}
    C = Structure.build(c3, leq=_diag(c3), ops={"f": swap})
    ua = c3 + ["a1", "a2"]
    A = Structure.build(ua, leq=_diag(ua) + [("c1", "a1"), ("c2", "a2")], ll=[("c1", "a1"), ("c2", "a2")],
                        ops={"f": {**swap, "a1": "a2", "a2": "a1"}})
    ub = c3 + ["b1", "b2"]
    B = Structure.build(ub, leq=_diag(ub) + [("b1", "c1"), ("c", "b2")],
                        ops={"f": {**swap, "b1": "b2", "b2": "b1"}})
    theory = Theory(P={2, 5}, Q={4}, N={"F", "A1", "A2"}, op_sig={"f": ["LL"]})
    return Fixture("aux-op-3.3b", VFormation(A, B, C), theory, AmalgamMode.AP, GENERAL, EXHAUSTED,
                   note="an operation preserving only << blocks amalgamation of causal sets")


def _tuc() -> Fixture:
    cde = ["c", "d", "e"]
    C = Structure.build(cde, leq=_diag(cde), ll=_diag(cde))
    A = Structure.build(cde + ["a"], leq=_diag(cde + ["a"]) + [("d", "a")],
                        ll=_diag(cde + ["a"]) + [("d", "a"), ("c", "a")])
    B = Structure.build(cde + ["b"], leq=_diag(cde + ["b"]) + [("d", "b")],
                        ll=_diag(cde + ["b"]) + [("d", "b"), ("e", "b")])
    theory = Theory(P={2, 5}, N={"C"}, extras={UNION_OF_CHAINS})
    return Fixture("tuc-6.1b", VFormation(A, B, C), theory, AmalgamMode.AP,
                   SearchConfig(allow_identification=True, extra_elements=1), EXHAUSTED,
                   note="unions of chains with a coarser transitive relation lack AP")


def _tucn() -> Fixture:
    C = Structure.build(["c"], leq=_diag("c"), ll=_diag("c"), ops={"f": {"c": "c"}})
    A = Structure.build(["a", "c"], leq=_diag("ac"), ll=_diag("ac"), ops={"f": {"a": "c", "c": "c"}})
    B = Structure.build(["b1", "c"], leq=_diag(["b1", "c"]), ll=_diag(["b1", "c"]),
                        ops={"f": {"b1": "b1", "c": "c"}})
    theory = Theory(P={2, 5}, N={"F", "C"}, extras={MaxAntichain(2)}, op_sig={"f": ["LEQ"]})
    return Fixture("tucn-6.2b", VFormation(A, B, C), theory, AmalgamMode.AP, GENERAL, EXHAUSTED,
                   note="width-2 posets with an isotone operation lack AP")


def _antichain() -> Fixture:
    base = ["c", "c1", "c2"]
    lc = _diag(base) + [("c1", "c"), ("c2", "c")]
    C = Structure.build(base, leq=lc, ll=lc)
    la = lc + [("a", "a"), ("c1", "a")]
    A = Structure.build(base + ["a"], leq=la, ll=la)
    lb = lc + [("b1", "b1"), ("c2", "b1")]
    B = Structure.build(base + ["b1"], leq=lb, ll=lb)
    theory = Theory(P={2, 5}, N={"F", "C"}, extras={MaxAntichain(2)})
    return Fixture("antichain-6.3", VFormation(A, B, C), theory, AmalgamMode.AP, GENERAL, EXHAUSTED,
                   note="posets without 3-element antichains lack AP")


C2_THEORY = Theory(Q={5}, N={"F", "A2"})


def _c2_sap() -> Fixture:
    C = Structure.build(["c"], leq=[("c", "c")])
    arms = []
    for x in ("a1", "a2"):
        arms.append(Structure.build([x, "c"], leq=[(x, x), (x, "c"), ("c", x), ("c", "c")],
                                    ll=[(x, x), (x, "c")]))
    return Fixture("c2-fails-6.4-sap", VFormation(arms[0], arms[1], C), C2_THEORY, AmalgamMode.SAP,
                   SearchConfig(), EXHAUSTED, note="the two new points are forced together")


def _c2_ap() -> Fixture:
    # Literal encoding: C gains d with d <= c and not c <= d; a1 << d and
    # a1 <= d hold in the first arm, a2 << d fails in the second.  Pairs
    # forced by transitivity and not denied by the description (d <= ai)
    # are added.  Even so c <= a1 <= d would force c <= d, which the
    # description denies, so the first arm is not a model and the run
    # reports INVALID.
    C = Structure.build(["c", "d"], leq=[("c", "c"), ("d", "c")])
    a1 = ["a1", "c", "d"]
    A = Structure.build(a1, leq=[("a1", "a1"), ("a1", "c"), ("c", "a1"), ("c", "c"), ("d", "c"), ("d", "a1"),
                                   ("a1", "d")],
                        ll=[("a1", "a1"), ("a1", "c"), ("a1", "d")])
    a2 = ["a2", "c", "d"]
    B = Structure.build(a2, leq=[("a2", "a2"), ("a2", "c"), ("c", "a2"), ("c", "c"), ("d", "c"),
                                   ("d", "a2")],
                        ll=[("a2", "a2"), ("a2", "c")])
    return Fixture("c2-fails-6.4-ap", VFormation(A, B, C), C2_THEORY, AmalgamMode.AP,
                   SearchConfig(allow_identification=True, extra_elements=1), EXHAUSTED,
                   note="the forced identification is meant to clash with a second base point")


def _build() -> dict:
    fx = [
        Fixture("urquhart-5.1", _urquhart_instance(), URQUHART, AmalgamMode.AP,
                SearchConfig(allow_identification=True, extra_elements=2), EXHAUSTED,
                note="two preorders meeting only on the diagonal lack AP"),
        Fixture("urquhart-free-5.3", _urquhart_instance(),
                Theory(P={2}, Q={2}, extras={U}, transitive=False), AmalgamMode.SAP, SearchConfig(),
                WITNESS, runner="free", note="without transitivity the plain union amalgamates"),
        _aux_op(), _tuc(), _tucn(), _antichain(), _c2_sap(), _c2_ap(),
    ]
    return {f.name: f for f in fx}


_FIXTURES: dict | None = None


def _all() -> dict:
    global _FIXTURES
    if _FIXTURES is None:
        _FIXTURES = _build()
    return _FIXTURES


def names() -> list[str]:
    return list(_all())


def fixture(name: str) -> Fixture:
    try:
        return _all()[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(_all())}") from None


@dataclass(frozen=True)
class FixtureOutcome:
    fixture: Fixture
    outcome: str
    result: object  # SearchResult or Amalgam
    seconds: float

    @property
    def ok(self) -> bool:
        return self.outcome == self.fixture.expected


def run_fixture(name_or_fixture) -> FixtureOutcome:
    fx = fixture(name_or_fixture) if isinstance(name_or_fixture, str) else name_or_fixture
    start = time.monotonic()
    invalid = [(k, validate(s, fx.theory)) for k, s in (("A", fx.vformation.A), ("B", fx.vformation.B),
                                                         ("C", fx.vformation.C))]
    invalid = [(k, r) for k, r in invalid if not r.ok]
    if invalid:
        rep = Report(tuple(v for k, r in invalid for v in r.prefixed(k + ".").violations))
        return FixtureOutcome(fx, INVALID, rep, time.monotonic() - start)
    if fx.runner == "free":
        w = free_amalgamate(fx.vformation, fx.theory)
        outcome = WITNESS if verify(fx.vformation, w, fx.theory, fx.mode).ok else EXHAUSTED
        result = w
    else:
        result = search(fx.vformation, fx.theory, fx.mode, fx.config)
        outcome = result.outcome
    return FixtureOutcome(fx, outcome, result, time.monotonic() - start)


def run_all() -> Report:
    """One violation per fixture whose outcome differs from the expected one."""
    out = []
    for name in names():
        res = run_fixture(name)
        if not res.ok:
            out.append(Violation("FIXTURE", (name, res.fixture.expected, res.outcome)))
    return Report(out)


def fixture_to_json(fx: Fixture) -> dict:
    from .jsonio import theory_to_json, vformation_to_json

    return {
        "name": fx.name,
        "theory": theory_to_json(fx.theory),
        "vformation": vformation_to_json(fx.vformation),
        "mode": fx.mode.name,
        "config": {"allowIdentification": fx.config.allow_identification,
                   "extraElements": fx.config.extra_elements},
        "runner": fx.runner,
        "expected": fx.expected,
        "note": fx.note,
    }


def export(directory) -> list[Path]:
    """Write one JSON file per fixture into ``directory``."""
    from .jsonio import dumps

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in names():
        p = d / f"{name}.json"
        p.write_text(dumps(fixture_to_json(fixture(name))) + "\n", encoding="utf-8")
        paths.append(p)
    return paths

