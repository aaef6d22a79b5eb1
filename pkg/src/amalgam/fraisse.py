"""Finite models up to isomorphism, exhaustive amalgamation checks, and saturation.

Every theory here is universal, so every model of size n is a one-point
extension of a model of size n - 1 (for theories without operations).
``enumerate_models`` builds the isomorphism classes level by level that
way; with operations it falls back to a labelled search.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .construct import AmalgamMode, admissible_case, amalgamate, verify
from .core import (Report, Structure, Theory, VFormation, Violation, _canonical, canonize, validate)
from .errors import Inadmissible, InvalidInput, SizeBoundExceeded
from .oracle import LEQ_ID, LL_ID, SearchConfig, _cells, _Engine, _Search, _op_tables, search

#: Largest size ``enumerate_models`` accepts.
ENUMERATION_BOUND = 6
#: Largest size ``enumerate_models`` accepts for theories with operations.
ENUMERATION_BOUND_OPS = 4
#: Largest arm size ``check_ap_at_size`` accepts.
AP_CHECK_BOUND = 4


def _solve(universe, theory: Theory, ops: dict, fixed: dict):
    """All models on ``universe`` with the given op tables and fixed cells."""
    n = len(universe)
    eng = _Engine(n, theory, ops)
    st = eng.empty_state()
    for (r, i, j), val in fixed.items():
        eng.assign(st, r, i, j, val)
    if not eng.propagate(st):
        return
    for sol in _Search(eng, _cells(n, fixed), None).solutions(st):
        leq, ll = eng.matrices(sol)
        yield Structure(universe, leq, ll, ops)


def extensions(base: Structure, theory: Theory, k: int, prefix: str = "x") -> list[Structure]:
    """Models containing ``base`` induced, with k new points, up to permuting the new points.

    New points are labelled prefix1 .. prefixk; the result is sorted by
    canonical form over ``base`` held pointwise.
    """
    labels = [f"{prefix}{i + 1}" for i in range(k)]
    if set(labels) & set(base.universe):
        raise InvalidInput(f"labels with prefix {prefix!r} clash with the base")
    universe = tuple(sorted(set(base.universe) | set(labels)))
    pos = {x: i for i, x in enumerate(universe)}
    idx = [pos[x] for x in base.universe]
    fixed = {}
    for r, m in ((LEQ_ID, base.leq), (LL_ID, base.ll)):
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                fixed[(r, i, j)] = bool(m[a, b])
    partial = {}
    for name in base.ops:
        t = [None] * len(universe)
        for a, i in enumerate(idx):
            t[i] = idx[base.ops[name][a]]
        partial[name] = t
    missing = [name for name, _ in theory.op_sig if name not in partial]
    if missing:
        raise InvalidInput(f"base lacks operation {missing[0]!r}")
    new_idx = [pos[x] for x in labels]
    seen = {}
    for ops in _op_tables(partial, new_idx, len(universe)):
        for s in _solve(universe, theory, ops, fixed):
            key, _ = _canonical(s, fixed=base.universe)
            if key not in seen:
                seen[key] = canonize(s, prefix, fixed=base.universe)
    return [seen[k] for k in sorted(seen)]


def enumerate_models(theory: Theory, n: int) -> list[Structure]:
    """All n-element models of the theory, one per isomorphism class.

    Labels are e1..en and the list is sorted by canonical form.  Sizes
    above ``ENUMERATION_BOUND`` (``ENUMERATION_BOUND_OPS`` with operations)
    raise SizeBoundExceeded.
    """
    bound = ENUMERATION_BOUND_OPS if theory.op_sig else ENUMERATION_BOUND
    if n < 0 or n > bound:
        raise SizeBoundExceeded(f"enumerate_models supports sizes 0..{bound}")
    if theory.op_sig:
        empty = Structure((), np.zeros((0, 0), bool), np.zeros((0, 0), bool),
                          {name: () for name, _ in theory.op_sig})
        found = {}
        for s in extensions(empty, theory, n, "e"):
            found[_canonical(s)[0]] = s
    else:
        level = {(): Structure.empty()} if validate(Structure.empty(), theory).ok else {}
        for _ in range(n):
            nxt = {}
            for m in level.values():
                for s in extensions(m.relabel({x: "_" + x for x in m.universe}), theory, 1, "p"):
                    key = _canonical(s)[0]
                    if key not in nxt:
                        nxt[key] = s
            level = nxt
        found = level
    out = {}
    for key, s in found.items():
        out[key] = canonize(s, "e")
    return [out[k] for k in sorted(out)]


# -- amalgamation checks over all small V-formations -------------------------------


def iter_vformations(theory: Theory, n: int):
    """Every V-formation with |A|, |B| <= n over enumerated bases, up to isomorphism over C.

    C ranges over canonical models; A and B are extensions of C (new points
    a1.. and b1..), each taken up to permutation of its new points.  Pairs
    are unordered: (A, B) is produced but (B, A) is not.
    """
    for c_size in range(n + 1):
        for C in enumerate_models(theory, c_size):
            exts = []
            for k in range(n - c_size + 1):
                exts.append(extensions(C, theory, k, "x"))
            arms = [s for level in exts for s in level]
            for i, A in enumerate(arms):
                for B in arms[i:]:
                    yield VFormation(A.relabel({x: x if x in C.index else "a" + x[1:] for x in A.universe}),
                                     B.relabel({x: x if x in C.index else "b" + x[1:] for x in B.universe}),
                                     C)


def decide(v: VFormation, theory: Theory, mode: AmalgamMode):
    """Constructor when the theory is admissible, oracle otherwise.

    Returns (ok, amalgam or search result).
    """
    mode = AmalgamMode(mode)
    try:
        admissible_case(theory)
        ok_ops = all("LEQ" in pres for _, pres in theory.op_sig)
    except Inadmissible:
        ok_ops = False
    if ok_ops:
        w = amalgamate(v, theory)
        return verify(v, w, theory, mode).ok, w
    cfg = SearchConfig(allow_identification=mode is AmalgamMode.AP)
    res = search(v, theory, mode, cfg)
    return res.found, res


def check_ap_at_size(theory: Theory, n: int, mode: AmalgamMode = AmalgamMode.AP,
                     max_failures: int | None = None) -> Report:
    """Decide every V-formation with arms of size <= n; report each failure.

    Each violation is named after the mode, its witness lists the three
    universes, and ``detail`` holds the V-formation itself.
    """
    if n > AP_CHECK_BOUND:
        raise SizeBoundExceeded(f"check_ap_at_size supports arm sizes up to {AP_CHECK_BOUND}")
    mode = AmalgamMode(mode)
    failures = []
    for v in iter_vformations(theory, n):
        ok, _ = decide(v, theory, mode)
        if not ok:
            failures.append(Violation(mode.name, (v.A.universe, v.B.universe, v.C.universe), v))
            if max_failures is not None and len(failures) >= max_failures:
                break
    return Report(failures)


# -- saturation ----------------------------------------------------------------------


@dataclass(frozen=True)
class ExtensionType:
    """A one-point extension of the substructure on ``base``; the new point is ``point``."""

    base: tuple
    structure: Structure
    point: str

    def signature(self) -> tuple:
        s = self.structure
        p = s.index[self.point]
        row = [s.leq[p, p], s.ll[p, p]]
        for x in self.base:
            i = s.index[x]
            row += [s.leq[p, i], s.leq[i, p], s.ll[p, i], s.ll[i, p]]
        return tuple(bool(b) for b in row)


@dataclass(frozen=True)
class SaturationReport:
    realized: tuple
    unrealized: tuple
    added: tuple
    rounds: int
    complete: bool

    @property
    def ok(self) -> bool:
        return self.complete and not self.unrealized


def _point_types(base: Structure, theory: Theory, cache: dict) -> list[ExtensionType]:
    ren = {x: f"_{i}" for i, x in enumerate(base.universe)}
    positional = base.relabel(ren)
    key = (positional.leq.tobytes(), positional.ll.tobytes(), base.n)
    if key not in cache:
        cache[key] = extensions(positional, theory, 1, "*")
    back = {v: k for k, v in ren.items()}
    back["*1"] = "*"
    return [ExtensionType(base.universe, s.relabel(back), "*") for s in cache[key]]


def _realizes(m: Structure, subset: tuple, t: ExtensionType) -> bool:
    idx = np.array([m.index[x] for x in subset], dtype=np.intp)
    cand = np.setdiff1d(np.arange(m.n), idx)
    if len(cand) == 0:
        return False
    sig = np.array(t.signature(), dtype=bool)
    cols = [m.leq[cand, cand], m.ll[cand, cand]]
    for i in idx:
        cols += [m.leq[cand, i], m.leq[i, cand], m.ll[cand, i], m.ll[i, cand]]
    mat = np.stack(cols, axis=1)
    return bool((mat == sig).all(axis=1).any())


def extension_report(m: Structure, theory: Theory, s: int, cache: dict | None = None):
    """(realized, unrealized) extension types over every subset of size <= s."""
    cache = {} if cache is None else cache
    realized, unrealized = [], []
    for k in range(s + 1):
        for subset in combinations(m.universe, k):
            base = m.restrict(subset)
            for t in _point_types(base, theory, cache):
                (realized if _realizes(m, subset, t) else unrealized).append(t)
    return realized, unrealized


def _fresh_label(m: Structure, counter: list) -> str:
    while True:
        counter[0] += 1
        label = f"n{counter[0]}"
        if label not in m.index:
            return label


def saturate(m: Structure, theory: Theory, s: int, budget: int,
             rounds: int | None = None) -> tuple[Structure, SaturationReport]:
    """Grow ``m`` until every one-point extension type over a subset of size <= s is realized.

    A round scans the subsets present at its start; each unrealized type is
    realized by amalgamating the current structure with the extension over
    the subset.  Stops at a fixpoint, after ``rounds`` rounds, or when the
    next point would exceed ``budget`` elements; the report then lists what
    is still unrealized.
    """
    if theory.op_sig:
        raise InvalidInput("saturate handles theories without operations")
    rep = validate(m, theory)
    if not rep.ok:
        raise InvalidInput(f"input is not a model of the theory: {rep}", rep)
    admissible_case(theory)
    cache: dict = {}
    counter = [0]
    added = []
    done = 0
    complete = False
    stopped = False
    while not stopped and (rounds is None or done < rounds):
        grew = False
        snapshot = m.universe
        for k in range(s + 1):
            for subset in combinations(snapshot, k):
                base = m.restrict(subset)
                for t in _point_types(base, theory, cache):
                    if _realizes(m, subset, t):
                        continue
                    if m.n + 1 > budget:
                        stopped = True
                        break
                    label = _fresh_label(m, counter)
                    ext = t.structure.relabel({x: (label if x == t.point else x) for x in t.structure.universe})
                    m = amalgamate(VFormation(m, ext, base), theory).D
                    added.append(label)
                    grew = True
                if stopped:
                    break
            if stopped:
                break
        done += 1
        if not grew and not stopped:
            complete = True
            break
    realized, unrealized = extension_report(m, theory, s, cache)
    return m, SaturationReport(tuple(realized), tuple(unrealized), tuple(added), done,
                               complete and not unrealized)
