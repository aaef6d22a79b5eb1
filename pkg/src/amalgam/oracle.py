"""Backtracking search for amalgams.

The search fixes every cell that the embeddings determine, then branches
on the remaining cells of <= and << with eager propagation.  Each
relation is tracked as two lists of row bitmasks: cells known to hold and
cells known to fail.  The axioms are Horn-like, so most of them propagate
in both directions: a transitivity rule x R y, y R z ⇒ x R z also turns a
known x R y together with a known failure of x R z into a failure of y R z.

Branching order is fixed: <= cells first, then << cells, each in
lexicographic order of (row label, column label), trying "absent" before
"present".  Propagation only ever records forced values, so the first
witness is the lexicographically least assignment in that order.

The same engine doubles as an independent verifier (``check_complete``)
and as a random model generator (``random_model``, ``random_extension``).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Iterator

import numpy as np

from . import relalg
from .construct import AmalgamMode, verify
from .core import (UNION_OF_CHAINS, Amalgam, Prop, Report, Structure, Theory, U, VFormation,
                   Violation, validate)
from .errors import InvalidInput, TimeBudgetExceeded

WITNESS = "WITNESS"
EXHAUSTED = "EXHAUSTED"

LEQ_ID, LL_ID = 0, 1


@dataclass(frozen=True)
class SearchConfig:
    """Search bounds.  Over-union mode: no identification and no fresh points."""

    allow_identification: bool = False
    extra_elements: int = 0
    time_budget: float | None = None

    def __post_init__(self):
        if self.extra_elements < 0:
            raise ValueError("extra_elements must be nonnegative")

    @property
    def over_union(self) -> bool:
        return not self.allow_identification and self.extra_elements == 0


@dataclass(frozen=True)
class SearchStats:
    nodes: int = 0
    configurations: int = 0
    seconds: float = 0.0


@dataclass(frozen=True)
class SearchResult:
    """Witness amalgam, or a certificate that the bounded space is empty.

    ``genuine`` says whether an EXHAUSTED outcome refutes the property for
    amalgams of any size.  All supported axioms are universal, so any
    amalgam restricts to one on the union of the two images; the bounded
    search therefore covers every case once that union is reachable
    (always for SAP and SUPER, and for AP when identification is allowed).
    """

    outcome: str
    amalgam: Amalgam | None
    stats: SearchStats
    mode: AmalgamMode
    config: SearchConfig
    genuine: bool

    @property
    def found(self) -> bool:
        return self.outcome == WITNESS


# -- propagation engine -------------------------------------------------------------


def _bits(mask: int):
    j = 0
    while mask:
        if mask & 1:
            yield j
        mask >>= 1
        j += 1


class _Engine:
    """Three-valued relation state plus the theory's propagation rules.

    A state is a list [T_leq, F_leq, T_ll, F_ll] of row-bitmask lists.
    """

    def __init__(self, n: int, theory: Theory, ops: dict[str, tuple]):
        self.n = n
        self.theory = theory
        self.ops = ops
        t = theory
        horn = []
        if t.transitive:
            horn += [(LEQ_ID, LEQ_ID, LEQ_ID), (LL_ID, LL_ID, LL_ID)]
        if "A1" in t.N:
            horn.append((LEQ_ID, LL_ID, LL_ID))
        if "A2" in t.N:
            horn.append((LL_ID, LEQ_ID, LL_ID))
        self.horn = horn
        contain = []
        if "F" in t.N:
            contain.append((LL_ID, LEQ_ID))
        if "C" in t.N:
            contain.append((LEQ_ID, LL_ID))
        self.contain = contain
        self.props = [(LEQ_ID, t.P), (LL_ID, t.Q)]
        self.preserve = []
        for name, pres in t.op_sig:
            for rel in sorted(pres):
                self.preserve.append((ops[name], LEQ_ID if rel == "LEQ" else LL_ID))
        self.uoc = UNION_OF_CHAINS in t.extras
        self.urq = U in t.extras
        bound = t.max_antichain()
        self.antichain = None if bound is None or bound + 1 > n else list(combinations(range(n), bound + 1))

    def empty_state(self) -> list:
        st = [[0] * self.n for _ in range(4)]
        for r, props in self.props:
            for i in range(self.n):
                if Prop.REFLEXIVE in props:
                    st[2 * r][i] |= 1 << i
                if Prop.ANTIREFLEXIVE in props:
                    st[2 * r + 1][i] |= 1 << i
        return st

    @staticmethod
    def known(st, r, i, j) -> bool:
        return bool((st[2 * r][i] | st[2 * r + 1][i]) >> j & 1)

    @staticmethod
    def conflict(st) -> bool:
        for r in (0, 1):
            for a, b in zip(st[2 * r], st[2 * r + 1]):
                if a & b:
                    return True
        return False

    def propagate(self, st) -> bool:
        """Close the state under every rule; False on contradiction."""
        n = self.n
        rng = range(n)
        while True:
            changed = False
            for x, y, z in self.horn:
                TX, FX, TY, FY, TZ, FZ = st[2 * x], st[2 * x + 1], st[2 * y], st[2 * y + 1], st[2 * z], st[2 * z + 1]
                for i in rng:
                    row = TX[i]
                    acc = TZ[i]
                    for j in _bits(row):
                        acc |= TY[j]
                    if acc != TZ[i]:
                        TZ[i] = acc
                        changed = True
                    fz = FZ[i]
                    if fz:
                        for j in _bits(row):
                            if fz & ~FY[j]:
                                FY[j] |= fz
                                changed = True
                        add = 0
                        for j in rng:
                            if TY[j] & fz:
                                add |= 1 << j
                        if add & ~FX[i]:
                            FX[i] |= add
                            changed = True
            for x, z in self.contain:
                TX, FX, TZ, FZ = st[2 * x], st[2 * x + 1], st[2 * z], st[2 * z + 1]
                for i in rng:
                    if TX[i] & ~TZ[i]:
                        TZ[i] |= TX[i]
                        changed = True
                    if FZ[i] & ~FX[i]:
                        FX[i] |= FZ[i]
                        changed = True
            for r, props in self.props:
                T, F = st[2 * r], st[2 * r + 1]
                if Prop.ANTISYMMETRIC in props:
                    for i in rng:
                        for j in _bits(T[i] & ~(1 << i)):
                            if not F[j] >> i & 1:
                                F[j] |= 1 << i
                                changed = True
                if Prop.SYMMETRIC in props:
                    for i in rng:
                        for j in _bits(T[i]):
                            if not T[j] >> i & 1:
                                T[j] |= 1 << i
                                changed = True
                        for j in _bits(F[i]):
                            if not F[j] >> i & 1:
                                F[j] |= 1 << i
                                changed = True
            if self.urq:
                for a, b in ((0, 1), (1, 0)):
                    T, F = st[2 * a], st[2 * b + 1]
                    for i in rng:
                        add = T[i] & ~(1 << i)
                        if add & ~F[i]:
                            F[i] |= add
                            changed = True
            for f, r in self.preserve:
                T, F = st[2 * r], st[2 * r + 1]
                for i in rng:
                    for j in _bits(T[i]):
                        if not T[f[i]] >> f[j] & 1:
                            T[f[i]] |= 1 << f[j]
                            changed = True
                    for j in rng:
                        if F[f[i]] >> f[j] & 1 and not F[i] >> j & 1:
                            F[i] |= 1 << j
                            changed = True
            if self.uoc:
                changed |= self._union_of_chains(st)
            if self.conflict(st):
                return False
            if not changed:
                break
        if self.antichain is not None:
            F = st[1]
            for sub in self.antichain:
                if all(F[i] >> j & 1 and F[j] >> i & 1 for i, j in combinations(sub, 2)):
                    return False
        return True

    def _union_of_chains(self, st) -> bool:
        n = self.n
        T, F = st[0], st[1]
        changed = False
        cols = [sum(1 << i for i in range(n) if T[i] >> j & 1) for j in range(n)]
        for groups in (T, cols):  # elements above z, then elements below z
            for z in range(n):
                members = list(_bits(groups[z]))
                for x in members:
                    for y in members:
                        # x, y share a bound: x R y fails forces y R x
                        if x != y and F[x] >> y & 1 and not T[y] >> x & 1:
                            T[y] |= 1 << x
                            changed = True
        for x in range(n):
            for y in range(n):
                if x != y and F[x] >> y & 1 and F[y] >> x & 1:
                    # incomparable: no common lower bound, no common upper bound
                    for z in range(n):
                        if T[z] >> x & 1 and not F[z] >> y & 1:
                            F[z] |= 1 << y
                            changed = True
                        if T[x] >> z & 1 and not F[y] >> z & 1:
                            F[y] |= 1 << z
                            changed = True
        return changed

    def assign(self, st, r, i, j, value: bool):
        st[2 * r + (0 if value else 1)][i] |= 1 << j

    def matrices(self, st):
        n = self.n
        out = []
        for r in (0, 1):
            m = np.zeros((n, n), dtype=bool)
            for i in range(n):
                for j in _bits(st[2 * r][i]):
                    m[i, j] = True
            out.append(m)
        return out


class _Search:
    def __init__(self, engine: _Engine, cells, deadline, rng=None):
        self.engine = engine
        self.cells = cells
        self.deadline = deadline
        self.rng = rng
        self.nodes = 0

    def solutions(self, st, start=0, first_ll=False) -> Iterator[list]:
        """Complete, conflict-free states below ``st``.

        With ``first_ll`` only the first completion of << is produced for
        each assignment of <=.
        """
        eng = self.engine
        cells = self.cells
        p = start
        while p < len(cells) and eng.known(st, *cells[p]):
            p += 1
        if p == len(cells):
            yield st
            return
        r, i, j = cells[p]
        values = (False, True)
        if self.rng is not None and self.rng.random() < 0.5:
            values = (True, False)
        for value in values:
            self.nodes += 1
            if self.deadline is not None and time.monotonic() > self.deadline[0]:
                raise TimeBudgetExceeded(self.nodes, self.deadline[1])
            child = [list(rows) for rows in st]
            eng.assign(child, r, i, j, value)
            if eng.propagate(child):
                sub = self.solutions(child, p + 1, first_ll)
                if first_ll and r == LL_ID:
                    for sol in sub:
                        yield sol
                        return
                else:
                    yield from sub


# -- layouts: which cells are fixed, which are free -----------------------------------


@dataclass
class _Layout:
    universe: tuple
    iota: dict
    kappa: dict
    ops: dict
    fixed: dict = field(default_factory=dict)  # (r, i, j) -> bool

    @property
    def n(self):
        return len(self.universe)


def _matchings(new_a, new_b) -> Iterator[tuple]:
    """Injective partial matchings new_a ⇀ new_b, smallest first, then lexicographic."""
    for k in range(min(len(new_a), len(new_b)) + 1):
        for left in combinations(new_a, k):
            for right in permutations(new_b, k):
                yield tuple(zip(left, right))


def _layout(v: VFormation, matching, fresh: int) -> _Layout | None:
    """D universe for a matching and a number of fresh points; None if inconsistent."""
    matched_b = {b: a for a, b in matching}
    iota = {x: x for x in v.A.universe}
    kappa = {x: matched_b.get(x, x) for x in v.B.universe}
    labels = [f"@x{k + 1}" for k in range(fresh)]
    taken = set(v.A.universe) | set(v.B.universe)
    if taken & set(labels):
        raise InvalidInput("labels of the form '@x<k>' are reserved for fresh points")
    universe = tuple(sorted(set(iota.values()) | set(kappa.values()) | set(labels)))
    pos = {x: i for i, x in enumerate(universe)}
    fixed = {}
    for arm, emb in ((v.A, iota), (v.B, kappa)):
        idx = [pos[emb[x]] for x in arm.universe]
        for r, m in ((LEQ_ID, arm.leq), (LL_ID, arm.ll)):
            for a, i in enumerate(idx):
                for b, j in enumerate(idx):
                    val = bool(m[a, b])
                    if fixed.setdefault((r, i, j), val) != val:
                        return None
    if set(v.A.ops) != set(v.B.ops):
        raise InvalidInput("both arms must carry the same operations")
    ops = {}
    for name in v.A.ops:
        table = [None] * len(universe)
        for arm, emb in ((v.A, iota), (v.B, kappa)):
            g = arm.op(name)
            for x in arm.universe:
                i, val = pos[emb[x]], pos[emb[g[x]]]
                if table[i] is not None and table[i] != val:
                    return None
                table[i] = val
        ops[name] = table
    return _Layout(universe, iota, kappa, ops, fixed)


def _cells(n, fixed) -> list:
    return [(r, i, j) for r in (LEQ_ID, LL_ID) for i in range(n) for j in range(n) if (r, i, j) not in fixed]


def _super_forbidden(v: VFormation, pos) -> list:
    """<= cells between the new parts that have no interpolant in C."""
    ca = np.array([v.A.index[x] for x in v.C.universe], dtype=np.intp)
    cb = np.array([v.B.index[x] for x in v.C.universe], dtype=np.intp)
    up = relalg.compose(v.A.leq[:, ca], v.B.leq[cb, :])
    down = relalg.compose(v.B.leq[:, cb], v.A.leq[ca, :])
    out = []
    for a in v.new_a:
        for b in v.new_b:
            ia, ib = v.A.index[a], v.B.index[b]
            if not up[ia, ib]:
                out.append((pos[a], pos[b]))
            if not down[ib, ia]:
                out.append((pos[b], pos[a]))
    return out


def _check_pieces(v: VFormation, theory: Theory):
    for name, s in (("A", v.A), ("B", v.B), ("C", v.C)):
        rep = validate(s, theory)
        if not rep.ok:
            raise InvalidInput(f"{name} is not a model of the theory: {rep}", rep)


def _op_tables(ops: dict, fresh_idx: list, n: int):
    """Every completion of partial op tables on the fresh points, lexicographically."""
    names = sorted(ops)
    holes = [(name, i) for name in names for i in fresh_idx]
    for values in product(range(n), repeat=len(holes)):
        full = {name: list(ops[name]) for name in names}
        for (name, i), val in zip(holes, values):
            full[name][i] = val
        yield {name: tuple(t) for name, t in full.items()}


def _configurations(v: VFormation, mode: AmalgamMode, cfg: SearchConfig):
    identify = cfg.allow_identification and mode is AmalgamMode.AP
    for fresh in range(cfg.extra_elements + 1):
        matchings = _matchings(v.new_a, v.new_b) if identify else [()]
        for matching in matchings:
            lay = _layout(v, matching, fresh)
            if lay is None:
                continue
            images = set(lay.iota.values()) | set(lay.kappa.values())
            fresh_idx = [i for i, x in enumerate(lay.universe) if x not in images]
            for ops in _op_tables(lay.ops, fresh_idx, lay.n):
                yield lay, ops


def iter_witnesses(v: VFormation, theory: Theory, mode: AmalgamMode = AmalgamMode.SUPER,
                   cfg: SearchConfig = SearchConfig(), distinct_leq: bool = False,
                   _stats: list | None = None) -> Iterator[Amalgam]:
    """All amalgams in the configured space, in search order.

    With ``distinct_leq`` only one amalgam is produced per <= relation.
    """
    mode = AmalgamMode(mode)
    _check_pieces(v, theory)
    deadline = None
    if cfg.time_budget is not None:
        deadline = (time.monotonic() + cfg.time_budget, cfg.time_budget)
    total = [0, 0]
    for lay, ops in _configurations(v, mode, cfg):
        total[1] += 1
        if _stats is not None:
            _stats[:] = total
        if deadline is not None and time.monotonic() > deadline[0]:
            raise TimeBudgetExceeded(total[0], deadline[1])
        eng = _Engine(lay.n, theory, ops)
        st = eng.empty_state()
        for (r, i, j), val in lay.fixed.items():
            eng.assign(st, r, i, j, val)
        if mode is AmalgamMode.SUPER:
            pos = {x: i for i, x in enumerate(lay.universe)}
            for i, j in _super_forbidden(v, pos):
                eng.assign(st, LEQ_ID, i, j, False)
        if not eng.propagate(st):
            continue
        search = _Search(eng, _cells(lay.n, lay.fixed), deadline)
        try:
            for sol in search.solutions(st, first_ll=distinct_leq):
                leq, ll = eng.matrices(sol)
                D = Structure(lay.universe, leq, ll, ops)
                w = Amalgam(D, lay.iota, lay.kappa)
                rep = verify(v, w, theory, mode)
                if not rep.ok:
                    raise AssertionError(f"propagation accepted an invalid amalgam: {rep}")
                total[0] += search.nodes
                search.nodes = 0
                if _stats is not None:
                    _stats[:] = total
                yield w
        finally:
            total[0] += search.nodes
            search.nodes = 0
            if _stats is not None:
                _stats[:] = total


def _genuine(mode: AmalgamMode, cfg: SearchConfig) -> bool:
    return mode is not AmalgamMode.AP or cfg.allow_identification


def search(v: VFormation, theory: Theory, mode: AmalgamMode = AmalgamMode.SUPER,
           cfg: SearchConfig = SearchConfig()) -> SearchResult:
    """First amalgam in search order, or EXHAUSTED with statistics.

    Raises TimeBudgetExceeded when the budget runs out before a decision.
    """
    mode = AmalgamMode(mode)
    start = time.monotonic()
    stats = [0, 0]
    found = next(iter_witnesses(v, theory, mode, cfg, _stats=stats), None)
    st = SearchStats(stats[0], stats[1], time.monotonic() - start)
    return SearchResult(WITNESS if found else EXHAUSTED, found, st, mode, cfg, _genuine(mode, cfg))


def decide_superamalgamation_over_union(v: VFormation, theory: Theory) -> SearchResult:
    """Over-union SUPER search; EXHAUSTED refutes superamalgamation for this instance."""
    return search(v, theory, AmalgamMode.SUPER, SearchConfig())


def check_complete(v: VFormation, w: Amalgam, theory: Theory,
                   mode: AmalgamMode = AmalgamMode.SUPER) -> Report:
    """Independent verifier built on the propagation engine.

    Fixes every cell of D, adds the cells the embeddings dictate, and runs
    propagation; any contradiction means D is not an amalgam at ``mode``.
    """
    mode = AmalgamMode(mode)
    D = w.D
    out = []
    pos = D.index
    for name, arm, emb in (("iota", v.A, w.iota), ("kappa", v.B, w.kappa)):
        if any(emb.get(x) not in pos for x in arm.universe):
            return Report([Violation(f"{name}.TOTAL", ())])
        if len({emb[x] for x in arm.universe}) != arm.n:
            out.append(Violation(f"{name}.INJECTIVE", ()))
        for op in arm.ops:
            g, h = arm.op(op), D.op(op) if op in D.ops else None
            if h is None or any(h[emb[x]] != emb[g[x]] for x in arm.universe):
                out.append(Violation(f"{name}.{op}.COMMUTE", ()))
    if any(w.iota[c] != w.kappa[c] for c in v.C.universe):
        out.append(Violation("AGREE", ()))
    if mode is not AmalgamMode.AP:
        img_c = {w.iota[c] for c in v.C.universe}
        if ({w.iota[x] for x in v.A.universe} & {w.kappa[x] for x in v.B.universe}) - img_c:
            out.append(Violation("SAP", ()))
    missing = [name for name, _ in theory.op_sig if name not in D.ops]
    if missing:
        return Report(out + [Violation(f"{missing[0]}.MISSING", ())])
    eng = _Engine(D.n, theory, dict(D.ops))
    st = eng.empty_state()
    for r, m in ((LEQ_ID, D.leq), (LL_ID, D.ll)):
        for i in range(D.n):
            for j in range(D.n):
                eng.assign(st, r, i, j, bool(m[i, j]))
    if not eng.propagate(st):
        out.append(Violation("AXIOMS", ()))
    for name, arm, emb in (("iota", v.A, w.iota), ("kappa", v.B, w.kappa)):
        idx = [pos[emb[x]] for x in arm.universe]
        for rel, m in (("leq", arm.leq), ("ll", arm.ll)):
            if not np.array_equal(D.rel(rel)[np.ix_(idx, idx)], m):
                out.append(Violation(f"{name}.{rel}.EMBED", ()))
    if mode is AmalgamMode.SUPER:
        uni = v.union_universe()
        loc = {**{x: pos[w.iota[x]] for x in v.new_a}, **{x: pos[w.kappa[x]] for x in v.new_b}}
        for i, j in _super_forbidden(v, {x: k for k, x in enumerate(uni)}):
            if D.leq[loc[uni[i]], loc[uni[j]]]:
                out.append(Violation("SUPER", (uni[i], uni[j])))
                break
    return Report(out)


# -- random generation ------------------------------------------------------------


def random_extension(base: Structure, theory: Theory, labels, rng, ops=None) -> Structure | None:
    """A random model of ``theory`` containing ``base`` as an induced substructure.

    The new elements get ``labels``; values are picked by a randomized
    search so the result is always a model.  ``ops`` may give complete
    op tables (label maps) for the enlarged universe.  Returns None when
    no such extension exists.
    """
    universe = tuple(sorted(set(base.universe) | set(labels)))
    pos = {x: i for i, x in enumerate(universe)}
    tables = {}
    for name, graph in (ops or {}).items():
        tables[name] = tuple(pos[graph[x]] for x in universe)
    eng = _Engine(len(universe), theory, tables)
    st = eng.empty_state()
    idx = [pos[x] for x in base.universe]
    fixed = {}
    for r, m in ((LEQ_ID, base.leq), (LL_ID, base.ll)):
        for a, i in enumerate(idx):
            for b, j in enumerate(idx):
                fixed[(r, i, j)] = bool(m[a, b])
                eng.assign(st, r, i, j, bool(m[a, b]))
    if not eng.propagate(st):
        return None
    cells = _cells(len(universe), fixed)
    order = rng.permutation(len(cells))
    search = _Search(eng, [cells[k] for k in order], None, rng)
    sol = next(search.solutions(st), None)
    if sol is None:
        return None
    leq, ll = eng.matrices(sol)
    return Structure(universe, leq, ll, tables)


def random_model(theory: Theory, labels, rng) -> Structure | None:
    return random_extension(Structure.empty(), theory, labels, rng)
