"""Finite structures with two binary relations, theories, and embeddings.

A structure carries a partial-order-like relation ``leq`` (written <=), a
second relation ``ll`` (written <<) and named total unary operations.
Elements are text labels; a structure keeps its universe sorted by code
point and stores each relation as a boolean matrix in that order, so the
index order and the label order coincide.  Every "least witness" below is
least in that order.

Reflexivity is never implied: a reflexive relation stores its diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import permutations, product
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from . import relalg
from .errors import NotAnEmbedding, SizeBoundExceeded, UniverseMismatch

LEQ = "LEQ"
LL = "LL"
INTERACTIONS = ("F", "C", "A1", "A2")

#: Largest universe ``canonical_form`` accepts.
CANONICAL_BOUND = 8


class Prop(IntEnum):
    REFLEXIVE = 2
    SYMMETRIC = 3
    ANTIREFLEXIVE = 4
    ANTISYMMETRIC = 5


def rel_props(codes: Iterable[int | Prop] = ()) -> frozenset[Prop]:
    props = set()
    for c in codes:
        if int(c) == 1:
            raise ValueError("transitivity (1) is always required and is not a property code")
        try:
            props.add(Prop(int(c)))
        except ValueError:
            raise ValueError(f"unknown relation property code {c!r}") from None
    if Prop.REFLEXIVE in props and Prop.ANTIREFLEXIVE in props:
        raise ValueError("REFLEXIVE and ANTIREFLEXIVE together only admit the empty structure")
    return frozenset(props)


U = "U"
UNION_OF_CHAINS = "UnionOfChains"


@dataclass(frozen=True, order=True)
class MaxAntichain:
    """No antichain of cardinality n + 1."""

    n: int

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("MaxAntichain needs a positive bound")

    def __str__(self):
        return f"MaxAntichain({self.n})"


def _extra_key(e):
    return (1, e.n) if isinstance(e, MaxAntichain) else (0, e)


@dataclass(frozen=True)
class Theory:
    """Axioms for (universe, <=, <<, ops).

    ``P`` and ``Q`` are property codes for <= and << (2 reflexive,
    3 symmetric, 4 antireflexive, 5 antisymmetric); both relations are
    transitive unless ``transitive`` is false.  ``N`` holds the interaction
    conditions F (<< finer than <=), C (<< coarser), A1 (w <= x << y gives
    w << y) and A2 (x << y <= z gives x << z).  ``op_sig`` maps operation
    names to the relations they must preserve.
    """

    P: frozenset = frozenset()
    Q: frozenset = frozenset()
    N: frozenset = frozenset()
    extras: frozenset = frozenset()
    op_sig: tuple = ()
    transitive: bool = True

    def __post_init__(self):
        object.__setattr__(self, "P", rel_props(self.P))
        object.__setattr__(self, "Q", rel_props(self.Q))
        n = frozenset(self.N)
        bad = n - set(INTERACTIONS)
        if bad:
            raise ValueError(f"unknown interaction conditions {sorted(bad)}")
        object.__setattr__(self, "N", n)
        extras = set()
        for e in self.extras:
            if isinstance(e, MaxAntichain) or e in (U, UNION_OF_CHAINS):
                extras.add(e)
            else:
                raise ValueError(f"unknown extra axiom {e!r}")
        object.__setattr__(self, "extras", frozenset(extras))
        sig = self.op_sig.items() if isinstance(self.op_sig, Mapping) else self.op_sig
        norm = []
        for name, pres in sig:
            pres = frozenset(pres)
            if not pres or pres - {LEQ, LL}:
                raise ValueError(f"operation {name!r} needs a nonempty subset of {{LEQ, LL}}")
            norm.append((str(name), pres))
        object.__setattr__(self, "op_sig", tuple(sorted(norm)))

    @property
    def ops(self) -> dict[str, frozenset]:
        return dict(self.op_sig)

    def max_antichain(self) -> int | None:
        bounds = [e.n for e in self.extras if isinstance(e, MaxAntichain)]
        return min(bounds) if bounds else None

    def effective_N(self) -> frozenset:
        """N plus C when reflexive << together with A1 or A2 forces it."""
        n = set(self.N)
        if Prop.REFLEXIVE in self.Q and n & {"A1", "A2"}:
            n.add("C")
        return frozenset(n)

    def degeneracies(self) -> list[str]:
        notes = []
        if {"F", "C"} <= self.N:
            notes.append("F and C together force << = <=")
        if Prop.REFLEXIVE in self.Q and self.N & {"A1", "A2"}:
            notes.append("reflexive << with A1 or A2 entails C")
        if Prop.REFLEXIVE in self.P and Prop.ANTIREFLEXIVE in self.Q and "C" in self.N:
            notes.append("reflexive <=, antireflexive << and C: only the empty structure")
        return notes

    def atom_mask(self) -> int:
        """Bitmask over ``ATOMS`` of the relational axioms this theory requires."""
        names = []
        for rel, props in (("leq", self.P), ("ll", self.Q)):
            if self.transitive:
                names.append(f"{rel}.TRANSITIVE")
            names += [f"{rel}.{p.name}" for p in props]
        names += [{"F": "FINER", "C": "COARSER"}.get(c, c) for c in self.N]
        if U in self.extras:
            names.append("U")
        if UNION_OF_CHAINS in self.extras:
            names.append("UNION_OF_CHAINS")
        return sum(1 << ATOMS.index(a) for a in names)

    def without_ops(self) -> "Theory":
        return Theory(self.P, self.Q, self.N, self.extras, (), self.transitive)

    def __str__(self):
        def fmt(s):
            items = sorted(str(int(x)) if isinstance(x, int) else str(x) for x in s)
            return "{" + ",".join(items) + "}"

        parts = [f"P={fmt(self.P)}", f"Q={fmt(self.Q)}", f"N={fmt(self.N)}"]
        if self.extras:
            parts.append("extras={" + ",".join(str(e) for e in sorted(self.extras, key=_extra_key)) + "}")
        if self.op_sig:
            parts.append("ops={" + ",".join(f"{k}:{'/'.join(sorted(v))}" for k, v in self.op_sig) + "}")
        if not self.transitive:
            parts.append("intransitive")
        return " ".join(parts)


# named theories used across the package
POSETS = Theory(P={2, 5}, N={"F", "C"})
COARSER_ORDER = Theory(P={2, 5}, Q={2, 5}, N={"C"})
AUXILIARY = Theory(P={2, 5}, N={"F", "A1", "A2"})
CAUSAL = Theory(P={2, 5}, Q={4}, N={"F", "A1", "A2"})
URQUHART = Theory(P={2}, Q={2}, extras={U})

ATOMS = (
    "leq.TRANSITIVE", "leq.REFLEXIVE", "leq.SYMMETRIC", "leq.ANTIREFLEXIVE", "leq.ANTISYMMETRIC",
    "ll.TRANSITIVE", "ll.REFLEXIVE", "ll.SYMMETRIC", "ll.ANTIREFLEXIVE", "ll.ANTISYMMETRIC",
    "FINER", "COARSER", "A1", "A2", "U", "UNION_OF_CHAINS",
)


def _pack_flags(checks, offset: int = 0) -> np.ndarray:
    out = np.zeros(np.shape(checks[0]), dtype=np.int64)
    for bit, flag in enumerate(checks, start=offset):
        out |= flag.astype(np.int64) << bit
    return out


def leq_atom_bits(leq: np.ndarray) -> np.ndarray:
    """Batched: the ``leq.*`` bits of ``atom_bits``."""
    return _pack_flags([relalg.transitive_ok(leq), relalg.reflexive_ok(leq), relalg.symmetric_ok(leq),
                        relalg.antireflexive_ok(leq), relalg.antisymmetric_ok(leq)])


def ll_atom_bits(leq: np.ndarray, ll: np.ndarray) -> np.ndarray:
    """Batched: the ``ll.*`` and interaction bits of ``atom_bits``."""
    return _pack_flags([relalg.transitive_ok(ll), relalg.reflexive_ok(ll), relalg.symmetric_ok(ll),
                        relalg.antireflexive_ok(ll), relalg.antisymmetric_ok(ll),
                        relalg.subset_ok(ll, leq), relalg.subset_ok(leq, ll),
                        relalg.a1_ok(leq, ll), relalg.a2_ok(leq, ll)], offset=5)


def atom_bits(leq: np.ndarray, ll: np.ndarray, extras: bool = True) -> np.ndarray:
    """Batched: bitmask over ``ATOMS`` of the axioms each (leq, ll) satisfies.

    With ``extras`` false the U and UNION_OF_CHAINS bits are left clear
    (their cubic tensors dominate the cost on large batches).
    """
    out = leq_atom_bits(leq) | ll_atom_bits(leq, ll)
    if extras:
        out |= _pack_flags([~relalg.urquhart_violations(leq, ll).any(axis=(-2, -1)),
                            ~(relalg.union_of_chains_violations(leq).any(axis=(-3, -2, -1))
                              | relalg.union_of_chains_dual_violations(leq).any(axis=(-3, -2, -1)))],
                           offset=14)
    return out


# -- reports -----------------------------------------------------------------


class Violation(NamedTuple):
    axiom: str
    witness: tuple
    detail: object = None


@dataclass(frozen=True)
class Report:
    violations: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "violations", tuple(self.violations))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def axioms(self) -> list[str]:
        return [v.axiom for v in self.violations]

    def get(self, axiom: str) -> Violation | None:
        return next((v for v in self.violations if v.axiom == axiom), None)

    def prefixed(self, prefix: str) -> "Report":
        return Report(tuple(Violation(prefix + v.axiom, v.witness, v.detail) for v in self.violations))

    def __add__(self, other: "Report") -> "Report":
        return Report(self.violations + other.violations)

    def __str__(self):
        if self.ok:
            return "ok"
        return "; ".join(f"{v.axiom}{tuple(v.witness)}" for v in self.violations)


OK = Report()


# -- relations ---------------------------------------------------------------


def _sorted_universe(universe: Iterable[str]) -> tuple[str, ...]:
    labels = [str(x) for x in universe]
    if any(not x for x in labels):
        raise ValueError("element labels must be nonempty")
    out = tuple(sorted(set(labels)))
    if len(out) != len(labels):
        raise ValueError("duplicate element labels")
    return out


def _matrix(universe: tuple[str, ...], pairs: Iterable, what: str = "relation") -> np.ndarray:
    index = {x: i for i, x in enumerate(universe)}
    m = np.zeros((len(universe), len(universe)), dtype=bool)
    for pair in pairs:
        x, y = pair
        if x not in index or y not in index:
            raise ValueError(f"{what} pair {(x, y)} leaves the universe")
        m[index[x], index[y]] = True
    return m


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=bool, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BinRel:
    universe: tuple
    matrix: np.ndarray

    def __post_init__(self):
        uni = tuple(self.universe)
        if list(uni) != sorted(set(uni)):
            raise ValueError("BinRel universe must be sorted and duplicate-free; use from_pairs")
        m = _frozen(self.matrix)
        if m.shape != (len(uni), len(uni)):
            raise ValueError("matrix shape does not match the universe")
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pairs(cls, universe: Iterable[str], pairs: Iterable) -> "BinRel":
        uni = _sorted_universe(universe)
        return cls(uni, _matrix(uni, pairs))

    @property
    def pairs(self) -> frozenset:
        u = self.universe
        return frozenset((u[i], u[j]) for i, j in zip(*np.nonzero(self.matrix)))

    def __contains__(self, pair) -> bool:
        x, y = pair
        try:
            return bool(self.matrix[self.universe.index(x), self.universe.index(y)])
        except ValueError:
            return False

    def __len__(self):
        return int(self.matrix.sum())

    def __eq__(self, other):
        return (isinstance(other, BinRel) and self.universe == other.universe
                and np.array_equal(self.matrix, other.matrix))

    def __hash__(self):
        return hash((self.universe, self.matrix.tobytes()))

    def __repr__(self):
        return f"BinRel({sorted(self.pairs)})"


def compose(r: BinRel, s: BinRel) -> BinRel:
    """(x, z) is in the result iff x r y and y s z for some y."""
    if r.universe != s.universe:
        raise UniverseMismatch("compose needs relations over one universe")
    return BinRel(r.universe, relalg.compose(r.matrix, s.matrix))


def transitive_closure(r: BinRel) -> BinRel:
    return BinRel(r.universe, relalg.closure(r.matrix))


_PROP_CHECKS = {
    Prop.REFLEXIVE: relalg.reflexive_violations,
    Prop.SYMMETRIC: relalg.symmetric_violations,
    Prop.ANTIREFLEXIVE: relalg.antireflexive_violations,
    Prop.ANTISYMMETRIC: relalg.antisymmetric_violations,
}


def _witness(axiom: str, tensor: np.ndarray, labels) -> list[Violation]:
    idx = relalg.first_index(tensor)
    if idx is None:
        return []
    return [Violation(axiom, tuple(labels[i] for i in idx))]


def _rel_violations(m: np.ndarray, props, labels, transitive=True, prefix="") -> list[Violation]:
    out = []
    if transitive:
        out += _witness(prefix + "TRANSITIVE", relalg.transitivity_violations(m), labels)
    for p in sorted(props):
        out += _witness(prefix + p.name, _PROP_CHECKS[p](m), labels)
    return out


def check_rel_props(r: BinRel, props: Iterable = (), transitive: bool = True) -> Report:
    """Transitivity (unless disabled) plus each listed property, one least witness each."""
    return Report(_rel_violations(r.matrix, rel_props(props), r.universe, transitive))


# -- structures ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Structure:
    """Finite universe with <=, << and total unary operations.

    The constructor takes index-based data (matrices in universe order, ops
    as tuples of image indices); ``Structure.build`` takes labels.
    """

    universe: tuple
    leq: np.ndarray
    ll: np.ndarray
    ops: Mapping = field(default_factory=dict)

    def __post_init__(self):
        uni = tuple(str(x) for x in self.universe)
        n = len(uni)
        leq = np.asarray(self.leq, dtype=bool)
        ll = np.asarray(self.ll, dtype=bool)
        if leq.shape != (n, n) or ll.shape != (n, n):
            raise ValueError("relation matrices must match the universe size")
        ops = {}
        for name, table in dict(self.ops).items():
            t = tuple(int(v) for v in table)
            if len(t) != n or any(not 0 <= v < n for v in t):
                raise ValueError(f"operation {name!r} is not total on the universe")
            ops[str(name)] = t
        order = sorted(range(n), key=lambda i: uni[i])
        if order != list(range(n)):
            inv = np.argsort(order)
            uni = tuple(uni[i] for i in order)
            leq = leq[np.ix_(order, order)]
            ll = ll[np.ix_(order, order)]
            ops = {k: tuple(int(inv[t[i]]) for i in order) for k, t in ops.items()}
        if len(set(uni)) != n or any(not x for x in uni):
            raise ValueError("element labels must be nonempty and distinct")
        object.__setattr__(self, "universe", uni)
        object.__setattr__(self, "leq", _frozen(leq))
        object.__setattr__(self, "ll", _frozen(ll))
        object.__setattr__(self, "ops", dict(sorted(ops.items())))
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(uni)})

    @classmethod
    def build(cls, universe: Iterable[str], leq: Iterable = (), ll: Iterable = (),
              ops: Mapping[str, Mapping[str, str]] | None = None) -> "Structure":
        uni = _sorted_universe(universe)
        index = {x: i for i, x in enumerate(uni)}
        tables = {}
        for name, graph in (ops or {}).items():
            missing = [x for x in uni if x not in graph]
            if missing:
                raise ValueError(f"operation {name!r} undefined at {missing[0]!r}")
            extra = [x for x in graph if x not in index]
            if extra or any(graph[x] not in index for x in uni):
                raise ValueError(f"operation {name!r} leaves the universe")
            tables[name] = tuple(index[graph[x]] for x in uni)
        return cls(uni, _matrix(uni, leq, "leq"), _matrix(uni, ll, "ll"), tables)

    @classmethod
    def empty(cls) -> "Structure":
        return cls((), np.zeros((0, 0), bool), np.zeros((0, 0), bool))

    # accessors
    @property
    def n(self) -> int:
        return len(self.universe)

    @property
    def index(self) -> dict:
        return self._index

    def rel(self, name: str) -> np.ndarray:
        return {"leq": self.leq, LEQ: self.leq, "ll": self.ll, LL: self.ll}[name]

    def pairs(self, name: str) -> frozenset:
        m = self.rel(name)
        u = self.universe
        return frozenset((u[i], u[j]) for i, j in zip(*np.nonzero(m)))

    @property
    def leq_rel(self) -> BinRel:
        return BinRel(self.universe, self.leq)

    @property
    def ll_rel(self) -> BinRel:
        return BinRel(self.universe, self.ll)

    def op(self, name: str) -> dict:
        u = self.universe
        return {u[i]: u[v] for i, v in enumerate(self.ops[name])}

    def holds(self, name: str, x: str, y: str) -> bool:
        return bool(self.rel(name)[self._index[x], self._index[y]])

    # derived structures
    def is_closed(self, labels: Iterable[str]) -> bool:
        idx = {self._index[x] for x in labels}
        return all(t[i] in idx for t in self.ops.values() for i in idx)

    def restrict(self, labels: Iterable[str]) -> "Structure":
        """Induced substructure; the subset must be closed under every operation."""
        keep = sorted(self._index[x] for x in set(labels))
        pos = {old: new for new, old in enumerate(keep)}
        ops = {}
        for name, t in self.ops.items():
            if any(t[i] not in pos for i in keep):
                raise ValueError(f"subset is not closed under {name!r}")
            ops[name] = tuple(pos[t[i]] for i in keep)
        ix = np.ix_(keep, keep)
        return Structure(tuple(self.universe[i] for i in keep), self.leq[ix], self.ll[ix], ops)

    def relabel(self, mapping: Mapping[str, str]) -> "Structure":
        new = tuple(mapping[x] for x in self.universe)
        if len(set(new)) != len(new):
            raise ValueError("relabelling must be injective")
        return Structure(new, self.leq, self.ll, self.ops)

    def replace(self, leq=None, ll=None, ops=None) -> "Structure":
        return Structure(self.universe, self.leq if leq is None else leq,
                         self.ll if ll is None else ll, self.ops if ops is None else ops)

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.universe == other.universe
                and np.array_equal(self.leq, other.leq) and np.array_equal(self.ll, other.ll)
                and self.ops == other.ops)

    def __hash__(self):
        return hash((self.universe, self.leq.tobytes(), self.ll.tobytes(), tuple(self.ops.items())))

    def __repr__(self):
        def strict(name):
            return sorted(p for p in self.pairs(name))

        s = f"Structure({list(self.universe)}, leq={strict('leq')}, ll={strict('ll')}"
        if self.ops:
            s += f", ops={ {k: self.op(k) for k in self.ops} }"
        return s + ")"


# -- validation ----------------------------------------------------------------


def validate(s: Structure, theory: Theory) -> Report:
    """Check ``s`` against every axiom of ``theory``; one least witness per failed axiom."""
    labels = s.universe
    leq, ll = s.leq, s.ll
    out = _rel_violations(leq, theory.P, labels, theory.transitive, "leq.")
    out += _rel_violations(ll, theory.Q, labels, theory.transitive, "ll.")
    if "F" in theory.N:
        out += _witness("FINER", relalg.containment_violations(ll, leq), labels)
    if "C" in theory.N:
        out += _witness("COARSER", relalg.containment_violations(leq, ll), labels)
    if "A1" in theory.N:
        out += _witness("A1", relalg.a1_violations(leq, ll), labels)
    if "A2" in theory.N:
        out += _witness("A2", relalg.a2_violations(leq, ll), labels)
    if U in theory.extras:
        out += _witness("U", relalg.urquhart_violations(leq, ll), labels)
    if UNION_OF_CHAINS in theory.extras:
        out += _witness("UNION_OF_CHAINS", relalg.union_of_chains_violations(leq), labels)
        out += _witness("UNION_OF_CHAINS_DUAL", relalg.union_of_chains_dual_violations(leq), labels)
    bound = theory.max_antichain()
    if bound is not None and s.n > bound:
        flags = relalg.antichain_violations(leq, bound + 1)
        hit = relalg.first_index(flags)
        if hit is not None:
            subset = relalg.antichain_subsets(s.n, bound + 1)[hit[0]]
            out.append(Violation(f"MAX_ANTICHAIN({bound})", tuple(labels[i] for i in subset)))
    for name, pres in theory.op_sig:
        if name not in s.ops:
            out.append(Violation(f"{name}.MISSING", ()))
            continue
        f = s.ops[name]
        for rel in sorted(pres):
            out += _witness(f"{name}.PRESERVES_{rel}", relalg.preservation_violations(s.rel(rel), f), labels)
    return Report(out)


def is_embedding(f: Mapping[str, str], s: Structure, tgt: Structure,
                 theory: Theory | None = None) -> Report:
    """Injective, preserves and reflects both relations, commutes with the operations.

    With a theory, only the operations of its signature are checked;
    otherwise every operation of ``s``.
    """
    out = []
    for x in s.universe:
        if x not in f:
            out.append(Violation("TOTAL", (x,)))
        elif f[x] not in tgt.index:
            out.append(Violation("CODOMAIN", (x,)))
    if out:
        return Report(out[:1])
    fi = np.array([tgt.index[f[x]] for x in s.universe], dtype=np.intp)
    same = fi[:, None] == fi[None, :]
    np.fill_diagonal(same, False)
    out += _witness("INJECTIVE", np.triu(same), s.universe)
    ix = np.ix_(fi, fi)
    for name in ("leq", "ll"):
        src, img = s.rel(name), tgt.rel(name)[ix]
        out += _witness(f"{name}.PRESERVE", src & ~img, s.universe)
        out += _witness(f"{name}.REFLECT", img & ~src, s.universe)
    names = [k for k, _ in theory.op_sig] if theory is not None else list(s.ops)
    for name in names:
        if name not in s.ops or name not in tgt.ops:
            out.append(Violation(f"{name}.MISSING", ()))
            continue
        lhs = fi[list(s.ops[name])]
        rhs = np.asarray(tgt.ops[name], dtype=np.intp)[fi]
        out += _witness(f"{name}.COMMUTE", lhs != rhs, s.universe)
    return Report(out)


# -- V-formations and amalgams -------------------------------------------------


@dataclass(frozen=True, eq=False)
class VFormation:
    """C inside A and B with A ∩ B = C, all three induced substructures agreeing.

    ``origin`` optionally maps relabelled elements back to the labels they
    had before ``normalize_instance``.
    """

    A: Structure
    B: Structure
    C: Structure
    origin: Mapping = field(default_factory=dict)

    def __post_init__(self):
        common = set(self.A.universe) & set(self.B.universe)
        if set(self.C.universe) != common:
            raise ValueError("universe(C) must equal universe(A) ∩ universe(B)")
        for arm, name in ((self.A, "A"), (self.B, "B")):
            if arm.restrict(self.C.universe) != self.C:
                raise ValueError(f"C is not the induced substructure of {name}")

    @classmethod
    def over(cls, A: Structure, B: Structure) -> "VFormation":
        """The V-formation whose base is the shared part of A and B."""
        common = set(A.universe) & set(B.universe)
        return cls(A, B, A.restrict(common))

    @property
    def new_a(self) -> tuple:
        return tuple(x for x in self.A.universe if x not in self.C.index)

    @property
    def new_b(self) -> tuple:
        return tuple(x for x in self.B.universe if x not in self.C.index)

    def union_universe(self) -> tuple:
        return tuple(sorted(set(self.A.universe) | set(self.B.universe)))

    def swapped(self) -> "VFormation":
        return VFormation(self.B, self.A, self.C, self.origin)

    def __repr__(self):
        return f"VFormation(A={self.A!r}, B={self.B!r}, C={list(self.C.universe)})"


@dataclass(frozen=True, eq=False)
class Amalgam:
    D: Structure
    iota: Mapping
    kappa: Mapping

    def __post_init__(self):
        object.__setattr__(self, "iota", dict(self.iota))
        object.__setattr__(self, "kappa", dict(self.kappa))
        for name, m in (("iota", self.iota), ("kappa", self.kappa)):
            if len(set(m.values())) != len(m):
                raise ValueError(f"{name} is not injective")

    @classmethod
    def inclusion(cls, D: Structure, v: VFormation) -> "Amalgam":
        return cls(D, {x: x for x in v.A.universe}, {x: x for x in v.B.universe})


def normalize_instance(A: Structure, B: Structure, C: Structure, i1: Mapping, k1: Mapping,
                       theory: Theory | None = None) -> VFormation:
    """Isomorphic copy with both embeddings turned into inclusions.

    Elements of C keep their labels; the rest of A is suffixed ``@a`` and the
    rest of B ``@b``.  ``origin`` records the original labels.
    """
    for name, f, arm in (("i1", i1, A), ("k1", k1, B)):
        rep = is_embedding(f, C, arm, theory)
        if not rep.ok:
            raise NotAnEmbedding(f"{name} is not an embedding: {rep}", rep)

    def copy(arm, f, suffix):
        back = {f[c]: c for c in C.universe}
        ren = {x: back.get(x, x + suffix) for x in arm.universe}
        clash = [x for x in arm.universe if x not in back and ren[x] in C.index]
        if clash:
            raise ValueError(f"relabelled element {ren[clash[0]]!r} collides with a label of C")
        return arm.relabel(ren), {v: k for k, v in ren.items() if k not in back}

    A2, oa = copy(A, i1, "@a")
    B2, ob = copy(B, k1, "@b")
    return VFormation(A2, B2, C, {**oa, **ob})


# -- canonical forms -------------------------------------------------------------


def _invariants(s: Structure) -> list[tuple]:
    leq, ll = s.leq.astype(int), s.ll.astype(int)
    inv = []
    for i in range(s.n):
        row = (leq[i, i], ll[i, i], leq[i].sum(), leq[:, i].sum(), ll[i].sum(), ll[:, i].sum())
        row += tuple(int(t[i] == i) for t in s.ops.values())
        inv.append(tuple(int(v) for v in row))
    return inv


def _canonical(s: Structure, fixed: tuple = ()):
    """Least encoding over relabellings that keep ``fixed`` in place, and its ordering."""
    n = s.n
    fixed_idx = [s.index[x] for x in fixed]
    inv = _invariants(s)
    rest = sorted((i for i in range(n) if i not in set(fixed_idx)), key=lambda i: inv[i])
    classes = []
    for i in rest:
        if classes and inv[classes[-1][0]] == inv[i]:
            classes[-1].append(i)
        else:
            classes.append([i])
    count = math.prod(math.factorial(len(c)) for c in classes)
    if count > math.factorial(CANONICAL_BOUND):
        raise SizeBoundExceeded(f"canonical form needs {count} relabellings")
    perms = np.array([fixed_idx + [i for block in combo for i in block]
                      for combo in product(*(permutations(c) for c in classes))], dtype=np.intp)
    perms = perms.reshape(len(perms), n)
    rows = [np.packbits(s.leq[perms[:, :, None], perms[:, None, :]].reshape(len(perms), -1), axis=1),
            np.packbits(s.ll[perms[:, :, None], perms[:, None, :]].reshape(len(perms), -1), axis=1)]
    if s.ops:
        inverse = np.argsort(perms, axis=1)
        for t in s.ops.values():
            t = np.asarray(t, dtype=np.intp)
            rows.append(np.take_along_axis(inverse, t[perms], axis=1).astype(np.uint8))
    code = np.concatenate(rows, axis=1)
    best = np.lexsort(code.T[::-1])[0] if len(code) > 1 else 0
    key = (n, tuple(inv[i] for i in rest), tuple(s.ops), code[best].tobytes())
    return key, perms[best]


def canonical_form(s: Structure) -> tuple:
    """Encoding equal for two structures iff they are isomorphic.

    Relabellings are restricted to those that sort elements by a local
    invariant (loops and degrees); within that set the least encoding wins.
    Raises SizeBoundExceeded past ``CANONICAL_BOUND`` elements' worth of
    relabellings.
    """
    if s.n > CANONICAL_BOUND:
        raise SizeBoundExceeded(f"canonical_form supports at most {CANONICAL_BOUND} elements")
    return _canonical(s)[0]


def canonize(s: Structure, prefix: str = "e", fixed: tuple = ()) -> Structure:
    """Canonical representative; non-fixed elements are renamed prefix1, prefix2, ..."""
    _, order = _canonical(s, fixed)
    names = {}
    k = 0
    for i in order:
        x = s.universe[i]
        if x in fixed:
            names[x] = x
        else:
            k += 1
            names[x] = f"{prefix}{k}"
    return s.relabel(names)


def are_isomorphic(s: Structure, t: Structure) -> bool:
    return s.n == t.n and canonical_form(s) == canonical_form(t)
