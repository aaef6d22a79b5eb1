"""Amalgam constructions over the union of the two arms.

Every constructor re-verifies its result before returning it; a failed
check raises VerificationFailed instead of handing back a wrong amalgam.
The composition-union recipes are also exposed in batched form
(``union_recipe``, ``mixed_terms``, ``embedding_violations``) for
exhaustive sweeps.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import relalg
from .core import (COARSER_ORDER, LEQ, Amalgam, BinRel, Prop, Report, Structure, Theory,
                   VFormation, Violation, check_rel_props, is_embedding, validate)
from .errors import (Inadmissible, InvalidInput, NotAPartialOrder, NotAPosetExtension,
                     NotASuperamalgam, TheoryRequiresTransitivity, VerificationFailed)


class CaseTag(Enum):
    CASE_B = "B"      # neither A1 nor A2
    CASE_I = "I"      # A2 only
    CASE_II = "II"    # A1 only
    CASE_III = "III"  # A1 and A2


class AmalgamMode(Enum):
    AP = "ap"
    SAP = "sap"
    SUPER = "super"


@dataclass(frozen=True)
class Case:
    tag: CaseTag
    c1: bool
    c2: bool

    @property
    def ll_after_leq(self) -> bool:
        """Whether << absorbs <= on the right (x << c <= y), as A2 demands."""
        return self.tag in (CaseTag.CASE_I, CaseTag.CASE_III)

    @property
    def leq_before_ll(self) -> bool:
        """Whether << absorbs <= on the left (x <= c << y), as A1 demands."""
        return self.tag in (CaseTag.CASE_II, CaseTag.CASE_III)

    @property
    def eight_term(self) -> bool:
        return self.tag is CaseTag.CASE_III


def admissible_case(theory: Theory) -> Case:
    """Which composition-union recipe applies, or Inadmissible naming the failed clause."""
    if theory.extras:
        raise Inadmissible("extras", "extra axioms are outside the constructor; use the oracle")
    if not theory.transitive:
        raise Inadmissible("transitive", "intransitive theories go through free_amalgamate")
    if Prop.SYMMETRIC in theory.P | theory.Q:
        raise Inadmissible("symmetric", "symmetric relations are outside the proven cases")
    n = theory.N
    c1 = "F" in n
    c2 = Prop.ANTISYMMETRIC in theory.P or Prop.ANTIREFLEXIVE in theory.Q or Prop.ANTISYMMETRIC not in theory.Q
    if {"A1", "A2"} <= n:
        return Case(CaseTag.CASE_III, c1, c2)
    if not n & {"A1", "A2"}:
        return Case(CaseTag.CASE_B, c1, c2)
    if not c1:
        raise Inadmissible("c1")
    if not c2:
        raise Inadmissible("c2")
    return Case(CaseTag.CASE_I if "A2" in n else CaseTag.CASE_II, c1, c2)


# -- batched kernels -------------------------------------------------------------


def mixed_terms(la, lla, lb, llb, ll_after_leq: bool, leq_before_ll: bool):
    """The cross terms that absorb <= into <<: <<A;<=B and <<B;<=A, and/or <=A;<<B and <=B;<<A."""
    c = relalg.compose
    out = np.zeros(np.broadcast_shapes(la.shape, lb.shape), dtype=bool)
    if ll_after_leq:
        out |= c(lla, lb) | c(llb, la)
    if leq_before_ll:
        out |= c(la, llb) | c(lb, lla)
    return out


def union_recipe(la, lla, lb, llb, ll_after_leq: bool = False, leq_before_ll: bool = False):
    """<= and << over A ∪ B from arm relations padded into the union's index layout.

    <= is the union of <=A, <=B, <=A;<=B and <=B;<=A.  << is the same
    four-term union, plus <<A;<=B and <<B;<=A when ``ll_after_leq`` and
    <=A;<<B and <=B;<<A when ``leq_before_ll``.  Both flags together give
    the eight-term union.  Broadcasts over leading batch axes.
    """
    c = relalg.compose
    leq = la | lb | c(la, lb) | c(lb, la)
    ll = lla | llb | c(lla, llb) | c(llb, lla)
    if ll_after_leq or leq_before_ll:
        ll = ll | mixed_terms(la, lla, lb, llb, ll_after_leq, leq_before_ll)
    return leq, ll


def embedding_violations(dm, am, ia):
    sub = dm[..., ia[:, None], ia[None, :]]
    return am & ~sub, sub & ~am


def super_violations(dleq, aleq, bleq, ia, kb, ca, cb, new_a, new_b):
    """(a, b) cross pairs ordered in D without an interpolant in C, both directions.

    Index arguments: ``ia``/``kb`` send arm indices to D indices, ``ca``/``cb``
    list the positions of C inside each arm, ``new_a``/``new_b`` the arm
    positions outside C.
    """
    c = relalg.compose
    up_interp = c(aleq[..., :, ca], bleq[..., cb, :])
    down_interp = c(bleq[..., :, cb], aleq[..., ca, :])
    up = dleq[..., ia[new_a][:, None], kb[new_b][None, :]] & ~up_interp[..., new_a[:, None], new_b[None, :]]
    down = dleq[..., kb[new_b][:, None], ia[new_a][None, :]] & ~down_interp[..., new_b[:, None], new_a[None, :]]
    return up, relalg.transpose(down)


# -- helpers -----------------------------------------------------------------------


def _layout(v: VFormation):
    uni = v.union_universe()
    pos = {x: i for i, x in enumerate(uni)}
    ia = np.array([pos[x] for x in v.A.universe], dtype=np.intp)
    kb = np.array([pos[x] for x in v.B.universe], dtype=np.intp)
    return uni, ia, kb


def _pad(m, idx, n):
    out = np.zeros((n, n), dtype=bool)
    out[np.ix_(idx, idx)] = m
    return out


def _union_ops(v: VFormation, uni) -> dict:
    if set(v.A.ops) != set(v.B.ops):
        raise InvalidInput("both arms must carry the same operations")
    pos = {x: i for i, x in enumerate(uni)}
    ops = {}
    for name in v.A.ops:
        fa, fb = v.A.op(name), v.B.op(name)
        ops[name] = tuple(pos[fa[x]] if x in fa else pos[fb[x]] for x in uni)
    return ops


def _check_pieces(v: VFormation, theory: Theory):
    for name, s in (("A", v.A), ("B", v.B), ("C", v.C)):
        rep = validate(s, theory)
        if not rep.ok:
            raise InvalidInput(f"{name} is not a model of the theory: {rep}", rep)


def _require(report: Report, what: str):
    if not report.ok:
        raise VerificationFailed(report, what)


# -- operations ------------------------------------------------------------------


def amalgamate_leq(v: VFormation) -> BinRel:
    """<=A ∪ <=B ∪ <=A;<=B ∪ <=B;<=A over A ∪ B."""
    uni, ia, kb = _layout(v)
    n = len(uni)
    la, lb = _pad(v.A.leq, ia, n), _pad(v.B.leq, kb, n)
    c = relalg.compose
    return BinRel(uni, la | lb | c(la, lb) | c(lb, la))


def amalgamate(v: VFormation, theory: Theory) -> Amalgam:
    """Superamalgam over A ∪ B by the composition-union recipe for the theory's case."""
    case = admissible_case(theory)
    for name, pres in theory.op_sig:
        if LEQ not in pres:
            raise Inadmissible("ops", f"operation {name!r} does not preserve <=; amalgamation can fail")
    _check_pieces(v, theory)
    uni, ia, kb = _layout(v)
    n = len(uni)
    leq, ll = union_recipe(_pad(v.A.leq, ia, n), _pad(v.A.ll, ia, n),
                           _pad(v.B.leq, kb, n), _pad(v.B.ll, kb, n),
                           case.ll_after_leq, case.leq_before_ll)
    D = Structure(uni, leq, ll, _union_ops(v, uni))
    w = Amalgam.inclusion(D, v)
    _require(verify(v, w, theory, AmalgamMode.SUPER), f"{case.tag.name} amalgam failed verification")
    return w


def verify(v: VFormation, w: Amalgam, theory: Theory, mode: AmalgamMode = AmalgamMode.SUPER) -> Report:
    """Check W amalgamates V at the given level.

    Order: D against the theory, both embeddings, agreement on C, then for
    SAP and SUPER the image intersection, then for SUPER the interpolation
    condition for <= across every cross pair.
    """
    mode = AmalgamMode(mode)
    D = w.D
    out = validate(D, theory).prefixed("D.")
    emb_a = is_embedding(w.iota, v.A, D, theory).prefixed("iota.")
    emb_b = is_embedding(w.kappa, v.B, D, theory).prefixed("kappa.")
    out = out + emb_a + emb_b
    if any(a.axiom.endswith(("TOTAL", "CODOMAIN")) for a in emb_a.violations + emb_b.violations):
        return out
    extra = []
    for c in v.C.universe:
        if w.iota[c] != w.kappa[c]:
            extra.append(Violation("AGREE", (c,)))
            break
    if mode is not AmalgamMode.AP:
        img_c = {w.iota[c] for c in v.C.universe}
        back = {w.kappa[b]: b for b in v.B.universe}
        for a in v.A.universe:
            d = w.iota[a]
            if d in back and d not in img_c:
                extra.append(Violation("SAP", (a, back[d])))
                break
    if mode is AmalgamMode.SUPER:
        ia = np.array([D.index[w.iota[x]] for x in v.A.universe], dtype=np.intp)
        kb = np.array([D.index[w.kappa[x]] for x in v.B.universe], dtype=np.intp)
        ca = np.array([v.A.index[x] for x in v.C.universe], dtype=np.intp)
        cb = np.array([v.B.index[x] for x in v.C.universe], dtype=np.intp)
        na = np.array([v.A.index[x] for x in v.new_a], dtype=np.intp)
        nb = np.array([v.B.index[x] for x in v.new_b], dtype=np.intp)
        up, down = super_violations(D.leq, v.A.leq, v.B.leq, ia, kb, ca, cb, na, nb)
        for axiom, t in (("SUPER", up), ("SUPER_DUAL", down)):
            hit = relalg.first_index(t)
            if hit is not None:
                extra.append(Violation(axiom, (v.new_a[hit[0]], v.new_b[hit[1]])))
    return out + Report(extra)


def _poset_report(r: BinRel) -> Report:
    return check_rel_props(r, {2, 5})


def lift(d: Structure, eleq: BinRel, theory: Theory) -> BinRel:
    """Extend << from D to a poset E ⊇ D so that E is still a model and extends D.

    Dispatch on the theory: C (given or entailed) uses <=E ∪ <=E;<<D;<=E;
    neither A1 nor A2 keeps <<D as is; A2 alone uses <<D;<=E with left end
    in D; A1 alone the mirror image; A1 and A2 use <=E;<<D;<=E.  Reflexive
    << adds the diagonal of E.
    """
    if d.ops:
        raise InvalidInput("lift handles structures without operations")
    missing = set(d.universe) - set(eleq.universe)
    if missing:
        raise NotAPosetExtension(f"E does not contain {sorted(missing)[0]!r}")
    rep = _poset_report(eleq)
    if not rep.ok:
        raise NotAPosetExtension(f"<=E is not a partial order: {rep}")
    pos = {x: i for i, x in enumerate(eleq.universe)}
    idx = np.array([pos[x] for x in d.universe], dtype=np.intp)
    E = eleq.matrix
    if not np.array_equal(E[np.ix_(idx, idx)], d.leq):
        raise NotAPosetExtension("<=E does not restrict to <=D")
    rep = validate(d, theory)
    if not rep.ok:
        raise InvalidInput(f"D is not a model of the theory: {rep}", rep)
    n = len(eleq.universe)
    lld = _pad(d.ll, idx, n)
    c = relalg.compose
    N = theory.effective_N()
    if "C" in N:
        lle = E | c(c(E, lld), E)
    elif not N & {"A1", "A2"}:
        lle = lld
    elif "A1" not in N:
        lle = c(lld, E)
    elif "A2" not in N:
        lle = c(E, lld)
    else:
        lle = c(c(E, lld), E)
    if Prop.REFLEXIVE in theory.Q:
        lle = lle | np.eye(n, dtype=bool)
    out = Structure(eleq.universe, E, lle)
    rep = validate(out, theory)
    if not np.array_equal(lle[np.ix_(idx, idx)], d.ll):
        rep = rep + Report([Violation("EXTENDS", ())])
    _require(rep, "lifted relation failed verification")
    return BinRel(eleq.universe, lle)


def expand_superamalgam(v: VFormation, eleq: BinRel, theory: Theory) -> Amalgam:
    """Expand a superamalgam E of the <=-reducts to a full amalgam of V.

    The four-term amalgam D over A ∪ B must sit inside E as an induced
    suborder (superamalgamation fixes <= on A ∪ B); << is then lifted from D
    to E.
    """
    if v.A.ops or v.B.ops:
        raise InvalidInput("expand_superamalgam handles structures without operations")
    for name, s in (("A", v.A), ("B", v.B)):
        rep = _poset_report(s.leq_rel)
        if not rep.ok:
            raise InvalidInput(f"<= on {name} is not a partial order: {rep}", rep)
    base = amalgamate(v, theory)
    D = base.D
    missing = set(D.universe) - set(eleq.universe)
    if missing:
        raise NotASuperamalgam(f"E misses {sorted(missing)[0]!r}")
    pos = {x: i for i, x in enumerate(eleq.universe)}
    idx = np.array([pos[x] for x in D.universe], dtype=np.intp)
    if not np.array_equal(eleq.matrix[np.ix_(idx, idx)], D.leq):
        raise NotASuperamalgam("<=E on A ∪ B differs from the four-term union")
    try:
        lle = lift(D, eleq, theory)
    except NotAPosetExtension as e:
        raise NotASuperamalgam(str(e)) from e
    E = Structure(eleq.universe, eleq.matrix, lle.matrix)
    w = Amalgam.inclusion(E, v)
    _require(verify(v, w, theory, AmalgamMode.SUPER), "expanded superamalgam failed verification")
    return w


def szpilrajn(r: BinRel) -> BinRel:
    """Linear order containing a partial order: repeatedly take the least minimal element."""
    rep = _poset_report(r)
    if not rep.ok:
        v = rep.violations[0]
        raise NotAPartialOrder(f"not a partial order: {v.axiom} at {v.witness}", v.witness)
    m = r.matrix
    n = len(r.universe)
    remaining = list(range(n))
    order = []
    while remaining:
        for i in remaining:
            if not any(m[j, i] for j in remaining if j != i):
                break
        order.append(i)
        remaining.remove(i)
    rank = np.empty(n, dtype=np.intp)
    rank[order] = np.arange(n)
    return BinRel(r.universe, rank[:, None] <= rank[None, :])


def _is_linear(m: np.ndarray) -> bool:
    return bool((m | m.T).all())


def linearize_pipeline(v: VFormation, theory: Theory = COARSER_ORDER) -> Amalgam:
    """Amalgam in which << is a linear order coarser than <=.

    The arms are amalgamated as posets with a coarser order, then << is
    replaced by a linearization; the result is re-checked against both arms.
    """
    if not ({2, 5} <= theory.P and {2, 5} <= theory.Q and "C" in theory.N):
        raise InvalidInput("linearize_pipeline needs posets with a coarser order (P, Q ⊇ {2,5}, C ∈ N)")
    for name, s in (("A", v.A), ("B", v.B)):
        if not _is_linear(s.ll):
            raise InvalidInput(f"<< on {name} is not linear")
    part1 = Theory(P={2, 5}, Q={2, 5}, N={"C"}, op_sig=theory.op_sig)
    E = amalgamate(v, part1).D
    llf = szpilrajn(E.ll_rel)
    F = E.replace(ll=llf.matrix)
    w = Amalgam.inclusion(F, v)
    rep = verify(v, w, theory, AmalgamMode.SUPER)
    if not _is_linear(F.ll):
        rep = rep + Report([Violation("D.ll.LINEAR", ())])
    _require(rep, "linearized amalgam failed verification")
    return w


def free_amalgamate(v: VFormation, theory: Theory) -> Amalgam:
    """Plain union of both relations over A ∪ B, for theories without transitivity."""
    if theory.transitive:
        raise TheoryRequiresTransitivity("free amalgamation is only sound without transitivity")
    _check_pieces(v, theory)
    uni, ia, kb = _layout(v)
    n = len(uni)
    leq = _pad(v.A.leq, ia, n) | _pad(v.B.leq, kb, n)
    ll = _pad(v.A.ll, ia, n) | _pad(v.B.ll, kb, n)
    D = Structure(uni, leq, ll, _union_ops(v, uni))
    w = Amalgam.inclusion(D, v)
    _require(verify(v, w, theory, AmalgamMode.SAP), "free amalgam failed verification")
    return w
