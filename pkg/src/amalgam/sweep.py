"""Exhaustive batched check of the composition-union amalgams on small instances.

Every V-formation whose arms carry two transitive relations and have at
most ``max_arm`` elements is enumerated once, up to isomorphism over the
base.  For each one the sweep records which relational axioms hold in
both arms and in each candidate amalgam (the four << recipes),
plus embedding and superamalgamation flags.  A theory built from those
axioms can then be checked against every instance at once: an instance
counts for the theory when both arms satisfy its axioms, and it passes
when the amalgam for the theory's case satisfies them too and all flags
hold.

All arithmetic runs on stacked boolean matrices, through the same
``union_recipe`` and embedding kernels the single-instance constructor
uses.  A recipe is evaluated only on arm pairs that some theory using it
can accept; elsewhere its columns stay zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from . import relalg
from .construct import Case, admissible_case, embedding_violations, mixed_terms, super_violations, union_recipe
from .core import Theory, atom_bits, leq_atom_bits, ll_atom_bits
from .errors import Inadmissible

PROPERTY_SETS = [(), (2,), (4,), (5,), (2, 5), (4, 5)]
INTERACTION_SETS = [tuple(c for c, keep in zip(("F", "C", "A1", "A2"), bits) if keep)
                    for bits in product((0, 1), repeat=4)]


def transitive_relations(n: int) -> np.ndarray:
    cells = np.array(list(product((False, True), repeat=n * n)), dtype=bool).reshape(-1, n, n)
    return cells[relalg.transitive_ok(cells)]


def labeled_structures(n: int):
    """Every pair (<=, <<) of transitive relations on n points, as two stacks."""
    t = transitive_relations(n)
    k = len(t)
    return np.repeat(t, k, axis=0), np.tile(t, (k, 1, 1))


def _codes(leq, ll, perms) -> np.ndarray:
    """Least encoding over the given permutations, one per structure."""
    n = leq.shape[-1]
    weights = (np.int64(1) << np.arange(2 * n * n, dtype=np.int64))
    best = None
    for p in perms:
        p = np.asarray(p, dtype=np.intp)
        bits = np.concatenate([leq[:, p][:, :, p].reshape(len(leq), -1),
                               ll[:, p][:, :, p].reshape(len(ll), -1)], axis=1)
        code = bits.astype(np.int64) @ weights
        best = code if best is None else np.minimum(best, code)
    return best


def _reduce(leq, ll, perms):
    codes = _codes(leq, ll, perms)
    _, first = np.unique(codes, return_index=True)
    first.sort()
    return leq[first], ll[first]


def iso_classes(n: int):
    """One representative per isomorphism class of n-point structures."""
    if n == 0:
        return np.zeros((1, 0, 0), bool), np.zeros((1, 0, 0), bool)
    leq, ll = labeled_structures(n)
    return _reduce(leq, ll, list(permutations(range(n))))


def extensions_of(cleq, cll, k: int):
    """Extensions of a c-point base by k points (base = first c), up to permuting new points."""
    c = cleq.shape[-1]
    n = c + k
    if n == 0:
        return np.zeros((1, 0, 0), bool), np.zeros((1, 0, 0), bool)
    leq, ll = labeled_structures(n)
    keep = (leq[:, :c, :c] == cleq).all(axis=(1, 2)) & (ll[:, :c, :c] == cll).all(axis=(1, 2))
    leq, ll = leq[keep], ll[keep]
    perms = [tuple(range(c)) + tuple(c + i for i in p) for p in permutations(range(k))]
    return _reduce(leq, ll, perms)


#: The four << recipes, as (ll_after_leq, leq_before_ll) flags.
VARIANTS = ((False, False), (True, False), (False, True), (True, True))


def _variant(case: Case) -> int:
    return VARIANTS.index((case.ll_after_leq, case.leq_before_ll))


@dataclass
class SweepTable:
    """Distinct outcome signatures with their multiplicities.

    ``d_bits[:, v]`` and ``emb[:, v]`` belong to the << recipe ``VARIANTS[v]``.
    """

    arm_bits: np.ndarray   # axioms holding in both arms
    d_bits: np.ndarray     # axioms of each candidate amalgam
    emb: np.ndarray        # both arms embed into each candidate
    sup: np.ndarray        # <= superamalgamates (shared by all recipes)
    count: np.ndarray
    instances: int


def _recipe_requirements() -> list[int]:
    """Per recipe, the axioms every admissible theory using it imposes on the arms.

    Arm pairs lacking them count for no theory of that recipe, so the
    recipe is not evaluated on them.
    """
    req = [-1] * len(VARIANTS)
    for t, case in admissible_theories():
        k = _variant(case)
        req[k] &= t.atom_mask()
    return [0 if r == -1 else r for r in req]


def _batch(c, ka, kb, al, all_, bl, bll, arm_sig, requirements):
    n = c + ka + kb
    m = len(al)
    ia = np.arange(c + ka)
    kb_idx = np.concatenate([np.arange(c), np.arange(c + ka, n)]).astype(np.intp)

    def pad(x, idx):
        out = np.zeros((m, n, n), dtype=bool)
        out[:, idx[:, None], idx[None, :]] = x
        return out

    def fits(*ts):
        flag = np.ones(len(ts[0]), dtype=bool)
        for t in ts:
            flag &= ~t.any(axis=(-2, -1))
        return flag

    la, lla, lb, llb = pad(al, ia), pad(all_, ia), pad(bl, kb_idx), pad(bll, kb_idx)
    ca = np.arange(c)
    new_a, new_b = np.arange(c, c + ka), np.arange(c, c + kb)
    # <= and everything depending on it alone is shared by all recipes
    leq, ll4 = union_recipe(la, lla, lb, llb)
    leq_bits = leq_atom_bits(leq)
    leq_emb = fits(*embedding_violations(leq, al, ia), *embedding_violations(leq, bl, kb_idx))
    sup = fits(*super_violations(leq, al, bl, ia, kb_idx, ca, ca, new_a, new_b))
    flag_bits = sup.astype(np.int64)
    d_cols = []
    for k, (flags, req) in enumerate(zip(VARIANTS, requirements)):
        d = np.zeros(m, dtype=np.int64)
        rows = np.flatnonzero((arm_sig & req) == req)
        if len(rows):
            ll = ll4[rows]
            if any(flags):
                ll = ll | mixed_terms(la[rows], lla[rows], lb[rows], llb[rows], *flags)
            d[rows] = leq_bits[rows] | ll_atom_bits(leq[rows], ll)
            emb = leq_emb[rows] & fits(*embedding_violations(ll, all_[rows], ia),
                                       *embedding_violations(ll, bll[rows], kb_idx))
            flag_bits[rows] |= emb.astype(np.int64) << (k + 1)
        d_cols.append(d)
    return np.stack([arm_sig, *d_cols, flag_bits], axis=1)


def sweep(max_arm: int = 3, chunk: int = 200_000, progress=None) -> SweepTable:
    """Enumerate all V-formations with arms of size <= max_arm and tabulate outcomes.

    Unordered arm pairs are used (every recipe and every check is symmetric
    in the arms).
    """
    acc: dict[tuple, int] = {}
    total = 0
    requirements = _recipe_requirements()
    for c in range(max_arm + 1):
        cl, cll = iso_classes(c)
        for ci in range(len(cl)):
            exts = [extensions_of(cl[ci], cll[ci], k) for k in range(max_arm - c + 1)]
            sigs = [atom_bits(e[0], e[1], extras=False) for e in exts]
            for ka in range(len(exts)):
                for kb in range(ka, len(exts)):
                    na, nb = len(exts[ka][0]), len(exts[kb][0])
                    if ka == kb:
                        I, J = np.triu_indices(na)
                    else:
                        I, J = np.divmod(np.arange(na * nb), nb)
                    for s in range(0, len(I), chunk):
                        i, j = I[s:s + chunk], J[s:s + chunk]
                        rows = _batch(c, ka, kb, exts[ka][0][i], exts[ka][1][i], exts[kb][0][j], exts[kb][1][j],
                                      sigs[ka][i] & sigs[kb][j], requirements)
                        u, cnt = np.unique(rows, axis=0, return_counts=True)
                        for key, k in zip(map(tuple, u.tolist()), cnt.tolist()):
                            acc[key] = acc.get(key, 0) + k
                        total += len(i)
                    if progress is not None:
                        progress(c, ci, ka, kb, total)
    keys = sorted(acc)
    rows = np.array(keys, dtype=np.int64).reshape(len(keys), 2 + len(VARIANTS))
    flags = rows[:, -1]
    emb = np.stack([(flags >> (k + 1)) & 1 for k in range(len(VARIANTS))], axis=1).astype(bool)
    return SweepTable(rows[:, 0], rows[:, 1:1 + len(VARIANTS)], emb, (flags & 1).astype(bool),
                      np.array([acc[k] for k in keys], dtype=np.int64), total)


def admissible_theories() -> list[tuple[Theory, Case]]:
    """Every (P, Q, N) over codes {2, 4, 5} that the constructor accepts."""
    out = []
    for P in PROPERTY_SETS:
        for Q in PROPERTY_SETS:
            for N in INTERACTION_SETS:
                t = Theory(P=P, Q=Q, N=N)
                try:
                    out.append((t, admissible_case(t)))
                except Inadmissible:
                    pass
    return out


@dataclass(frozen=True)
class TheoryOutcome:
    theory: Theory
    case: Case
    instances: int
    failures: int
    satisfiable: bool


def check_theories(table: SweepTable, theories=None) -> list[TheoryOutcome]:
    theories = admissible_theories() if theories is None else theories
    one_point = atom_bits(*_all_one_point(), extras=False)
    out = []
    for t, case in theories:
        m = np.int64(t.atom_mask())
        sat = bool(((one_point & m) == m).any())
        valid = (table.arm_bits & m) == m
        k = _variant(case)
        d, emb = table.d_bits[:, k], table.emb[:, k]
        good = ((d & m) == m) & emb & table.sup
        out.append(TheoryOutcome(t, case, int(table.count[valid].sum()),
                                 int(table.count[valid & ~good].sum()), sat))
    return out


def _all_one_point():
    leq, ll = labeled_structures(1)
    return leq, ll
