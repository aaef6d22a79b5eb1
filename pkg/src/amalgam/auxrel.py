"""Auxiliary relations on posets, causal spaces, and relations induced by operators."""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import relalg
from .core import BinRel, Report, Structure, _witness, check_rel_props
from .errors import InvalidInput, NotAPoset, NotContractive, NotExtensive, NotIsotone


class OperatorMode(Enum):
    EXTENSIVE = "extensive"      # x <= Kx; set x << y iff Kx <= y
    CONTRACTIVE = "contractive"  # Ix <= x; set x << y iff x <= Iy


def _require_poset(s: Structure):
    rep = check_rel_props(s.leq_rel, {2, 5})
    if not rep.ok:
        v = rep.violations[0]
        raise NotAPoset(f"<= is not a partial order: {v.axiom} at {v.witness}", v.witness)


def a_violations(leq: np.ndarray, ll: np.ndarray) -> np.ndarray:
    """(w, x, y, z) with w <= x << y <= z but not w << z."""
    return (leq[:, :, None, None] & ll[None, :, :, None] & leq[None, None, :, :]
            & ~ll[:, None, None, :])


def is_auxiliary(s: Structure) -> Report:
    """<< is finer than <= and satisfies w <= x << y <= z ⇒ w << z.

    On a poset these force << to be antisymmetric and transitive; both
    consequences are re-checked and reported if they ever fail.
    """
    _require_poset(s)
    labels = s.universe
    out = _witness("FINER", relalg.containment_violations(s.ll, s.leq), labels)
    out += _witness("A", a_violations(s.leq, s.ll), labels)
    if not out:
        out += _witness("ll.ANTISYMMETRIC", relalg.antisymmetric_violations(s.ll), labels)
        out += _witness("ll.TRANSITIVE", relalg.transitivity_violations(s.ll), labels)
    return Report(out)


def is_causal_space(s: Structure) -> Report:
    rep = is_auxiliary(s)
    return rep + Report(_witness("ANTIREFLEXIVE", relalg.antireflexive_violations(s.ll), s.universe))


def auxiliary_from_operator(p: Structure, k, mode: OperatorMode | str = OperatorMode.EXTENSIVE) -> BinRel:
    """x << y iff Kx <= y (extensive K), or x <= Iy (contractive I).

    ``k`` is an operation name of ``p`` or a label map.  K must be isotone.
    """
    mode = OperatorMode(mode)
    _require_poset(p)
    graph = p.op(k) if isinstance(k, str) else dict(k)
    missing = [x for x in p.universe if x not in graph]
    if missing or any(graph[x] not in p.index for x in p.universe):
        raise InvalidInput("operator must be a total map on the universe")
    f = np.array([p.index[graph[x]] for x in p.universe], dtype=np.intp)
    leq = p.leq
    hit = relalg.first_index(relalg.preservation_violations(leq, f))
    if hit is not None:
        raise NotIsotone(p.universe[hit[0]], p.universe[hit[1]])
    idx = np.arange(p.n)
    if mode is OperatorMode.EXTENSIVE:
        bad = ~leq[idx, f]
        if bad.any():
            raise NotExtensive(p.universe[int(np.argmax(bad))])
        ll = leq[f, :]
    else:
        bad = ~leq[f, idx]
        if bad.any():
            raise NotContractive(p.universe[int(np.argmax(bad))])
        ll = leq[:, f]
    rel = BinRel(p.universe, ll)
    rep = is_auxiliary(p.replace(ll=ll))
    if not rep.ok:
        raise AssertionError(f"induced relation is not auxiliary: {rep}")
    return rel

