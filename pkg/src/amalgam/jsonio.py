"""JSON encodings for structures, theories, V-formations, amalgams and results.

Arrays are order-insensitive on input and sorted on output.  Duplicate
pairs and unknown keys or tokens are rejected with the location of the
offending value.
"""

from __future__ import annotations

import json
from typing import Any

from .core import (LEQ, LL, U, UNION_OF_CHAINS, Amalgam, MaxAntichain, Report, Structure, Theory,
                   VFormation, normalize_instance)
from .errors import InvalidInput


class JsonInputError(InvalidInput):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _expect(value, kind, where):
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        name = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise JsonInputError(where, f"expected {name}, got {type(value).__name__}")
    return value


def _keys(obj, allowed, required, where):
    _expect(obj, dict, where)
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise JsonInputError(where, f"unknown key {extra[0]!r}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise JsonInputError(where, f"missing key {missing[0]!r}")


def load_file(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise JsonInputError(f"{path}:{e.lineno}:{e.colno}", e.msg) from None
    except OSError as e:
        raise JsonInputError(path, e.strerror or str(e)) from None


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


# -- structures ----------------------------------------------------------------


def structure_to_json(s: Structure) -> dict:
    out = {
        "universe": list(s.universe),
        "leq": [list(p) for p in sorted(s.pairs("leq"))],
        "ll": [list(p) for p in sorted(s.pairs("ll"))],
    }
    if s.ops:
        out["ops"] = {name: s.op(name) for name in s.ops}
    return out


def _pairs(value, where):
    _expect(value, list, where)
    seen = set()
    for k, item in enumerate(value):
        w = f"{where}[{k}]"
        _expect(item, list, w)
        if len(item) != 2 or not all(isinstance(x, str) for x in item):
            raise JsonInputError(w, "a pair must be two labels")
        pair = tuple(item)
        if pair in seen:
            raise JsonInputError(w, f"duplicate pair {list(pair)}")
        seen.add(pair)
    return [tuple(p) for p in value]


def structure_from_json(obj, where: str = "$") -> Structure:
    _keys(obj, ("universe", "leq", "ll", "ops"), ("universe",), where)
    universe = _expect(obj["universe"], list, f"{where}.universe")
    for k, x in enumerate(universe):
        if not isinstance(x, str) or not x:
            raise JsonInputError(f"{where}.universe[{k}]", "labels must be nonempty strings")
    if len(set(universe)) != len(universe):
        raise JsonInputError(f"{where}.universe", "duplicate labels")
    leq = _pairs(obj.get("leq", []), f"{where}.leq")
    ll = _pairs(obj.get("ll", []), f"{where}.ll")
    ops = _expect(obj.get("ops", {}), dict, f"{where}.ops")
    for name, graph in ops.items():
        _expect(graph, dict, f"{where}.ops.{name}")
    try:
        return Structure.build(universe, leq, ll, ops)
    except ValueError as e:
        raise JsonInputError(where, str(e)) from None


# -- theories --------------------------------------------------------------------

_EXTRA_TOKENS = {"U": U, "unionOfChains": UNION_OF_CHAINS, "UnionOfChains": UNION_OF_CHAINS}


def theory_to_json(t: Theory) -> dict:
    extras = []
    for e in sorted(t.extras, key=lambda e: (isinstance(e, MaxAntichain), str(e))):
        if isinstance(e, MaxAntichain):
            extras.append({"maxAntichain": e.n})
        else:
            extras.append("U" if e == U else "unionOfChains")
    out = {"P": sorted(int(p) for p in t.P), "Q": sorted(int(q) for q in t.Q), "N": sorted(t.N),
           "extras": extras, "opSig": {name: sorted(pres) for name, pres in t.op_sig}}
    if not t.transitive:
        out["transitive"] = False
    return out


def theory_from_json(obj, where: str = "$") -> Theory:
    _keys(obj, ("P", "Q", "N", "extras", "opSig", "transitive"), (), where)
    props = {}
    for key in ("P", "Q"):
        vals = _expect(obj.get(key, []), list, f"{where}.{key}")
        for k, v in enumerate(vals):
            if not isinstance(v, int) or isinstance(v, bool) or v not in (2, 3, 4, 5):
                raise JsonInputError(f"{where}.{key}[{k}]", f"unknown property code {v!r}")
        if len(set(vals)) != len(vals):
            raise JsonInputError(f"{where}.{key}", "duplicate property code")
        props[key] = vals
    n = _expect(obj.get("N", []), list, f"{where}.N")
    for k, v in enumerate(n):
        if v not in ("F", "C", "A1", "A2"):
            raise JsonInputError(f"{where}.N[{k}]", f"unknown interaction condition {v!r}")
    if len(set(n)) != len(n):
        raise JsonInputError(f"{where}.N", "duplicate condition")
    extras = []
    for k, e in enumerate(_expect(obj.get("extras", []), list, f"{where}.extras")):
        w = f"{where}.extras[{k}]"
        if isinstance(e, str) and e in _EXTRA_TOKENS:
            extras.append(_EXTRA_TOKENS[e])
        elif isinstance(e, dict) and set(e) == {"maxAntichain"}:
            bound = e["maxAntichain"]
            if not isinstance(bound, int) or isinstance(bound, bool) or bound < 1:
                raise JsonInputError(w, "maxAntichain needs a positive integer")
            extras.append(MaxAntichain(bound))
        else:
            raise JsonInputError(w, f"unknown extra axiom {e!r}")
    sig = _expect(obj.get("opSig", {}), dict, f"{where}.opSig")
    op_sig = []
    for name, pres in sig.items():
        w = f"{where}.opSig.{name}"
        _expect(pres, list, w)
        if not pres or any(p not in (LEQ, LL) for p in pres) or len(set(pres)) != len(pres):
            raise JsonInputError(w, "expected a nonempty list drawn from LEQ, LL")
        op_sig.append((name, pres))
    transitive = _expect(obj.get("transitive", True), bool, f"{where}.transitive")
    try:
        return Theory(props["P"], props["Q"], n, extras, op_sig, transitive)
    except ValueError as e:
        raise JsonInputError(where, str(e)) from None


# -- V-formations, amalgams, reports -------------------------------------------


def _label_map(obj, where) -> dict:
    _expect(obj, dict, where)
    for k, v in obj.items():
        if not isinstance(v, str):
            raise JsonInputError(f"{where}.{k}", "expected a label")
    return dict(obj)


def vformation_to_json(v: VFormation) -> dict:
    out = {"A": structure_to_json(v.A), "B": structure_to_json(v.B), "C": structure_to_json(v.C)}
    if v.origin:
        out["origin"] = dict(sorted(v.origin.items()))
    return out


def vformation_from_json(obj, where: str = "$", theory: Theory | None = None) -> VFormation:
    """Normalized triple, or arbitrary embeddings under keys "i1" and "k1"."""
    _keys(obj, ("A", "B", "C", "i1", "k1", "origin"), ("A", "B", "C"), where)
    A = structure_from_json(obj["A"], f"{where}.A")
    B = structure_from_json(obj["B"], f"{where}.B")
    C = structure_from_json(obj["C"], f"{where}.C")
    if "i1" in obj or "k1" in obj:
        i1 = _label_map(obj.get("i1", {x: x for x in C.universe}), f"{where}.i1")
        k1 = _label_map(obj.get("k1", {x: x for x in C.universe}), f"{where}.k1")
        return normalize_instance(A, B, C, i1, k1, theory)
    origin = _label_map(obj.get("origin", {}), f"{where}.origin")
    try:
        return VFormation(A, B, C, origin)
    except ValueError as e:
        raise JsonInputError(where, str(e)) from None


def amalgam_to_json(w: Amalgam) -> dict:
    return {"D": structure_to_json(w.D), "iota": dict(sorted(w.iota.items())),
            "kappa": dict(sorted(w.kappa.items()))}


def amalgam_from_json(obj, where: str = "$") -> Amalgam:
    _keys(obj, ("D", "iota", "kappa"), ("D", "iota", "kappa"), where)
    D = structure_from_json(obj["D"], f"{where}.D")
    try:
        return Amalgam(D, _label_map(obj["iota"], f"{where}.iota"), _label_map(obj["kappa"], f"{where}.kappa"))
    except ValueError as e:
        raise JsonInputError(where, str(e)) from None


def binrel_from_json(obj, where: str = "$"):
    """A bare relation: {"universe": [...], "pairs": [[x, y], ...]}."""
    from .core import BinRel

    _keys(obj, ("universe", "pairs"), ("universe", "pairs"), where)
    universe = _expect(obj["universe"], list, f"{where}.universe")
    try:
        return BinRel.from_pairs(universe, _pairs(obj["pairs"], f"{where}.pairs"))
    except ValueError as e:
        raise JsonInputError(where, str(e)) from None


def binrel_to_json(r) -> dict:
    return {"universe": list(r.universe), "pairs": [list(p) for p in sorted(r.pairs)]}


def _jsonable(x):
    if isinstance(x, (list, tuple)):
        return [_jsonable(i) for i in x]
    return x


def report_to_json(rep: Report) -> dict:
    return {"ok": rep.ok,
            "violations": [{"axiom": v.axiom, "witness": _jsonable(v.witness)} for v in rep.violations]}


def search_result_to_json(res) -> dict:
    return {
        "outcome": res.outcome,
        "mode": res.mode.name,
        "config": {"allowIdentification": res.config.allow_identification,
                   "extraElements": res.config.extra_elements,
                   "timeBudget": res.config.time_budget},
        "genuine": res.genuine,
        "stats": {"nodes": res.stats.nodes, "configurations": res.stats.configurations,
                  "seconds": round(res.stats.seconds, 6)},
        "amalgam": amalgam_to_json(res.amalgam) if res.amalgam is not None else None,
    }
