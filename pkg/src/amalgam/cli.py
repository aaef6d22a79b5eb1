"""Command-line interface.

JSON goes to standard output, one-line summaries to standard error.
Exit codes: 0 success, 1 verification failure or exhausted search,
2 input or usage error, 3 time budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import construct, fixtures, fraisse, jsonio, oracle
from .construct import AmalgamMode
from .core import Structure, validate
from .errors import (AmalgamError, Inadmissible, InvalidInput, NotAPartialOrder, NotAPosetExtension,
                     NotASuperamalgam, SizeBoundExceeded, TheoryRequiresTransitivity, TimeBudgetExceeded,
                     UnknownFixture, VerificationFailed)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_TIME = 0, 1, 2, 3

LEVELS = {"ap": AmalgamMode.AP, "sap": AmalgamMode.SAP, "super": AmalgamMode.SUPER}


def _emit(obj):
    sys.stdout.write(jsonio.dumps(obj) + "\n")


def _say(msg: str):
    print(msg, file=sys.stderr)


def _theory(args):
    return jsonio.theory_from_json(jsonio.load_file(args.theory), args.theory)


def _vform(path, theory):
    return jsonio.vformation_from_json(jsonio.load_file(path), path, theory)


def _relation(path):
    """A bare relation, or the <= relation of a structure."""
    obj = jsonio.load_file(path)
    if isinstance(obj, dict) and "pairs" in obj:
        return jsonio.binrel_from_json(obj, path)
    return jsonio.structure_from_json(obj, path).leq_rel


def _report_exit(rep) -> int:
    _emit(jsonio.report_to_json(rep))
    _say("ok" if rep.ok else f"violations: {rep}")
    return EXIT_OK if rep.ok else EXIT_FAIL


# -- subcommands -----------------------------------------------------------------


def cmd_validate(args) -> int:
    s = jsonio.structure_from_json(jsonio.load_file(args.structure), args.structure)
    return _report_exit(validate(s, _theory(args)))


def cmd_amalgamate(args) -> int:
    theory = _theory(args)
    v = _vform(args.vformation, theory)
    if args.mode == "construct":
        w = construct.amalgamate(v, theory)
        _say(f"constructed over {len(w.D.universe)} elements; verified at SUPER")
    else:
        res = oracle.decide_superamalgamation_over_union(v, theory)
        if not res.found:
            _emit(jsonio.search_result_to_json(res))
            _say("no superamalgam over the union")
            return EXIT_FAIL
        w = res.amalgam
        _say(f"oracle witness after {res.stats.nodes} nodes")
    out = jsonio.amalgam_to_json(w)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(jsonio.dumps(out) + "\n")
    _emit(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    theory = _theory(args)
    v = _vform(args.vformation, theory)
    w = jsonio.amalgam_from_json(jsonio.load_file(args.amalgam), args.amalgam)
    return _report_exit(construct.verify(v, w, theory, LEVELS[args.level]))


def cmd_lift(args) -> int:
    theory = _theory(args)
    d = jsonio.structure_from_json(jsonio.load_file(args.structure), args.structure)
    eleq = _relation(args.eleq)
    lle = construct.lift(d, eleq, theory)
    _emit(jsonio.structure_to_json(Structure(eleq.universe, eleq.matrix, lle.matrix)))
    _say(f"lifted << to {len(eleq.universe)} elements")
    return EXIT_OK


def cmd_linearize(args) -> int:
    lin = construct.szpilrajn(_relation(args.relation))
    _emit(jsonio.binrel_to_json(lin))
    return EXIT_OK


def cmd_linearize_pipeline(args) -> int:
    theory = _theory(args)
    w = construct.linearize_pipeline(_vform(args.vformation, theory), theory)
    _emit(jsonio.amalgam_to_json(w))
    _say("linearized amalgam verified")
    return EXIT_OK


def cmd_search(args) -> int:
    theory = _theory(args)
    v = _vform(args.vformation, theory)
    cfg = oracle.SearchConfig(args.identify, args.extra, args.time_budget)
    res = oracle.search(v, theory, LEVELS[args.level], cfg)
    _emit(jsonio.search_result_to_json(res))
    _say(f"{res.outcome} after {res.stats.nodes} nodes"
         + ("" if res.found else f" ({'genuine' if res.genuine else 'bounded'} refutation)"))
    return EXIT_OK if res.found else EXIT_FAIL


def cmd_fraisse(args) -> int:
    theory = _theory(args)
    if args.fraisse_cmd == "enumerate":
        models = fraisse.enumerate_models(theory, args.size)
        for m in models:
            sys.stdout.write(json.dumps(jsonio.structure_to_json(m), ensure_ascii=False) + "\n")
        _say(f"{len(models)} isomorphism classes of size {args.size}")
        return EXIT_OK
    if args.fraisse_cmd == "check-ap":
        rep = fraisse.check_ap_at_size(theory, args.size, LEVELS[args.level], args.max_failures)
        out = jsonio.report_to_json(rep)
        out["instances"] = [jsonio.vformation_to_json(v.detail) for v in rep.violations]
        _emit(out)
        _say("ok" if rep.ok else f"{len(rep.violations)} failing instances")
        return EXIT_OK if rep.ok else EXIT_FAIL
    if args.start:
        start = jsonio.structure_from_json(jsonio.load_file(args.start), args.start)
    else:
        start = Structure.build(["e1"], [("e1", "e1")] if 2 in theory.P else [],
                                [("e1", "e1")] if 2 in theory.Q else [])
    m, rep = fraisse.saturate(start, theory, args.level, args.budget, args.rounds)
    _emit({
        "structure": jsonio.structure_to_json(m),
        "complete": rep.complete,
        "rounds": rep.rounds,
        "added": list(rep.added),
        "realized": len(rep.realized),
        "unrealized": [{"base": list(t.base), "extension": jsonio.structure_to_json(t.structure)}
                       for t in rep.unrealized],
    })
    _say(f"{m.n} elements; {len(rep.unrealized)} unrealized extension types")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_fixture(args) -> int:
    if args.fixture_cmd == "list":
        _emit([{"name": n, "expected": fixtures.fixture(n).expected} for n in fixtures.names()])
        return EXIT_OK
    if args.fixture_cmd == "export":
        paths = fixtures.export(args.directory)
        _emit([str(p) for p in paths])
        return EXIT_OK
    todo = fixtures.names() if args.name == "all" else [fixtures.fixture(args.name).name]
    results = []
    all_ok = True
    for name in todo:
        res = fixtures.run_fixture(name)
        entry = {"name": name, "expected": res.fixture.expected, "outcome": res.outcome, "ok": res.ok,
                 "seconds": round(res.seconds, 6)}
        if isinstance(res.result, oracle.SearchResult):
            entry["result"] = jsonio.search_result_to_json(res.result)
        elif isinstance(res.result, construct.Amalgam):
            entry["result"] = jsonio.amalgam_to_json(res.result)
        else:
            entry["result"] = jsonio.report_to_json(res.result)
        results.append(entry)
        all_ok &= res.ok
        _say(f"{name}: {res.outcome} (expected {res.fixture.expected})")
    _emit(results[0] if args.name != "all" else results)
    if args.name != "all":
        return EXIT_OK if results[0]["outcome"] == oracle.WITNESS else EXIT_FAIL
    return EXIT_OK if all_ok else EXIT_FAIL


# -- parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="amalgam", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def theory_arg(sp, required=True):
        sp.add_argument("--theory", required=required, help="theory JSON file")

    sp = sub.add_parser("validate", help="check a structure against a theory")
    sp.add_argument("structure")
    theory_arg(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("amalgamate", help="superamalgam over the union")
    sp.add_argument("vformation")
    theory_arg(sp)
    sp.add_argument("--mode", choices=["construct", "oracle"], default="construct")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_amalgamate)

    sp = sub.add_parser("verify", help="verify an amalgam at a level")
    sp.add_argument("vformation")
    sp.add_argument("amalgam")
    theory_arg(sp)
    sp.add_argument("--level", choices=sorted(LEVELS), default="super")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("lift", help="extend << from D to a poset extension E")
    sp.add_argument("structure")
    sp.add_argument("eleq")
    theory_arg(sp)
    sp.set_defaults(func=cmd_lift)

    sp = sub.add_parser("linearize", help="linear order containing a partial order")
    sp.add_argument("relation")
    sp.set_defaults(func=cmd_linearize)

    sp = sub.add_parser("linearize-pipeline", help="amalgam with a linear coarser order")
    sp.add_argument("vformation")
    theory_arg(sp)
    sp.set_defaults(func=cmd_linearize_pipeline)

    sp = sub.add_parser("search", help="backtracking search for an amalgam")
    sp.add_argument("vformation")
    theory_arg(sp)
    sp.add_argument("--level", choices=sorted(LEVELS), default="super")
    sp.add_argument("--identify", action="store_true", help="allow identifying new elements (AP)")
    sp.add_argument("--extra", type=int, default=0, help="fresh elements allowed")
    sp.add_argument("--time-budget", type=float, default=None, help="seconds")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("fraisse", help="enumeration, AP checks, saturation")
    fsub = sp.add_subparsers(dest="fraisse_cmd", required=True)
    e = fsub.add_parser("enumerate")
    theory_arg(e)
    e.add_argument("--size", type=int, required=True)
    c = fsub.add_parser("check-ap")
    theory_arg(c)
    c.add_argument("--size", type=int, required=True)
    c.add_argument("--level", choices=sorted(LEVELS), default="ap")
    c.add_argument("--max-failures", type=int, default=None)
    s = fsub.add_parser("saturate")
    theory_arg(s)
    s.add_argument("--level", type=int, required=True, help="substructure size bound")
    s.add_argument("--budget", type=int, required=True, help="maximum universe size")
    s.add_argument("--rounds", type=int, default=None)
    s.add_argument("--start", help="structure JSON to start from (default: one point)")
    sp.set_defaults(func=cmd_fraisse)

    sp = sub.add_parser("fixture", help="built-in instances")
    xsub = sp.add_subparsers(dest="fixture_cmd", required=True)
    xsub.add_parser("list")
    r = xsub.add_parser("run")
    r.add_argument("name", help="fixture name or 'all'")
    x = xsub.add_parser("export")
    x.add_argument("directory")
    sp.set_defaults(func=cmd_fixture)
    return p


_INPUT_ERRORS = (InvalidInput, UnknownFixture, SizeBoundExceeded, Inadmissible, NotAPosetExtension,
                 NotAPartialOrder, TheoryRequiresTransitivity, ValueError)
_FAILURES = (VerificationFailed, NotASuperamalgam)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except TimeBudgetExceeded as e:
        _say(f"time budget exceeded: {e}")
        return EXIT_TIME
    except _FAILURES as e:
        _say(f"verification failed: {e}")
        return EXIT_FAIL
    except _INPUT_ERRORS as e:
        _say(f"input error: {e}")
        return EXIT_INPUT
    except AmalgamError as e:
        _say(f"error: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
