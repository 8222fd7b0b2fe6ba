"""Command line: verify, table, adjoint, curvature, subalgebras, canon.

Exit codes: 0 all expectations met, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .expr import CannotTerminate, NotInvertible, ParityError, to_text
from .gc import ConstraintError, MissingBinding
from .parser import ParseError, canon, standard_env

OK, FAIL, INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _dump(obj):
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2, default=str)


def _emit(args, obj, text_lines):
    if getattr(args, "json", False):
        print(_dump(obj))
    else:
        for line in text_lines:
            print(line)


# verify -------------------------------------------------------------------------

def _epsilons(scn, eps):
    if eps is None:
        return scn.epsilons
    if scn.epsilons == [None]:
        raise InputError(f"{scn.name} does not depend on epsilon")
    if eps not in scn.epsilons:
        raise InputError(f"{scn.name} is not declared for epsilon = {eps}")
    return [eps]


def cmd_verify(args):
    from .scenario import check, load, scenario_names
    names = scenario_names() if args.all else [args.scenario]
    if not names or names == [None]:
        raise InputError("give --scenario or --all")
    reports = []
    for n in names:
        scn = load(n)
        for e in _epsilons(scn, args.epsilon):
            reports.append(check(scn, e))
    lines = []
    for r in reports:
        tag = "" if r["epsilon"] is None else f" eps={r['epsilon']:+d}"
        lines.append(f"{'OK  ' if r['met'] else 'FAIL'} {r['scenario']}{tag} "
                     f"(residuals {'zero' if r['verify']['pass'] else 'non-zero'})")
        if not r["met"] or args.verbose:
            for name, res in zip(r["verify"]["equations"], r["verify"]["residuals"]):
                lines.append(f"    {name}: {res}")
            for k, v in r["expectations"].items():
                if not v["met"]:
                    lines.append(f"    expectation {k}: expected {v['expected']}, got {v['got']}")
    _emit(args, reports if args.all else (reports[0] if len(reports) == 1 else reports), lines)
    return OK if all(r["met"] for r in reports) else FAIL


def cmd_curvature(args):
    from .geometry import curvature_report
    from .scenario import load
    scn = load(args.scenario)
    eps = _epsilons(scn, args.epsilon)[0]
    rep = curvature_report(scn.record(eps))
    rep["scenario"] = scn.name
    rep["epsilon"] = eps
    lines = [f"{k}: {rep[k]}" for k in ("I", "II", "gaussian", "mean", "H^2-K") if k in rep]
    lines += [f"{k}: {rep[k]}" for k in ("g", "b") if k in rep]
    lines.append(f"umbilic along K = 0: {rep['umbilic_along_K_zero']}")
    _emit(args, rep, lines)
    return OK


# algebra ---------------------------------------------------------------------------

def cmd_table(args):
    from .liesuper import algebra, decomposition_report, table_diff
    alg = algebra(args.algebra)
    d = table_diff(alg.name)
    anti = alg.antisymmetry_residuals()
    jac = alg.jacobi_residuals()
    dec = decomposition_report(alg.name)
    obj = dict(alg.to_json(), diff=d, antisymmetry=len(anti), jacobi=len(jac),
               decomposition=dec)
    width = max(len(c) for row in alg.rows() for c in row + alg.names) + 1
    lines = [" " * width + "".join(n.rjust(width) for n in alg.names)]
    for n, row in zip(alg.names, alg.rows()):
        lines.append(n.rjust(width) + "".join(c.rjust(width) for c in row))
    lines.append(f"golden diff: {len(d['diffs'])} of {d['cells']} cells")
    for c in d["diffs"]:
        lines.append(f"    [{c['row']},{c['col']}] expected {c['expected']}, computed {c['computed']}")
    lines.append(f"antisymmetry residuals: {len(anti)}; Jacobi residuals: {len(jac)}")
    lines.append(f"center: {', '.join(dec['center']) or 'none'}")
    _emit(args, obj, lines)
    return OK if d["pass"] and not anti and not jac and dec["pass"] else FAIL


def cmd_adjoint(args):
    from .liesuper import (WORKED_ORBITS, adjoint_action, algebra, format_element,
                           orbit_report, parse_element)
    if args.worked:
        if args.worked not in WORKED_ORBITS:
            raise InputError(f"worked orbit must be one of {', '.join(WORKED_ORBITS)}")
        rep = orbit_report(args.worked)
        lines = [f"expected: {rep['expected']}"]
        for s in (1, -1):
            r = rep[f"s={s:+d}"]
            lines.append(f"s={s:+d}: {'match' if r['match'] else 'differs'}: {r['result']}")
        _emit(args, rep, lines)
        return OK if rep["pass"] else FAIL
    if not (args.algebra and args.X and args.Y):
        raise InputError("adjoint needs --algebra, --X and --Y (or --worked)")
    alg = algebra(args.algebra)
    env = standard_env(auto=True)
    X = parse_element(args.X, alg, env)
    Y = parse_element(args.Y, alg, env)
    res = adjoint_action(alg, X, Y, args.orientation)
    obj = res.to_json()
    obj["text"] = format_element(res.result, alg)
    _emit(args, obj, [obj["text"]])
    return OK


def cmd_subalgebras(args):
    from .liesuper import conjugacy_spot_check, load_conjugations, load_subalgebras, \
        validate_entry
    if args.conjugations:
        reps = [conjugacy_spot_check(c) for c in load_conjugations()]
        lines = [f"{'OK  ' if r['pass'] else 'FAIL'} {r['id']} (s={r['orientation']:+d}): "
                 f"{r['orbit']}" for r in reps]
        _emit(args, reps, lines)
        return OK if all(r["pass"] for r in reps) else FAIL
    entries = load_subalgebras(args.list)
    if args.id:
        want = args.id.replace(" ", "")
        entries = [e for e in entries if e.id == want]
        if not entries:
            raise InputError(f"no entry {args.id!r} in list {args.list}")
    reps = [dict(validate_entry(e), conditions=e.conditions) for e in entries]
    lines = [f"{'OK  ' if r['pass'] else 'FAIL'} {r['id']}: {{{r['generator']}}}"
             + (f"  [{'; '.join(r['conditions'])}]" if r["conditions"] else "")
             + ("" if r["pass"] else "  " + "; ".join(r["problems"])) for r in reps]
    lines.append(f"{sum(r['pass'] for r in reps)}/{len(reps)} entries valid")
    _emit(args, reps if not args.id else reps[0], lines)
    return OK if all(r["pass"] for r in reps) else FAIL


def cmd_canon(args):
    if args.scenario:
        from .scenario import load
        scn = load(args.scenario)
        e = scn.parse(args.expr, args.epsilon)
        text = to_text(e)
    else:
        text = canon(args.expr)
    _emit(args, {"input": args.expr, "canonical": text}, [text])
    return OK


# main ------------------------------------------------------------------------------

def _sign(text):
    v = int(text)
    if v not in (1, -1):
        raise argparse.ArgumentTypeError("must be 1 or -1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="supergc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="verify a solution scenario")
    v.add_argument("--scenario", help="bundled scenario name or path to a .toml file")
    v.add_argument("--all", action="store_true", help="run every bundled scenario")
    v.add_argument("--epsilon", type=_sign)
    v.add_argument("--json", action="store_true")
    v.add_argument("-v", "--verbose", action="store_true")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", help="structure table and golden diff")
    t.add_argument("--algebra", required=True,
                   choices=["classical-finite", "bosonic", "fermionic", "fermionic-constf"])
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_table)

    a = sub.add_parser("adjoint", help="closed-form adjoint orbit Ad_{exp(sX)} Y")
    a.add_argument("--algebra")
    a.add_argument("--X")
    a.add_argument("--Y")
    a.add_argument("--orientation", type=_sign, default=1)
    a.add_argument("--worked", help="reproduce a worked orbit: bosonic or fermionic")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_adjoint)

    c = sub.add_parser("curvature", help="fundamental forms and curvatures")
    c.add_argument("--scenario", required=True)
    c.add_argument("--epsilon", type=_sign)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_curvature)

    s = sub.add_parser("subalgebras", help="query and validate the classification data")
    s.add_argument("--list", default="g", choices=["g", "h", "classical"])
    s.add_argument("--id")
    s.add_argument("--conjugations", action="store_true",
                   help="run the declared normalizing transformations")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_subalgebras)

    k = sub.add_parser("canon", help="print the canonical form of an expression")
    k.add_argument("--expr", required=True)
    k.add_argument("--scenario", help="parse in a scenario's declarations")
    k.add_argument("--epsilon", type=_sign)
    k.add_argument("--json", action="store_true")
    k.set_defaults(func=cmd_canon)
    return p


def main(argv=None) -> int:
    from .liesuper import AdjointError, NonClosure
    from .scenario import ScenarioError
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return INPUT if err.code else OK
    try:
        return args.func(args)
    except (InputError, ScenarioError, ParseError, ParityError, MissingBinding,
            ConstraintError, KeyError, FileNotFoundError, ValueError) as err:
        if isinstance(err, (NonClosure, AdjointError, NotInvertible, CannotTerminate)):
            print(f"supergc: {err}", file=sys.stderr)
            return FAIL
        msg = err.args[0] if isinstance(err, KeyError) and err.args else err
        print(f"supergc: error: {msg}", file=sys.stderr)
        return INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
