"""Command-line front end.

Subcommands
-----------
analyze        full report on a configuration (type literal or graph file)
chain          chain calculus: disc, adjoint, transpose, star
fiber          degenerate-fiber test for a chain or a graph file
blowup         inner or outer blowup of a graph file
swap           elementary vertical swap on a graph file
enumerate      sweep the family tables for realizable types
classify       match a singularity type against the family tables
deb            tie a degenerate plane curve to a parameter-free base type
verify-tables  re-verify every tabulated family within a budget

Graphs are exchanged as JSON (:meth:`WeightedGraph.to_json` format);
``enumerate`` emits JSON lines under ``--json``.  Exit codes: 0 for
success (including "no match" answers), 2 for usage or parse errors,
3 for domain errors, 4 when ``verify-tables`` finds a failure.
``NO_COLOR`` disables the highlighting of verification results.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Sequence

from .birational import blowup_inner, blowup_outer, elementary_swap, fiber_analysis
from .chains import adjoint, disc, star_many, transpose
from .families import (
    GuardViolation,
    deb_compose,
    enumerate_types,
    iter_instances,
    load_library,
    recognize,
    verify_instance,
)
from .graphs import WeightedGraph, chain_graph
from .notation import NotationError, parse_chain, parse_type
from .singularities import analyze

# -- small helpers ------------------------------------------------------------


def _paint(text: str, code: str) -> str:
    if os.environ.get("NO_COLOR") or not sys.stdout.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


def _chain_text(t: Sequence[int]) -> str:
    return "[" + ",".join(str(x) for x in t) + "]"


def _raw_chain(text: str) -> tuple[int, ...]:
    """Chain literal for contraction input; entries may be <= 0 here."""
    try:
        return parse_chain(text)
    except NotationError:
        pass
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise NotationError(f"expected a chain literal, got {text!r}")
    body = t[1:-1].strip()
    if not body:
        return ()
    try:
        return tuple(int(tok) for tok in body.split(","))
    except ValueError:
        raise NotationError(f"bad entry in chain literal {text!r}") from None


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: expected a JSON object describing a graph")
    return data


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _params_text(params: dict) -> str:
    if not params:
        return "-"
    return ", ".join(
        f"{k}={_chain_text(v) if isinstance(v, (list, tuple)) else v}"
        for k, v in sorted(params.items())
    )


def _parse_assignments(pairs: Sequence[str]) -> dict:
    out: dict[str, Any] = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise NotationError(f"expected NAME=VALUE, got {pair!r}")
        value = value.strip()
        if value.startswith("["):
            out[name.strip()] = list(parse_chain(value))
        else:
            try:
                out[name.strip()] = int(value)
            except ValueError:
                raise NotationError(
                    f"parameter {name!r} must be an integer or a chain literal"
                ) from None
    return out


def _heights_arg(value: str) -> set[int] | None:
    return None if value == "all" else {int(value)}


# -- subcommands --------------------------------------------------------------


def _cmd_analyze(args: argparse.Namespace) -> int:
    if args.type is not None:
        g = parse_type(args.type).graph
    else:
        g = WeightedGraph.from_dict(_read_json(args.file))
    report = analyze(g)
    if args.json:
        print(json.dumps(report, indent=2))
        return 0
    d = report["definiteness"]
    print(f"vertices        {report['vertices']}")
    print(f"discriminant    {report['discriminant']}")
    print(f"definiteness    {d['kind']} (corank {d['corank']})")
    print(f"components      {', '.join(report['structural'])}")
    if report["classification"] is None:
        print("classification  - (coefficients undefined)")
        return 0
    print(f"classification  {report['classification']}")
    cf = report["coefficients"]
    print("coefficients    " + ", ".join(f"{v}={cf[v]}" for v in sorted(cf)))
    z = report["fundamental_cycle"]
    print("cycle           " + ", ".join(f"{v}:{z[v]}" for v in sorted(z)))
    print(f"pa(Z)           {', '.join(report['pa_Z'])}")
    print(f"rational        {'yes' if report['rational'] else 'no'}")
    return 0


def _cmd_chain(args: argparse.Namespace) -> int:
    chains = [parse_chain(s) for s in args.chains]
    if args.op == "star":
        if len(chains) < 2:
            raise NotationError("star needs at least two chains")
        print(_chain_text(star_many(chains)))
        return 0
    for t in chains:
        if args.op == "disc":
            print(disc(t))
        elif args.op == "adjoint":
            print(_chain_text(adjoint(t)))
        else:
            print(_chain_text(transpose(t)))
    return 0


def _cmd_fiber(args: argparse.Namespace) -> int:
    boundary = None
    if args.type is not None:
        g = chain_graph(_raw_chain(args.type))
    else:
        data = _read_json(args.file)
        boundary = data.pop("boundary", None)
        g = WeightedGraph.from_dict(data)
    rep = fiber_analysis(g, boundary)
    print(f"fiber           {'yes' if rep.valid else 'no'}")
    for reason in rep.reasons:
        print(f"  - {reason}")
    if rep.multiplicities is not None:
        m = rep.multiplicities
        print("multiplicities  " + ", ".join(f"{v}:{m[v]}" for v in sorted(m)))
    if rep.valid:
        print(f"sigma           {rep.sigma}")
    if rep.columnar is not None:
        left, right = rep.columnar
        print(f"columnar        {_chain_text(left)} | {_chain_text(right)}")
    return 0


def _cmd_blowup(args: argparse.Namespace) -> int:
    g = WeightedGraph.from_dict(_read_json(args.file))
    if args.inner is not None:
        a, sep, b = args.inner.partition(",")
        if not sep:
            raise NotationError("--inner expects two vertex ids: A,B")
        out = blowup_inner(g, a.strip(), b.strip())
    else:
        out = blowup_outer(g, args.outer.strip())
    print(out.to_json())
    return 0


def _cmd_swap(args: argparse.Namespace) -> int:
    g = WeightedGraph.from_dict(_read_json(args.file))
    boundary = [s.strip() for s in args.boundary.split(",") if s.strip()]
    res = elementary_swap(g, boundary, args.curve)
    out = res.graph.to_dict()
    out["boundary"] = sorted(res.boundary)
    out["new_curve"] = res.new_curve
    print(json.dumps(out, indent=2))
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    budget = dict(
        char=args.char,
        heights=_heights_arg(args.height),
        max_vertices=args.max_components,
        max_weight=args.max_weight,
    )
    if args.canonical_only:
        for rec in enumerate_types(**budget):
            if args.json:
                print(json.dumps({
                    "canonical": rec.canonical,
                    "heights": list(rec.heights),
                    "witnesses": _jsonable(rec.witnesses),
                }))
            else:
                wits = ", ".join(w[0] for w in rec.witnesses)
                hts = ",".join(str(h) for h in rec.heights)
                print(f"{rec.canonical}  heights={hts}  families={wits}")
        return 0
    for inst in iter_instances(**budget):
        if args.json:
            print(json.dumps({
                "family": inst.family.id,
                "table": inst.family.table,
                "height": inst.family.height,
                "params": _jsonable(dict(inst.params)),
                "type": inst.type_string,
                "canonical": inst.canonical,
                "chi": inst.chi,
            }))
        else:
            print(f"{inst.family.id}  {_params_text(dict(inst.params))}  "
                  f"{inst.type_string}")
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    matches = recognize(args.type, char=args.char)
    if not matches:
        print("no match")
        return 0
    for m in matches:
        print(f"{m['family']}  table {m['table']}  height {m['height']}  "
              f"params {_params_text(dict(m['params']))}  chi {m['chi']}  "
              f"count {m['count']}")
    return 0


def _cmd_deb(args: argparse.Namespace) -> int:
    res = deb_compose(
        args.base,
        args.item,
        kind=args.boundary,
        params=_parse_assignments(args.params or []),
        char=args.char,
    )
    print(f"base            {res.base}")
    print(f"tie             {res.tie} (item {res.item}, {res.kind})")
    print(f"composed        {res.composed}")
    print(f"height          {res.height}")
    print(f"primitive       {'yes' if res.primitive else 'no'}")
    if res.exception:
        print(f"exception       {res.exception}")
    return 0


def _cmd_verify_tables(args: argparse.Namespace) -> int:
    tables = [args.table] if args.table else [1, 3, 4, 5, 7]
    lib = load_library()
    seen: set[str] = set()
    total = 0
    failures = 0
    for inst in iter_instances(
        tables=tables,
        max_vertices=args.max_components,
        max_weight=args.max_weight,
        library=lib,
    ):
        total += 1
        seen.add(inst.family.id)
        rep = verify_instance(inst)
        if not rep.ok:
            failures += 1
            head = _paint("FAIL", "31")
            for check in rep.failures():
                print(f"{head} {rep.family} {_params_text(dict(rep.params))} "
                      f"{rep.type_string}: {check.name}: {check.detail}")
    tally = (f"verified {total} instances across {len(seen)} families; "
             f"failures: {failures}")
    print(_paint(tally, "32" if failures == 0 else "31"))
    return 4 if failures else 0


# -- argument parsing ----------------------------------------------------------


def _add_source(p: argparse.ArgumentParser, what: str) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("-t", "--type", metavar=what, help=f"{what} literal")
    group.add_argument("file", nargs="?", help="graph JSON file")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delpezzo",
        description="Weighted-graph calculus for rank-one log del Pezzo surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify a configuration")
    _add_source(p, "TYPE")
    p.add_argument("--json", action="store_true", help="emit the JSON report")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("chain", help="chain calculus")
    p.add_argument("op", choices=["disc", "adjoint", "transpose", "star"])
    p.add_argument("chains", nargs="+", metavar="CHAIN")
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("fiber", help="degenerate-fiber test")
    _add_source(p, "CHAIN")
    p.set_defaults(func=_cmd_fiber)

    p = sub.add_parser("blowup", help="blow up a graph")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--inner", metavar="A,B", help="subdivide the edge A,B")
    group.add_argument("--outer", metavar="V", help="sprout a (-1)-curve at V")
    p.add_argument("file", help="graph JSON file")
    p.set_defaults(func=_cmd_blowup)

    p = sub.add_parser("swap", help="elementary vertical swap")
    p.add_argument("--boundary", required=True, metavar="IDS",
                   help="comma-separated boundary vertex ids")
    p.add_argument("--curve", required=True, metavar="A",
                   help="the (-1)-curve to contract")
    p.add_argument("file", help="graph JSON file")
    p.set_defaults(func=_cmd_swap)

    p = sub.add_parser("enumerate", help="sweep the family tables")
    p.add_argument("--height", choices=["1", "2", "all"], default="all")
    p.add_argument("--char", type=int, default=0, choices=[0, 2, 3, 5])
    p.add_argument("--max-components", type=int, default=10, metavar="N")
    p.add_argument("--max-weight", type=int, default=8, metavar="W")
    p.add_argument("--canonical-only", action="store_true",
                   help="deduplicate to canonical types")
    p.add_argument("--json", action="store_true", help="emit JSON lines")
    p.set_defaults(func=_cmd_enumerate)

    p = sub.add_parser("classify", help="match a type against the tables")
    p.add_argument("-t", "--type", required=True, metavar="TYPE")
    p.add_argument("--char", type=int, default=0, choices=[0, 2, 3, 5])
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("deb", help="descendant with elliptic boundary")
    p.add_argument("--base", required=True, metavar="TYPE")
    p.add_argument("--boundary", choices=["nodal", "cuspidal"], default="nodal")
    p.add_argument("--item", required=True, metavar="I",
                   help="tie item id (i, ii, ..., x)")
    p.add_argument("--params", nargs="*", metavar="NAME=VALUE")
    p.add_argument("--char", type=int, default=0, choices=[0, 2, 3, 5])
    p.set_defaults(func=_cmd_deb)

    p = sub.add_parser("verify-tables", help="re-verify tabulated families")
    p.add_argument("--table", type=int, choices=[1, 3, 4, 5, 7])
    p.add_argument("--max-components", type=int, default=10, metavar="N")
    p.add_argument("--max-weight", type=int, default=8, metavar="W")
    p.set_defaults(func=_cmd_verify_tables)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NotationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GuardViolation, KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
