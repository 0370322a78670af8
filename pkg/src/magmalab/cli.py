"""magmalab command line.

Exit status: 0 affirmative answer, 2 negative answer, 1 usage or input
error, 3 resource limit exceeded.  stdout carries the result, stderr
the diagnostics.  ``-`` names stdin/stdout; a FILE argument that does not
exist but names a built-in fixture (e.g. ``RECT_LOOP``) loads the fixture.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fixtures as fx
from .errors import MagmaLabError, ProofError, SearchLimitExceeded
from .models import dual_model, direct_product, dumps_model, loads_model, satisfies_theory
from .proofs import check_script, dumps_scripts, loads_scripts, mirror_script, Registry
from .search import (
    DEFAULT_NODE_LIMIT,
    MAX_SEARCH_SIZE,
    SearchConfig,
    SearchStats,
    enumerate_models,
    find_model,
    find_witness,
    independence_report,
)
from .terms import format_identity, mirror_identity, parse_theory

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_LIMIT = 0, 1, 2, 3
LIMIT_ENV = "MAGMALAB_LIMIT_NODES"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


# ----------------------------------------------------------------- helpers


def read_input(spec: str) -> str:
    if spec == "-":
        return sys.stdin.read()
    path = Path(spec)
    if path.exists():
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read {spec}: {exc}") from None
    if spec in fx.names():
        return fx.emit(spec)
    raise UsageError(f"no such file or fixture: {spec}")


def write_output(spec: str, text: str):
    if spec == "-":
        sys.stdout.write(text)
        return
    try:
        Path(spec).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {spec}: {exc}") from None


def emit_json(obj):
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def load_model(spec):
    return loads_model(read_input(spec))


def load_theory(spec):
    return parse_theory(read_input(spec))


def node_limit() -> int:
    raw = os.environ.get(LIMIT_ENV)
    if raw is None:
        return DEFAULT_NODE_LIMIT
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{LIMIT_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise UsageError(f"{LIMIT_ENV} must be positive")
    return value


def search_config(args) -> SearchConfig:
    return SearchConfig(
        lnh=not args.no_lnh,
        cell_order=args.cell_order,
        node_limit=node_limit(),
        time_limit=args.time_limit,
        workers=args.workers,
    )


def _format_assignment(witness) -> str:
    return " ".join(f"{k}={v}" for k, v in witness.items())


# ---------------------------------------------------------------- commands


def cmd_check(args) -> int:
    model = load_model(args.model)
    theory = load_theory(args.theory)
    if args.axiom is not None:
        if args.axiom not in theory:
            raise UsageError(f"theory has no identity named {args.axiom!r}")
        theory = theory.select([args.axiom])
    verdicts = satisfies_theory(model, theory)
    ok = all(v.holds for v in verdicts)
    if args.pretty:
        for v in verdicts:
            status = "HOLDS" if v.holds else "FAILS"
            extra = f"  {_format_assignment(v.witness)}" if v.witness else ""
            print(f"{v.name:<10} {status}{extra}")
    else:
        emit_json({
            "all_hold": ok,
            "verdicts": [{"name": v.name, "holds": v.holds, "witness": v.witness} for v in verdicts],
        })
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_search(args) -> int:
    if not 1 <= args.size <= MAX_SEARCH_SIZE:
        raise UsageError(f"--size must be between 1 and {MAX_SEARCH_SIZE}")
    if args.limit is not None and not args.all:
        raise UsageError("--limit requires --all")
    if args.limit is not None and args.limit < 1:
        raise UsageError("--limit must be positive")
    theory = load_theory(args.theory)
    cfg = search_config(args)
    stats = SearchStats()
    if args.violate is not None:
        if args.violate not in theory:
            raise UsageError(f"theory has no identity named {args.violate!r}")
        if args.all:
            raise UsageError("--all cannot be combined with --violate")
        found = find_witness(theory.without(args.violate), theory[args.violate], args.size, cfg, stats)
        models = [found] if found is not None else []
    elif args.all:
        models = enumerate_models(theory, args.size, args.limit, cfg, stats)
    else:
        found = find_model(theory, args.size, cfg, stats)
        models = [found] if found is not None else []
    print(f"nodes={stats.nodes} seconds={stats.seconds:.3f} models={len(models)}", file=sys.stderr)
    if args.all:
        text = "[\n" + ",\n".join(dumps_model(m).rstrip() for m in models) + "\n]\n" if models else "[]\n"
        write_output(args.out, text)
    elif models:
        write_output(args.out, dumps_model(models[0]))
    else:
        print("no model: search space exhausted", file=sys.stderr)
    return EXIT_OK if models else EXIT_NEGATIVE


def cmd_independence(args) -> int:
    if args.max_size < 1 or args.max_size > MAX_SEARCH_SIZE:
        raise UsageError(f"--max-size must be between 1 and {MAX_SEARCH_SIZE}")
    theory = load_theory(args.theory)
    report = independence_report(theory, args.max_size, search_config(args))
    if args.witness_dir:
        outdir = Path(args.witness_dir)
        outdir.mkdir(parents=True, exist_ok=True)
        for r in report.results:
            if r.model is not None:
                path = outdir / f"{r.name}.model"
                path.write_text(dumps_model(r.model), encoding="utf-8")
                r.witness_path = str(path)
    if args.pretty:
        print(report.format_text())
    else:
        emit_json(report.to_dict())
    if report.independent:
        return EXIT_OK
    return EXIT_LIMIT if report.hit_limit else EXIT_NEGATIVE


def cmd_verify(args) -> int:
    axioms = load_theory(args.theory)
    scripts = []
    for spec in args.proofs:
        try:
            scripts.extend(loads_scripts(read_input(spec)))
        except ProofError as exc:
            raise UsageError(f"{spec}: {exc}") from None
    reg = Registry(axioms)
    log = []
    failure = None
    for s in scripts:
        try:
            reg.add(check_script(s, reg))
        except ProofError as exc:
            failure = exc
            log.append({"goal": s.name, "status": "rejected", "step": exc.step,
                        "kind": exc.kind, "message": str(exc)})
            break
        log.append({"goal": s.name, "status": "verified", "steps": len(s.steps)})
    if args.pretty:
        for entry in log:
            if entry["status"] == "verified":
                print(f"{entry['goal']:<14} verified ({entry['steps']} steps)")
            else:
                print(f"{entry['goal']:<14} REJECTED: {entry['message']}")
    else:
        emit_json({"verified": failure is None, "scripts": log, "registry": reg.names})
    if failure is not None:
        print(str(failure), file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_product(args) -> int:
    m = direct_product(load_model(args.left), load_model(args.right))
    write_output(args.out, dumps_model(m))
    return EXIT_OK


def cmd_dual(args) -> int:
    write_output(args.out, dumps_model(dual_model(load_model(args.model))))
    return EXIT_OK


def cmd_mirror(args) -> int:
    if bool(args.theory) == bool(args.proofs):
        raise UsageError("give exactly one of --theory or --proofs")
    if args.theory:
        theory = load_theory(args.theory)
        text = "".join(format_identity(mirror_identity(i)) + "\n" for i in theory)
    else:
        scripts = []
        for spec in args.proofs:
            scripts.extend(loads_scripts(read_input(spec)))
        text = dumps_scripts([mirror_script(s) for s in scripts])
    write_output(args.out, text)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.emit is None:
        if args.pretty:
            for name in fx.names():
                print(f"{name:<12} {fx.kind(name)}")
        else:
            emit_json({"fixtures": [{"name": n, "kind": fx.kind(n)} for n in fx.names()]})
        return EXIT_OK
    if args.emit not in fx.names():
        raise UsageError(f"unknown fixture {args.emit!r}")
    write_output(args.out, fx.emit(args.emit))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magmalab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def search_opts(p):
        p.add_argument("--no-lnh", action="store_true", help="disable the least-number heuristic")
        p.add_argument("--cell-order", choices=["row-major", "most-constrained"], default="row-major")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")

    p = sub.add_parser("check", help="check identities on a model")
    p.add_argument("--model", required=True)
    p.add_argument("--theory", required=True)
    p.add_argument("--axiom")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="find models or countermodels")
    p.add_argument("--theory", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--violate", metavar="NAME")
    p.add_argument("--all", action="store_true")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", default="-")
    search_opts(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("independence", help="search a countermodel for every axiom")
    p.add_argument("--theory", required=True)
    p.add_argument("--max-size", type=int, required=True)
    p.add_argument("--witness-dir")
    p.add_argument("--pretty", action="store_true")
    search_opts(p)
    p.set_defaults(func=cmd_independence)

    p = sub.add_parser("verify", help="check proof scripts")
    p.add_argument("--proofs", nargs="+", required=True)
    p.add_argument("--theory", required=True)
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("product", help="direct product of two models")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("dual", help="model with the dual operations")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("mirror", help="mirror a theory or proof scripts")
    p.add_argument("--theory")
    p.add_argument("--proofs", nargs="+")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_mirror)

    p = sub.add_parser("fixtures", help="list or export built-in fixtures")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--list", action="store_true")
    group.add_argument("--emit", metavar="NAME")
    p.add_argument("--out", default="-")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except SearchLimitExceeded as exc:
        print(f"limit exceeded: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (UsageError, MagmaLabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
