"""Command-line front end.

Exit codes are a stable contract: 0 allow/success, 1 deny/disagreement,
2 error. `--json` switches every command to machine-readable output;
`--trace` includes full witness traces in text output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .decision import Decision
from .errors import ArraError, EdgeNotFound, UnknownOperation
from .files import load_instance, save_instance
from .instance import ArraInstance, OP_KINDS
from .report import format_diff, write_diff_report
from .rra97 import Rra97Instance, can_delete_edge, can_insert_edge
from .rules import parse_rule
from .translate import diff_decisions, drop_one_value, translate
from .uarbac import UarbacInstance, can_grant_role_to_role, can_revoke_role_from_role

EXIT_ALLOW = 0
EXIT_DENY = 1
EXIT_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arra",
        description="Attribute-based role-role assignment policy engine",
    )
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--trace", action="store_true", help="print full witness traces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and validate an instance file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("query", help="evaluate one authorization decision")
    p.add_argument("file")
    p.add_argument("op")
    p.add_argument("au")
    p.add_argument("r1")
    p.add_argument("r2")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("query-set", help="evaluate a set-builder decision (arra files)")
    p.add_argument("file")
    p.add_argument("op")
    p.add_argument("au")
    p.add_argument("builder", help="rule-language predicate with one free role variable")
    p.add_argument("r")
    p.set_defaults(func=cmd_query_set)

    p = sub.add_parser("apply", help="apply an operation and write the mutated instance")
    p.add_argument("file")
    p.add_argument("op")
    p.add_argument("au")
    p.add_argument("r1")
    p.add_argument("r2")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("translate", help="compile an rra97/uarbac instance to arra")
    p.add_argument("file")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("diff", help="translate and exhaustively compare decisions")
    p.add_argument("file")
    p.add_argument("--drop-range", action="store_true", help="corrupt the translation first")
    p.add_argument("--report-dir", help="write decisions.tsv and agreement figures here")
    p.set_defaults(func=cmd_diff)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArraError as exc:
        _emit_error(args, exc)
        return EXIT_ERROR


def entry_point() -> None:
    sys.exit(main())


def _emit_error(args, exc: ArraError) -> None:
    if args.json:
        print(json.dumps({"error": exc.diagnostic()}, indent=2))
    else:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)


def _print(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _decision_text(args, decision: Decision) -> str:
    verdict = "allow" if decision.allowed else "deny"
    if not (args.trace and decision.trace):
        return verdict
    lines = [verdict]
    lines.extend(f"  {entry.describe()}" for entry in decision.trace)
    return "\n".join(lines)


# --- commands -----------------------------------------------------------------


def cmd_validate(args) -> int:
    from .errors import LoadError

    try:
        inst = load_instance(args.file)
    except LoadError as exc:
        if args.json:
            print(json.dumps({"valid": False, "diagnostics": exc.diagnostics}, indent=2))
        else:
            for d in exc.diagnostics:
                print(f"{d.get('where', '?')}: [{d.get('code')}] {d.get('message')}", file=sys.stderr)
        return EXIT_ERROR
    model = _model_name(inst)
    _print(args, {"valid": True, "model": model}, f"ok: valid {model} instance")
    return EXIT_ALLOW


def _model_name(inst) -> str:
    if isinstance(inst, Rra97Instance):
        return "rra97"
    if isinstance(inst, UarbacInstance):
        return "uarbac"
    return "arra"


def _decide(inst, op: str, au: str, r1: str, r2: str) -> Decision:
    if isinstance(inst, Rra97Instance):
        if op == "insertEdge":
            return can_insert_edge(inst, au, r1, r2)
        if op == "deleteEdge":
            return can_delete_edge(inst, au, r1, r2)
        raise UnknownOperation(f"rra97 instances support insertEdge and deleteEdge, not {op!r}")
    if isinstance(inst, UarbacInstance):
        if op == "assign":
            return can_grant_role_to_role(inst, au, r1, r2)
        if op == "revoke":
            return can_revoke_role_from_role(inst, au, r1, r2)
        raise UnknownOperation(f"uarbac instances support assign and revoke, not {op!r}")
    return inst.authorize(op, au, r1, r2)


def cmd_query(args) -> int:
    inst = load_instance(args.file)
    decision = _decide(inst, args.op, args.au, args.r1, args.r2)
    payload = {"op": args.op, "au": args.au, "r1": args.r1, "r2": args.r2}
    payload.update(decision.to_dict())
    _print(args, payload, _decision_text(args, decision))
    return EXIT_ALLOW if decision.allowed else EXIT_DENY


def cmd_query_set(args) -> int:
    inst = load_instance(args.file)
    if not isinstance(inst, ArraInstance):
        raise UnknownOperation("query-set needs an arra instance; run translate first")
    predicate = parse_rule(args.builder)
    chi = inst.select_roles(predicate)
    decision = inst.authorize_set(args.op, args.au, predicate, args.r)
    payload = {"op": args.op, "au": args.au, "chi": sorted(chi), "r": args.r}
    payload.update(decision.to_dict())
    text = _decision_text(args, decision)
    _print(args, payload, f"chi = {{{', '.join(sorted(chi))}}}\n{text}")
    return EXIT_ALLOW if decision.allowed else EXIT_DENY


def cmd_apply(args) -> int:
    inst = load_instance(args.file)
    kind = OP_KINDS.get(args.op)
    if isinstance(inst, ArraInstance):
        if args.op not in inst.aop:
            raise UnknownOperation(f"no rule for operation {args.op!r}")
        if kind is None:
            raise UnknownOperation(f"operation {args.op!r} is query-only; apply cannot run it")
    if kind == "remove" and not inst.roles.has_edge(args.r1, args.r2):
        raise EdgeNotFound(f"({args.r1}, {args.r2}) is not a direct edge")
    decision = _decide(inst, args.op, args.au, args.r1, args.r2)
    if not decision.allowed:
        _print(args, {"allowed": False, **decision.to_dict()}, _decision_text(args, decision))
        return EXIT_DENY
    if kind == "add":
        new_roles = inst.roles.insert_edge(args.r1, args.r2)
    else:
        new_roles = inst.roles.delete_edge(args.r1, args.r2)
    mutated = (
        inst.with_roles(new_roles)
        if isinstance(inst, ArraInstance)
        else replace(inst, roles=new_roles)
    )
    problems = mutated.validate()
    if problems:
        from .errors import LoadError

        raise LoadError(
            problems
            + [{"where": "apply", "code": "schema", "message": "mutation yields an invalid instance; nothing written"}]
        )
    save_instance(mutated, args.out)
    _print(
        args,
        {"allowed": True, "written": str(args.out), **decision.to_dict()},
        f"allow\nwrote {args.out}",
    )
    return EXIT_ALLOW


def cmd_translate(args) -> int:
    inst = load_instance(args.file)
    if isinstance(inst, ArraInstance):
        raise UnknownOperation("instance is already an arra model")
    out = translate(inst)
    save_instance(out, args.out)
    _print(
        args,
        {"written": str(args.out), "operations": list(out.aop)},
        f"wrote {args.out} ({', '.join(out.aop)})",
    )
    return EXIT_ALLOW


def cmd_diff(args) -> int:
    inst = load_instance(args.file)
    if isinstance(inst, ArraInstance):
        raise UnknownOperation("diff needs an rra97 or uarbac instance")
    translated = translate(inst)
    if args.drop_range:
        translated = drop_one_value(translated)
    report = diff_decisions(inst, translated)
    payload = {
        "total": report.total,
        "compared": report.compared,
        "skipped": report.skipped,
        "ok": report.ok,
        "disagreements": [d.to_dict() for d in report.disagreements],
    }
    files: list[str] = []
    if args.report_dir:
        files = [str(p) for p in write_diff_report(report, args.report_dir)]
        payload["report_files"] = files
    text = format_diff(report, trace=args.trace)
    if files:
        text += "\n" + "\n".join(f"wrote {f}" for f in files)
    _print(args, payload, text)
    return EXIT_ALLOW if report.ok else EXIT_DENY


if __name__ == "__main__":
    entry_point()
