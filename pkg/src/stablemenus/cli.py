"""Command-line entry point: ``stablemenus <command> ...``.

Exit status is 0 on success, 1 for domain failures (for example no stable
menu) and 2 for usage errors. ``--json`` switches every command to a
machine-readable report carrying ``schema_version``.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Optional, Sequence

from . import generators
from .covering import decode_model, emit_smtlib, pref_universe
from .mechanisms import MECHANISMS, MechanismError, scan_strategyproofness
from .model import Problem, ProblemError, StabilityParams, format_menu, load_problem, serialize_problem
from .reductions import complete_embedding, reduce_popular, reduce_rarely_ranked
from .solvers import (
    CycleShapeError,
    GreedyCycle,
    NoStableMenu,
    RecoveryFailure,
    enumerate_stable,
    greedy,
    recover_from_cycle,
    solve,
)
from .stability import check_gap, is_stable

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class DomainError(Exception):
    def __init__(self, reason: str, detail: str):
        super().__init__(detail)
        self.reason = reason


def parse_menu(text: str, g: int) -> frozenset[int]:
    if text.strip().lower() in ("none", ""):
        return frozenset()
    try:
        goods = [int(tok) for tok in text.split(",")]
    except ValueError:
        raise UsageError(f"menu must be comma-separated goods or 'none', got {text!r}") from None
    bad = [j for j in goods if not 1 <= j <= g]
    if bad:
        raise UsageError(f"menu goods {bad} out of range 1..{g}")
    return frozenset(goods)


def _menus(menus) -> list[list[int]]:
    return [sorted(m) for m in menus]


def _params(args) -> StabilityParams:
    try:
        return StabilityParams(args.t, args.u)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path: str) -> Problem:
    try:
        return load_problem(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except ProblemError as exc:
        raise UsageError(f"{path}: {exc}") from None


# -- commands: each returns (report dict, text lines) -----------------------


def cmd_check(args):
    p = _load(args.file)
    menu = parse_menu(args.menu, p.num_goods)
    verdict = is_stable(p, menu, _params(args))
    lines = [f"menu {format_menu(menu)}: {'stable' if verdict.stable else 'not stable'}"]
    lines += [f"  infeasible: good {j} serves {c} < t" for j, c in verdict.feasibility_violations]
    lines += [f"  contested: good {j} has lobby {c} >= u" for j, c in verdict.contests]
    return {"menu": sorted(menu), **verdict.to_dict()}, lines


def cmd_enumerate(args):
    p = _load(args.file)
    menus = enumerate_stable(p, _params(args))
    lines = [f"{len(menus)} stable menu(s)"] + [f"  {format_menu(m)}" for m in menus]
    return {"stable_menus": _menus(menus)}, lines


def cmd_greedy(args):
    p = _load(args.file)
    params = _params(args)
    init = parse_menu(args.init, p.num_goods)
    outcome = greedy(p, params, init)
    if isinstance(outcome, GreedyCycle):
        report: dict[str, Any] = {
            "outcome": "cycle",
            "prefix": [s.to_dict() for s in outcome.prefix],
            "cycle": [s.to_dict() for s in outcome.cycle],
        }
        lines = ["cycle"] + [f"  {s}" for s in outcome.prefix] + ["  -- cycle --"]
        lines += [f"  {s}" for s in outcome.cycle]
        try:
            recovered = recover_from_cycle(p, params, outcome.cycle)
            report["recovered"] = _menus(recovered)
            lines.append("recovered: " + " ".join(format_menu(m) for m in recovered))
        except (CycleShapeError, RecoveryFailure) as exc:
            report["recovered"] = None
            report["recovery_error"] = str(exc)
            lines.append(f"recovery: {exc}")
        return report, lines
    report = {"outcome": "stable", "menu": sorted(outcome.menu), "steps": [s.to_dict() for s in outcome.steps]}
    lines = [f"stable {format_menu(outcome.menu)}"] + [f"  {s}" for s in outcome.steps]
    return report, lines


def cmd_solve(args):
    p = _load(args.file)
    params = _params(args)
    try:
        sol = solve(p, params, args.method)
    except NoStableMenu as exc:
        raise DomainError("NoStableMenu", str(exc)) from None
    if not sol.stable:
        raise DomainError("NotStable", f"{args.method} construction gave unstable {format_menu(sol.menu)}")
    return sol.to_dict(), [f"{sol.method}: {format_menu(sol.menu)} stable"]


def cmd_reduce(args):
    p = _load(args.file)
    if args.kind == "embed":
        if args.u is None:
            raise UsageError("--u is required for --kind embed")
        rmap = complete_embedding(p, args.u)
    elif args.t is None:
        raise UsageError(f"--t is required for --kind {args.kind}")
    elif args.kind == "rare":
        rmap = reduce_rarely_ranked(p, args.t)
    else:
        rmap = reduce_popular(p, args.t)
    lines = [f"kind: {rmap.kind}", f"labels: {list(rmap.labels)}", f"forced: {sorted(rmap.forced)}"]
    if rmap.added is not None:
        lines.append(f"added good: {rmap.added}")
    lines.append(serialize_problem(rmap.reduced).rstrip())
    return rmap.to_dict(), lines


def cmd_generate(args):
    fam = args.family
    try:
        if fam == "g2lower":
            p = generators.gen_g2_lower(args.t, args.u)
        elif fam == "cyclic3":
            p = generators.gen_cyclic3(args.t, args.u, args.g or 3)
        elif fam == "c4cycle":
            p = generators.gen_c4_cycle(args.t)
        elif fam == "table1":
            p = generators.gen_table1(args.x, args.g or 7)
        elif fam == "table1-complete":
            p = generators.gen_table1_complete(args.x, args.g or 7, args.seed)
        elif fam == "appendixB":
            p = generators.gen_appendixB(args.which)
        elif fam == "structured":
            p = generators.gen_structured(args.g, args.t)
        else:
            p = generators.gen_random(args.g, args.n, args.seed, args.complete)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"generate {fam}: {exc}") from None
    text = serialize_problem(p)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return {"family": fam, "output": args.output, "instance": p.to_dict()}, [f"wrote {args.output} (n={p.n})"]
    return {"family": fam, "instance": p.to_dict()}, [text.rstrip()]


def _ratio(text: str) -> tuple[int, int]:
    try:
        a, b = (int(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"ratio must look like a:b, got {text!r}") from None
    return a, b


def cmd_encode_smt(args):
    fixed = tuple(args.fixed) if args.fixed else None
    try:
        text = emit_smtlib(args.g, args.complete, _ratio(args.ratio), fixed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return {"output": args.output, "g": args.g, "complete": args.complete}, [f"wrote {args.output}"]
    return {"g": args.g, "complete": args.complete, "smtlib": text}, [text.rstrip()]


def cmd_decode_model(args):
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.file}: {exc}") from None
    try:
        p, params = decode_model(text, pref_universe(args.g, args.complete))
    except ValueError as exc:
        raise DomainError("BadModel", str(exc)) from None
    menus = enumerate_stable(p, params)
    report = {"t": params.t, "u": params.u, "instance": p.to_dict(), "stable_menus": _menus(menus)}
    lines = [f"t={params.t} u={params.u} n={p.n}", serialize_problem(p).rstrip()]
    lines.append(f"{len(menus)} stable menu(s)")
    return report, lines


def cmd_mechanism(args):
    p = _load(args.file)
    try:
        menu = MECHANISMS[args.mech](p, _params(args))
    except NoStableMenu as exc:
        raise DomainError("NoStableMenu", str(exc)) from None
    except ValueError as exc:
        raise DomainError("MechanismNotApplicable", str(exc)) from None
    return {"mechanism": args.mech, "menu": sorted(menu)}, [f"{args.mech}: {format_menu(menu)}"]


def cmd_manipulate(args):
    params = _params(args)
    try:
        witnesses = scan_strategyproofness(
            MECHANISMS[args.mech], args.g, args.n, params, complete=not args.truncations
        )
    except MechanismError as exc:
        raise DomainError("MechanismFailure", f"{exc} on {exc.problem.to_dict()}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    lines = [f"{len(witnesses)} manipulation(s)"]
    for w in witnesses:
        lines.append(
            f"  {list(w.true_prefs)} reports {list(w.misreport)}: "
            f"{format_menu(w.honest_menu)} -> {format_menu(w.deviant_menu)} "
            f"in {w.problem.to_dict()['agents']}"
        )
    return {"mechanism": args.mech, "witnesses": [w.to_dict() for w in witnesses]}, lines


def cmd_gap(args):
    p = _load(args.file)
    try:
        gap = check_gap(p, _params(args), args.k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return {"k": args.k, "gap": gap}, [f"({args.k},{args.k + 1})-gap: {'yes' if gap else 'no'}"]


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablemenus", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="emit a JSON report")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_tu(sp, required=True):
        sp.add_argument("--t", type=int, required=required)
        sp.add_argument("--u", type=int, required=required)
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        return sp

    sp = with_tu(sub.add_parser("check", help="stability verdict for one menu"))
    sp.add_argument("file")
    sp.add_argument("--menu", required=True, help="comma-separated goods, or 'none'")
    sp.set_defaults(func=cmd_check)

    sp = with_tu(sub.add_parser("enumerate", help="all stable menus"))
    sp.add_argument("file")
    sp.set_defaults(func=cmd_enumerate)

    sp = with_tu(sub.add_parser("greedy", help="greedy add/remove run with transcript"))
    sp.add_argument("file")
    sp.add_argument("--init", default="none")
    sp.set_defaults(func=cmd_greedy)

    sp = with_tu(sub.add_parser("solve", help="find one stable menu"))
    sp.add_argument("file")
    sp.add_argument("--method", choices=["simple", "gminus2", "structured", "auto"], default="auto")
    sp.set_defaults(func=cmd_solve)

    sp = with_tu(sub.add_parser("reduce", help="apply one reduction"), required=False)
    sp.add_argument("file")
    sp.add_argument("--kind", choices=["embed", "rare", "popular"], required=True)
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("generate", help="write a named instance family")
    sp.add_argument("family", choices=generators.FAMILIES)
    sp.add_argument("--t", type=int)
    sp.add_argument("--u", type=int)
    sp.add_argument("--g", type=int)
    sp.add_argument("--x", type=int, default=1)
    sp.add_argument("--n", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--which", choices=["A", "B"], default="A")
    sp.add_argument("--complete", action="store_true")
    sp.add_argument("-o", "--output")
    sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("encode-smt", help="SMT-LIB 2 encoding of the covering condition")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--ratio", default="1:2", help="a:b meaning a*(u-1) >= b*(t-1)")
    sp.add_argument("--complete", action="store_true")
    sp.add_argument("--fixed", type=int, nargs=2, metavar=("T", "U"))
    sp.add_argument("-o", "--output")
    sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_encode_smt)

    sp = sub.add_parser("decode-model", help="problem described by a solver model")
    sp.add_argument("file")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--complete", action="store_true")
    sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_decode_model)

    sp = with_tu(sub.add_parser("mechanism", help="run a mechanism"))
    sp.add_argument("file")
    sp.add_argument("--mech", choices=sorted(MECHANISMS), default="default")
    sp.set_defaults(func=cmd_mechanism)

    sp = with_tu(sub.add_parser("manipulate", help="exhaustive manipulation scan"))
    sp.add_argument("--mech", choices=sorted(MECHANISMS), default="default")
    sp.add_argument("--g", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--truncations", action="store_true", help="scan incomplete lists too")
    sp.set_defaults(func=cmd_manipulate)

    sp = with_tu(sub.add_parser("gap", help="test for a (k,k+1)-gap"))
    sp.add_argument("file")
    sp.add_argument("--k", type=int, required=True)
    sp.set_defaults(func=cmd_gap)
    return parser


def _emit(payload: dict, as_json: bool, lines: Sequence[str]) -> None:
    if as_json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    as_json = getattr(args, "json", False)
    try:
        report, lines = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"stablemenus {args.command}: {exc}\n")
        return 2
    except DomainError as exc:
        _emit({"schema_version": SCHEMA_VERSION, "command": args.command, "ok": False,
               "reason": exc.reason, "detail": str(exc)}, as_json, [f"{exc.reason}: {exc}"])
        return 1
    _emit({"schema_version": SCHEMA_VERSION, "command": args.command, "ok": True, **report}, as_json, lines)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
