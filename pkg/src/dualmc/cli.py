"""Command-line entry point.

Exit codes: 0 the target is unreachable/safe, 1 reachable/unsafe,
2 usage or input error, 3 resource limit exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import backward, dtso, param, runs, translate, tso
from .model import ConcurrentProgram, ParamProgram, ParseError, parse_program

DEFAULT_MAX_NODES = 10**7


@dataclass
class Report:
    verdict: str  # reachable | unreachable | safe-within-bound | bound-exceeded
    mode: str
    configs_generated: int
    iterations: int
    time_ms: int
    witness: list[str] | None = None


def emit_report(report: Report, fmt: str = "text") -> str:
    if fmt == "json":
        payload = {
            "verdict": report.verdict,
            "mode": report.mode,
            "configs_generated": report.configs_generated,
            "iterations": report.iterations,
            "time_ms": report.time_ms,
        }
        if report.witness is not None:
            payload["witness"] = report.witness
        return json.dumps(payload)
    line = (
        f"mode={report.mode} verdict={report.verdict} "
        f"configs_generated={report.configs_generated} "
        f"iterations={report.iterations} time_ms={report.time_ms}"
    )
    if report.witness is not None:
        line += "\nwitness=" + ";".join(report.witness)
    return line


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualmc", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in ("check", "param", "explore-tso", "explore-dtso", "translate"):
        sp = sub.add_parser(mode)
        sp.add_argument("file")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
        sp.add_argument("--witness", action="store_true")
        if mode.startswith("explore"):
            sp.add_argument("--buffer-bound", type=int, required=True)
        if mode == "translate":
            sp.add_argument("--from", dest="source", choices=("tso", "dtso"), required=True)
    return parser


def _load_program(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_program(text)


def _witness_strings(actions, program) -> list[str]:
    return [runs.action_str(a, program) for a in actions]


def _param_witness_strings(actions, program: ParamProgram) -> list[str]:
    out = []
    for a in actions:
        if isinstance(a, runs.Step):
            out.append(f"#{a.proc + 1} {a.t.op} {a.t.dst}")
        elif isinstance(a, runs.Propagate):
            out.append(f"#{a.proc + 1} propagate {a.var}")
        else:
            out.append(f"#{a.proc + 1} delete")
    return out


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return _dispatch(args)
    except ParseError as exc:
        print(f"dualmc: {exc}", file=sys.stderr)
        return 2
    except runs.ResourceLimitError as exc:
        print(f"dualmc: {exc}", file=sys.stderr)
        return 3
    except runs.RunError as exc:
        print(f"dualmc: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    started = time.monotonic()

    def elapsed_ms() -> int:
        return int((time.monotonic() - started) * 1000)

    if args.mode == "translate":
        return _translate(args)

    program = _load_program(args.file)
    if args.mode == "param":
        if not isinstance(program, ParamProgram):
            raise ParseError("param mode needs a ptarget program")
        stats = param.param_backward_reach(program, max_nodes=args.max_nodes)
        witness = None
        if args.witness and stats.witness is not None:
            witness = _param_witness_strings(stats.witness, program)
        report = Report(
            "reachable" if stats.verdict == "Reachable" else "unreachable",
            args.mode,
            stats.configs_generated,
            stats.iterations,
            elapsed_ms(),
            witness,
        )
        print(emit_report(report, args.format))
        return 1 if stats.verdict == "Reachable" else 0

    if not isinstance(program, ConcurrentProgram):
        raise ParseError(f"{args.mode} mode needs a fixed-mode (target) program")

    if args.mode == "check":
        stats = backward.backward_reach(program, program.target, max_nodes=args.max_nodes)
        witness = None
        if args.witness and stats.witness is not None:
            witness = _witness_strings(stats.witness, program)
        report = Report(
            "reachable" if stats.verdict == "Reachable" else "unreachable",
            args.mode,
            stats.configs_generated,
            stats.iterations,
            elapsed_ms(),
            witness,
        )
        print(emit_report(report, args.format))
        return 1 if stats.verdict == "Reachable" else 0

    reach = tso.tso_bounded_reach if args.mode == "explore-tso" else dtso.dtso_bounded_reach
    result = reach(program, args.buffer_bound, program.target, max_nodes=args.max_nodes)
    if result.reachable:
        verdict = "reachable"
    elif result.bound_exceeded:
        verdict = "bound-exceeded"
    else:
        verdict = "safe-within-bound"
    witness = None
    if args.witness and result.run is not None:
        witness = _witness_strings(result.run.actions, program)
    report = Report(verdict, args.mode, result.explored, result.explored, elapsed_ms(), witness)
    print(emit_report(report, args.format))
    return 1 if result.reachable else 0


def _translate(args) -> int:
    text = Path(args.file).read_text()
    label, semantics, action_lines = runs.parse_run_text(text)
    if semantics != args.source:
        raise ParseError(f"run file is tagged {semantics}, --from says {args.source}")
    program_path = Path(args.file).parent / label
    program = _load_program(str(program_path))
    if not isinstance(program, ConcurrentProgram):
        raise ParseError("translate mode needs a fixed-mode program")

    successors = tso.tso_successors if semantics == "tso" else dtso.dtso_successors
    initial = tso.initial_tso_config(program) if semantics == "tso" else dtso.initial_dtso_config(program)
    configs = [initial]
    actions = []
    for line in action_lines:
        action = runs.parse_action(line, program, lambda p: configs[-1].states[p])
        succ = next((s for a, s in successors(configs[-1], program) if a == action), None)
        if succ is None:
            raise runs.RunError(f"action not enabled: {line!r}")
        actions.append(action)
        configs.append(succ)
    source_run = runs.Run(semantics, configs, actions)
    if semantics == "tso":
        out = translate.tso_to_dtso(source_run, program)
    else:
        out = translate.dtso_to_tso(source_run, program)
    sys.stdout.write(runs.format_run(out, program, label))
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
