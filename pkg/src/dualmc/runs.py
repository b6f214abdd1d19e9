"""Run objects shared by the explorers, engines, and translators.

A run is a sequence of configurations joined by actions under one of
the two semantics.  Actions name the acting process by index; program
transitions are carried verbatim so a run can be replayed step by step
against the rule set that produced it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .model import ConcurrentProgram, Op, ParseError, Transition


class ResourceLimitError(Exception):
    """An explicit node or iteration cap was exceeded."""


class Step(NamedTuple):
    """A program transition performed by one process."""

    proc: int
    t: Transition


class Update(NamedTuple):
    """Store-buffer update: the oldest pending write hits memory."""

    proc: int


class Propagate(NamedTuple):
    """Load-buffer propagation of the current memory value of var."""

    proc: int
    var: str


class Delete(NamedTuple):
    """Drop the oldest load-buffer message."""

    proc: int


Action = Step | Update | Propagate | Delete


class RunError(Exception):
    pass


@dataclass
class Run:
    semantics: str  # "tso" | "dtso"
    configs: list
    actions: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.semantics not in ("tso", "dtso"):
            raise ValueError(f"bad semantics tag {self.semantics!r}")
        if len(self.configs) != len(self.actions) + 1:
            raise ValueError("a run has one more configuration than actions")

    @property
    def final(self):
        return self.configs[-1]

    def __len__(self) -> int:
        return len(self.actions)


def replay(run: Run, program: ConcurrentProgram, successors: Callable) -> None:
    """Check every step of the run against the one-step relation."""
    for i, action in enumerate(run.actions):
        found = None
        for a, succ in successors(run.configs[i], program):
            if a == action:
                found = succ
                break
        if found is None:
            raise RunError(f"step {i + 1}: action {action_str(action, program)} not enabled")
        if found != run.configs[i + 1]:
            raise RunError(f"step {i + 1}: configuration mismatch after {action_str(action, program)}")


def action_str(action: Action, program: ConcurrentProgram) -> str:
    name = program.processes[action.proc].name
    if isinstance(action, Step):
        return f"{name} {action.t.op} {action.t.dst}"
    if isinstance(action, Update):
        return f"{name} update"
    if isinstance(action, Propagate):
        return f"{name} propagate {action.var}"
    if isinstance(action, Delete):
        return f"{name} delete"
    raise TypeError(action)


def parse_action(line: str, program: ConcurrentProgram, state_of: Callable[[int], str]) -> Action:
    """Parse one action line; transitions are resolved against the
    acting process's current local state."""
    toks = line.split()
    if len(toks) < 2:
        raise ParseError(f"bad action line {line!r}")
    try:
        p = program.process_index(toks[0])
    except KeyError:
        raise ParseError(f"unknown process {toks[0]!r}") from None
    kind = toks[1]
    if kind == "update":
        return Update(p)
    if kind == "delete":
        return Delete(p)
    if kind == "propagate":
        if len(toks) != 3:
            raise ParseError(f"bad propagate line {line!r}")
        return Propagate(p, toks[2])
    dst = toks[-1]
    op_toks = toks[1:-1]
    if kind in ("nop", "fence"):
        if len(op_toks) != 1:
            raise ParseError(f"bad action line {line!r}")
        op = Op(kind)
    elif kind in ("r", "w"):
        if len(op_toks) != 3:
            raise ParseError(f"bad action line {line!r}")
        op = Op(kind, op_toks[1], int(op_toks[2]))
    elif kind == "arw":
        if len(op_toks) != 4:
            raise ParseError(f"bad action line {line!r}")
        op = Op(kind, op_toks[1], int(op_toks[2]), int(op_toks[3]))
    else:
        raise ParseError(f"unknown action {kind!r}")
    t = Transition(state_of(p), op, dst)
    if t not in program.processes[p].transitions:
        raise ParseError(f"no such transition: {line!r} from state {t.src!r}")
    return Step(p, t)


def format_run(run: Run, program: ConcurrentProgram, program_label: str) -> str:
    lines = [f"program {program_label}", f"semantics {run.semantics}"]
    lines.extend(action_str(a, program) for a in run.actions)
    return "\n".join(lines) + "\n"


def parse_run_text(text: str) -> tuple[str, str, list[str]]:
    """Split a run file into (program label, semantics, action lines)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 2 or not lines[0].startswith("program ") or not lines[1].startswith("semantics "):
        raise ParseError("run file must start with 'program <file>' and 'semantics tso|dtso'")
    label = lines[0].split(None, 1)[1]
    semantics = lines[1].split(None, 1)[1]
    if semantics not in ("tso", "dtso"):
        raise ParseError(f"bad semantics {semantics!r}")
    return label, semantics, lines[2:]
