"""Load-buffer (dual) semantics and its bounded forward explorer.

Messages are (var, val, own) triples; position 0 is the newest entry,
the last position the oldest.  A write hits memory immediately and
appends an own-message; propagation speculatively appends the current
memory value of a variable; delete drops the oldest message.  The
explorer is a literal one-step oracle over these rules, with no lossy
quotient.
"""
from __future__ import annotations

from collections import deque
from typing import NamedTuple

from .model import ConcurrentProgram, Transition
from .ordering import Word
from .runs import Delete, Propagate, ResourceLimitError, Run, Step


class DtsoConfig(NamedTuple):
    states: tuple[str, ...]
    buffers: tuple[Word, ...]
    mem: tuple[int, ...]


def initial_dtso_config(program: ConcurrentProgram) -> DtsoConfig:
    return DtsoConfig(
        tuple(a.init for a in program.processes),
        tuple(() for _ in program.processes),
        tuple(0 for _ in program.vars),
    )


def _set(tup: tuple, i: int, v) -> tuple:
    return tup[:i] + (v,) + tup[i + 1 :]


def dtso_successors(c: DtsoConfig, program: ConcurrentProgram) -> list[tuple[object, DtsoConfig]]:
    """All one-step successors: per process, its program transitions,
    then one propagate per variable, then delete."""
    out: list[tuple[object, DtsoConfig]] = []
    for p, auto in enumerate(program.processes):
        buf = c.buffers[p]
        for t in auto.transitions:
            if t.src != c.states[p]:
                continue
            succ = _fire(c, program, p, t)
            if succ is not None:
                out.append((Step(p, t), succ))
        for x in program.vars:
            v = c.mem[program.var_index[x]]
            out.append(
                (Propagate(p, x), DtsoConfig(c.states, _set(c.buffers, p, ((x, v, False),) + buf), c.mem))
            )
        if buf:
            out.append((Delete(p), DtsoConfig(c.states, _set(c.buffers, p, buf[:-1]), c.mem)))
    return out


def _fire(c: DtsoConfig, program: ConcurrentProgram, p: int, t: Transition) -> DtsoConfig | None:
    op = t.op
    states = _set(c.states, p, t.dst)
    buf = c.buffers[p]
    if op.kind == "nop":
        return DtsoConfig(states, c.buffers, c.mem)
    if op.kind == "w":
        xi = program.var_index[op.var]
        newbuf = ((op.var, op.val, True),) + buf
        return DtsoConfig(states, _set(c.buffers, p, newbuf), _set(c.mem, xi, op.val))
    if op.kind == "r":
        own = [m for m in buf if m[0] == op.var and m[2]]
        if own:
            # read-own-write: the most recent own-message decides the value
            return DtsoConfig(states, c.buffers, c.mem) if own[0][1] == op.val else None
        if buf and buf[-1] == (op.var, op.val, False):
            return DtsoConfig(states, c.buffers, c.mem)
        return None
    if op.kind == "fence":
        return DtsoConfig(states, c.buffers, c.mem) if not buf else None
    if op.kind == "arw":
        xi = program.var_index[op.var]
        if not buf and c.mem[xi] == op.val:
            return DtsoConfig(states, c.buffers, _set(c.mem, xi, op.wval))
        return None
    raise ValueError(f"bad op kind {op.kind!r}")


class BoundedResult(NamedTuple):
    reachable: bool
    run: Run | None
    bound_exceeded: bool
    explored: int


class _Search(NamedTuple):
    parents: dict
    pruned: bool
    hit: DtsoConfig | None


def _bfs(program: ConcurrentProgram, bound: int, max_nodes: int | None, stop=None) -> _Search:
    """Breadth-first search; writes and propagates that would overflow
    the bound are pruned and flagged."""
    init = initial_dtso_config(program)
    parents: dict[DtsoConfig, tuple[DtsoConfig | None, object]] = {init: (None, None)}
    if stop is not None and stop(init):
        return _Search(parents, False, init)
    queue = deque([init])
    pruned = False
    while queue:
        c = queue.popleft()
        for action, succ in dtso_successors(c, program):
            grows = isinstance(action, Propagate) or (isinstance(action, Step) and action.t.op.kind == "w")
            if grows and len(succ.buffers[action.proc]) > bound:
                pruned = True
                continue
            if succ in parents:
                continue
            if max_nodes is not None and len(parents) >= max_nodes:
                raise ResourceLimitError(f"bounded search exceeded {max_nodes} configurations")
            parents[succ] = (c, action)
            if stop is not None and stop(succ):
                return _Search(parents, pruned, succ)
            queue.append(succ)
    return _Search(parents, pruned, None)


def _rebuild_run(parents: dict, last: DtsoConfig) -> Run:
    configs = [last]
    actions: list = []
    c = last
    while True:
        parent, action = parents[c]
        if parent is None:
            break
        actions.insert(0, action)
        configs.insert(0, parent)
        c = parent
    return Run("dtso", configs, actions)


def _at_target(target: tuple[str, ...]):
    target = tuple(target)

    def stop(c: DtsoConfig) -> bool:
        return c.states == target and all(not b for b in c.buffers)

    return stop


def dtso_bounded_reach(
    program: ConcurrentProgram,
    bound: int,
    target: tuple[str, ...],
    max_nodes: int | None = None,
) -> BoundedResult:
    """Bounded search for the target global state with empty buffers."""
    search = _bfs(program, bound, max_nodes, stop=_at_target(target))
    if search.hit is None:
        return BoundedResult(False, None, search.pruned, len(search.parents))
    return BoundedResult(True, _rebuild_run(search.parents, search.hit), search.pruned, len(search.parents))


def dtso_reachable_empty_buffer_states(
    program: ConcurrentProgram, bound: int, max_nodes: int | None = None
) -> frozenset[tuple[str, ...]]:
    """Global states reachable with all buffers empty, within the bound."""
    search = _bfs(program, bound, max_nodes)
    return frozenset(c.states for c in search.parents if all(not b for b in c.buffers))
