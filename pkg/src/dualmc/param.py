"""Backward reachability for systems of unboundedly many identical processes.

A parameterized configuration is an ordered sequence of (local state,
load buffer) pairs plus a memory valuation; the ordering embeds a
smaller configuration into a larger one by an order-preserving
injection.  One backward step computes the minimal same-size
predecessors of every rule exactly as in the fixed-size engine, and
additionally predecessors that introduce one fresh process: a writer
whose buffer is any sequence of own-messages over pairwise-distinct
variables (every subset, value choice, order, and insertion position),
or an empty-buffer process performing an atomic read-write.

Fresh-process predecessors are enumerated for every write and atomic
read-write with a matching memory value, not only when no existing
process matches the rule pattern; the narrower variant misses minimal
predecessors (the one-step oracle tests in the suite exhibit them).
"""
from __future__ import annotations

import heapq
import itertools
from typing import NamedTuple

from .backward import BackwardStats, removable_own, writable_values
from .model import ParamProgram
from .ordering import MinorSet, Word, param_leq
from .runs import Delete, Propagate, ResourceLimitError, Step


class ParamConfig(NamedTuple):
    procs: tuple[tuple[str, Word], ...]
    mem: tuple[int, ...]


def _set(tup: tuple, i: int, v) -> tuple:
    return tup[:i] + (v,) + tup[i + 1 :]


def param_target_to_minors(program: ParamProgram, targets: tuple[str, ...] | None = None) -> MinorSet:
    """One empty-buffer configuration per memory valuation, with exactly
    the listed target states in the listed order."""
    if targets is None:
        targets = program.target
    minors = MinorSet(param_leq, key=lambda a: a.mem)
    procs = tuple((s, ()) for s in targets)
    for mem in itertools.product(program.values, repeat=len(program.vars)):
        minors.insert(ParamConfig(procs, mem))
    return minors


def param_covers_initial(alpha: ParamConfig, program: ParamProgram) -> bool:
    """True iff alpha embeds into the initial configuration of every
    large-enough instance: all processes initial with empty buffers,
    all-zero memory.  The zero-process configuration qualifies."""
    if any(v != 0 for v in alpha.mem):
        return False
    init = program.template.init
    return all(s == init and not b for s, b in alpha.procs)


def _splits_without_own(w: Word, var: str):
    for i in range(len(w) + 1):
        yield w[:i], w[i:]
        if i < len(w) and w[i][2] and w[i][0] == var:
            return


def _fresh_writer_buffers(program: ParamProgram, own_values=None):
    """Own-message words over pairwise-distinct variables."""
    for k in range(len(program.vars) + 1):
        for xs in itertools.permutations(program.vars, k):
            pools = [own_values[x] if own_values else program.values for x in xs]
            for vs in itertools.product(*pools):
                yield tuple((x, v, True) for x, v in zip(xs, vs))


def predecessor_candidates(
    alpha: ParamConfig,
    program: ParamProgram,
    all_positions: bool = True,
    own_values=None,
):
    """Minimal one-rule predecessors of the upward closure of alpha.

    Actions name processes by their position in the predecessor, which
    for fresh-process cases is the inserted position.  The backward
    engine, which canonicalizes minors by sorting, passes
    all_positions=False (one insertion position per fresh process
    represents its whole permutation orbit) and restricts fresh
    own-messages, per source state, to the consumable values of
    removable_own.
    """
    values = program.values
    procs = alpha.procs
    out: list[tuple[object, ParamConfig]] = []

    for t in program.template.transitions:
        op = t.op
        for p, (state, buf) in enumerate(procs):
            if state != t.dst:
                continue
            rew = _set(procs, p, (t.src, buf))
            if op.kind == "nop":
                out.append((Step(p, t), ParamConfig(rew, alpha.mem)))
            elif op.kind == "w":
                xi = program.var_index[op.var]
                if alpha.mem[xi] != op.val or not buf or buf[0] != (op.var, op.val, True):
                    continue
                w = buf[1:]
                rest_variants = [w]
                for w1, w2 in _splits_without_own(w, op.var):
                    for v2 in values:
                        rest_variants.append(w1 + ((op.var, v2, True),) + w2)
                for prior in values:
                    mem = _set(alpha.mem, xi, prior)
                    for rest in rest_variants:
                        out.append((Step(p, t), ParamConfig(_set(procs, p, (t.src, rest)), mem)))
            elif op.kind == "r":
                own = [m for m in buf if m[0] == op.var and m[2]]
                if own:
                    if own[0][1] == op.val:
                        out.append((Step(p, t), ParamConfig(rew, alpha.mem)))
                elif buf and buf[-1] == (op.var, op.val, False):
                    out.append((Step(p, t), ParamConfig(rew, alpha.mem)))
                else:
                    grown = buf + ((op.var, op.val, False),)
                    out.append((Step(p, t), ParamConfig(_set(procs, p, (t.src, grown)), alpha.mem)))
            elif op.kind == "fence":
                if not buf:
                    out.append((Step(p, t), ParamConfig(rew, alpha.mem)))
            elif op.kind == "arw":
                xi = program.var_index[op.var]
                if not buf and alpha.mem[xi] == op.wval:
                    out.append((Step(p, t), ParamConfig(rew, _set(alpha.mem, xi, op.val))))
        # fresh-process predecessors
        positions = range(len(procs) + 1) if all_positions else (len(procs),)
        if op.kind == "w":
            xi = program.var_index[op.var]
            if alpha.mem[xi] != op.val:
                continue
            pools = own_values[t.src] if own_values is not None else None
            for prior in values:
                mem = _set(alpha.mem, xi, prior)
                for fresh_buf in _fresh_writer_buffers(program, pools):
                    for pos in positions:
                        grown = procs[:pos] + ((t.src, fresh_buf),) + procs[pos:]
                        out.append((Step(pos, t), ParamConfig(grown, mem)))
        elif op.kind == "arw":
            xi = program.var_index[op.var]
            if alpha.mem[xi] != op.wval:
                continue
            mem = _set(alpha.mem, xi, op.val)
            for pos in positions:
                grown = procs[:pos] + ((t.src, ()),) + procs[pos:]
                out.append((Step(pos, t), ParamConfig(grown, mem)))

    for p, (state, buf) in enumerate(procs):
        for x in program.vars:
            v = alpha.mem[program.var_index[x]]
            if buf and buf[0] == (x, v, False):
                out.append((Propagate(p, x), ParamConfig(_set(procs, p, (state, buf[1:])), alpha.mem)))
        owned = {m[0] for m in buf if m[2]}
        for x in program.vars:
            if x in owned:
                continue
            for v in values:
                grown = buf + ((x, v, True),)
                out.append((Delete(p), ParamConfig(_set(procs, p, (state, grown)), alpha.mem)))
    return out


def param_minpre(alpha: ParamConfig, program: ParamProgram) -> MinorSet:
    """Minimal elements of predecessors-plus-self of the closure of alpha."""
    minors = MinorSet(param_leq, key=lambda a: a.mem)
    minors.insert(alpha)
    for _action, pred in predecessor_candidates(alpha, program):
        minors.insert(pred)
    return minors


def _own_values_by_state(program: ParamProgram) -> dict[str, dict[str, set[int]]]:
    by_state: dict[str, dict[str, set[int]]] = {}
    for state, pairs in removable_own(program.template).items():
        vals: dict[str, set[int]] = {x: set() for x in program.vars}
        for x, v in pairs:
            vals[x].add(v)
        by_state[state] = vals
    return by_state


def live_filter(program: ParamProgram):
    """Predicate mirroring the fixed-size engine's liveness cut: memory
    values and buffered messages must be producible, own-messages
    consumable from the process's state, else no backward path covers
    an initial configuration."""
    writable = writable_values([program.template], program.vars)
    own_ok = removable_own(program.template)

    def live(alpha: ParamConfig) -> bool:
        for x, xi in program.var_index.items():
            if alpha.mem[xi] not in writable[x]:
                return False
        for state, buf in alpha.procs:
            allowed = own_ok[state]
            for x, v, own in buf:
                if own:
                    if (x, v) not in allowed:
                        return False
                elif v not in writable[x]:
                    return False
        return True

    return live


def canonical(alpha: ParamConfig) -> ParamConfig:
    """Sort the process sequence into a canonical representative.

    All processes run the same template, so the induced transition
    system is invariant under process permutation and the verdict of
    the backward search is unchanged when every minor is replaced by a
    permutation; keeping one sorted representative per orbit collapses
    the symmetric copies the position-sensitive ordering would retain.
    """
    return ParamConfig(tuple(sorted(alpha.procs)), alpha.mem)


def param_backward_reach(
    program: ParamProgram,
    targets: tuple[str, ...] | None = None,
    max_nodes: int | None = 10**7,
) -> BackwardStats:
    """Backward fixpoint under the parameterized ordering; worklist is
    a priority queue on (process count plus buffered messages), with
    generation index as tie break; dead candidates are dropped and
    minors are kept in canonical process order."""
    live = live_filter(program)
    own_vals = _own_values_by_state(program)
    minors = MinorSet(param_leq, key=lambda a: a.mem)
    for tc in param_target_to_minors(program, targets).elements():
        minors.insert(canonical(tc))
    meta: dict[ParamConfig, tuple[ParamConfig | None, object]] = {}
    generated = len(minors)
    iterations = 0
    peak = 0

    def reachable(cover: ParamConfig) -> BackwardStats:
        chain = [cover]
        actions = []
        cur = cover
        while True:
            parent, action = meta[cur]
            if parent is None:
                break
            actions.append(action)
            chain.append(parent)
            cur = parent
        return BackwardStats(
            "Reachable", tuple(actions), generated, iterations, peak, len(minors), tuple(chain)
        )

    def weight(alpha: ParamConfig) -> int:
        return len(alpha.procs) + sum(len(b) for _s, b in alpha.procs)

    work: list[tuple[int, int, ParamConfig]] = []
    for seq, tc in enumerate(minors.elements()):
        meta[tc] = (None, None)
        if param_covers_initial(tc, program):
            return reachable(tc)
        if live(tc):
            work.append((weight(tc), seq, tc))
    heapq.heapify(work)
    peak = len(work)
    seq = len(work)

    while work:
        _, _, alpha = heapq.heappop(work)
        if alpha not in minors:
            continue
        iterations += 1
        for action, pred in predecessor_candidates(alpha, program, all_positions=False, own_values=own_vals):
            generated += 1
            if max_nodes is not None and generated > max_nodes:
                raise ResourceLimitError(f"backward search exceeded {max_nodes} configurations")
            if not live(pred):
                continue
            pred = canonical(pred)
            if not minors.insert(pred).inserted:
                continue
            meta[pred] = (alpha, action)
            if param_covers_initial(pred, program):
                return reachable(pred)
            seq += 1
            heapq.heappush(work, (weight(pred), seq, pred))
            peak = max(peak, len(work))
    return BackwardStats("Unreachable", None, generated, iterations, peak, len(minors))
