"""Exact reachability for fixed-size programs by backward coverability.

The engine walks the predecessor relation of the load-buffer semantics
over upward-closed sets, each represented by its finite antichain of
minimal configurations.  One backward step computes, for a minimal
configuration, the minimal predecessors under every rule; the target is
the set of empty-buffer configurations at the target global state over
all memory valuations.  The search is reachable as soon as a generated
minimal configuration covers the initial configuration, and unreachable
when the antichain reaches a fixpoint.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from .dtso import DtsoConfig, dtso_successors, initial_dtso_config
from .model import ConcurrentProgram
from .ordering import MinorSet, Word, config_leq
from .runs import Delete, Propagate, ResourceLimitError, Run, RunError, Step


@dataclass
class BackwardStats:
    verdict: str  # "Reachable" | "Unreachable"
    witness: tuple | None
    configs_generated: int
    iterations: int
    frontier_peak: int
    minors: int
    chain: tuple | None = None  # minimal configs along the witness, oldest first


def _set(tup: tuple, i: int, v) -> tuple:
    return tup[:i] + (v,) + tup[i + 1 :]


def _config_key(c: DtsoConfig):
    return (c.states, c.mem)


def target_to_minors(
    program: ConcurrentProgram, targets: tuple[str, ...] | list[tuple[str, ...]]
) -> MinorSet:
    """Empty-buffer configurations at the target state(s), one per
    memory valuation; pairwise incomparable by construction."""
    if targets and isinstance(targets[0], str):
        targets = [tuple(targets)]  # type: ignore[list-item]
    minors = MinorSet(config_leq, key=_config_key)
    buffers = tuple(() for _ in program.processes)
    for states in targets:
        for mem in itertools.product(program.values, repeat=len(program.vars)):
            minors.insert(DtsoConfig(tuple(states), buffers, mem))
    return minors


def covers_initial(c: DtsoConfig, program: ConcurrentProgram) -> bool:
    return config_leq(c, initial_dtso_config(program))


def _splits_without_own(w: Word, var: str):
    """Prefix/suffix splits of w whose prefix has no own-message on var."""
    for i in range(len(w) + 1):
        yield w[:i], w[i:]
        if i < len(w) and w[i][2] and w[i][0] == var:
            return


def predecessor_candidates(c: DtsoConfig, program: ConcurrentProgram):
    """Minimal one-rule predecessors of the upward closure of c, each
    paired with the action leading from it back into that closure.

    Memory-changing rules (write, atomic read-write) rewind the written
    variable over every prior value; a write additionally re-exposes a
    possibly hidden own-message on its variable; a delete predecessor
    re-appends an own-message on any variable that has none.
    """
    values = program.values
    out: list[tuple[object, DtsoConfig]] = []
    for p, auto in enumerate(program.processes):
        buf = c.buffers[p]
        for t in auto.transitions:
            if t.dst != c.states[p]:
                continue
            op = t.op
            states = _set(c.states, p, t.src)
            if op.kind == "nop":
                out.append((Step(p, t), DtsoConfig(states, c.buffers, c.mem)))
            elif op.kind == "w":
                xi = program.var_index[op.var]
                if c.mem[xi] != op.val or not buf or buf[0] != (op.var, op.val, True):
                    continue
                w = buf[1:]
                rest_variants = [w]
                for w1, w2 in _splits_without_own(w, op.var):
                    for v2 in values:
                        rest_variants.append(w1 + ((op.var, v2, True),) + w2)
                for prior in values:
                    mem = _set(c.mem, xi, prior)
                    for rest in rest_variants:
                        out.append((Step(p, t), DtsoConfig(states, _set(c.buffers, p, rest), mem)))
            elif op.kind == "r":
                own = [m for m in buf if m[0] == op.var and m[2]]
                if own:
                    if own[0][1] == op.val:
                        out.append((Step(p, t), DtsoConfig(states, c.buffers, c.mem)))
                elif buf and buf[-1] == (op.var, op.val, False):
                    out.append((Step(p, t), DtsoConfig(states, c.buffers, c.mem)))
                else:
                    grown = buf + ((op.var, op.val, False),)
                    out.append((Step(p, t), DtsoConfig(states, _set(c.buffers, p, grown), c.mem)))
            elif op.kind == "fence":
                if not buf:
                    out.append((Step(p, t), DtsoConfig(states, c.buffers, c.mem)))
            elif op.kind == "arw":
                xi = program.var_index[op.var]
                if not buf and c.mem[xi] == op.wval:
                    out.append((Step(p, t), DtsoConfig(states, c.buffers, _set(c.mem, xi, op.val))))
        for x in program.vars:
            v = c.mem[program.var_index[x]]
            if buf and buf[0] == (x, v, False):
                out.append((Propagate(p, x), DtsoConfig(c.states, _set(c.buffers, p, buf[1:]), c.mem)))
        owned = {m[0] for m in buf if m[2]}
        for x in program.vars:
            if x in owned:
                continue
            for v in values:
                grown = buf + ((x, v, True),)
                out.append((Delete(p), DtsoConfig(c.states, _set(c.buffers, p, grown), c.mem)))
    return out


def minpre_config(c: DtsoConfig, program: ConcurrentProgram) -> MinorSet:
    """Minimal elements of predecessors-plus-self of the closure of c."""
    minors = MinorSet(config_leq, key=_config_key)
    minors.insert(c)
    for _action, pred in predecessor_candidates(c, program):
        minors.insert(pred)
    return minors


def writable_values(automata, variables) -> dict[str, set[int]]:
    """Values memory can ever hold per variable: 0 plus stored values."""
    writable: dict[str, set[int]] = {x: {0} for x in variables}
    for auto in automata:
        for t in auto.transitions:
            if t.op.kind == "w":
                writable[t.op.var].add(t.op.val)
            elif t.op.kind == "arw":
                writable[t.op.var].add(t.op.wval)
    return writable


def removable_own(auto) -> dict[str, set[tuple[str, int]]]:
    """Per local state, the own-messages a backward path can consume.

    Backwards, an own-message leaves the buffer only through the write
    that produced it, fired while the process rewinds through that
    write's destination; so from state s only writes whose destination
    can forward-reach s qualify.
    """
    states = sorted(auto.states)
    ancestors: dict[str, set[str]] = {s: {s} for s in states}
    changed = True
    while changed:
        changed = False
        for t in auto.transitions:
            add = ancestors[t.dst] | {t.src} | ancestors[t.src]
            if not add <= ancestors[t.dst]:
                ancestors[t.dst] |= add
                changed = True
    # invert: own (x, v) is removable at s iff some w(x, v) ends inside
    # the set of states that reach s
    out: dict[str, set[tuple[str, int]]] = {s: set() for s in states}
    for t in auto.transitions:
        if t.op.kind != "w":
            continue
        for s in states:
            if t.dst == s or t.dst in ancestors[s]:
                out[s].add((t.op.var, t.op.val))
    return out


def live_filter(program: ConcurrentProgram):
    """Predicate for configurations that can still cover the initial one.

    Memory values and buffer messages must be producible: memory only
    ever holds 0 or a value some write or atomic read-write stores to
    that variable, and an own-message must be consumable per
    removable_own.  A configuration violating this is dead weight in
    the fixpoint: no backward path from it reaches all-zero memory and
    empty buffers.
    """
    writable = writable_values(program.processes, program.vars)
    own_ok = [removable_own(auto) for auto in program.processes]

    def live(c: DtsoConfig) -> bool:
        for x, xi in program.var_index.items():
            if c.mem[xi] not in writable[x]:
                return False
        for p, buf in enumerate(c.buffers):
            allowed = own_ok[p][c.states[p]]
            for x, v, own in buf:
                if own:
                    if (x, v) not in allowed:
                        return False
                elif v not in writable[x]:
                    return False
        return True

    return live


def backward_reach(
    program: ConcurrentProgram,
    target: tuple[str, ...] | list[tuple[str, ...]],
    max_nodes: int | None = 10**7,
) -> BackwardStats:
    """Backward fixpoint from the target minors, with early exit on the
    first configuration covering initial.

    The worklist is a priority queue on total buffered-message count
    with generation index as the tie break, so smaller configurations
    (closer to the empty-buffer initial configuration) expand first;
    dead candidates per live_filter are dropped.  Both choices leave
    the verdict unchanged and are deterministic.
    """
    live = live_filter(program)
    minors = target_to_minors(program, target)
    meta: dict[DtsoConfig, tuple[DtsoConfig | None, object]] = {}
    generated = len(minors)
    iterations = 0
    peak = 0

    def reachable(cover: DtsoConfig) -> BackwardStats:
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

    work: list[tuple[int, int, DtsoConfig]] = []
    for seq, tc in enumerate(minors.elements()):
        meta[tc] = (None, None)
        if covers_initial(tc, program):
            return reachable(tc)
        if live(tc):
            work.append((0, seq, tc))
    heapq.heapify(work)
    peak = len(work)
    seq = len(work)

    while work:
        _, _, c = heapq.heappop(work)
        if c not in minors:
            continue  # subsumed after being queued
        iterations += 1
        for action, pred in predecessor_candidates(c, program):
            generated += 1
            if max_nodes is not None and generated > max_nodes:
                raise ResourceLimitError(f"backward search exceeded {max_nodes} configurations")
            if not live(pred) or not minors.insert(pred).inserted:
                continue
            meta[pred] = (c, action)
            if covers_initial(pred, program):
                return reachable(pred)
            seq += 1
            heapq.heappush(work, (sum(len(b) for b in pred.buffers), seq, pred))
            peak = max(peak, len(work))
    return BackwardStats("Unreachable", None, generated, iterations, peak, len(minors))


def concretize_witness(program: ConcurrentProgram, stats: BackwardStats) -> Run:
    """Replay an abstract witness chain into a concrete run.

    Each chain step fires its recorded action after as few deletes by
    the acting process as make the result cover the next minimal
    configuration; monotonicity guarantees such a prefix exists.  The
    run ends with all buffers drained at the target global state.
    """
    if stats.verdict != "Reachable" or stats.chain is None:
        raise ValueError("no witness to concretize")
    chain = stats.chain
    actions = stats.witness or ()
    configs = [initial_dtso_config(program)]
    emitted: list = []
    for i, action in enumerate(actions):
        nxt = chain[i + 1]
        cur = configs[-1]
        done = False
        for deletes in range(len(cur.buffers[action.proc]) + 1):
            probe = cur
            trail = []
            ok = True
            for _ in range(deletes):
                step = _pick(probe, program, Delete(action.proc))
                if step is None:
                    ok = False
                    break
                trail.append((Delete(action.proc), step))
                probe = step
            if not ok:
                break
            landed = _pick(probe, program, action)
            if landed is not None and config_leq(nxt, landed):
                for a, conf in trail:
                    emitted.append(a)
                    configs.append(conf)
                emitted.append(action)
                configs.append(landed)
                done = True
                break
        if done:
            continue
        raise RunError(f"witness step {i + 1} cannot be replayed concretely")
    # drain every buffer; the final configuration matches the target minor
    for p in range(program.n):
        while configs[-1].buffers[p]:
            step = _pick(configs[-1], program, Delete(p))
            emitted.append(Delete(p))
            configs.append(step)
    if configs[-1] != chain[-1]:
        raise RunError("drained final configuration does not match the target minor")
    return Run("dtso", configs, emitted)


def _pick(c: DtsoConfig, program: ConcurrentProgram, action) -> DtsoConfig | None:
    for a, succ in dtso_successors(c, program):
        if a == action:
            return succ
    return None
