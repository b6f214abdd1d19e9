import random

import pytest

from dualmc import (
    ParamConfig,
    backward_reach,
    instantiate,
    param_backward_reach,
    param_covers_initial,
    param_leq,
    param_minpre,
    param_target_to_minors,
    parse_program,
    subword,
)
from dualmc.model import Automaton, Op, ParamProgram, Transition
from dualmc.param import predecessor_candidates

from conftest import (
    corpus_program,
    param_down,
    param_successors,
    random_param_config,
    random_param_program,
)

own = lambda x, v: (x, v, True)


def tiny_template(transitions, variables=("x",), values=(0, 1)) -> ParamProgram:
    auto = Automaton("proc", "q0", tuple(transitions))
    return ParamProgram(tuple(variables), tuple(values), auto, ())


def test_target_minors_shape():
    prog = tiny_template(
        [Transition("q0", Op("nop"), "q2"), Transition("q0", Op("nop"), "q3")]
    )
    minors = param_target_to_minors(prog, ("q2", "q3"))
    assert len(minors) == 2  # |values|^|vars|
    for alpha in minors:
        assert [s for s, _b in alpha.procs] == ["q2", "q3"]
        assert all(b == () for _s, b in alpha.procs)
    elems = minors.elements()
    assert not param_leq(elems[0], elems[1])
    assert not param_leq(elems[1], elems[0])


def test_empty_target_covers_initial_only_with_zero_memory():
    prog = tiny_template([Transition("q0", Op("w", "x", 1), "q1")])
    minors = param_target_to_minors(prog, ())
    zero = ParamConfig((), (0,))
    one = ParamConfig((), (1,))
    assert zero in minors.elements() and one in minors.elements()
    assert param_covers_initial(zero, prog)
    assert not param_covers_initial(one, prog)


def test_covers_initial_cases():
    prog = tiny_template([Transition("q0", Op("w", "x", 1), "q1")])
    two_idle = ParamConfig((("q0", ()), ("q0", ())), (0,))
    assert param_covers_initial(two_idle, prog)
    assert not param_covers_initial(ParamConfig((("q0", (("x", 0, False),)), ("q0", ())), (0,)), prog)
    assert not param_covers_initial(ParamConfig((("q1", ()), ("q0", ())), (0,)), prog)


def test_minpre_write_same_size_when_process_matches():
    # single process just past w(x,1): predecessors rewind the memory and
    # re-expose hidden own-messages, all without adding processes
    prog = tiny_template([Transition("q0", Op("w", "x", 1), "q1")])
    alpha = ParamConfig((("q1", (own("x", 1),)),), (1,))
    preds = param_minpre(alpha, prog).elements()
    for prior in (0, 1):
        assert ParamConfig((("q0", ()),), (prior,)) in preds
        for hidden in (0, 1):
            assert ParamConfig((("q0", (own("x", hidden),)),), (prior,)) in preds
    assert all(len(p.procs) == 1 for p in preds)


def test_minpre_write_insertion_when_no_process_matches():
    prog = tiny_template([Transition("q0", Op("w", "x", 1), "q1")])
    alpha = ParamConfig((("q0", ()),), (1,))  # nobody is past the write
    preds = param_minpre(alpha, prog).elements()
    grown = [p for p in preds if len(p.procs) == 2]
    assert grown, "a fresh writer process must be inserted"
    assert ParamConfig((("q0", ()), ("q0", ())), (0,)) in grown
    fresh_states = {s for p in grown for s, _b in p.procs}
    assert fresh_states == {"q0"}


def test_minpre_nop_mirrors_fixed_size():
    prog = tiny_template([Transition("q0", Op("nop"), "q1")])
    alpha = ParamConfig((("q1", ()),), (0,))
    preds = param_minpre(alpha, prog).elements()
    assert ParamConfig((("q0", ()),), (0,)) in preds
    assert all(len(p.procs) == 1 for p in preds)


def test_param_backward_sb_and_lb():
    assert param_backward_reach(corpus_program("sb-param.lit")).verdict == "Reachable"
    assert param_backward_reach(corpus_program("lb-param.lit")).verdict == "Unreachable"


def test_no_writes_means_nonzero_reads_unreachable():
    prog = tiny_template(
        [Transition("q0", Op("r", "x", 1), "q1")], variables=("x",), values=(0, 1)
    )
    stats = param_backward_reach(prog, ("q1",))
    assert stats.verdict == "Unreachable"


def _pad_param(rng, prog, alpha: ParamConfig) -> ParamConfig:
    procs = []
    for state, buf in alpha.procs:
        buf = list(buf)
        for _ in range(rng.randint(0, 2)):
            pos = rng.randint(0, len(buf))
            buf.insert(pos, (rng.choice(prog.vars), rng.choice(prog.values), False))
        procs.append((state, tuple(buf)))
    return ParamConfig(tuple(procs), alpha.mem)


def param_oracle_mismatches(seed: int, samples: int, sharp: bool) -> int:
    rng = random.Random(seed)
    mismatches = 0
    checked = 0
    while checked < samples:
        prog = random_param_program(rng)
        alpha = random_param_config(rng, prog, rng.randint(0, 2), 2)
        minors = param_minpre(alpha, prog).elements()
        probes = [
            random_param_config(rng, prog, rng.randint(0, len(alpha.procs) + 1), 2),
            _pad_param(rng, prog, rng.choice(minors)),
        ]
        for beta in probes:
            lhs = any(param_leq(m, beta) for m in minors)
            if sharp:
                rhs = param_leq(alpha, beta) or any(
                    param_leq(alpha, b2)
                    for e in param_down(beta)
                    for b2 in param_successors(e, prog)
                )
            else:
                rhs = param_leq(alpha, beta) or any(
                    param_leq(alpha, b2) for b2 in param_successors(beta, prog)
                )
            mismatches += lhs != rhs
            checked += 1
    return mismatches


@pytest.mark.xfail(
    strict=True,
    reason="same strong-monotonicity gap as the fixed-size one-step oracle",
)
def test_param_oracle_as_stated():
    assert param_oracle_mismatches(1, 400, sharp=False) == 0


@pytest.mark.parametrize("seed", range(2))
def test_param_sharp_oracle(seed):
    assert param_oracle_mismatches(seed, 200, sharp=True) == 0


@pytest.mark.parametrize(
    "name,size",
    [("sb-param.lit", 2), ("sb-param.lit", 3), ("lb-param.lit", 2), ("lb-param.lit", 3)],
)
def test_cutoff_consistency(name, size):
    """If a fixed instance reaches a global state embedding the target
    multiset, the parameterized engine must report reachable."""
    prog = corpus_program(name)
    param_verdict = param_backward_reach(prog).verdict
    inst = instantiate(prog, size)
    states = sorted(prog.template.states)
    from itertools import product

    hit = False
    for global_state in product(states, repeat=size):
        if not subword(prog.target, global_state):
            continue
        if backward_reach(inst, global_state).verdict == "Reachable":
            hit = True
            break
    if hit:
        assert param_verdict == "Reachable"
    elif param_verdict == "Reachable" and size >= len(prog.target):
        # reachability must be realized by some bounded instance; allow
        # larger cutoffs but insist the 3-process instance suffices for
        # the two-role templates here
        assert size < 3


def test_random_cutoff_cross_validation():
    """Instance-level reachability at any size up to 3 must imply the
    parameterized verdict, over random templates and target multisets."""
    from itertools import product

    from dualmc import ResourceLimitError

    rng = random.Random(314)
    programs = 0
    implications = 0
    while programs < 40:
        base = random_param_program(rng, max_states=3)
        states = sorted(base.template.states)
        k = rng.randint(1, 2)
        targets = tuple(rng.choice(states) for _ in range(k))
        prog = ParamProgram(base.vars, base.values, base.template, targets)
        try:
            param_verdict = param_backward_reach(prog, max_nodes=400_000).verdict
        except ResourceLimitError:
            continue
        instance_reachable = False
        for n in range(k, 4):
            inst = instantiate(prog, n)
            for gs in product(states, repeat=n):
                if not subword(targets, gs):
                    continue
                try:
                    if backward_reach(inst, gs, max_nodes=200_000).verdict == "Reachable":
                        instance_reachable = True
                        break
                except ResourceLimitError:
                    continue
            if instance_reachable:
                break
        if instance_reachable:
            assert param_verdict == "Reachable", (prog.template.transitions, targets)
            implications += 1
        programs += 1
    assert implications >= 10


def test_antichain_at_param_fixpoint():
    prog = corpus_program("lb-param.lit")
    stats = param_backward_reach(prog)
    assert stats.verdict == "Unreachable"
    assert stats.minors > 0


def test_insertion_candidates_cap_one_process():
    rng = random.Random(5)
    for _ in range(40):
        prog = random_param_program(rng)
        alpha = random_param_config(rng, prog, rng.randint(0, 2), 2)
        for _a, pred in predecessor_candidates(alpha, prog):
            assert len(pred.procs) <= len(alpha.procs) + 1
