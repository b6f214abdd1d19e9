"""Orderings on load-buffer words and configurations, and antichain sets.

Buffer words are tuples of messages with position 0 the newest entry
(the append side) and position -1 the oldest (the consume side).  A
load-buffer message is a triple (var, val, own); own marks an entry the
process wrote itself.  The word ordering compares the per-variable
most-recent own-messages exactly and the fragments between them by the
subword relation; it is a well-quasi-ordering, which is what makes the
backward fixpoint terminate.
"""
from __future__ import annotations

from collections import Counter
from functools import lru_cache
from typing import Callable, Iterable, NamedTuple

Msg = tuple[str, int, bool]
Word = tuple[Msg, ...]


def subword(u: tuple, v: tuple) -> bool:
    """True iff u embeds into v by a strictly increasing injection."""
    if len(u) > len(v):
        return False
    i = 0
    for sym in v:
        if i < len(u) and u[i] == sym:
            i += 1
    return i == len(u)


class OwnDecomposition(NamedTuple):
    """Fragments around the most-recent own-message per variable.

    fragments has one more entry than delimiters; interleaving them in
    order reconstructs the original word.
    """

    fragments: tuple[Word, ...]
    delimiters: tuple[tuple[str, int], ...]

    def rebuild(self) -> Word:
        word: list[Msg] = []
        for i, frag in enumerate(self.fragments):
            word.extend(frag)
            if i < len(self.delimiters):
                x, v = self.delimiters[i]
                word.append((x, v, True))
        return tuple(word)


@lru_cache(maxsize=None)
def own_decompose(w: Word) -> OwnDecomposition:
    """Split w at the newest own-message of each variable."""
    fragments: list[Word] = []
    delimiters: list[tuple[str, int]] = []
    seen: set[str] = set()
    frag: list[Msg] = []
    for msg in w:
        x, v, own = msg
        if own and x not in seen:
            seen.add(x)
            fragments.append(tuple(frag))
            frag = []
            delimiters.append((x, v))
        else:
            frag.append(msg)
    fragments.append(tuple(frag))
    return OwnDecomposition(tuple(fragments), tuple(delimiters))


def word_leq(w: Word, w2: Word) -> bool:
    """Buffer-word ordering: equal delimiters, fragment-wise subword."""
    a = own_decompose(w)
    b = own_decompose(w2)
    if a.delimiters != b.delimiters:
        return False
    return all(subword(fa, fb) for fa, fb in zip(a.fragments, b.fragments))


def config_leq(c, c2) -> bool:
    """Configuration ordering: equal states and memory, word_leq per buffer."""
    if len(c.states) != len(c2.states):
        raise ValueError("config_leq over different process sets")
    if c.states != c2.states or c.mem != c2.mem:
        return False
    return all(word_leq(b, b2) for b, b2 in zip(c.buffers, c2.buffers))


def param_leq(a, a2) -> bool:
    """Parameterized ordering: equal memory plus an order-preserving
    injection matching states exactly and buffers by word_leq.

    Decided by greedy earliest-match, which is complete for
    order-preserving injections with per-element predicates.
    """
    if a.mem != a2.mem:
        return False
    if len(a.procs) > len(a2.procs):
        return False
    if a.procs and not _state_multiset_leq(_state_counts(a.procs), _state_counts(a2.procs)):
        return False
    j = 0
    for state, buf in a.procs:
        while j < len(a2.procs):
            state2, buf2 = a2.procs[j]
            j += 1
            if state == state2 and word_leq(buf, buf2):
                break
        else:
            return False
    return True


@lru_cache(maxsize=None)
def _state_counts(procs) -> Counter:
    return Counter(s for s, _ in procs)


def _state_multiset_leq(counts, counts2) -> bool:
    for s, k in counts.items():
        if counts2.get(s, 0) < k:
            return False
    return True


class InsertResult(NamedTuple):
    inserted: bool
    removed: tuple


SUBSUMED = InsertResult(False, ())


class MinorSet:
    """An antichain of configurations representing an upward-closed set.

    `leq` is the ordering; `key` maps an element to a bucket such that
    comparable elements always share a bucket (a pure pre-filter).
    Iteration follows insertion order, deterministically; membership is
    by value.
    """

    def __init__(self, leq: Callable, key: Callable | None = None):
        self._leq = leq
        self._key = key if key is not None else (lambda c: None)
        self._buckets: dict = {}
        self._order: list = []
        self._gone: set[int] = set()

    def __len__(self) -> int:
        return sum(len(b) for b in self._buckets.values())

    def __iter__(self):
        gone = self._gone
        return (c for c in self._order if id(c) not in gone)

    def __contains__(self, elem) -> bool:
        return any(m == elem for m in self._buckets.get(self._key(elem), ()))

    def elements(self) -> list:
        return list(self)

    def covers(self, elem) -> bool:
        """True iff elem is in the represented upward closure."""
        leq = self._leq
        return any(leq(m, elem) for m in self._buckets.get(self._key(elem), ()))

    def insert(self, elem) -> InsertResult:
        bucket = self._buckets.setdefault(self._key(elem), [])
        leq = self._leq
        for m in bucket:
            if leq(m, elem):
                return SUBSUMED
        removed = tuple(m for m in bucket if leq(elem, m))
        if removed:
            gone = {id(m) for m in removed}
            bucket[:] = [m for m in bucket if id(m) not in gone]
            self._gone.update(gone)
        bucket.append(elem)
        self._order.append(elem)
        return InsertResult(True, removed)


def minor_insert(minors: MinorSet, elem) -> InsertResult:
    return minors.insert(elem)


def minor_min(items: Iterable, leq: Callable, key: Callable | None = None) -> MinorSet:
    """Fold items into an antichain; result is order-independent as a set."""
    minors = MinorSet(leq, key)
    for elem in items:
        minors.insert(elem)
    return minors
