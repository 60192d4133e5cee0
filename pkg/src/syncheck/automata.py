"""Finite automata over an arbitrary hashable symbol type.

Everything here is a pure function on immutable :class:`Fsa` values.  Epsilon
is represented by ``None`` in the label position of a transition, which is
what the erasing homomorphism produces.

Words are tuples of symbols.  Whenever an operation has to choose between
several words (counterexamples, witnesses) it picks the shortest one and then
the lexicographically least one under a symbol ordering; the ordering is the
natural ``<`` of the symbols unless a ``key`` is supplied.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Iterator, Optional

EPSILON = None

Symbol = Hashable
Word = tuple

DEFAULT_MAX_STATES = 1_000_000


class AutomatonError(ValueError):
    """Malformed automaton or incompatible arguments."""


class AlphabetMismatch(AutomatonError):
    pass


class StateExplosion(RuntimeError):
    """Subset construction exceeded the configured state cap."""

    def __init__(self, limit: int):
        super().__init__(f"subset construction exceeded {limit} states (SYNCHECK_MAX_STATES)")
        self.limit = limit


def max_states() -> int:
    raw = os.environ.get("SYNCHECK_MAX_STATES")
    if not raw:
        return DEFAULT_MAX_STATES
    return int(raw.replace("_", ""))


def _sorted(symbols: Iterable, key=None) -> list:
    symbols = list(symbols)
    if key is not None:
        return sorted(symbols, key=key)
    try:
        return sorted(symbols)
    except TypeError:
        return sorted(symbols, key=repr)


@dataclass(frozen=True)
class Fsa:
    """A nondeterministic automaton with epsilon moves.

    ``transitions`` is a set of ``(source, label, target)`` triples where the
    label is a symbol of ``alphabet`` or :data:`EPSILON`.
    """

    states: frozenset
    alphabet: frozenset
    initial: Hashable
    accepting: frozenset
    transitions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.initial not in self.states:
            raise AutomatonError(f"initial state {self.initial!r} is not a state")
        if not self.accepting <= self.states:
            raise AutomatonError("accepting states must be states")
        for src, label, dst in self.transitions:
            if src not in self.states or dst not in self.states:
                raise AutomatonError(f"transition {(src, label, dst)!r} leaves the state set")
            if label is not EPSILON and label not in self.alphabet:
                raise AutomatonError(f"label {label!r} is not in the alphabet")

    @classmethod
    def create(cls, transitions=(), initial=0, accepting=(), states=(), alphabet=()) -> "Fsa":
        """Build an automaton, inferring states and alphabet from the transitions."""
        transitions = frozenset(tuple(t) for t in transitions)
        all_states = set(states) | {initial} | set(accepting)
        all_symbols = set(alphabet)
        for src, label, dst in transitions:
            all_states.update((src, dst))
            if label is not EPSILON:
                all_symbols.add(label)
        return cls(frozenset(all_states), frozenset(all_symbols), initial,
                   frozenset(accepting), transitions)

    @cached_property
    def _delta(self) -> dict:
        delta: dict = {}
        for src, label, dst in self.transitions:
            delta.setdefault(src, {}).setdefault(label, set()).add(dst)
        return delta

    def successors(self, state, label) -> set:
        return self._delta.get(state, {}).get(label, set())

    def labels_from(self, state) -> Iterable:
        return self._delta.get(state, {}).keys()

    def closure(self, states: Iterable) -> frozenset:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in self.successors(s, EPSILON):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def step(self, states: frozenset, symbol) -> frozenset:
        out = set()
        for s in states:
            out |= self.successors(s, symbol)
        return self.closure(out)

    def accepts(self, word: Iterable) -> bool:
        current = self.closure({self.initial})
        for symbol in word:
            current = self.step(current, symbol)
            if not current:
                return False
        return bool(current & self.accepting)

    @property
    def has_epsilon(self) -> bool:
        return any(label is EPSILON for _, label, _ in self.transitions)

    @property
    def is_deterministic(self) -> bool:
        if self.has_epsilon:
            return False
        return all(len(targets) <= 1 for row in self._delta.values() for targets in row.values())

    @property
    def is_complete(self) -> bool:
        return all(self.successors(s, a) for s in self.states for a in self.alphabet)


@dataclass(frozen=True)
class WordSet:
    """All words of a language up to ``max_len``; exhaustive below that bound."""

    words: frozenset
    max_len: int

    def __contains__(self, word) -> bool:
        return tuple(word) in self.words

    def __iter__(self) -> Iterator[Word]:
        return iter(self.words)

    def __len__(self) -> int:
        return len(self.words)

    def sorted(self, key=None) -> list:
        return sorted(self.words, key=shortlex(key))


def shortlex(key=None) -> Callable[[Word], tuple]:
    """Sort key ordering words by length, then lexicographically by ``key``."""
    if key is None:
        return lambda w: (len(w), w)
    return lambda w: (len(w), tuple(key(s) for s in w))


def enumerate_words(a: Fsa, max_len: int) -> WordSet:
    """Every word of ``L(a)`` of length at most ``max_len``, by direct path search."""
    start = a.closure({a.initial})
    found = set()
    layer = {(): start}
    for length in range(max_len + 1):
        nxt = {}
        for word, states in layer.items():
            if states & a.accepting:
                found.add(word)
            if length == max_len:
                continue
            symbols = {lab for s in states for lab in a.labels_from(s) if lab is not EPSILON}
            for symbol in symbols:
                targets = a.step(states, symbol)
                if targets:
                    nxt[word + (symbol,)] = targets
        layer = nxt
    return WordSet(frozenset(found), max_len)


def remove_epsilon(a: Fsa) -> Fsa:
    """Language-equivalent automaton on the same states without epsilon moves."""
    if not a.has_epsilon:
        return a
    transitions = set()
    accepting = set()
    for s in a.states:
        cl = a.closure({s})
        if cl & a.accepting:
            accepting.add(s)
        for u in cl:
            for label in a.labels_from(u):
                if label is EPSILON:
                    continue
                for t in a.successors(u, label):
                    transitions.add((s, label, t))
    return Fsa(a.states, a.alphabet, a.initial, frozenset(accepting), frozenset(transitions))


def determinize(a: Fsa) -> Fsa:
    """Subset construction; the result is deterministic, complete and epsilon-free.

    States of the result are consecutive integers, 0 being initial.  The number
    of subsets is at most ``2**len(a.states)``; construction stops with
    :class:`StateExplosion` past ``SYNCHECK_MAX_STATES``.
    """
    limit = max_states()
    symbols = _sorted(a.alphabet)
    start = a.closure({a.initial})
    ids = {start: 0}
    queue = deque([start])
    transitions = []
    accepting = set()
    while queue:
        subset = queue.popleft()
        sid = ids[subset]
        if subset & a.accepting:
            accepting.add(sid)
        for symbol in symbols:
            target = a.step(subset, symbol)
            if target not in ids:
                if len(ids) >= limit:
                    raise StateExplosion(limit)
                ids[target] = len(ids)
                queue.append(target)
            transitions.append((sid, symbol, ids[target]))
    return Fsa(frozenset(range(len(ids))), a.alphabet, 0, frozenset(accepting),
               frozenset(transitions))


def _dfa(a: Fsa) -> Fsa:
    if a.is_deterministic and a.is_complete:
        return a
    return determinize(a)


def transition_table(d: Fsa) -> dict:
    return {s: {label: next(iter(ts)) for label, ts in row.items()} for s, row in d._delta.items()}


def complement(a: Fsa) -> Fsa:
    d = _dfa(a)
    return Fsa(d.states, d.alphabet, d.initial, d.states - d.accepting, d.transitions)


def _check_alphabets(a: Fsa, b: Fsa):
    if a.alphabet != b.alphabet:
        raise AlphabetMismatch(
            f"alphabets differ: {_sorted(a.alphabet ^ b.alphabet, key=repr)!r} not shared")


def _product(a: Fsa, b: Fsa, accept: Callable[[bool, bool], bool]) -> Fsa:
    _check_alphabets(a, b)
    da, db = _dfa(a), _dfa(b)
    ta, tb = transition_table(da), transition_table(db)
    symbols = _sorted(a.alphabet)
    start = (da.initial, db.initial)
    ids = {start: 0}
    queue = deque([start])
    transitions = []
    accepting = set()
    while queue:
        pair = queue.popleft()
        pid = ids[pair]
        if accept(pair[0] in da.accepting, pair[1] in db.accepting):
            accepting.add(pid)
        for symbol in symbols:
            target = (ta[pair[0]][symbol], tb[pair[1]][symbol])
            if target not in ids:
                ids[target] = len(ids)
                queue.append(target)
            transitions.append((pid, symbol, ids[target]))
    return Fsa(frozenset(range(len(ids))), a.alphabet, 0, frozenset(accepting),
               frozenset(transitions))


def intersect(a: Fsa, b: Fsa) -> Fsa:
    return _product(a, b, lambda x, y: x and y)


def union(a: Fsa, b: Fsa) -> Fsa:
    return _product(a, b, lambda x, y: x or y)


def shortest_word(a: Fsa, key=None) -> Optional[Word]:
    """The shortlex-least accepted word, or ``None`` for the empty language."""
    d = _dfa(a)
    table = transition_table(d)
    symbols = _sorted(d.alphabet, key=key)
    # BFS in symbol order reaches every state first along its shortlex-least word.
    seen = {d.initial: ()}
    queue = deque([d.initial])
    while queue:
        s = queue.popleft()
        word = seen[s]
        if s in d.accepting:
            return word
        for symbol in symbols:
            t = table[s][symbol]
            if t not in seen:
                seen[t] = word + (symbol,)
                queue.append(t)
    return None


def is_empty(a: Fsa) -> bool:
    return shortest_word(a) is None


@dataclass(frozen=True)
class Inclusion:
    holds: bool
    counterexample: Optional[Word] = None


def includes(sup: Fsa, sub: Fsa, key=None) -> Inclusion:
    """Decide ``L(sub) <= L(sup)``; on failure return the shortlex-least word of the difference."""
    _check_alphabets(sup, sub)
    cex = shortest_word(intersect(sub, complement(sup)), key=key)
    return Inclusion(cex is None, cex)


def equivalent(a: Fsa, b: Fsa) -> bool:
    return includes(a, b).holds and includes(b, a).holds


def trim(a: Fsa) -> Fsa:
    """Restrict to states both reachable and co-reachable (keeps the initial state)."""
    forward = {a.initial}
    stack = [a.initial]
    while stack:
        s = stack.pop()
        for label in a.labels_from(s):
            for t in a.successors(s, label):
                if t not in forward:
                    forward.add(t)
                    stack.append(t)
    backward_edges: dict = {}
    for src, _, dst in a.transitions:
        backward_edges.setdefault(dst, set()).add(src)
    backward = set(a.accepting & forward)
    stack = list(backward)
    while stack:
        s = stack.pop()
        for t in backward_edges.get(s, ()):
            if t in forward and t not in backward:
                backward.add(t)
                stack.append(t)
    keep = backward | {a.initial}
    transitions = frozenset(t for t in a.transitions if t[0] in keep and t[2] in keep)
    return Fsa(frozenset(keep), a.alphabet, a.initial, frozenset(a.accepting & keep), transitions)


def erase(a: Fsa, keep: Callable[[Symbol], bool]) -> Fsa:
    """Image of ``L(a)`` under deleting every symbol for which ``keep`` is false."""
    transitions = frozenset(
        (src, label if label is EPSILON or keep(label) else EPSILON, dst)
        for src, label, dst in a.transitions
    )
    alphabet = frozenset(s for s in a.alphabet if keep(s))
    return Fsa(a.states, alphabet, a.initial, a.accepting, transitions)


def relabel(a: Fsa, h: Callable[[Symbol], Symbol]) -> Fsa:
    """Image of ``L(a)`` under the letter-to-letter map ``h``."""
    transitions = frozenset(
        (src, label if label is EPSILON else h(label), dst) for src, label, dst in a.transitions
    )
    return Fsa(a.states, frozenset(h(s) for s in a.alphabet), a.initial, a.accepting, transitions)


def extend_alphabet(a: Fsa, symbols: Iterable) -> Fsa:
    return Fsa(a.states, a.alphabet | frozenset(symbols), a.initial, a.accepting, a.transitions)


def from_words(words: Iterable[Iterable], alphabet: Iterable = ()) -> Fsa:
    """A trie accepting exactly the given finite set of words."""
    transitions = set()
    accepting = set()
    symbols = set(alphabet)
    for word in words:
        word = tuple(word)
        symbols.update(word)
        for i, symbol in enumerate(word):
            transitions.add((word[:i], symbol, word[: i + 1]))
        accepting.add(word)
    return Fsa.create(transitions, initial=(), accepting=accepting, alphabet=symbols)


def empty_language(alphabet: Iterable = ()) -> Fsa:
    return Fsa(frozenset({0}), frozenset(alphabet), 0, frozenset())


def epsilon_language(alphabet: Iterable = ()) -> Fsa:
    return Fsa(frozenset({0}), frozenset(alphabet), 0, frozenset({0}))


def prefix_closure(a: Fsa) -> Fsa:
    t = trim(a)
    accepting = t.states if t.accepting else frozenset()
    return Fsa(t.states, t.alphabet, t.initial, accepting, t.transitions)


def is_prefix_closed(a: Fsa) -> bool:
    return includes(a, prefix_closure(a)).holds


def iter_words(a: Fsa, key=None, limit: Optional[int] = None,
               max_len: Optional[int] = None) -> Iterator[Word]:
    """Yield accepted words in shortlex order (possibly infinitely many)."""
    d = trim(_dfa(a))
    if not d.accepting:
        return
    table = transition_table(d)
    symbols = _sorted(d.alphabet, key=key)
    queue = deque([(d.initial, ())])
    count = 0
    while queue:
        s, word = queue.popleft()
        if max_len is not None and len(word) > max_len:
            return
        if s in d.accepting:
            yield word
            count += 1
            if limit is not None and count >= limit:
                return
        for symbol in symbols:
            t = table.get(s, {}).get(symbol)
            if t is not None:
                queue.append((t, word + (symbol,)))
