"""Synchronisability decision for networks whose topology is a tree.

The procedure computes, from the root downwards, the *influenced language*
of every participant: the words of its automaton whose receive sequence is
something its parent can actually send it.  A parent/child pair is then
checked for

* coverage: every sequence the parent can send to the child can be received
  by the child without the child sending anything in between;
* shuffle closure: the child's influenced language is closed under moving a
  receive in front of an adjacent send (``!x ?y`` becomes ``?y !x``).

The network is synchronisable exactly when every pair passes both checks.
Only networks where every state is final are in scope.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Optional, Union

from . import automata
from .automata import Fsa
from .network import (CommAction, FinalMode, Message, Network, NotTree, TreeInfo, action_key,
                      classify, topology, validate)
from .semantics import (Bounds, Execution, Semantics, WrongFinalMode, bounded_trace_equality,
                        find_execution, realize_trace, trace_automaton)


class NotATree(ValueError):
    def __init__(self, info: NotTree):
        super().__init__(f"topology is not a tree ({info.reason}: {' '.join(map(str, info.witness))})")
        self.info = info


class InvalidNetwork(ValueError):
    def __init__(self, violations):
        super().__init__("; ".join(map(str, violations)))
        self.violations = violations


class WitnessNotRealizable(RuntimeError):
    pass


def message_of(action: CommAction) -> Message:
    return action.message


def message_key(m: Message) -> tuple:
    return (m.payload, m.sender, m.receiver)


@dataclass(frozen=True)
class InfluencedLanguage:
    owner: str
    lang: Fsa
    out: Fsa
    in_: Fsa


def _tree(n: Network) -> TreeInfo:
    info = classify(topology(n))
    if isinstance(info, NotTree):
        raise NotATree(info)
    return info


def _all_final(n: Network):
    if n.final_mode is not FinalMode.ALL:
        raise WrongFinalMode("the tree decider requires every state to be final")


def _wrap(owner, lang: Fsa) -> InfluencedLanguage:
    return InfluencedLanguage(
        owner, lang,
        automata.erase(lang, lambda a: a.is_send),
        automata.erase(lang, lambda a: a.is_receive))


def parent_output_to(lq: InfluencedLanguage, p) -> Fsa:
    """Sequences of messages the owner of ``lq`` can send to ``p``."""
    to_p = automata.erase(lq.lang, lambda a: a.is_send and a.message.receiver == p)
    return automata.relabel(to_p, message_of)


def influenced_language(n: Network, p, parent_out_msgs: Optional[Fsa] = None) -> InfluencedLanguage:
    """Restrict ``L(A_p)`` to words whose received messages form a word of ``parent_out_msgs``.

    ``parent_out_msgs`` is an automaton over messages addressed to ``p``;
    ``None`` stands for the root case, where nothing is received.
    """
    _all_final(n)
    tree = _tree(n)
    base = n.language(p)
    if parent_out_msgs is None:
        if tree.parent[p] is not None:
            raise ValueError(f"{p} is not the root; its parent's output language is required")
        return _wrap(p, base)

    incoming = {a.message for a in base.alphabet if a.is_receive}
    guide = automata.determinize(automata.extend_alphabet(parent_out_msgs, incoming))
    table = automata.transition_table(guide)
    start = (base.initial, guide.initial)
    states = {start}
    queue = deque([start])
    transitions = set()
    while queue:
        s, d = queue.popleft()
        for act in base.labels_from(s):
            nd = table[d][act.message] if act.is_receive else d
            for t in base.successors(s, act):
                target = (t, nd)
                transitions.add(((s, d), act, target))
                if target not in states:
                    states.add(target)
                    queue.append(target)
    accepting = {(s, d) for (s, d) in states if s in base.accepting and d in guide.accepting}
    product = Fsa(frozenset(states), base.alphabet, start, frozenset(accepting),
                  frozenset(transitions))
    return _wrap(p, automata.trim(automata.determinize(product)))


def influenced_languages(n: Network) -> dict:
    """Influenced language of every participant, computed parents first."""
    _all_final(n)
    tree = _tree(n)
    langs = {}
    for p in tree.top_down():
        q = tree.parent[p]
        langs[p] = influenced_language(n, p, None if q is None else parent_output_to(langs[q], p))
    return langs


def shuffle_one_step_image(a: Fsa) -> Fsa:
    """Words obtained from a word of ``a`` by exactly one swap ``!x ?y -> ?y !x``."""
    a = automata.remove_epsilon(a)
    transitions = set()
    for s, label, t in a.transitions:
        transitions.add((("pre", s), label, ("pre", t)))
        transitions.add((("post", s), label, ("post", t)))
        if not label.is_send:
            continue
        for y in a.labels_from(t):
            if not y.is_receive:
                continue
            for u in a.successors(t, y):
                pending = ("pending", u, label)
                transitions.add((("pre", s), y, pending))
                transitions.add((pending, label, ("post", u)))
    states = {("pre", s) for s in a.states} | {("post", s) for s in a.states}
    states |= {t[2] for t in transitions}
    accepting = frozenset(("post", s) for s in a.accepting)
    return Fsa(frozenset(states), a.alphabet, ("pre", a.initial), accepting, frozenset(transitions))


def _swap_back_index(lang: Fsa, word: tuple) -> Optional[int]:
    for i in range(len(word) - 1):
        if word[i].is_receive and word[i + 1].is_send:
            original = word[:i] + (word[i + 1], word[i]) + word[i + 2:]
            if lang.accepts(original):
                return i
    return None


@dataclass(frozen=True)
class ShuffleCheck:
    closed: bool
    witness: Optional[tuple] = None
    image_word: Optional[tuple] = None
    swap_index: Optional[int] = None


def is_shuffle_closed(l: Union[InfluencedLanguage, Fsa]) -> ShuffleCheck:
    """Closure of the language under one input shuffle step.

    ``image_word`` is the shortest one-swap word outside the language.  For a
    prefix-closed language ``witness`` is its shortest prefix outside the
    language, otherwise the image word itself.
    """
    lang = l.lang if isinstance(l, InfluencedLanguage) else l
    image = shuffle_one_step_image(lang)
    inc = automata.includes(lang, image, key=action_key)
    if inc.holds:
        return ShuffleCheck(True)
    word = inc.counterexample
    witness = word
    if automata.is_prefix_closed(lang):
        witness = next(word[:k] for k in range(len(word) + 1) if not lang.accepts(word[:k]))
    return ShuffleCheck(False, witness, word, _swap_back_index(lang, word))


def shuffled_words(lang: Fsa, max_len: int) -> frozenset:
    """Words of length at most ``max_len`` of the shuffle closure of ``lang``.

    Swaps preserve length, so the closure of the bounded word set is exact.
    Prefixes are included when ``lang`` is prefix-closed.
    """
    words = set(automata.enumerate_words(lang, max_len).words)
    frontier = list(words)
    while frontier:
        w = frontier.pop()
        for i in range(len(w) - 1):
            if w[i].is_send and w[i + 1].is_receive:
                v = w[:i] + (w[i + 1], w[i]) + w[i + 2:]
                if v not in words:
                    words.add(v)
                    frontier.append(v)
    if automata.is_prefix_closed(lang):
        words |= {w[:k] for w in list(words) for k in range(len(w))}
    return frozenset(words)


@dataclass(frozen=True)
class CoverageCheck:
    holds: bool
    witness: Optional[tuple] = None


def coverage_check(n: Network, q, p, lq: InfluencedLanguage, lp: InfluencedLanguage) -> CoverageCheck:
    """Can ``p`` receive every sequence ``q`` sends it, without sending in between?"""
    lhs = parent_output_to(lq, p)
    rhs = automata.relabel(lp.lang, message_of)
    alphabet = lhs.alphabet | rhs.alphabet
    inc = automata.includes(automata.extend_alphabet(rhs, alphabet),
                            automata.extend_alphabet(lhs, alphabet), key=message_key)
    return CoverageCheck(inc.holds, inc.counterexample)


def _parent_word(lq: InfluencedLanguage, child, target: tuple) -> Optional[tuple]:
    """Shortlex-least word of ``lq`` whose sends to ``child`` carry exactly ``target``."""
    d = lq.lang
    symbols = sorted(d.alphabet, key=action_key)
    start = (d.initial, 0)
    seen = {start: ()}
    queue = deque([start])
    while queue:
        s, k = queue.popleft()
        word = seen[(s, k)]
        if k == len(target) and s in d.accepting:
            return word
        for a in symbols:
            if a.is_send and a.message.receiver == child:
                if k == len(target) or a.message != target[k]:
                    continue
                nk = k + 1
            else:
                nk = k
            for t in d.successors(s, a):
                if (t, nk) not in seen:
                    seen[(t, nk)] = word + (a,)
                    queue.append((t, nk))
    return None


def realize_execution(n: Network, q, w, langs: Optional[dict] = None) -> Execution:
    """A mailbox execution in which ``q`` performs ``w`` and ``q``'s children do nothing.

    Walks the path from the root to ``q``; each ancestor contributes a shortest
    word of its influenced language that sends exactly what the next node on
    the path receives.  The words are concatenated root first.
    """
    _all_final(n)
    tree = _tree(n)
    langs = langs if langs is not None else influenced_languages(n)
    w = tuple(w)
    if not langs[q].lang.accepts(w):
        raise ValueError(f"word is not in the influenced language of {q}")
    path = tree.path_from_root(q)
    words = {q: w}
    for parent, child in zip(reversed(path[:-1]), reversed(path[1:])):
        target = tuple(a.message for a in words[child] if a.is_receive)
        pw = _parent_word(langs[parent], child, target)
        if pw is None:
            raise WitnessNotRealizable(f"{parent} cannot provide {[str(m) for m in target]}")
        words[parent] = pw
    labels = tuple(a for node in path for a in words[node])
    execution = find_execution(n, Semantics.MAILBOX, labels)
    if execution is None:
        raise WitnessNotRealizable("concatenated words do not replay under mailbox semantics")
    return execution


class Result(str, enum.Enum):
    SYNCHRONISABLE = "synchronisable"
    NOT_SYNCHRONISABLE = "not-synchronisable"


class Condition(str, enum.Enum):
    COVERAGE = "coverage"
    SHUFFLE_CLOSURE = "shuffle-closure"


@dataclass(frozen=True)
class Failure:
    parent: str
    child: str
    condition: Condition
    witness_word: tuple
    lifted_trace: Optional[tuple] = None
    lifted_execution: Optional[Execution] = None

    @property
    def pair(self) -> tuple:
        return (self.parent, self.child)


@dataclass(frozen=True)
class Verdict:
    result: Result
    failures: tuple = ()
    languages: Optional[dict] = None

    @property
    def synchronisable(self) -> bool:
        return self.result is Result.SYNCHRONISABLE

    @property
    def witness(self) -> Optional[tuple]:
        """The longest lifted trace over all failures (first one on ties)."""
        lifted = [f.lifted_trace for f in self.failures if f.lifted_trace is not None]
        return max(lifted, key=len) if lifted else None


class _Lifter:
    """Turns failed checks into traces of the mailbox system missing from the synchronous one."""

    CANDIDATES = 16

    def __init__(self, n: Network, langs: dict):
        self.n = n
        self.langs = langs
        self._sync = None

    def in_sync(self, trace) -> bool:
        if self._sync is None:
            self._sync, _, _ = trace_automaton(self.n, Semantics.SYNC, Bounds())
        return self._sync.accepts(trace)

    def _accept(self, execution):
        if execution is None or self.in_sync(execution.trace):
            return None
        return execution

    def coverage(self, q, p, cov: CoverageCheck) -> Optional[Execution]:
        lhs = parent_output_to(self.langs[q], p)
        rhs = automata.relabel(self.langs[p].lang, message_of)
        alphabet = lhs.alphabet | rhs.alphabet
        lhs, rhs = (automata.extend_alphabet(x, alphabet) for x in (lhs, rhs))
        missing = automata.intersect(lhs, automata.complement(rhs))
        for v in automata.iter_words(missing, key=message_key, limit=self.CANDIDATES):
            pw = _parent_word(self.langs[q], p, v)
            if pw is None:
                continue
            found = self._accept(realize_execution(self.n, q, pw, self.langs))
            if found:
                return found
        return None

    def shuffle(self, q, p) -> Optional[Execution]:
        lang = self.langs[p].lang
        outside = automata.intersect(shuffle_one_step_image(lang), automata.complement(lang))
        for z in automata.iter_words(outside, key=action_key, limit=self.CANDIDATES):
            for i in range(len(z) - 1):
                if not (z[i].is_receive and z[i + 1].is_send):
                    continue
                if not lang.accepts(z[:i] + (z[i + 1], z[i]) + z[i + 2:]):
                    continue
                found = self._accept(self._shuffle_candidate(q, p, z, i))
                if found:
                    return found
        return None

    def _shuffle_candidate(self, q, p, z, i) -> Optional[Execution]:
        # p runs z[:i], then q emits the message p will receive, then p sends
        # z[i+1] before receiving it: the send overtakes the parent's message.
        u, received, sent = z[:i], z[i], z[i + 1]
        target = tuple(a.message for a in u if a.is_receive) + (received.message,)
        pw = _parent_word(self.langs[q], p, target)
        if pw is None:
            return None
        prefix = realize_execution(self.n, q, pw, self.langs).labels[:-1]
        labels = prefix + u + (received.dual, sent, received)
        return find_execution(self.n, Semantics.MAILBOX, labels)

    def search(self, max_len: int = 10) -> Optional[Execution]:
        for k in range(1, max_len + 1):
            cmp = bounded_trace_equality(self.n, k, k)
            if cmp.equal_up_to_bounds:
                continue
            diff = sorted(cmp.asynchronous.traces - cmp.sync.traces,
                          key=automata.shortlex(action_key))
            for t in diff:
                found = self._accept(realize_trace(self.n, Semantics.MAILBOX, t))
                if found:
                    return found
        return None


def decide(n: Network, lift: bool = True) -> Verdict:
    """Decide whether mailbox traces equal synchronous traces for a tree network."""
    violations = validate(n)
    if violations:
        raise InvalidNetwork(violations)
    tree = _tree(n)
    _all_final(n)
    langs = influenced_languages(n)
    lifter = _Lifter(n, langs) if lift else None
    failures = []
    fallback = None
    for p in tree.top_down():
        q = tree.parent[p]
        if q is None:
            continue
        cov = coverage_check(n, q, p, langs[q], langs[p])
        if not cov.holds:
            execution = lifter.coverage(q, p, cov) if lift else None
            failures.append([q, p, Condition.COVERAGE, cov.witness, execution])
        shuf = is_shuffle_closed(langs[p])
        if not shuf.closed:
            execution = lifter.shuffle(q, p) if lift else None
            failures.append([q, p, Condition.SHUFFLE_CLOSURE, shuf.witness, execution])
    if lift and failures and all(f[4] is None for f in failures):
        fallback = lifter.search()
    out = []
    for q, p, cond, word, execution in failures:
        execution = execution or fallback
        out.append(Failure(q, p, cond, word, execution.trace if execution else None, execution))
    result = Result.NOT_SYNCHRONISABLE if out else Result.SYNCHRONISABLE
    return Verdict(result, tuple(out), langs)
