"""Post Correspondence instances and their encoding as a four-party mailbox network.

``I`` guesses a sequence of indices and sends it to ``W`` and ``W'``; each
of those spells its word for every index to ``L``; ``L`` compares the two
letter streams pairwise and can only emit ``ok`` (which nobody receives)
when both streams agree and end together.  The network therefore has an
accepting mailbox execution exactly when the instance has a solution, and
never has an accepting synchronous one.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .network import CommAction, CommunicatingAutomaton, FinalMode, Network
from .semantics import Bounds, Execution, Semantics, find_accepting_execution

I, W, W_PRIME, L = "I", "W", "W'", "L"
END = "end"
DOLLAR = "$"
OK = "ok"


@dataclass(frozen=True)
class PcpInstance:
    alphabet: tuple
    w: tuple
    w_prime: tuple

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "w", tuple(tuple(x) for x in self.w))
        object.__setattr__(self, "w_prime", tuple(tuple(x) for x in self.w_prime))
        if len(set(self.alphabet)) < 2:
            raise ValueError("the alphabet needs at least two symbols")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("the alphabet has repeated symbols")
        if END in self.alphabet:
            raise ValueError(f"{END!r} is reserved and cannot be a letter")
        if not self.w or len(self.w) != len(self.w_prime):
            raise ValueError("w and w_prime must be nonempty lists of equal length")
        letters = set(self.alphabet)
        for word in self.w + self.w_prime:
            if not word:
                raise ValueError("words must be nonempty")
            if not set(word) <= letters:
                raise ValueError(f"word {''.join(map(str, word))!r} uses letters outside the alphabet")

    @property
    def n(self) -> int:
        return len(self.w)


@dataclass(frozen=True)
class PcpSolution:
    indices: tuple


def _concat(words, indices) -> tuple:
    return tuple(letter for i in indices for letter in words[i - 1])


def check_solution(inst: PcpInstance, indices: Sequence[int]) -> bool:
    indices = tuple(indices)
    if not indices:
        raise ValueError("a solution needs at least one index")
    for i in indices:
        if not 1 <= i <= inst.n:
            raise ValueError(f"index {i} outside [1, {inst.n}]")
    return _concat(inst.w, indices) == _concat(inst.w_prime, indices)


def brute_solve(inst: PcpInstance, max_m: int) -> Optional[PcpSolution]:
    """Shortest solution with at most ``max_m`` indices, least index sequence first.

    Breadth-first over index sequences, pruning any prefix whose two
    concatenations already disagree.  Only the overhang of the longer side
    matters, so equal (overhang, length) nodes are merged.
    """
    if max_m < 1:
        raise ValueError("max_m must be at least 1")
    queue = deque([((), (), 0)])  # indices, overhang, which side is ahead (0: w)
    seen = {((), 0, 0)}
    while queue:
        indices, over, ahead = queue.popleft()
        if len(indices) == max_m:
            continue
        for i in range(1, inst.n + 1):
            top, bottom = inst.w[i - 1], inst.w_prime[i - 1]
            a = (over if ahead == 0 else ()) + top
            b = (over if ahead == 1 else ()) + bottom
            k = min(len(a), len(b))
            if a[:k] != b[:k]:
                continue
            nxt = indices + (i,)
            rest, side = (a[k:], 0) if len(a) > len(b) else (b[k:], 1)
            if not rest:
                return PcpSolution(nxt)
            key = (rest, side, len(nxt))
            if key not in seen:
                seen.add(key)
                queue.append((nxt, rest, side))
    return None


def _word_automaton(me: str, words: tuple) -> CommunicatingAutomaton:
    transitions = []
    for i, word in enumerate(words, start=1):
        index = str(i)
        transitions.append(("q0", CommAction.receive(index, I, me), f"q{i},0"))
        transitions.append(("qf", CommAction.receive(index, I, me), f"q{i},0"))
        for j, letter in enumerate(word):
            target = f"q{i},{j + 1}" if j + 1 < len(word) else "qf"
            transitions.append((f"q{i},{j}", CommAction.send(letter, me, L), target))
    transitions.append(("qf", CommAction.receive(DOLLAR, I, me), "q$"))
    transitions.append(("q$", CommAction.send(END, me, L), "qe"))
    return CommunicatingAutomaton.create(transitions, "q0", finals={"qe"})


def _index_automaton(n: int) -> CommunicatingAutomaton:
    transitions = []
    for i in range(1, n + 1):
        transitions.append(("q0", CommAction.send(str(i), I, W), f"q{i}"))
        transitions.append((f"q{i}", CommAction.send(str(i), I, W_PRIME), "q0"))
    transitions.append(("q0", CommAction.send(DOLLAR, I, W), "q$"))
    transitions.append(("q$", CommAction.send(DOLLAR, I, W_PRIME), "q$'"))
    return CommunicatingAutomaton.create(transitions, "q0", finals={"q$'"})


def _comparator(alphabet: tuple) -> CommunicatingAutomaton:
    def rec(payload, sender):
        return CommAction.receive(payload, sender, L)

    tokens = alphabet + (END,)
    transitions = []
    for alpha in alphabet:
        qa = f"q_{alpha}"
        transitions.append(("q0", rec(alpha, W), qa))
        transitions.append((qa, rec(alpha, W_PRIME), "q0"))
        for beta in tokens:
            if beta != alpha:
                transitions.append((qa, rec(beta, W_PRIME), "q*"))
            transitions.append((qa, rec(beta, W), "q*"))
        transitions.append(("qe", rec(alpha, W), "q*"))
        transitions.append(("qe", rec(alpha, W_PRIME), "q*"))
    for beta in tokens:
        transitions.append(("q0", rec(beta, W_PRIME), "q*"))
        transitions.append(("q*", rec(beta, W), "q*"))
        transitions.append(("q*", rec(beta, W_PRIME), "q*"))
    transitions.append(("q0", rec(END, W), "qe"))
    transitions.append(("qe", rec(END, W_PRIME), "qe'"))
    transitions.append(("qe'", CommAction.send(OK, L, I), "qok"))
    return CommunicatingAutomaton.create(transitions, "q0", finals={"qok"})


def encode(inst: PcpInstance) -> Network:
    automata = {
        I: _index_automaton(inst.n),
        W: _word_automaton(W, inst.w),
        W_PRIME: _word_automaton(W_PRIME, inst.w_prime),
        L: _comparator(inst.alphabet),
    }
    messages = {a.message for aut in automata.values() for _, a, _ in aut.transitions}
    return Network(tuple(automata), automata, messages, FinalMode.DECLARED)


ACCEPTING_STATE = {I: "q$'", W: "qe", W_PRIME: "qe", L: "qok"}


def search_accepting_trace(net: Network, max_sends: Optional[int] = 40,
                           buffer_bound: Optional[int] = 12,
                           max_steps: Optional[int] = None) -> tuple:
    """Look for an accepting mailbox execution of an encoded instance.

    Returns ``(execution or None, complete, stats)``.  ``complete`` means the
    bounded space was exhausted without pruning, so ``None`` is then a proof
    of absence for the whole system, not just within bounds.
    """
    bounds = Bounds(max_steps=max_steps, buffer_bound=buffer_bound, max_sends=max_sends)
    return find_accepting_execution(net, Semantics.MAILBOX, bounds)


def solution_from_execution(execution: Execution) -> PcpSolution:
    """The indices ``I`` sent to ``W`` along the execution."""
    indices = tuple(int(a.message.payload) for a in execution.labels
                    if a.is_send and a.message.sender == I and a.message.receiver == W
                    and a.message.payload != DOLLAR)
    return PcpSolution(indices)
