"""Networks of communicating automata, their topology, and validation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Mapping, Optional, Union

from . import automata


class FinalMode(str, enum.Enum):
    ALL = "all"            # every configuration is final
    DECLARED = "declared"  # final configurations come from the automata's finals


class Direction(str, enum.Enum):
    SEND = "!"
    RECEIVE = "?"


@dataclass(frozen=True, order=True)
class Message:
    payload: str
    sender: str
    receiver: str

    def __str__(self):
        return f"{self.payload}@{self.sender}>{self.receiver}"


@dataclass(frozen=True, order=True)
class CommAction:
    message: Message
    direction: Direction

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))

    @classmethod
    def send(cls, payload, sender, receiver) -> "CommAction":
        return cls(Message(payload, sender, receiver), Direction.SEND)

    @classmethod
    def receive(cls, payload, sender, receiver) -> "CommAction":
        return cls(Message(payload, sender, receiver), Direction.RECEIVE)

    @property
    def is_send(self) -> bool:
        return self.direction is Direction.SEND

    @property
    def is_receive(self) -> bool:
        return self.direction is Direction.RECEIVE

    @property
    def actor(self) -> str:
        """The participant with the active role."""
        return self.message.sender if self.is_send else self.message.receiver

    @property
    def dual(self) -> "CommAction":
        other = Direction.RECEIVE if self.is_send else Direction.SEND
        return CommAction(self.message, other)

    def __str__(self):
        return f"{self.direction.value}{self.message}"

    def __repr__(self):
        return f"<{self}>"


def action_key(action: CommAction) -> tuple:
    return (action.message.payload, action.message.sender, action.message.receiver,
            action.direction.value)


@dataclass(frozen=True)
class CommunicatingAutomaton:
    states: frozenset
    initial: Hashable
    transitions: frozenset  # of (state, CommAction, state)
    finals: frozenset = frozenset()

    @classmethod
    def create(cls, transitions, initial, finals=(), states=()) -> "CommunicatingAutomaton":
        transitions = frozenset(tuple(t) for t in transitions)
        all_states = set(states) | {initial}
        for src, _, dst in transitions:
            all_states.update((src, dst))
        return cls(frozenset(all_states), initial, transitions, frozenset(finals))

    @cached_property
    def moves(self) -> dict:
        """state -> sorted list of (action, target)."""
        out: dict = {s: [] for s in self.states}
        for src, action, dst in self.transitions:
            out.setdefault(src, []).append((action, dst))
        for row in out.values():
            row.sort(key=lambda m: (action_key(m[0]), repr(m[1])))
        return out

    def to_fsa(self, all_final: bool = True, alphabet=()) -> automata.Fsa:
        accepting = self.states if all_final else self.finals & self.states
        symbols = frozenset(alphabet) | {a for _, a, _ in self.transitions}
        return automata.Fsa(self.states, symbols, self.initial, frozenset(accepting),
                            self.transitions)


@dataclass(frozen=True)
class Network:
    participants: tuple
    automata: Mapping[str, CommunicatingAutomaton]
    messages: frozenset
    final_mode: FinalMode = FinalMode.ALL

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(sorted(self.participants)))
        object.__setattr__(self, "messages", frozenset(self.messages))
        object.__setattr__(self, "final_mode", FinalMode(self.final_mode))

    # automata is a dict; hash by identity so networks can key caches
    __hash__ = object.__hash__

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.participants)}

    @cached_property
    def channels(self) -> tuple:
        """All ordered pairs (p, q) with p != q, sorted."""
        return tuple((p, q) for p in self.participants for q in self.participants if p != q)

    @cached_property
    def channel_index(self) -> dict:
        return {pair: i for i, pair in enumerate(self.channels)}

    def actions_of(self, p) -> frozenset:
        """Every action in which ``p`` plays the active role."""
        acts = set()
        for m in self.messages:
            if m.sender == p:
                acts.add(CommAction(m, Direction.SEND))
            if m.receiver == p:
                acts.add(CommAction(m, Direction.RECEIVE))
        return frozenset(acts)

    def is_final_state(self, p, state) -> bool:
        if self.final_mode is FinalMode.ALL:
            return True
        return state in self.automata[p].finals

    def language(self, p) -> automata.Fsa:
        """``L(A_p)`` over the actions of ``p``."""
        return self.automata[p].to_fsa(self.final_mode is FinalMode.ALL, self.actions_of(p))


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self):
        return f"{self.code}: {self.detail}"


def validate(n: Network) -> list:
    violations = []
    participants = set(n.participants)
    if participants != set(n.automata):
        missing = sorted(participants - set(n.automata))
        extra = sorted(set(n.automata) - participants)
        violations.append(Violation(
            "participant-mismatch", f"participants without automaton {missing}, "
                                    f"automata without participant {extra}"))
    for m in sorted(n.messages):
        if m.sender == m.receiver:
            violations.append(Violation(
                "self-message", f"message {m} is sent by a participant to itself"))
        for role in (m.sender, m.receiver):
            if role not in participants:
                violations.append(Violation(
                    "unknown-participant", f"message {m} mentions unknown participant {role!r}"))
    used = set()
    for p in sorted(n.automata):
        a = n.automata[p]
        if a.initial not in a.states:
            violations.append(Violation("bad-initial", f"{p}: initial state {a.initial!r} missing"))
        if not a.finals <= a.states:
            violations.append(Violation(
                "bad-finals", f"{p}: finals {sorted(map(repr, a.finals - a.states))} are not states"))
        for src, action, dst in sorted(a.transitions, key=lambda t: (repr(t[0]), action_key(t[1]),
                                                                     repr(t[2]))):
            label = f"{p}: ({src!r}, {action}, {dst!r})"
            if src not in a.states or dst not in a.states:
                violations.append(Violation("bad-transition-state", f"{label} leaves the state set"))
            if action.actor != p:
                violations.append(Violation(
                    "wrong-role", f"{label} does not have {p} as its active participant"))
            if action.message not in n.messages:
                violations.append(Violation("unknown-message", f"{label} uses a message not in M"))
            used.add(action.message)
    for m in sorted(n.messages - used):
        violations.append(Violation(
            "unused-message",
            f"message {m} occurs on no transition (every message needs a send or receive)"))
    return violations


@dataclass(frozen=True)
class Topology:
    vertices: tuple
    edges: frozenset

    def successors(self, p) -> list:
        return sorted(q for (x, q) in self.edges if x == p)

    def predecessors(self, p) -> list:
        return sorted(x for (x, q) in self.edges if q == p)

    def to_dot(self, name: str = "topology") -> str:
        lines = [f"digraph {_dot_id(name)} {{"]
        for v in self.vertices:
            lines.append(f"  {_dot_id(v)};")
        for p, q in sorted(self.edges):
            lines.append(f"  {_dot_id(p)} -> {_dot_id(q)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _dot_id(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def topology(n: Network) -> Topology:
    return Topology(n.participants, frozenset((m.sender, m.receiver) for m in n.messages))


def senders(n: Network, p) -> frozenset:
    return frozenset(m.sender for m in n.messages if m.receiver == p)


def receivers(n: Network, p) -> frozenset:
    return frozenset(m.receiver for m in n.messages if m.sender == p)


@dataclass(frozen=True)
class TreeInfo:
    root: str
    parent: Mapping[str, Optional[str]]
    children: Mapping[str, tuple] = field(default_factory=dict)

    def path_from_root(self, p) -> list:
        path = [p]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        return path[::-1]

    def top_down(self) -> list:
        order = [self.root]
        for p in order:
            order.extend(self.children[p])
        return order


@dataclass(frozen=True)
class NotTree:
    reason: str  # "disconnected" | "cycle" | "in-degree"
    witness: tuple


def classify(t: Topology) -> Union[TreeInfo, NotTree]:
    vertices = list(t.vertices)
    if not vertices:
        return NotTree("disconnected", ())
    undirected = {v: set() for v in vertices}
    for p, q in t.edges:
        undirected[p].add(q)
        undirected[q].add(p)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        v = stack.pop()
        for w in undirected[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != len(vertices):
        unreached = sorted(set(vertices) - seen)
        return NotTree("disconnected", (vertices[0], unreached[0]))

    cycle = _find_cycle(t)
    if cycle:
        return NotTree("cycle", tuple(cycle))

    for v in vertices:
        preds = t.predecessors(v)
        if len(preds) > 1:
            return NotTree("in-degree", (v, *preds))

    roots = [v for v in vertices if not t.predecessors(v)]
    root = roots[0]
    parent = {v: (t.predecessors(v)[0] if v != root else None) for v in vertices}
    children = {v: tuple(t.successors(v)) for v in vertices}
    return TreeInfo(root, parent, children)


def _find_cycle(t: Topology) -> Optional[list]:
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {v: WHITE for v in t.vertices}
    path: list = []

    def visit(v):
        colour[v] = GREY
        path.append(v)
        for w in t.successors(v):
            if colour[w] == GREY:
                return path[path.index(w):] + [w]
            if colour[w] == WHITE:
                found = visit(w)
                if found:
                    return found
        colour[v] = BLACK
        path.pop()
        return None

    for v in t.vertices:
        if colour[v] == WHITE:
            found = visit(v)
            if found:
                return found
    return None
