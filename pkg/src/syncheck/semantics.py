"""Synchronous, peer-to-peer and mailbox semantics of a network.

Configurations are plain tuples so that breadth-first searches can hash them
cheaply.  ``locals`` lists one state per participant, aligned with
``network.participants``.  ``buffers`` is ``None`` for synchronous
configurations, a tuple of payload sequences aligned with
``network.channels`` for peer-to-peer, and a tuple of message sequences (one
mailbox per participant) for mailbox configurations.

Accepting configurations ignore buffer contents.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional

from . import automata
from .automata import EPSILON, Fsa
from .network import CommAction, Direction, FinalMode, Message, Network, action_key


class Semantics(str, enum.Enum):
    SYNC = "sync"
    P2P = "p2p"
    MAILBOX = "mailbox"


class Configuration(NamedTuple):
    locals: tuple
    buffers: Optional[tuple]

    def as_dict(self, n: Network, sem: "Semantics") -> dict:
        out = {"locals": dict(zip(n.participants, self.locals))}
        if sem is Semantics.P2P:
            out["buffers"] = {f"{p}>{q}": list(b) for (p, q), b in zip(n.channels, self.buffers)}
        elif sem is Semantics.MAILBOX:
            out["buffers"] = {p: [str(m) for m in b] for p, b in zip(n.participants, self.buffers)}
        return out


class SemanticsError(Exception):
    """A step is not enabled in the given configuration."""


class NoMatchingSend(SemanticsError):
    pass


class NoMatchingReceive(SemanticsError):
    pass


class NoTransition(SemanticsError):
    pass


class EmptyOrMismatchedBufferHead(SemanticsError):
    pass


class MailboxHeadMismatch(SemanticsError):
    pass


class WrongFinalMode(ValueError):
    pass


def initial_configuration(n: Network, sem: Semantics) -> Configuration:
    locals_ = tuple(n.automata[p].initial for p in n.participants)
    if sem is Semantics.SYNC:
        return Configuration(locals_, None)
    if sem is Semantics.P2P:
        return Configuration(locals_, tuple(() for _ in n.channels))
    return Configuration(locals_, tuple(() for _ in n.participants))


def is_accepting(n: Network, c: Configuration) -> bool:
    if n.final_mode is FinalMode.ALL:
        return True
    return all(s in n.automata[p].finals for p, s in zip(n.participants, c.locals))


def _targets(n: Network, p, state, action: CommAction) -> list:
    return [t for a, t in n.automata[p].moves.get(state, ()) if a == action]


def _pick(targets: list, target):
    if target is None:
        return targets[0]
    if target not in targets:
        raise NoTransition(f"no transition to {target!r}")
    return target


def _set(tup: tuple, i: int, value) -> tuple:
    return tup[:i] + (value,) + tup[i + 1:]


def step_sync(n: Network, c: Configuration, m: Message, sender_target=None,
              receiver_target=None) -> Configuration:
    """Fire a synchronous exchange of ``m``; both sides move together."""
    i, j = n.index[m.sender], n.index[m.receiver]
    sends = _targets(n, m.sender, c.locals[i], CommAction(m, Direction.SEND))
    if not sends:
        raise NoMatchingSend(f"{m.sender} cannot send {m} from state {c.locals[i]!r}")
    recvs = _targets(n, m.receiver, c.locals[j], CommAction(m, Direction.RECEIVE))
    if not recvs:
        raise NoMatchingReceive(f"{m.receiver} cannot receive {m} in state {c.locals[j]!r}")
    locals_ = _set(c.locals, i, _pick(sends, sender_target))
    locals_ = _set(locals_, j, _pick(recvs, receiver_target))
    return Configuration(locals_, None)


def step_p2p(n: Network, c: Configuration, act: CommAction, target=None) -> Configuration:
    m = act.message
    i = n.index[act.actor]
    targets = _targets(n, act.actor, c.locals[i], act)
    if not targets:
        raise NoTransition(f"{act.actor} has no transition {act} from {c.locals[i]!r}")
    k = n.channel_index[(m.sender, m.receiver)]
    buf = c.buffers[k]
    if act.is_send:
        buffers = _set(c.buffers, k, buf + (m.payload,))
    else:
        if not buf or buf[0] != m.payload:
            head = buf[0] if buf else None
            raise EmptyOrMismatchedBufferHead(
                f"channel {m.sender}>{m.receiver} head is {head!r}, expected {m.payload!r}")
        buffers = _set(c.buffers, k, buf[1:])
    return Configuration(_set(c.locals, i, _pick(targets, target)), buffers)


def step_mailbox(n: Network, c: Configuration, act: CommAction, target=None) -> Configuration:
    m = act.message
    i = n.index[act.actor]
    targets = _targets(n, act.actor, c.locals[i], act)
    if not targets:
        raise NoTransition(f"{act.actor} has no transition {act} from {c.locals[i]!r}")
    if act.is_send:
        k = n.index[m.receiver]
        buffers = _set(c.buffers, k, c.buffers[k] + (m,))
    else:
        box = c.buffers[i]
        if not box:
            raise EmptyOrMismatchedBufferHead(f"mailbox of {act.actor} is empty")
        if box[0] != m:
            raise MailboxHeadMismatch(f"mailbox of {act.actor} starts with {box[0]}, not {m}")
        buffers = _set(c.buffers, i, box[1:])
    return Configuration(_set(c.locals, i, _pick(targets, target)), buffers)


def successors(n: Network, sem: Semantics, c: Configuration,
               buffer_bound: Optional[int] = None) -> tuple:
    """All enabled ``(action, configuration)`` moves, plus how many sends the bound pruned.

    Synchronous moves are labelled by their send action.
    """
    out = []
    pruned = 0
    parts = n.participants
    if sem is Semantics.SYNC:
        for i, p in enumerate(parts):
            for act, t in n.automata[p].moves.get(c.locals[i], ()):
                if not act.is_send:
                    continue
                j = n.index[act.message.receiver]
                dual = act.dual
                for a2, t2 in n.automata[act.message.receiver].moves.get(c.locals[j], ()):
                    if a2 == dual:
                        out.append((act, Configuration(_set(_set(c.locals, i, t), j, t2), None)))
        return out, pruned

    p2p = sem is Semantics.P2P
    for i, p in enumerate(parts):
        for act, t in n.automata[p].moves.get(c.locals[i], ()):
            m = act.message
            if act.is_send:
                k = n.channel_index[(p, m.receiver)] if p2p else n.index[m.receiver]
                buf = c.buffers[k]
                if buffer_bound is not None and len(buf) >= buffer_bound:
                    pruned += 1
                    continue
                item = m.payload if p2p else m
                out.append((act, Configuration(_set(c.locals, i, t), _set(c.buffers, k, buf + (item,)))))
            else:
                k = n.channel_index[(m.sender, p)] if p2p else i
                buf = c.buffers[k]
                if buf and buf[0] == (m.payload if p2p else m):
                    out.append((act, Configuration(_set(c.locals, i, t), _set(c.buffers, k, buf[1:]))))
    return out, pruned


@dataclass(frozen=True)
class Step:
    source: Configuration
    action: CommAction
    target: Configuration


@dataclass(frozen=True)
class Execution:
    semantics: Semantics
    initial: Configuration
    steps: tuple = ()

    @property
    def final(self) -> Configuration:
        return self.steps[-1].target if self.steps else self.initial

    @property
    def labels(self) -> tuple:
        return tuple(s.action for s in self.steps)

    @property
    def trace(self) -> tuple:
        return tuple(a for a in self.labels if a.is_send)

    def projection(self, p) -> tuple:
        """Actions in which ``p`` is active (for sync steps: both sides of the exchange)."""
        out = []
        for a in self.labels:
            if a.actor == p:
                out.append(a)
            elif self.semantics is Semantics.SYNC and a.message.receiver == p:
                out.append(a.dual)
        return tuple(out)

    def __len__(self):
        return len(self.steps)


def replays(n: Network, execution: Execution, require_accepting: bool = True) -> bool:
    """Check that every step of ``execution`` is a legal move from its predecessor."""
    if execution.initial != initial_configuration(n, execution.semantics):
        return False
    current = execution.initial
    for step in execution.steps:
        if step.source != current:
            return False
        moves, _ = successors(n, execution.semantics, current)
        if (step.action, step.target) not in moves:
            return False
        current = step.target
    return is_accepting(n, current) or not require_accepting


def _build_execution(sem, start, parents, node, key=lambda x: x) -> Execution:
    steps = []
    while parents[node] is not None:
        prev, action = parents[node]
        steps.append(Step(key(prev), action, key(node)))
        node = prev
    return Execution(sem, start, tuple(reversed(steps)))


def find_execution(n: Network, sem: Semantics, labels, require_accepting: bool = True) -> Optional[Execution]:
    """An execution labelled exactly by ``labels``, resolving nondeterminism by search."""
    start = initial_configuration(n, sem)
    labels = tuple(labels)
    parents = {(start, 0): None}
    layer = [(start, 0)]
    for pos, label in enumerate(labels):
        nxt = []
        for node in layer:
            moves, _ = successors(n, sem, node[0])
            for act, target in moves:
                if act != label:
                    continue
                child = (target, pos + 1)
                if child not in parents:
                    parents[child] = (node, act)
                    nxt.append(child)
        layer = nxt
        if not layer:
            return None
    for node in layer:
        if is_accepting(n, node[0]) or not require_accepting:
            return _build_execution(sem, start, parents, node, key=lambda x: x[0])
    return None


def realize_trace(n: Network, sem: Semantics, trace, buffer_bound: Optional[int] = None,
                  require_accepting: bool = True) -> Optional[Execution]:
    """A shortest execution whose send projection is ``trace``; receives are free."""
    start = initial_configuration(n, sem)
    trace = tuple(trace)
    root = (start, 0)
    parents = {root: None}
    queue = deque([root])
    while queue:
        node = queue.popleft()
        c, pos = node
        if pos == len(trace) and (not require_accepting or is_accepting(n, c)):
            return _build_execution(sem, start, parents, node, key=lambda x: x[0])
        moves, _ = successors(n, sem, c, buffer_bound)
        for act, target in moves:
            if act.is_send:
                if pos == len(trace) or act != trace[pos]:
                    continue
                child = (target, pos + 1)
            else:
                child = (target, pos)
            if child not in parents:
                parents[child] = (node, act)
                queue.append(child)
    return None


@dataclass(frozen=True)
class Bounds:
    """Exploration limits; ``None`` means unbounded.

    ``max_steps`` counts every transition, ``max_sends`` only send actions
    (the length of the trace), ``buffer_bound`` the length of each buffer.
    """

    max_steps: Optional[int] = None
    buffer_bound: Optional[int] = None
    max_sends: Optional[int] = None

    def as_dict(self) -> dict:
        return {"max_steps": self.max_steps, "buffer_bound": self.buffer_bound,
                "max_sends": self.max_sends}


@dataclass(frozen=True)
class Exploration:
    executions: tuple
    complete: bool
    stats: dict = field(default_factory=dict)


def explore(n: Network, sem: Semantics, bounds: Bounds = Bounds(), collect: bool = True) -> Exploration:
    """Breadth-first search of the configuration graph.

    One execution (a shortest one) is kept per accepting configuration.
    ``complete`` is true iff neither bound cut off any transition.
    """
    buffer_bound = None if sem is Semantics.SYNC else bounds.buffer_bound
    start = initial_configuration(n, sem)
    parents = {start: None}
    depth = {start: 0}
    queue = deque([start])
    accepting = []
    transitions = pruned_steps = pruned_buffer = 0
    while queue:
        c = queue.popleft()
        if is_accepting(n, c):
            accepting.append(c)
        moves, pruned = successors(n, sem, c, buffer_bound)
        pruned_buffer += pruned
        if bounds.max_steps is not None and depth[c] >= bounds.max_steps:
            pruned_steps += len(moves)
            continue
        for act, target in moves:
            transitions += 1
            if target not in parents:
                parents[target] = (c, act)
                depth[target] = depth[c] + 1
                queue.append(target)
    executions = tuple(_build_execution(sem, start, parents, c) for c in accepting) if collect else ()
    stats = {"configurations": len(parents), "transitions": transitions,
             "accepting_configurations": len(accepting),
             "pruned_by_steps": pruned_steps, "pruned_by_buffer": pruned_buffer}
    return Exploration(executions, pruned_steps == 0 and pruned_buffer == 0, stats)


def trace_automaton(n: Network, sem: Semantics, bounds: Bounds) -> tuple:
    """An automaton over send actions whose language is the bounded trace set.

    Returns ``(fsa, complete, stats)``.  Receives become epsilon moves.
    """
    if sem is not Semantics.SYNC and bounds.buffer_bound is None and bounds.max_steps is None \
            and bounds.max_sends is None:
        raise ValueError("asynchronous trace sets need at least one bound")
    buffer_bound = None if sem is Semantics.SYNC else bounds.buffer_bound
    start = (initial_configuration(n, sem), 0, 0)
    ids = {start: 0}
    queue = deque([start])
    transitions = []
    accepting = set()
    pruned_steps = pruned_sends = pruned_buffer = 0
    while queue:
        node = queue.popleft()
        c, steps, sends = node
        nid = ids[node]
        if is_accepting(n, c):
            accepting.add(nid)
        moves, pruned = successors(n, sem, c, buffer_bound)
        pruned_buffer += pruned
        for act, target in moves:
            if bounds.max_steps is not None and steps >= bounds.max_steps:
                pruned_steps += 1
                continue
            if act.is_send and bounds.max_sends is not None and sends >= bounds.max_sends:
                pruned_sends += 1
                continue
            child = (target,
                     steps + 1 if bounds.max_steps is not None else 0,
                     sends + act.is_send if bounds.max_sends is not None else 0)
            if child not in ids:
                ids[child] = len(ids)
                queue.append(child)
            transitions.append((nid, act if act.is_send else EPSILON, ids[child]))
    alphabet = frozenset(CommAction(m, Direction.SEND) for m in n.messages)
    fsa = Fsa(frozenset(range(len(ids))), alphabet, 0, frozenset(accepting), frozenset(transitions))
    stats = {"nodes": len(ids), "transitions": len(transitions), "pruned_by_steps": pruned_steps,
             "pruned_by_sends": pruned_sends, "pruned_by_buffer": pruned_buffer}
    return fsa, pruned_steps == pruned_sends == pruned_buffer == 0, stats


@dataclass(frozen=True)
class TraceSet:
    traces: frozenset
    max_trace_len: int
    buffer_bound: Optional[int]
    complete: bool
    semantics: Semantics

    @property
    def exhaustive_up_to(self) -> dict:
        return {"max_trace_len": self.max_trace_len, "buffer_bound": self.buffer_bound}

    def __contains__(self, trace) -> bool:
        return tuple(trace) in self.traces

    def __iter__(self):
        return iter(self.traces)

    def __len__(self):
        return len(self.traces)

    def sorted(self) -> list:
        return sorted(self.traces, key=automata.shortlex(action_key))

    def truncate(self, k: int) -> frozenset:
        return frozenset(t for t in self.traces if len(t) <= k)


def traces(n: Network, sem: Semantics, bounds: Bounds) -> TraceSet:
    """Send projections of all executions within ``bounds``."""
    length = bounds.max_sends if bounds.max_sends is not None else bounds.max_steps
    if length is None:
        raise ValueError("traces need max_sends or max_steps to bound the trace length")
    fsa, complete, _ = trace_automaton(n, sem, bounds)
    words = automata.enumerate_words(fsa, length).words
    bb = None if sem is Semantics.SYNC else bounds.buffer_bound
    return TraceSet(words, length, bb, complete, sem)


@dataclass(frozen=True)
class TraceComparison:
    equal_up_to_bounds: bool
    witness: Optional[tuple]
    side: Optional[str]  # "async" or "sync": which set owns the witness
    shortest_witness: Optional[tuple]
    sync: TraceSet
    asynchronous: TraceSet


def _witness_order(trace) -> tuple:
    return tuple(action_key(a) for a in trace)


def bounded_trace_equality(n: Network, max_len: int, buffer_bound: int,
                           semantics: Semantics = Semantics.MAILBOX) -> TraceComparison:
    """Compare synchronous and asynchronous trace sets up to ``max_len`` sends.

    ``witness`` is the longest differing trace (shortlex-least among those),
    ``shortest_witness`` the shortest.
    """
    if n.final_mode is not FinalMode.ALL:
        raise WrongFinalMode("bounded trace comparison needs every state to be final")
    if semantics is Semantics.SYNC:
        raise ValueError("compare against p2p or mailbox")
    sync = traces(n, Semantics.SYNC, Bounds(max_sends=max_len))
    asyn = traces(n, semantics, Bounds(max_sends=max_len, buffer_bound=buffer_bound))
    only_async = asyn.traces - sync.traces
    only_sync = sync.traces - asyn.traces
    diff = only_async | only_sync
    if not diff:
        return TraceComparison(True, None, None, None, sync, asyn)
    witness = min(diff, key=lambda t: (-len(t), _witness_order(t)))
    shortest = min(diff, key=lambda t: (len(t), _witness_order(t)))
    side = "async" if witness in only_async else "sync"
    return TraceComparison(False, witness, side, shortest, sync, asyn)


def find_accepting_execution(n: Network, sem: Semantics, bounds: Bounds = Bounds(),
                             reduce: bool = True) -> tuple:
    """Search for an execution ending in an accepting configuration.

    Returns ``(execution or None, complete, stats)``.  The execution found
    has the fewest sends among those within bounds.

    The search is A* over configurations, costing one per send.  The
    estimate sums, over participants, the fewest sends each still needs to
    reach a final state while consuming its current mailbox in order; it
    never overestimates and never drops by more than a step's cost, so the
    first accepting configuration popped is optimal.  An infinite estimate
    means no accepting configuration is reachable and the node is dropped.

    With ``reduce`` set under mailbox semantics, a participant in a non-final
    state offering only receives must eventually consume its current mailbox
    head, so that receive is taken immediately and other moves are deferred.
    Neither the estimate nor this reduction loses accepting configurations
    within bounds.
    """
    buffer_bound = None if sem is Semantics.SYNC else bounds.buffer_bound
    estimate = _SendsToGo(n, sem)
    start = initial_configuration(n, sem)
    timed = bounds.max_steps is not None

    def key(c, steps):
        return (c, steps) if timed else c

    root = key(start, 0)
    parents = {root: None}
    cost = {root: 0}
    h0 = estimate(start)
    heap = [] if h0 is None else [(h0, 0, 0, start, 0)]
    order = itertools.count(1)
    expanded = set()
    pruned_steps = pruned_sends = pruned_buffer = dead = 0
    if h0 is None:
        dead += 1
    elif bounds.max_sends is not None and h0 > bounds.max_sends:
        pruned_sends += 1
        heap = []
    while heap:
        _, sends, _, c, steps = heapq.heappop(heap)
        node = key(c, steps)
        if node in expanded or cost[node] < sends:
            continue
        expanded.add(node)
        if is_accepting(n, c):
            execution = _build_execution(sem, start, parents, node,
                                         key=(lambda x: x[0]) if timed else (lambda x: x))
            return execution, True, {"expanded": len(expanded), "dead_pruned": dead}
        moves, pruned = successors(n, sem, c, buffer_bound)
        pruned_buffer += pruned
        if reduce and sem is Semantics.MAILBOX:
            forced = _forced_receive(n, c)
            if forced is not None:
                moves = [(a, t) for a, t in moves if a.actor == forced and a.is_receive]
        for act, target in moves:
            if timed and steps >= bounds.max_steps:
                pruned_steps += 1
                continue
            nsends = sends + act.is_send
            child = key(target, steps + 1)
            if child in cost and cost[child] <= nsends:
                continue
            h = estimate(target)
            if h is None:
                dead += 1
                continue
            if bounds.max_sends is not None and nsends + h > bounds.max_sends:
                pruned_sends += 1
                continue
            cost[child] = nsends
            parents[child] = (node, act)
            heapq.heappush(heap, (nsends + h, nsends, next(order), target, steps + 1))
    stats = {"expanded": len(expanded), "dead_pruned": dead, "pruned_by_steps": pruned_steps,
             "pruned_by_sends": pruned_sends, "pruned_by_buffer": pruned_buffer}
    return None, pruned_steps == pruned_sends == pruned_buffer == 0, stats


class _SendsToGo:
    """Lower bound on the sends still needed before every participant is final.

    Per participant: a shortest path (counting sends) to a final state whose
    receives start by consuming the current mailbox in order; once the
    mailbox is used up further receives are unconstrained.  Other semantics
    ignore buffer contents.
    """

    def __init__(self, n: Network, sem: Semantics):
        self.n = n
        self.use_mailbox = sem is Semantics.MAILBOX
        self.cache: dict = {}

    def __call__(self, c: Configuration) -> Optional[int]:
        if self.n.final_mode is FinalMode.ALL:
            return 0
        total = 0
        for i, p in enumerate(self.n.participants):
            box = c.buffers[i] if self.use_mailbox else ()
            d = self.cache.get((p, c.locals[i], box), -1)
            if d == -1:
                d = self.cache[(p, c.locals[i], box)] = self._distance(p, c.locals[i], box)
            if d is None:
                return None
            total += d
        return total

    def _distance(self, p, state, box: tuple) -> Optional[int]:
        a = self.n.automata[p]
        end = len(box)
        best = {(state, 0): 0}
        queue = deque([(state, 0)])
        while queue:
            s, k = queue.popleft()
            d = best[(s, k)]
            if s in a.finals:
                return d
            for act, t in a.moves.get(s, ()):
                if act.is_send:
                    nxt, w = (t, k), 1
                elif k < end:
                    if act.message != box[k]:
                        continue
                    nxt, w = (t, k + 1), 0
                else:
                    nxt, w = (t, k), 0
                if nxt not in best or best[nxt] > d + w:
                    best[nxt] = d + w
                    if w:
                        queue.append(nxt)
                    else:
                        queue.appendleft(nxt)
        return None


def _forced_receive(n: Network, c: Configuration):
    for i, p in enumerate(n.participants):
        s = c.locals[i]
        if n.is_final_state(p, s) or not c.buffers[i]:
            continue
        moves = n.automata[p].moves.get(s, ())
        if moves and all(a.is_receive for a, _ in moves):
            return p
    return None


def trace_tokens(trace) -> list:
    return [str(a) for a in trace]


def iter_traces_sorted(ts: TraceSet) -> Iterator[tuple]:
    return iter(ts.sorted())
