import random

from hypothesis import given, settings
from hypothesis import strategies as st

from syncheck import pcp
from syncheck.network import (CommAction, CommunicatingAutomaton, Message, Network, NotTree,
                              TreeInfo, classify, receivers, senders, topology, validate)

from networks import S, R, send_before_receive, make_network, random_tree_network


def codes(n):
    return [v.code for v in validate(n)]


def worked_encoding():
    return pcp.encode(pcp.PcpInstance("ab", ["a", "b", "abab"], ["ba", "baa", "b"]))


class TestActions:
    def test_string_direction_is_coerced(self):
        a = CommAction(Message("a", "p", "q"), "!")
        assert a.is_send and a == S("a", "p", "q")
        assert hash(a) == hash(S("a", "p", "q"))

    def test_actor_and_dual(self):
        send = S("a", "p", "q")
        assert send.actor == "p"
        assert send.dual == R("a", "p", "q")
        assert send.dual.actor == "q"

    def test_token_syntax(self):
        assert str(S("a", "r", "q")) == "!a@r>q"
        assert str(R("a", "r", "q")) == "?a@r>q"


class TestValidate:
    def test_small_networks_and_encoding_are_clean(self):
        assert validate(send_before_receive()) == []
        assert validate(worked_encoding()) == []

    def test_unused_message(self):
        n = send_before_receive()
        extra = Network(n.participants, n.automata, n.messages | {Message("z", "r", "q")})
        assert codes(extra) == ["unused-message"]
        assert "z@r>q" in validate(extra)[0].detail

    def test_wrong_role(self):
        automata = {"p": CommunicatingAutomaton.create([(0, S("a", "q", "r"), 1)], 0),
                    "q": CommunicatingAutomaton.create([], 0),
                    "r": CommunicatingAutomaton.create([(0, R("a", "q", "r"), 1)], 0)}
        assert "wrong-role" in codes(make_network(automata))

    def test_self_message(self):
        automata = {"p": CommunicatingAutomaton.create([(0, S("a", "p", "p"), 0)], 0)}
        assert "self-message" in codes(make_network(automata))

    def test_message_outside_m(self):
        n = send_before_receive()
        fewer = Network(n.participants, n.automata, n.messages - {Message("b", "q", "p")})
        assert codes(fewer).count("unknown-message") == 2

    def test_missing_automaton_and_bad_finals(self):
        a = CommunicatingAutomaton(frozenset({0}), 0, frozenset(), frozenset({7}))
        n = Network(("p", "q"), {"p": a}, frozenset())
        assert set(codes(n)) == {"participant-mismatch", "bad-finals"}

    def test_idempotent(self):
        n = make_network({"p": CommunicatingAutomaton.create([(0, S("a", "p", "p"), 0)], 0)})
        assert validate(n) == validate(n)


class TestTopology:
    def test_encoding_edges(self):
        t = topology(worked_encoding())
        assert t.edges == {("I", "W"), ("I", "W'"), ("W", "L"), ("W'", "L"), ("L", "I")}

    def test_send_before_receive_edges(self):
        assert topology(send_before_receive()).edges == {("r", "q"), ("q", "p")}

    def test_single_participant(self):
        n = make_network({"p": CommunicatingAutomaton.create([], 0)})
        t = topology(n)
        assert t.vertices == ("p",) and not t.edges
        info = classify(t)
        assert isinstance(info, TreeInfo) and info.root == "p"

    def test_senders_receivers(self):
        assert senders(worked_encoding(), "L") == {"W", "W'"}
        assert senders(send_before_receive(), "p") == {"q"}
        assert senders(send_before_receive(), "r") == frozenset()
        assert receivers(send_before_receive(), "r") == {"q"}

    def test_dot(self):
        dot = topology(send_before_receive()).to_dot()
        assert dot.startswith('digraph "topology" {')
        assert '"r" -> "q";' in dot and '"q" -> "p";' in dot


class TestClassify:
    def test_send_before_receive(self):
        info = classify(topology(send_before_receive()))
        assert info.root == "r"
        assert info.parent == {"r": None, "q": "r", "p": "q"}
        assert info.path_from_root("p") == ["r", "q", "p"]
        assert info.top_down() == ["r", "q", "p"]

    def test_encoding_has_cycle(self):
        info = classify(topology(worked_encoding()))
        assert info == NotTree("cycle", ("I", "W", "L", "I"))

    def test_disconnected(self):
        automata = {"a": CommunicatingAutomaton.create([(0, S("x", "a", "b"), 0)], 0),
                    "b": CommunicatingAutomaton.create([(0, R("x", "a", "b"), 0)], 0),
                    "c": CommunicatingAutomaton.create([(0, S("y", "c", "d"), 0)], 0),
                    "d": CommunicatingAutomaton.create([(0, R("y", "c", "d"), 0)], 0)}
        assert classify(topology(make_network(automata))).reason == "disconnected"

    def test_in_degree(self):
        automata = {"a": CommunicatingAutomaton.create([(0, S("x", "a", "c"), 0)], 0),
                    "b": CommunicatingAutomaton.create([(0, S("y", "b", "c"), 0)], 0),
                    "c": CommunicatingAutomaton.create([(0, R("x", "a", "c"), 0),
                                                        (0, R("y", "b", "c"), 0)], 0)}
        info = classify(topology(make_network(automata)))
        assert info == NotTree("in-degree", ("c", "a", "b"))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_random_trees_classify(self, seed):
        n = random_tree_network(random.Random(seed))
        t = topology(n)
        info = classify(t)
        assert isinstance(info, TreeInfo)
        assert len(t.edges) == len(t.vertices) - 1
        assert sum(parent is None for parent in info.parent.values()) == 1
        assert validate(n) == []
