import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from syncheck import automata, tree
from syncheck.automata import enumerate_words
from syncheck.network import CommunicatingAutomaton
from syncheck.semantics import (Bounds, Semantics, WrongFinalMode, bounded_trace_equality,
                                realize_trace, replays, traces)
from syncheck.tree import Condition, Result

from networks import S, R, chain, send_before_receive, two_orders, make_network, random_corpus, random_tree_network


def lang_words(il, k):
    return set(enumerate_words(il.lang, k).words)


def counterexample_network():
    """A tree where a receiver can commit to sending and never receive again.

    p2 -> p1 -> p3 -> p0.  From its initial state p3 may send to p0 and enter
    a state that only sends, so p1's message is never consumed.
    """
    return random_corpus(2024, 200)[7]


def ring():
    return make_network({
        "p": CommunicatingAutomaton.create([(0, S("a", "p", "q"), 0), (0, R("c", "r", "p"), 0)], 0),
        "q": CommunicatingAutomaton.create([(0, R("a", "p", "q"), 0), (0, S("b", "q", "r"), 0)], 0),
        "r": CommunicatingAutomaton.create([(0, R("b", "q", "r"), 0), (0, S("c", "r", "p"), 0)], 0),
    })


class TestInfluencedLanguages:
    def test_send_before_receive(self):
        langs = tree.influenced_languages(send_before_receive())
        assert lang_words(langs["q"], 4) == {(), (S("b", "q", "p"),),
                                             (S("b", "q", "p"), R("a", "r", "q"))}

    def test_two_orders_q_has_seven_words(self):
        got = lang_words(tree.influenced_languages(two_orders())["q"], 4)
        a, b, c = R("a", "r", "q"), S("b", "q", "p"), S("c", "q", "p")
        assert got == {(), (a,), (a, b), (a, b, c), (b,), (b, c), (b, c, a)}

    def test_two_orders_p_pruned(self):
        n = two_orders()
        full = set(enumerate_words(n.language("p"), 3).words)
        pruned = lang_words(tree.influenced_languages(n)["p"], 3)
        assert full - pruned == {(R("c", "q", "p"),), (R("c", "q", "p"), R("b", "q", "p"))}

    def test_root_is_unrestricted(self):
        n = two_orders()
        root = tree.influenced_language(n, "r")
        assert automata.equivalent(root.lang, automata.trim(automata.determinize(n.language("r"))))
        assert enumerate_words(root.in_, 3).words == {()}

    def test_non_root_needs_parent_language(self):
        with pytest.raises(ValueError):
            tree.influenced_language(send_before_receive(), "q")

    def test_refuses_declared_finals(self):
        n = make_network({
            "p": CommunicatingAutomaton.create([(0, S("a", "p", "q"), 1)], 0, finals=[1]),
            "q": CommunicatingAutomaton.create([(0, R("a", "p", "q"), 1)], 0, finals=[1]),
        }, final_mode="declared")
        with pytest.raises(WrongFinalMode):
            tree.influenced_languages(n)

    def test_refuses_non_tree(self):
        with pytest.raises(tree.NotATree):
            tree.influenced_languages(ring())

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_subset_and_prefix_closed(self, seed):
        n = random_tree_network(random.Random(seed))
        for p, il in tree.influenced_languages(n).items():
            assert automata.includes(automata.extend_alphabet(n.language(p), il.lang.alphabet),
                                     il.lang).holds
            assert automata.is_prefix_closed(il.lang)


class TestShuffle:
    def test_single_swap(self):
        x, y = S("x", "p", "q"), R("y", "r", "p")
        image = tree.shuffle_one_step_image(automata.from_words([(x, y)]))
        assert enumerate_words(image, 3).words == {(y, x)}

    def test_no_receives_no_image(self):
        a = automata.from_words([(S("x", "p", "q"), S("x", "p", "q"))])
        assert automata.is_empty(tree.shuffle_one_step_image(a))
        assert tree.is_shuffle_closed(a).closed

    def test_two_orders_image(self):
        q = tree.influenced_languages(two_orders())["q"]
        image = tree.shuffle_one_step_image(q.lang)
        a, b, c = R("a", "r", "q"), S("b", "q", "p"), S("c", "q", "p")
        assert enumerate_words(image, 4).words == {(b, a, c)}
        closed = set(enumerate_words(automata.prefix_closure(image), 4).words)
        assert (b, a) in closed and (b, a, c) in closed
        assert tree.shuffled_words(q.lang, 4) - lang_words(q, 4) == {(b, a), (b, a, c)}

    def test_send_before_receive_not_closed(self):
        check = tree.is_shuffle_closed(tree.influenced_languages(send_before_receive())["q"])
        assert not check.closed
        assert check.image_word == (R("a", "r", "q"), S("b", "q", "p"))
        assert check.witness == (R("a", "r", "q"),)
        assert check.swap_index == 0

    def test_two_orders_not_closed(self):
        check = tree.is_shuffle_closed(tree.influenced_languages(two_orders())["q"])
        assert not check.closed
        assert check.witness == (S("b", "q", "p"), R("a", "r", "q"))

    def test_chain_closed(self):
        for il in tree.influenced_languages(chain()).values():
            assert tree.is_shuffle_closed(il).closed


class TestCoverage:
    def test_send_before_receive_child_p(self):
        langs = tree.influenced_languages(send_before_receive())
        assert tree.coverage_check(send_before_receive(), "q", "p", langs["q"], langs["p"]).holds

    def test_two_orders_holds_everywhere(self):
        n = two_orders()
        langs = tree.influenced_languages(n)
        assert tree.coverage_check(n, "r", "q", langs["r"], langs["q"]).holds
        assert tree.coverage_check(n, "q", "p", langs["q"], langs["p"]).holds

    def test_unmatched_send(self):
        n = make_network({
            "q": CommunicatingAutomaton.create([(0, S("a", "q", "p"), 0), (0, S("z", "q", "p"), 0)], 0),
            "p": CommunicatingAutomaton.create([(0, R("a", "q", "p"), 0), (1, R("z", "q", "p"), 1)], 0),
        })
        langs = tree.influenced_languages(n)
        check = tree.coverage_check(n, "q", "p", langs["q"], langs["p"])
        assert not check.holds
        assert [str(m) for m in check.witness] == ["z@q>p"]

    def test_receives_everything(self):
        n = chain()
        langs = tree.influenced_languages(n)
        assert tree.coverage_check(n, "r", "q", langs["r"], langs["q"]).holds


class TestRealizeExecution:
    def test_send_before_receive(self):
        n = send_before_receive()
        execution = tree.realize_execution(n, "q", (S("b", "q", "p"), R("a", "r", "q")))
        assert execution.labels == (S("a", "r", "q"), S("b", "q", "p"), R("a", "r", "q"))
        assert replays(n, execution)

    def test_root_base_case(self):
        n = two_orders()
        w = (S("a", "r", "q"),)
        assert tree.realize_execution(n, "r", w).labels == w

    def test_two_orders(self):
        n = two_orders()
        w = (S("b", "q", "p"), S("c", "q", "p"), R("a", "r", "q"))
        execution = tree.realize_execution(n, "q", w)
        assert execution.projection("q") == w
        assert execution.projection("p") == ()
        assert S("a", "r", "q") in execution.labels

    def test_rejects_word_outside_language(self):
        with pytest.raises(ValueError):
            tree.realize_execution(send_before_receive(), "q", (R("a", "r", "q"),))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_random_words(self, seed):
        n = random_tree_network(random.Random(seed))
        langs = tree.influenced_languages(n)
        info = tree._tree(n)
        for q, il in langs.items():
            for w in enumerate_words(il.lang, 3).words:
                execution = tree.realize_execution(n, q, w, langs)
                assert replays(n, execution)
                assert execution.projection(q) == w
                assert all(execution.projection(p) == () for p in info.children[q])


class TestDecide:
    def test_send_before_receive(self):
        verdict = tree.decide(send_before_receive())
        assert verdict.result is Result.NOT_SYNCHRONISABLE
        shuffle = [f for f in verdict.failures if f.condition is Condition.SHUFFLE_CLOSURE]
        assert [f.pair for f in shuffle] == [("r", "q")]
        assert shuffle[0].lifted_trace == (S("a", "r", "q"), S("b", "q", "p"))
        assert verdict.witness == (S("a", "r", "q"), S("b", "q", "p"))

    def test_two_orders(self):
        verdict = tree.decide(two_orders())
        assert not verdict.synchronisable
        assert [(f.pair, f.condition) for f in verdict.failures] == [(("r", "q"), Condition.SHUFFLE_CLOSURE)]
        assert verdict.witness == (S("b", "q", "p"), S("a", "r", "q"), S("c", "q", "p"))

    def test_chain(self):
        verdict = tree.decide(chain())
        assert verdict.synchronisable and verdict.failures == ()
        assert bounded_trace_equality(chain(), 4, 2).equal_up_to_bounds

    def test_without_lifting(self):
        verdict = tree.decide(two_orders(), lift=False)
        assert not verdict.synchronisable
        assert all(f.lifted_trace is None for f in verdict.failures)

    def test_not_a_tree(self):
        with pytest.raises(tree.NotATree) as err:
            tree.decide(ring())
        assert err.value.info.reason == "cycle"

    def test_invalid_network(self):
        n = make_network({"p": CommunicatingAutomaton.create([(0, S("a", "p", "p"), 0)], 0)})
        with pytest.raises(tree.InvalidNetwork):
            tree.decide(n)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_lifted_traces_are_genuine(self, seed):
        n = random_tree_network(random.Random(seed))
        verdict = tree.decide(n)
        assert verdict.synchronisable == (not verdict.failures)
        for f in verdict.failures:
            if f.lifted_trace is None:
                continue
            assert replays(n, f.lifted_execution)
            k = len(f.lifted_trace)
            assert f.lifted_trace not in traces(n, Semantics.SYNC, Bounds(max_sends=k))


class TestSoundnessGap:
    """The decision procedure can report synchronisable when it is not.

    Shuffle closure and coverage both hold here, yet mailbox semantics lets
    p1 send to p3 after p3 has committed to a branch that never receives.
    """

    def test_checks_pass(self):
        n = counterexample_network()
        assert tree.decide(n).synchronisable

    def test_but_traces_differ(self):
        n = counterexample_network()
        trace = (S("a", "p3", "p0"), S("a", "p1", "p3"))
        execution = realize_trace(n, Semantics.MAILBOX, trace, 2)
        assert execution is not None and replays(n, execution)
        assert trace not in traces(n, Semantics.SYNC, Bounds(max_sends=2))
        assert not bounded_trace_equality(n, 2, 2).equal_up_to_bounds
