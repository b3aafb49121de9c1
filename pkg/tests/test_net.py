import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import game
from petrisynth.errors import BoundViolated, CapExceeded, NotEnabled, UnknownNode
from petrisynth.net import (
    Multiset,
    PetriNet,
    enabled,
    enabled_transitions,
    fire,
    is_final,
    post_set,
    pre_set,
    reachable_markings,
)

counts = st.dictionaries(st.sampled_from("abcdef"), st.integers(0, 5), max_size=6)


def fig1():
    return game("fig1").net


class TestMultiset:
    def test_canonical_form_drops_zeros(self):
        assert Multiset({"a": 0, "b": 2}) == Multiset(["b", "b"])
        assert len(Multiset({"a": 0})) == 0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            Multiset({"a": -1})

    def test_repr_uses_weights(self):
        assert repr(Multiset({"p": 2, "s": 1})) == "{p:2, s}"

    def test_equal_to_plain_mapping(self):
        assert Multiset({"a": 1}) == {"a": 1, "b": 0}

    @given(counts, counts)
    def test_add_then_sub_is_identity(self, a, b):
        x, y = Multiset(a), Multiset(b)
        assert (x + y) - y == x

    @given(counts, counts)
    def test_order_agrees_with_counts(self, a, b):
        x, y = Multiset(a), Multiset(b)
        assert (x <= y) == all(y[k] >= n for k, n in x.items())
        assert x <= x + y

    @given(counts)
    def test_hash_is_structural(self, a):
        x = Multiset(a)
        y = Multiset(dict(reversed(list(a.items()))))
        assert x == y and hash(x) == hash(y)

    @given(counts)
    def test_size_counts_multiplicity(self, a):
        assert Multiset(a).size() == sum(a.values()) == len(Multiset(a).elements())


class TestNet:
    def test_presets_of_transitions(self):
        net = fig1()
        assert pre_set(net, "sunny") == Multiset({"forecast": 1})
        assert pre_set(net, "p_h") == Multiset({"p": 1})
        assert post_set(net, "sunny") == Multiset({"s": 1, "p": 2})

    def test_presets_of_places(self):
        net = fig1()
        assert post_set(net, "p") == frozenset({"p_h", "p_l"})
        assert pre_set(net, "forecast") == frozenset()

    def test_unknown_node(self):
        with pytest.raises(UnknownNode):
            pre_set(fig1(), "nowhere")
        with pytest.raises(UnknownNode):
            PetriNet({"a"}, {"t"}, {"t": {"b": 1}}, {}, {})

    def test_place_transition_clash(self):
        with pytest.raises(ValueError):
            PetriNet({"a"}, {"a"}, {}, {}, {})

    def test_enabled_initially(self):
        net = fig1()
        assert enabled(net, net.initial, "sunny")
        assert not enabled(net, net.initial, "p_l")
        assert enabled_transitions(net, net.initial) == ["cloudy", "rainy", "sunny"]

    def test_fire_sequence(self):
        net = fig1()
        m = fire(net, net.initial, "sunny")
        assert m == Multiset({"s": 1, "p": 2})
        m = fire(net, m, "p_l")
        assert m == Multiset({"s": 1, "p": 1, "k": 1})

    def test_fire_disabled(self):
        net = fig1()
        with pytest.raises(NotEnabled):
            fire(net, net.initial, "p_h")

    def test_final_marking(self):
        net = fig1()
        assert is_final(net, Multiset({"s'": 1, "w": 2, "k": 2}))
        assert not is_final(net, net.initial)


class TestReachability:
    def test_fig3a_markings(self):
        # exhaustive oracle, computed by hand from the four transitions
        expected = {
            Multiset(m)
            for m in (
                ["e1", "s1", "q1"],
                ["e1", "s1", "q2"],
                ["e2", "s2", "q1"],
                ["e2", "s3", "q1"],
                ["e2", "s2", "q2"],
                ["e2", "s3", "q2"],
                ["e3", "s2", "q3"],
                ["e3", "s3", "q3"],
            )
        }
        assert set(reachable_markings(game("fig3a").net)) == expected

    def test_counts_of_bundled_games(self):
        sizes = {name: len(reachable_markings(game(name).net)) for name in ("fig1", "fig3b", "fig5a", "fig5b", "fig6")}
        assert sizes == {"fig1": 55, "fig3b": 9, "fig5a": 19, "fig5b": 12, "fig6": 16}

    def test_initial_first(self):
        net = fig1()
        assert reachable_markings(net)[0] == net.initial

    def test_cap(self):
        with pytest.raises(CapExceeded):
            reachable_markings(fig1(), cap=10)
        with pytest.raises(ValueError):
            reachable_markings(fig1(), cap=0)

    def test_bound(self):
        with pytest.raises(BoundViolated) as info:
            reachable_markings(fig1(), bound_k=1)
        assert info.value.place == "p"

    def test_unbounded_net_hits_cap(self):
        net = PetriNet({"a"}, {"t"}, {"t": {"a": 1}}, {"t": {"a": 2}}, {"a": 1})
        with pytest.raises(CapExceeded):
            reachable_markings(net, cap=50)

    @given(st.permutations(sorted(game("fig1").net.transitions)))
    def test_set_independent_of_order(self, order):
        net = fig1()
        assert set(reachable_markings(net, order=order)) == set(reachable_markings(net))

    def test_closed_under_firing(self):
        net = game("fig5a").net
        markings = set(reachable_markings(net))
        for m in markings:
            for t in enabled_transitions(net, m):
                assert fire(net, m, t) in markings
