import pytest

from conftest import game, strategy
from petrisynth.errors import NotEnabled, UnknownNode
from petrisynth.game import MarkingClass
from petrisynth.net import Multiset
from petrisynth.strategy import BranchingProcess, FiniteStrategy, LabelledNet
from petrisynth.validate import (
    all_passed,
    check_deadlock_avoiding,
    check_deterministic,
    check_homomorphism,
    check_justified_refusal,
    check_winning_bad_markings,
    simulate_play,
    unroll,
    validate_branching_process,
    validate_strategy,
)


def net(events, initial, cls=FiniteStrategy, loop_backs=()):
    """Labelled net from ``(event, pre, post)`` triples; labels are the names before ``#``."""
    names = set(initial)
    for _, pre, post in events:
        names.update(pre)
        names.update(post)
    conditions = {c: c.split("#")[0] for c in names}
    return cls(
        conditions,
        {e: e.split("#")[0] for e, _, _ in events},
        {e: tuple(pre) for e, pre, _ in events},
        {e: tuple(post) for e, _, post in events},
        tuple(initial),
        list(loop_backs),
    )


def fig1_branch(weather, plant):
    """One forecast branch: both power plants play ``plant``; every weather outcome stays possible."""
    w = {"sunny": "s", "cloudy": "c", "rainy": "r"}[weather]
    out = {"s": (3, 2), "c": (2, 1), "r": (1, 0)}[w]
    events = [
        (f"{weather}#{w}0", ["forecast#0"], [f"{w}#{w}1", f"p#{w}a", f"p#{w}b"]),
        (f"{plant}#{w}a", [f"p#{w}a"], [f"k#{w}a{i}" for i in range(2 if plant == "p_h" else 1)]),
        (f"{plant}#{w}b", [f"p#{w}b"], [f"k#{w}b{i}" for i in range(2 if plant == "p_h" else 1)]),
    ]
    for kind, n in zip(("h", "l"), out):
        events.append((f"{w}_{kind}#{w}", [f"{w}#{w}1"], [f"{w}'#{w}{kind}"] + [f"w#{w}{kind}{i}" for i in range(n)]))
    return events


def fig1_strategy(plants):
    events = []
    for weather, plant in plants.items():
        events.extend(fig1_branch(weather, plant))
    return net(events, ["forecast#0"])


class TestSolverStrategies:
    @pytest.mark.parametrize("name", ["fig1", "fig3a", "fig3b"])
    def test_extracted_strategy_passes(self, name):
        results = validate_strategy(strategy(name), game(name))
        assert all_passed(results), [str(r) for r in results]

    @pytest.mark.parametrize("name", ["fig1", "fig3a", "fig3b"])
    def test_unrolled_prefix_is_branching_process(self, name):
        bp = unroll(strategy(name), 6)
        assert validate_branching_process(bp, game(name)).ok
        assert all_passed(validate_strategy(bp, game(name)))

    def test_unroll_is_acyclic_and_grows(self):
        small = unroll(strategy("fig3b"), 3)
        big = unroll(strategy("fig3b"), 8)
        assert len(small.events) < len(big.events)
        assert small.cutoff


class TestBranchingProcess:
    def fig3a_prefix(self):
        # initial cut {e1, s1, q1}; depth 2: t1 and t2, then t3 and t4
        return net(
            [
                ("t1#1", ["e1#0", "s1#0"], ["e2#1", "s2#1"]),
                ("t2#2", ["q1#0"], ["q2#2"]),
                ("t3#3", ["e2#1", "q2#2"], ["e3#3", "q3#3"]),
                ("t4#4", ["s2#1"], ["s3#4"]),
            ],
            ["e1#0", "s1#0", "q1#0"],
            cls=BranchingProcess,
        )

    def test_hand_built_fig3a(self):
        assert validate_branching_process(self.fig3a_prefix(), game("fig3a")).ok

    def test_two_predecessors(self):
        bp = self.fig3a_prefix()
        bp.post["t4#4"] = ("s2#1",)
        rep = validate_branching_process(bp, game("fig3a"))
        assert "single predecessor" in {v.condition for v in rep.violations}

    def test_type_preservation(self):
        bp = self.fig3a_prefix()
        bp.conditions["s3#4"] = "e3"
        rep = validate_branching_process(bp, game("fig3a"))
        assert "type preservation" in {v.condition for v in rep.violations}

    def test_cycle(self):
        bp = net([("t2#1", ["q1#0"], ["q2#1"]), ("t2#2", ["q2#1"], ["q1#0"])], ["q1#0"], BranchingProcess)
        conds = {v.condition for v in validate_branching_process(bp, game("fig3a")).violations}
        assert "acyclic" in conds or "initial places" in conds

    def test_self_conflict(self):
        bp = net(
            [
                ("p_h#1", ["p#0"], ["k#1", "k#2"]),
                ("p_l#2", ["p#0"], ["k#3"]),
                ("x#3", ["k#1", "k#3"], []),
            ],
            ["p#0"],
            BranchingProcess,
        )
        conds = {v.condition for v in validate_branching_process(bp, game("fig1")).violations}
        assert "self-conflict" in conds

    def test_injectivity(self):
        bp = net([("t2#1", ["q1#0"], ["q2#1"]), ("t2#2", ["q1#0"], ["q2#2"])], ["q1#0"], BranchingProcess)
        assert "injectivity" in {v.condition for v in check_homomorphism(bp, game("fig3a")).violations}

    def test_initial_marking(self):
        bp = net([], ["e1#0"], BranchingProcess)
        assert "initial marking" in {v.condition for v in check_homomorphism(bp, game("fig3a")).violations}


class TestStrategyConditions:
    def test_always_low_is_valid_but_not_winning(self):
        fs = fig1_strategy({"sunny": "p_l", "cloudy": "p_l", "rainy": "p_l"})
        g = game("fig1")
        assert check_homomorphism(fs, g).ok
        assert check_justified_refusal(fs, g).ok
        assert check_deterministic(fs, g).ok
        assert check_deadlock_avoiding(fs, g).ok
        verdict = check_winning_bad_markings(fs, g)
        assert not verdict.winning
        assert verdict.bad is not None

    def test_prose_strategy_wins(self):
        fs = fig1_strategy({"sunny": "p_l", "cloudy": "p_h", "rainy": "p_h"})
        # cloudy wants one high and one low plant; two high plants overshoot
        assert not check_winning_bad_markings(fs, game("fig1")).winning
        events = fig1_branch("sunny", "p_l") + fig1_branch("rainy", "p_h")
        cloudy = fig1_branch("cloudy", "p_h")
        cloudy[2] = ("p_l#cb", ["p#cb"], ["k#cb0"])
        fs = net(events + cloudy, ["forecast#0"])
        assert all_passed(validate_strategy(fs, game("fig1")))

    def test_environment_cannot_be_restricted(self):
        events = [e for e in fig1_branch("sunny", "p_l") if not e[0].startswith("s_h")]
        events += fig1_branch("cloudy", "p_l") + fig1_branch("rainy", "p_l")
        rep = check_justified_refusal(net(events, ["forecast#0"]), game("fig1"))
        assert not rep.ok
        assert any("s_h" in v.witness for v in rep.violations)

    def test_forecast_branch_missing(self):
        fs = net(fig1_branch("sunny", "p_l"), ["forecast#0"])
        rep = check_justified_refusal(fs, game("fig1"))
        assert {v.witness.split()[0] for v in rep.violations} == {"cloudy", "rainy"}

    def test_system_refusal_is_justified(self):
        # the plants never produce: refusal by a system place is allowed but deadlocks
        events = [e for e in fig1_branch("sunny", "p_l") if not e[0].startswith("p_l")]
        fs = net(events + fig1_branch("cloudy", "p_l") + fig1_branch("rainy", "p_l"), ["forecast#0"])
        g = game("fig1")
        assert check_justified_refusal(fs, g).ok
        assert not check_deadlock_avoiding(fs, g).ok

    def test_extra_allowed_transition_is_nondeterministic(self):
        fs = strategy("fig1")
        events = dict(fs.events)
        pre = dict(fs.pre)
        post = dict(fs.post)
        p_l = next(e for e in sorted(events) if events[e] == "p_l")
        extra = "p_h#999"
        events[extra] = "p_h"
        pre[extra] = pre[p_l]
        conditions = dict(fs.conditions) | {"k#998": "k", "k#999": "k"}
        post[extra] = ("k#998", "k#999")
        corrupt = FiniteStrategy(conditions, events, pre, post, fs.initial, fs.loop_backs, fs.game)
        results = validate_strategy(corrupt, game("fig1"))
        assert not all_passed(results)
        assert not check_deterministic(corrupt, game("fig1")).ok

    def test_fig5b_nondeterministic_s2(self):
        fs = net(
            [
                ("t1#1", ["e1#0"], ["e2#1"]),
                ("t2#2", ["e1#0"], ["e4#2"]),
                ("t3#3", ["s1#0", "e2#1"], ["e3#3", "s1p#3"]),
                ("t5#4", ["e3#3"], ["e4#4"]),
                ("t4#5", ["e3#3"], ["e5#5"]),
                ("t6#6", ["s1p#3", "s2#0"], ["s1pp#6", "s2#6"]),
                ("t7#7", ["e4#4", "s2#0"], ["s1pp#7", "s2#7", "e6#7"]),
                ("t7#8", ["e4#2", "s2#0"], ["s1pp#8", "s2#8", "e6#8"]),
            ],
            ["e1#0", "s1#0", "s2#0"],
        )
        rep = check_deterministic(fs, game("fig5b"))
        assert not rep.ok
        assert any("{e4, s1p, s2}" in v.witness for v in rep.violations)

    def test_wrong_game(self):
        results = validate_strategy(strategy("fig1"), game("fig3a"))
        assert len(results) == 1 and not results[0].ok

    def test_json_round_trip_keeps_validity(self):
        fs = strategy("fig3b")
        again = FiniteStrategy.from_json(fs.to_json())
        assert again.to_json() == fs.to_json()
        assert all_passed(validate_strategy(again, game("fig3b")))

    def test_fig3b_bad_pair(self):
        fs = net(
            [
                ("t1#1", ["e1#0", "s1#0"], ["e2#1", "s2#1", "s3#1"]),
                ("t4#2", ["s3#1"], ["s7#2"]),
            ],
            ["e1#0", "s1#0", "s5#0"],
        )
        verdict = check_winning_bad_markings(fs, game("fig3b"))
        assert not verdict.winning
        assert verdict.bad["s2"] and verdict.bad["s7"]


class TestSimulate:
    def test_fig1_play(self):
        trace = simulate_play(game("fig1"), game("fig1"), "sunny p_l p_l s_l".split())
        assert trace[-1].marking == Multiset({"s'": 1, "w": 2, "k": 2})
        assert {step.cls for step in trace} == {MarkingClass.NEUTRAL}

    def test_empty_sequence(self):
        trace = simulate_play(game("fig1"), game("fig1"), [])
        assert [s.marking for s in trace] == [game("fig1").net.initial]

    def test_not_enabled_reports_step(self):
        with pytest.raises(NotEnabled) as info:
            simulate_play(game("fig1"), game("fig1"), ["sunny", "c_h"])
        assert info.value.step == 1

    def test_unknown_transition(self):
        with pytest.raises(UnknownNode):
            simulate_play(game("fig1"), game("fig1"), ["nope"])

    def test_strategy_refuses(self):
        fs = strategy("fig1")
        trace = simulate_play(fs, game("fig1"), ["sunny", "p_l", "p_l", "s_h"])
        assert trace[-1].marking == Multiset({"s'": 1, "w": 3, "k": 2})
        with pytest.raises(NotEnabled):
            simulate_play(fs, game("fig1"), ["sunny", "p_h"])

    def test_bad_marking_tagged(self):
        trace = simulate_play(game("fig1"), game("fig1"), "rainy p_l p_l r_l".split())
        assert trace[-1].cls is MarkingClass.BAD


def test_labelled_net_dot_marks_loop_backs():
    dot = strategy("fig3b").to_dot(game("fig3b").system_places)
    assert "style=dashed" in dot
    assert isinstance(strategy("fig3b"), LabelledNet)
