import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from petrisynth.errors import CapExceeded, ParseError, WrongConditionKind
from petrisynth.game import GoodAndBad, GoodMarkings, MarkingClass, bad_patterns, good_patterns
from petrisynth.gamefile import format_game, load_bundled, parse_game
from petrisynth.net import Multiset, enabled, fire, reachable_markings
from petrisynth.pcp import (
    ENV_START,
    SINK,
    TAU_IN,
    PcpInstance,
    PlayVerdict,
    canonical_sequence,
    census,
    check_pcp_play,
    check_projection,
    classify_trace,
    disjointness_violations,
    explicit_bad_markings,
    format_pcp,
    gen_pcp_game,
    good_bad_to_good,
    parse_pcp,
    player_groups,
    project,
    random_play,
    shadow,
    start_copy,
    transition_label,
)

AA = PcpInstance(("a",), ("a",), ("a",))
AB = PcpInstance(("a", "b"), ("a",), ("b",))
THREE = PcpInstance(("a", "b"), ("bba", "ab", "a"), ("b", "aa", "bb"))


def counters(place):
    _, ident, x, a = place.split(".")
    return ident, int(x[1:]), int(a[1:])


# ----------------------------------------------------------------------
# instances


def test_parse_and_format_round_trip():
    text = "a b\nbba ab a  # r words\nb aa bb\n"
    inst = parse_pcp(text)
    assert inst == THREE
    assert parse_pcp(format_pcp(inst)) == inst
    assert inst.n == 2


@pytest.mark.parametrize(
    "text",
    ["a\na\n", "a\na b\na\n", "a\nb\nb\n", "ab\na\na\n", "a\na\na\nextra\n"],
)
def test_parse_rejects_malformed(text):
    with pytest.raises(ParseError):
        parse_pcp(text)


def test_is_solution():
    assert AA.is_solution([0])
    assert AA.is_solution([0, 0])
    assert not AA.is_solution([])
    assert not AB.is_solution([0])
    inst = PcpInstance(("a", "b"), ("a", "ab", "bba"), ("baa", "aa", "bb"))
    assert inst.is_solution([2, 1, 2, 0])
    assert not inst.is_solution([2, 1, 2])


def test_transition_label():
    assert transition_label("t1.0.start.00.i0.10") == "0"
    assert transition_label("t2.tau.i0_0_a.01.choice.01") == "tau"
    assert transition_label("t_index_okay") == "t_index_okay"


# ----------------------------------------------------------------------
# census


def test_census_single_letter_instance():
    g = gen_pcp_game(AA)
    c = census(g, player_groups(AA))
    by_name = {comp["name"]: comp for comp in c.components}
    # per player: start, then 9 counter copies of choice, term, i0 and the letter place
    assert by_name["P1"]["places"] == 37
    assert by_name["P2"]["places"] == 37
    assert by_name["env"]["places"] == 7
    assert len(g.env_transitions) == 6
    assert c.places == 81
    assert c.transitions == 80
    assert c.initial_tokens == 3


@pytest.mark.parametrize("inst", [AA, AB, THREE])
def test_census_counts_follow_word_lengths(inst):
    g = gen_pcp_game(inst)
    by_name = {comp["name"]: comp for comp in census(g, player_groups(inst)).components}
    for k, words in ((1, inst.r_words), (2, inst.v_words)):
        letters = sum(len(w) for w in words)
        assert by_name[f"P{k}"]["places"] == 1 + 9 * (2 + len(words) + letters)
    assert by_name["env"]["places"] == 7


def test_partition_and_single_environment_token():
    for inst in (AA, THREE):
        g = gen_pcp_game(inst)
        assert g.system_places | g.env_places == g.net.places
        assert not g.system_places & g.env_places
    g = gen_pcp_game(AA)
    for m in reachable_markings(g.net):
        assert sum(m[p] for p in m.support() if p in g.env_places) == 1


def test_each_system_transition_moves_at_most_one_counter():
    g = gen_pcp_game(THREE)
    for t in g.net.sorted_transitions:
        if not t.startswith("t1.") and not t.startswith("t2."):
            continue
        (src,) = g.net.pre[t].support()
        (dst,) = g.net.post[t].support()
        _, x0, a0 = counters(src)
        _, x1, a1 = counters(dst)
        label = transition_label(t)
        if label.isdigit():
            assert (x1, a1) == ((x0 + 1) % 3, a0)
        elif label in ("tau", "end"):
            assert (x1, a1) == (x0, a0)
        else:
            assert (x1, a1) == (x0, (a0 + 1) % 3)


def test_generated_game_round_trips_through_the_file_format():
    g = gen_pcp_game(AB, "ab")
    again = parse_game(format_game(g))
    assert again.net.places == g.net.places
    assert again.net.transitions == g.net.transitions
    assert isinstance(again.winning, GoodAndBad)
    assert len(good_patterns(again.winning)) == len(good_patterns(g.winning))
    assert len(bad_patterns(again.winning)) == len(bad_patterns(g.winning))


# ----------------------------------------------------------------------
# canonical plays


def test_solution_reaches_good_before_bad():
    r = check_pcp_play(gen_pcp_game(AA), AA, [0])
    assert r.verdict is PlayVerdict.GOOD_BEFORE_BAD
    assert set(r.per_check.values()) == {PlayVerdict.GOOD_BEFORE_BAD}


def test_mismatched_letters_are_bad_first():
    r = check_pcp_play(gen_pcp_game(AB), AB, [0])
    assert r.verdict is PlayVerdict.BAD_FIRST
    assert r.per_check["letter"] is PlayVerdict.BAD_FIRST


def test_longer_solution_of_three_word_instance():
    inst = PcpInstance(("a", "b"), ("a", "ab", "bba"), ("baa", "aa", "bb"))
    g = gen_pcp_game(inst)
    assert check_pcp_play(g, inst, [2, 1, 2, 0]).verdict is PlayVerdict.GOOD_BEFORE_BAD
    assert check_pcp_play(g, inst, [0]).verdict is PlayVerdict.BAD_FIRST


def test_play_input_checks():
    g = gen_pcp_game(AA)
    with pytest.raises(ValueError):
        check_pcp_play(g, AA, [])
    with pytest.raises(ValueError):
        check_pcp_play(g, AA, [1])


def test_canonical_sequence_alternates_players():
    seq = canonical_sequence(AA, [0], "letter")
    assert seq[0] == "t_letter_okay"
    assert {t[:2] for t in seq[1:]} == {"t1", "t2"}
    # player 1 emits its letter before player 2 does
    first_letter = [t for t in seq if transition_label(t) == "a"]
    assert [t[:2] for t in first_letter] == ["t1", "t2"]


def test_trace_classes_for_the_solution():
    g = gen_pcp_game(AA)
    r = check_pcp_play(g, AA, [0])
    m = g.net.initial
    markings = [m]
    for t in r.sequences["index"]:
        m = fire(g.net, m, t)
        markings.append(m)
    classes = classify_trace(g, markings)
    assert MarkingClass.BAD not in classes
    assert classes[-1] is MarkingClass.GOOD


@pytest.mark.parametrize("inst", [AA, AB])
def test_good_and_bad_patterns_are_disjoint_on_reachable_markings(inst):
    g = gen_pcp_game(inst)
    markings = reachable_markings(g.net)
    assert len(markings) > 100
    assert disjointness_violations(g, markings) == []


def test_disjointness_on_sampled_markings_of_three_word_instance():
    g = gen_pcp_game(THREE)
    rng = random.Random(5)
    sample = []
    for _ in range(200):
        m = g.net.initial
        for _ in range(rng.randrange(1, 25)):
            choices = [t for t in g.net.sorted_transitions if enabled(g.net, m, t)]
            if not choices:
                break
            m = fire(g.net, m, rng.choice(choices))
        sample.append(m)
    assert disjointness_violations(g, sample) == []


@settings(max_examples=25, deadline=None)
@given(
    r=st.lists(st.text("ab", min_size=1, max_size=2), min_size=1, max_size=2),
    v=st.lists(st.text("ab", min_size=1, max_size=2), min_size=1, max_size=2),
    seq=st.lists(st.integers(0, 1), min_size=1, max_size=3),
)
def test_play_verdict_agrees_with_solution_check(r, v, seq):
    size = min(len(r), len(v))
    inst = PcpInstance(("a", "b"), tuple(r[:size]), tuple(v[:size]))
    seq = [i % size for i in seq]
    verdict = check_pcp_play(gen_pcp_game(inst), inst, seq).verdict
    if inst.is_solution(seq):
        assert verdict is PlayVerdict.GOOD_BEFORE_BAD
    else:
        assert verdict is not PlayVerdict.GOOD_BEFORE_BAD


# ----------------------------------------------------------------------
# good-only translation


def test_translation_counts_for_bundled_game():
    ga = load_bundled("fig1_goodbad")
    gb = good_bad_to_good(ga)
    bad = explicit_bad_markings(ga)
    assert len(gb.net.places) == 2 * len(ga.net.places) + len(ga.net.initial.support()) + 1
    assert len(gb.net.transitions) == 2 * len(ga.net.transitions) + len(bad) + 1
    assert (len(gb.net.places), len(gb.net.transitions)) == (22, 31)
    assert isinstance(gb.winning, GoodMarkings)
    assert gb.winning.patterns == ga.winning.good


def test_translation_counts_for_pcp_instance():
    ga = gen_pcp_game(AB)
    gb = good_bad_to_good(ga)
    assert (len(gb.net.places), len(gb.net.transitions)) == (166, 194)


def test_translated_initial_marking_uses_start_copies_only():
    ga = load_bundled("fig1_goodbad")
    gb = good_bad_to_good(ga)
    assert all(p.startswith("pi0_") for p in gb.net.initial.support())
    assert project(gb.net.initial) == ga.net.initial
    assert [t for t in gb.net.sorted_transitions if enabled(gb.net, gb.net.initial, t)] == [TAU_IN]
    after = fire(gb.net, gb.net.initial, TAU_IN)
    assert after == ga.net.initial
    # the start copies are used up, so the entry transition never fires again
    for m in reachable_markings(gb.net, cap=20_000):
        if m != gb.net.initial:
            assert not enabled(gb.net, m, TAU_IN)


def test_translation_shape():
    ga = load_bundled("fig1_goodbad")
    gb = good_bad_to_good(ga)
    for t in ga.net.transitions:
        assert gb.net.pre[t] == ga.net.pre[t]
        assert gb.net.post[t] == Multiset({shadow(p): n for p, n in ga.net.post[t].items()})
    assert SINK in gb.env_places
    assert all(shadow(p) in gb.env_places for p in ga.net.places)
    assert all(start_copy(p) in gb.net.places for p in ga.net.initial.support())


def test_translation_requires_good_and_bad():
    with pytest.raises(WrongConditionKind):
        good_bad_to_good(load_bundled("fig1"))


def test_project_drops_the_sink():
    m = Multiset({"pi_s": 1, "pi0_k": 2, "w": 1, SINK: 1})
    assert project(m) == Multiset({"s": 1, "k": 2, "w": 1})


def test_random_plays_are_maximal_or_sink():
    ga = load_bundled("fig1_goodbad")
    gb = good_bad_to_good(ga)
    rng = random.Random(3)
    for _ in range(50):
        play = random_play(gb, ga, rng)
        assert play.reached_sink or play.maximal
        assert play.sequence[0] == TAU_IN
        if play.reached_sink:
            assert play.sequence[-1].startswith("tau_M")


@pytest.mark.parametrize("make", [lambda: load_bundled("fig1_goodbad"), lambda: gen_pcp_game(AB)])
def test_sink_avoiding_plays_project_to_safe_plays(make):
    ga = make()
    gb = good_bad_to_good(ga)
    report = check_projection(ga, gb, plays=50, seed=1)
    assert report.ok
    assert report.avoided_sink == 50


def test_projection_reports_when_plays_run_out():
    ga = load_bundled("fig1_goodbad")
    gb = good_bad_to_good(ga)
    with pytest.raises(CapExceeded):
        check_projection(ga, gb, plays=10, seed=0, max_attempts=1)


def test_environment_start_place_is_initial():
    g = gen_pcp_game(AA)
    assert g.net.initial[ENV_START] == 1
