import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_arena
from petrisynth.buchi import (
    PLAYER0,
    PLAYER1,
    BuchiArena,
    Solution,
    arena_from_text,
    arena_to_dot,
    arena_to_text,
    attractor,
    brute_force_winners,
    lasso_accepting,
    solve,
    verify_certificate,
)
from petrisynth.errors import ArenaInvalid, ParseError


def chain():
    # 0 (P0) chooses between the accepting loop at 1 and the dead loop at 2
    return BuchiArena([PLAYER0, PLAYER1, PLAYER1], [[1, 2], [1], [2]], 0, frozenset({1}))


class TestArena:
    def test_dead_end_rejected(self):
        with pytest.raises(ArenaInvalid):
            BuchiArena([0, 0], [[1], []], 0, frozenset())

    def test_edge_out_of_range(self):
        with pytest.raises(ArenaInvalid):
            BuchiArena([0], [[3]], 0, frozenset())

    def test_bad_owner(self):
        with pytest.raises(ArenaInvalid):
            BuchiArena([2], [[0]], 0, frozenset())

    def test_text_round_trip(self):
        a = chain()
        b = arena_from_text(arena_to_text(a))
        assert (b.owner, b.succ, b.initial, b.accepting) == (a.owner, a.succ, a.initial, a.accepting)

    def test_text_errors(self):
        with pytest.raises(ParseError):
            arena_from_text("nonsense")
        with pytest.raises(ParseError):
            arena_from_text("arena 2 initial 0\n0 0 - 1\n")

    def test_dot_conventions(self):
        dot = arena_to_dot(chain())
        assert 's0 [label="0", style=filled, fillcolor="gray85", penwidth=2]' in dot
        assert "peripheries=2" in dot
        assert "s0 -> s2;" in dot

    def test_dot_subset(self):
        dot = arena_to_dot(chain(), states=[0, 1])
        assert "s2" not in dot


class TestSolver:
    def test_chain(self):
        sol = solve(chain())
        assert sol.win0 == {0, 1}
        assert sol.strategy0[0] == 1

    def test_attractor_ranks(self):
        attr, rank = attractor(chain(), PLAYER0, {1})
        assert attr == {0, 1}
        assert rank == {1: 0, 0: 1}

    def test_player1_escapes(self):
        a = BuchiArena([PLAYER1, PLAYER0, PLAYER0], [[1, 2], [1], [2]], 0, frozenset({1}))
        assert solve(a).winner(0) == PLAYER1

    def test_accepting_visited_finitely_often(self):
        # acceptance only on a transient prefix
        a = BuchiArena([PLAYER0, PLAYER0], [[1], [1]], 0, frozenset({0}))
        assert solve(a).win0 == frozenset()

    def test_corrupted_solution_rejected(self):
        a = chain()
        sol = solve(a)
        assert verify_certificate(a, sol)
        bad = Solution(sol.win0, sol.win1, {0: 2}, sol.ranks)
        assert not verify_certificate(a, bad)
        swapped = Solution(sol.win1, sol.win0, {}, sol.ranks)
        assert not verify_certificate(a, swapped)

    def test_accepting_free_cycle_rejected(self):
        a = BuchiArena([PLAYER0, PLAYER0], [[0, 1], [1]], 0, frozenset({1}))
        fake = Solution(frozenset({0, 1}), frozenset(), {0: 0, 1: 1}, {})
        assert not verify_certificate(a, fake)

    def test_lasso(self):
        assert lasso_accepting(chain(), 0, [1, 1, 2])
        assert not lasso_accepting(chain(), 0, [2, 1, 2])

    def test_seeded_random_agrees_with_enumeration(self):
        rng = random.Random(7)
        for _ in range(100):
            a = random_arena(rng)
            sol = solve(a)
            assert [sol.winner(s) for s in range(a.n)] == brute_force_winners(a)
            assert verify_certificate(a, sol)


@st.composite
def arenas(draw):
    n = draw(st.integers(1, 6))
    owner = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    succ = [draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=3, unique=True)) for _ in range(n)]
    accepting = draw(st.frozensets(st.integers(0, n - 1)))
    return BuchiArena(owner, succ, draw(st.integers(0, n - 1)), accepting)


@settings(max_examples=150, deadline=None)
@given(arenas())
def test_solver_matches_enumeration(a):
    sol = solve(a)
    assert [sol.winner(s) for s in range(a.n)] == brute_force_winners(a)
    assert verify_certificate(a, sol)


@settings(max_examples=100, deadline=None)
@given(arenas())
def test_following_strategy_wins_against_any_positional_opponent(a):
    sol = solve(a)
    rng = random.Random(a.n)
    for _ in range(5):
        choice = [sol.strategy0[s] if s in sol.strategy0 else rng.choice(a.succ[s]) for s in range(a.n)]
        for s in sol.win0:
            assert lasso_accepting(a, s, choice)


@settings(max_examples=100, deadline=None)
@given(arenas())
def test_winning_regions_are_traps(a):
    sol = solve(a)
    for s in sol.win1:
        if a.owner[s] == PLAYER0:
            assert all(d in sol.win1 for d in a.succ[s])
        else:
            assert any(d in sol.win1 for d in a.succ[s])
