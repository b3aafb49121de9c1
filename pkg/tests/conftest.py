"""Shared fixtures: bundled games and their solved arenas, built once per session."""

from __future__ import annotations

import sys
from functools import cache

import pytest

from petrisynth import load_bundled, solve
from petrisynth.extract import extract
from petrisynth.reduction import Reduction

BUNDLED = ("fig1", "fig1_goodbad", "fig3a", "fig3b", "fig5a", "fig5b", "fig6")


@cache
def game(name: str):
    return load_bundled(name)


@cache
def solved(name: str):
    """``(reduction_arena, solution)`` for a bundled game."""
    ra = Reduction(game(name)).build_arena()
    return ra, solve(ra.arena)


@cache
def strategy(name: str):
    ra, sol = solved(name)
    return extract(ra, sol)


@pytest.fixture(params=BUNDLED)
def bundled_name(request):
    return request.param


def random_arena(rng, max_states: int = 8, max_out: int = 3):
    """Seeded random Büchi arena with every state having 1..max_out successors."""
    from petrisynth.buchi import BuchiArena

    n = rng.randint(1, max_states)
    owner = [rng.randint(0, 1) for _ in range(n)]
    succ = [sorted(rng.sample(range(n), rng.randint(1, min(max_out, n)))) for _ in range(n)]
    accepting = frozenset(s for s in range(n) if rng.random() < 0.35)
    return BuchiArena(owner, succ, rng.randrange(n), accepting)


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance verdict lines collected by ``test_acceptance``."""
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
