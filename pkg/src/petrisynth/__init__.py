"""Synthesis toolkit for bounded Petri games with one environment player."""

from .buchi import BuchiArena, Solution, attractor, solve, verify_certificate
from .game import (
    BadMarkings,
    BadPlaces,
    GoodAndBad,
    GoodMarkings,
    MarkingClass,
    MarkingPattern,
    PetriGame,
    check_decidable_class,
    classify_marking,
    matches,
)
from .gamefile import format_game, load_bundled, load_game, parse_game
from .net import Multiset, PetriNet, enabled, fire, reachable_markings

__all__ = [
    "BadMarkings",
    "BadPlaces",
    "BuchiArena",
    "GoodAndBad",
    "GoodMarkings",
    "MarkingClass",
    "MarkingPattern",
    "Multiset",
    "PetriGame",
    "PetriNet",
    "Solution",
    "attractor",
    "check_decidable_class",
    "classify_marking",
    "enabled",
    "fire",
    "format_game",
    "load_bundled",
    "load_game",
    "matches",
    "parse_game",
    "reachable_markings",
    "solve",
    "verify_certificate",
]
