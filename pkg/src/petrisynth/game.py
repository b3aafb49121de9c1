"""Petri games: place partition, winning conditions and the class check."""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

from .errors import (
    AmbiguousClass,
    BoundViolated,
    NotOneEnvPlayer,
    SystemBoundExceeded,
    UnknownNode,
    WrongConditionKind,
)
from .net import DEFAULT_MARKING_CAP, Multiset, PetriNet, reachable_markings


class MarkingClass(enum.Enum):
    GOOD = "Good"
    BAD = "Bad"
    NEUTRAL = "Neutral"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class MarkingPattern:
    """Finite description of a set of markings.

    A marking matches when every exact count holds, every ranged count lies
    in its closed interval, every listed token sum lies in its interval and,
    with ``others_zero``, no place outside the mentioned ones holds a token.
    """

    exact: tuple[tuple[str, int], ...] = ()
    ranges: tuple[tuple[str, int, int], ...] = ()
    sums: tuple[tuple[tuple[str, ...], int, int], ...] = ()
    others_zero: bool = False

    def __post_init__(self):
        exact = self.exact.items() if isinstance(self.exact, Mapping) else self.exact
        object.__setattr__(self, "exact", tuple(sorted((p, int(n)) for p, n in exact)))
        if isinstance(self.ranges, Mapping):
            ranges = [(p, lo, hi) for p, (lo, hi) in self.ranges.items()]
        else:
            ranges = self.ranges
        object.__setattr__(self, "ranges", tuple(sorted((p, int(lo), int(hi)) for p, lo, hi in ranges)))
        object.__setattr__(
            self,
            "sums",
            tuple(sorted((tuple(sorted(ps)), int(lo), int(hi)) for ps, lo, hi in self.sums)),
        )
        names = [p for p, _ in self.exact]
        if len(set(names)) != len(names):
            raise ValueError("place listed twice in exact constraints")
        for _, lo, hi in self.ranges + tuple((None, lo, hi) for _, lo, hi in self.sums):
            if lo > hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")

    def mentioned(self) -> frozenset[str]:
        places = {p for p, _ in self.exact} | {p for p, _, _ in self.ranges}
        for ps, _, _ in self.sums:
            places.update(ps)
        return frozenset(places)

    def places(self) -> frozenset[str]:
        return self.mentioned()


def matches(pattern: MarkingPattern, marking: Mapping) -> bool:
    for p, n in pattern.exact:
        if marking.get(p, 0) != n:
            return False
    for p, lo, hi in pattern.ranges:
        if not lo <= marking.get(p, 0) <= hi:
            return False
    for ps, lo, hi in pattern.sums:
        if not lo <= sum(marking.get(p, 0) for p in ps) <= hi:
            return False
    if pattern.others_zero:
        mentioned = pattern.mentioned()
        for p in marking:
            if marking[p] and p not in mentioned:
                return False
    return True


def exact_pattern(marking: Mapping) -> MarkingPattern:
    """Pattern matching exactly one marking."""
    return MarkingPattern(exact=tuple(Multiset(marking).items_tuple), others_zero=True)


@dataclass(frozen=True)
class BadPlaces:
    places: frozenset[str]
    kind = "bad-places"


@dataclass(frozen=True)
class BadMarkings:
    patterns: tuple[MarkingPattern, ...]
    kind = "bad-markings"


@dataclass(frozen=True)
class GoodMarkings:
    patterns: tuple[MarkingPattern, ...]
    kind = "good-markings"


@dataclass(frozen=True)
class GoodAndBad:
    good: tuple[MarkingPattern, ...]
    bad: tuple[MarkingPattern, ...]
    kind = "good-and-bad"


WinningCondition = BadPlaces | BadMarkings | GoodMarkings | GoodAndBad


def good_patterns(winning: WinningCondition) -> tuple[MarkingPattern, ...]:
    if isinstance(winning, GoodMarkings):
        return winning.patterns
    if isinstance(winning, GoodAndBad):
        return winning.good
    return ()


def bad_patterns(winning: WinningCondition, bound: int | None = None) -> tuple[MarkingPattern, ...]:
    if isinstance(winning, BadMarkings):
        return winning.patterns
    if isinstance(winning, GoodAndBad):
        return winning.bad
    if isinstance(winning, BadPlaces):
        hi = bound if bound is not None else 1 << 30
        return tuple(MarkingPattern(ranges=((p, 1, hi),)) for p in sorted(winning.places))
    return ()


@dataclass(frozen=True)
class PetriGame:
    """A Petri net with system/environment place partition and a winning condition."""

    net: PetriNet
    system_places: frozenset[str]
    env_places: frozenset[str]
    winning: WinningCondition = field(default_factory=lambda: BadMarkings(()))
    name: str = "game"
    flows: Mapping[str, tuple[tuple[str | None, str | None], ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "system_places", frozenset(self.system_places))
        object.__setattr__(self, "env_places", frozenset(self.env_places))
        if self.system_places & self.env_places:
            raise ValueError(f"places both system and env: {sorted(self.system_places & self.env_places)}")
        if self.system_places | self.env_places != self.net.places:
            missing = self.net.places - (self.system_places | self.env_places)
            extra = (self.system_places | self.env_places) - self.net.places
            raise ValueError(f"partition mismatch: unassigned {sorted(missing)}, undeclared {sorted(extra)}")
        for p in _winning_places(self.winning):
            if p not in self.net.places:
                raise UnknownNode(f"winning condition names undeclared place {p!r}")
        flows = {t: tuple(pairs) for t, pairs in self.flows.items() if pairs}
        for t, pairs in flows.items():
            _check_flow(self, t, pairs)
        object.__setattr__(self, "flows", flows)

    def is_system_only(self, t: str) -> bool:
        """True iff the preset of ``t`` contains no environment place."""
        return not any(p in self.env_places for p in self.net.pre[t])

    @property
    def system_transitions(self) -> list[str]:
        return [t for t in self.net.sorted_transitions if self.is_system_only(t)]

    @property
    def env_transitions(self) -> list[str]:
        return [t for t in self.net.sorted_transitions if not self.is_system_only(t)]

    def system_part(self, marking: Mapping) -> Multiset:
        return Multiset({p: n for p, n in marking.items() if p in self.system_places})


def _check_flow(game: PetriGame, t: str, pairs) -> None:
    """A flow annotation must be a type-preserving matching of pre onto post tokens."""
    if t not in game.net.transitions:
        raise UnknownNode(f"flow annotation for undeclared transition {t!r}")
    pre = dict(game.net.pre[t])
    post = dict(game.net.post[t])
    for src, dst in pairs:
        if src is None and dst is None:
            raise ValueError(f"flow of {t!r}: 'new->drop' is meaningless")
        if src is not None:
            if pre.get(src, 0) < 1:
                raise ValueError(f"flow of {t!r}: {src!r} not (or no longer) in the preset")
            pre[src] -= 1
        if dst is not None:
            if post.get(dst, 0) < 1:
                raise ValueError(f"flow of {t!r}: {dst!r} not (or no longer) in the postset")
            post[dst] -= 1
        if src is not None and dst is not None and (src in game.env_places) != (dst in game.env_places):
            raise ValueError(f"flow of {t!r}: {src}->{dst} changes the player type")


def with_flows(game: PetriGame, flows) -> PetriGame:
    return PetriGame(game.net, game.system_places, game.env_places, game.winning, game.name, flows)


def _winning_places(winning: WinningCondition) -> set[str]:
    if isinstance(winning, BadPlaces):
        return set(winning.places)
    places: set[str] = set()
    for pattern in good_patterns(winning) + bad_patterns(winning):
        places |= pattern.mentioned()
    return places


def classify_marking(game: PetriGame, marking: Mapping) -> MarkingClass:
    is_bad = any(matches(p, marking) for p in bad_patterns(game.winning))
    is_good = any(matches(p, marking) for p in good_patterns(game.winning))
    if is_bad and is_good:
        raise AmbiguousClass(f"marking {Multiset(marking)} is both good and bad")
    if is_bad:
        return MarkingClass.BAD
    if is_good:
        return MarkingClass.GOOD
    return MarkingClass.NEUTRAL


def is_bad(game: PetriGame, marking: Mapping) -> bool:
    return any(matches(p, marking) for p in bad_patterns(game.winning))


@dataclass(frozen=True)
class ClassReport:
    bound: int
    max_system_tokens: int
    reachable_count: int
    reachable: tuple[Multiset, ...] = field(repr=False, compare=False)


def check_decidable_class(
    game: PetriGame,
    k: int,
    cap: int = DEFAULT_MARKING_CAP,
    expected_max_s: int | None = None,
) -> ClassReport:
    """Check k-boundedness of system places and the single environment token.

    The per-place bound is enforced during exploration so unbounded nets are
    rejected instead of exhausting the cap.
    """
    try:
        markings = reachable_markings(game.net, bound_k=k, cap=cap)
    except BoundViolated as exc:
        if exc.place in game.system_places:
            raise SystemBoundExceeded(exc.marking, exc.place, k) from exc
        raise NotOneEnvPlayer(exc.marking) from exc
    max_s = 0
    for m in markings:
        env = 0
        sys_tokens = 0
        for p, n in m.items_tuple:
            if p in game.env_places:
                env += n
            else:
                sys_tokens += n
        if env != 1:
            raise NotOneEnvPlayer(m)
        max_s = max(max_s, sys_tokens)
    if expected_max_s is not None and expected_max_s != max_s:
        raise ValueError(f"declared max_S {expected_max_s} differs from computed {max_s}")
    return ClassReport(k, max_s, len(markings), tuple(markings))


def badplaces_to_badmarkings(game: PetriGame, k: int) -> PetriGame:
    """Rewrite a bad-places condition as one ranged pattern per bad place."""
    if not isinstance(game.winning, BadPlaces):
        raise WrongConditionKind(f"expected bad-places, got {game.winning.kind}")
    patterns = tuple(MarkingPattern(ranges=((p, 1, k),)) for p in sorted(game.winning.places))
    return with_winning(game, BadMarkings(patterns))


def with_winning(game: PetriGame, winning: WinningCondition) -> PetriGame:
    return PetriGame(game.net, game.system_places, game.env_places, winning, game.name, game.flows)


def check_good_bad_disjoint(game: PetriGame, markings: Iterable[Mapping]) -> None:
    """Raise AmbiguousClass on the first marking that is both good and bad."""
    for m in markings:
        classify_marking(game, m)
