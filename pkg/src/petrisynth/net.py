"""Multisets, place/transition nets, firing and bounded reachability."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field

from .errors import BoundViolated, CapExceeded, NotEnabled, UnknownNode

DEFAULT_MARKING_CAP = 1_000_000


class Multiset(Mapping):
    """Immutable multiset with canonical form (no zero entries).

    Equality and hashing are structural over the sorted entries, so two
    multisets built in different orders are interchangeable as dict keys.
    """

    __slots__ = ("_items", "_dict", "_hash")

    def __init__(self, entries: Mapping | Iterable | None = None):
        counts: dict = {}
        if entries is None:
            pass
        elif isinstance(entries, Multiset):
            counts = dict(entries._dict)
        elif isinstance(entries, Mapping):
            for key, n in entries.items():
                if n < 0:
                    raise ValueError(f"negative multiplicity {n} for {key!r}")
                if n:
                    counts[key] = counts.get(key, 0) + n
        else:
            for key in entries:
                counts[key] = counts.get(key, 0) + 1
        self._items = tuple(sorted(counts.items()))
        self._dict = dict(self._items)
        self._hash = hash(self._items)

    @classmethod
    def _from_counts(cls, counts: dict) -> Multiset:
        return cls({k: v for k, v in counts.items() if v})

    def __getitem__(self, key) -> int:
        return self._dict.get(key, 0)

    def __contains__(self, key) -> bool:
        return key in self._dict

    def __iter__(self) -> Iterator:
        return (k for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Multiset):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self._dict == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __lt__(self, other: Multiset) -> bool:
        return self._items < other._items

    def __repr__(self) -> str:
        return "{" + ", ".join(k if n == 1 else f"{k}:{n}" for k, n in self._items) + "}"

    @property
    def items_tuple(self) -> tuple:
        """Sorted ``(element, count)`` pairs; the canonical encoding."""
        return self._items

    def size(self) -> int:
        """Total number of elements counted with multiplicity."""
        return sum(n for _, n in self._items)

    def support(self) -> frozenset:
        return frozenset(self._dict)

    def elements(self) -> list:
        """Elements repeated by multiplicity, in sorted order."""
        return [k for k, n in self._items for _ in range(n)]

    def __add__(self, other: Mapping) -> Multiset:
        counts = dict(self._dict)
        for k, n in other.items():
            counts[k] = counts.get(k, 0) + n
        return Multiset._from_counts(counts)

    def __sub__(self, other: Mapping) -> Multiset:
        counts = dict(self._dict)
        for k, n in other.items():
            if k in counts:
                counts[k] = max(0, counts[k] - n)
        return Multiset._from_counts(counts)

    def __and__(self, other: Mapping) -> Multiset:
        return Multiset._from_counts({k: min(n, other.get(k, 0)) for k, n in self._dict.items()})

    def __or__(self, other: Mapping) -> Multiset:
        counts = dict(self._dict)
        for k, n in other.items():
            counts[k] = max(counts.get(k, 0), n)
        return Multiset._from_counts(counts)

    def __le__(self, other: Mapping) -> bool:
        return all(other.get(k, 0) >= n for k, n in self._items)

    def __ge__(self, other: Mapping) -> bool:
        return Multiset(other) <= self

    def issubset(self, other: Mapping) -> bool:
        return self <= other


Marking = Multiset
EMPTY = Multiset()


@dataclass(frozen=True)
class PetriNet:
    """A weighted place/transition net with an initial marking.

    ``pre`` and ``post`` map every transition to its pre- and postset
    multisets; together they are the weighted flow relation.
    """

    places: frozenset[str]
    transitions: frozenset[str]
    pre: Mapping[str, Multiset]
    post: Mapping[str, Multiset]
    initial: Multiset
    _consumers: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)
    _producers: Mapping[str, tuple[str, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "places", frozenset(self.places))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        clash = self.places & self.transitions
        if clash:
            raise ValueError(f"ids used as both place and transition: {sorted(clash)}")
        pre = {t: Multiset(self.pre.get(t, {})) for t in self.transitions}
        post = {t: Multiset(self.post.get(t, {})) for t in self.transitions}
        for table in (self.pre, self.post):
            for t in table:
                if t not in self.transitions:
                    raise UnknownNode(f"flow names undeclared transition {t!r}")
        for t in self.transitions:
            for p in list(pre[t]) + list(post[t]):
                if p not in self.places:
                    raise UnknownNode(f"flow of {t!r} names undeclared place {p!r}")
        initial = Multiset(self.initial)
        for p in initial:
            if p not in self.places:
                raise UnknownNode(f"initial marking names undeclared place {p!r}")
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)
        object.__setattr__(self, "initial", initial)
        consumers: dict[str, list[str]] = {p: [] for p in self.places}
        producers: dict[str, list[str]] = {p: [] for p in self.places}
        for t in sorted(self.transitions):
            for p in pre[t]:
                consumers[p].append(t)
            for p in post[t]:
                producers[p].append(t)
        object.__setattr__(self, "_consumers", {p: tuple(v) for p, v in consumers.items()})
        object.__setattr__(self, "_producers", {p: tuple(v) for p, v in producers.items()})

    @property
    def sorted_transitions(self) -> list[str]:
        return sorted(self.transitions)

    def consumers(self, place: str) -> tuple[str, ...]:
        """Transitions whose preset contains ``place`` (sorted)."""
        self._check_place(place)
        return self._consumers[place]

    def producers(self, place: str) -> tuple[str, ...]:
        """Transitions whose postset contains ``place`` (sorted)."""
        self._check_place(place)
        return self._producers[place]

    def arcs(self) -> int:
        """Number of weighted arcs, counting each (source, target) pair once."""
        return sum(len(self.pre[t]) + len(self.post[t]) for t in self.transitions)

    def _check_place(self, place: str) -> None:
        if place not in self.places:
            raise UnknownNode(f"unknown place {place!r}")

    def _check_transition(self, t: str) -> None:
        if t not in self.transitions:
            raise UnknownNode(f"unknown transition {t!r}")


def pre_set(net: PetriNet, node: str):
    """Preset of a node: a multiset for transitions, a set of transitions for places."""
    if node in net.transitions:
        return net.pre[node]
    if node in net.places:
        return frozenset(net.producers(node))
    raise UnknownNode(f"unknown node {node!r}")


def post_set(net: PetriNet, node: str):
    """Postset of a node: a multiset for transitions, a set of transitions for places."""
    if node in net.transitions:
        return net.post[node]
    if node in net.places:
        return frozenset(net.consumers(node))
    raise UnknownNode(f"unknown node {node!r}")


def enabled(net: PetriNet, marking: Mapping, t: str) -> bool:
    net._check_transition(t)
    return net.pre[t] <= marking


def fire(net: PetriNet, marking: Mapping, t: str) -> Multiset:
    """Fire ``t`` in ``marking`` and return the successor marking."""
    if not enabled(net, marking, t):
        raise NotEnabled(t, Multiset(marking))
    return Multiset(marking) - net.pre[t] + net.post[t]


def enabled_transitions(net: PetriNet, marking: Mapping) -> list[str]:
    return [t for t in net.sorted_transitions if net.pre[t] <= marking]


def is_final(net: PetriNet, marking: Mapping) -> bool:
    return not enabled_transitions(net, marking)


def reachable_markings(
    net: PetriNet,
    bound_k: int | None = None,
    cap: int = DEFAULT_MARKING_CAP,
    order: Iterable[str] | None = None,
) -> list[Multiset]:
    """Breadth-first closure of the initial marking under firing.

    Returns the markings in discovery order. ``order`` overrides the
    transition exploration order (sorted ids by default); the resulting set
    does not depend on it.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    transitions = list(order) if order is not None else net.sorted_transitions
    _check_bound(net.initial, bound_k)
    seen = {net.initial}
    result = [net.initial]
    queue = deque([net.initial])
    while queue:
        marking = queue.popleft()
        for t in transitions:
            if net.pre[t] <= marking:
                succ = marking - net.pre[t] + net.post[t]
                if succ not in seen:
                    _check_bound(succ, bound_k)
                    seen.add(succ)
                    result.append(succ)
                    if len(result) > cap:
                        raise CapExceeded(f"more than {cap} reachable markings")
                    queue.append(succ)
    return result


def _check_bound(marking: Multiset, bound_k: int | None) -> None:
    if bound_k is None:
        return
    for p, n in marking.items_tuple:
        if n > bound_k:
            raise BoundViolated(p, marking, bound_k)
