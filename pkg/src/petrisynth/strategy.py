"""Finite Petri-game strategies: labelled nets whose cycles fold infinite behaviour."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import ParseError
from .net import Multiset, PetriNet


@dataclass
class LabelledNet:
    """A net whose places and transitions are labelled with nodes of a game net.

    Places are conditions, transitions are events. Pre- and postsets are
    tuples of conditions (sets, no weights). ``loop_backs`` lists the
    ``(event, condition)`` arcs that close a cycle.
    """

    conditions: dict[str, str]
    events: dict[str, str]
    pre: dict[str, tuple[str, ...]]
    post: dict[str, tuple[str, ...]]
    initial: tuple[str, ...]
    loop_backs: list[tuple[str, str]] = field(default_factory=list)
    game: str = "game"

    def to_petri_net(self) -> PetriNet:
        return PetriNet(
            frozenset(self.conditions),
            frozenset(self.events),
            {e: Multiset(self.pre[e]) for e in self.events},
            {e: Multiset(self.post[e]) for e in self.events},
            Multiset(self.initial),
        )

    def label_marking(self, marking: Mapping) -> Multiset:
        counts: dict[str, int] = {}
        for c, n in marking.items():
            lab = self.conditions[c]
            counts[lab] = counts.get(lab, 0) + n
        return Multiset(counts)

    def consumers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.conditions}
        for e in sorted(self.events):
            for c in self.pre[e]:
                out[c].append(e)
        return out

    def producers(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.conditions}
        for e in sorted(self.events):
            for c in self.post[e]:
                out[c].append(e)
        return out

    # ------------------------------------------------------------------
    # serialization

    def to_json(self) -> str:
        doc = {
            "game": self.game,
            "conditions": [{"id": c, "label": self.conditions[c]} for c in sorted(self.conditions, key=_natural)],
            "events": [
                {"id": e, "label": self.events[e], "pre": list(self.pre[e]), "post": list(self.post[e])}
                for e in sorted(self.events, key=_natural)
            ],
            "initial": sorted(self.initial, key=_natural),
            "loop_backs": [list(arc) for arc in sorted(self.loop_backs, key=lambda a: (_natural(a[0]), a[1]))],
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> LabelledNet:
        try:
            doc = json.loads(text)
            conditions = {c["id"]: c["label"] for c in doc["conditions"]}
            events = {e["id"]: e["label"] for e in doc["events"]}
            pre = {e["id"]: tuple(e["pre"]) for e in doc["events"]}
            post = {e["id"]: tuple(e["post"]) for e in doc["events"]}
            initial = tuple(doc["initial"])
            loops = [tuple(a) for a in doc.get("loop_backs", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed strategy JSON: {exc}") from exc
        for e in events:
            for c in pre[e] + post[e]:
                if c not in conditions:
                    raise ParseError(f"event {e!r} names unknown condition {c!r}")
        for c in initial:
            if c not in conditions:
                raise ParseError(f"unknown initial condition {c!r}")
        return cls(conditions, events, pre, post, initial, loops, doc.get("game", "game"))

    def to_dot(self, system_places: frozenset[str] | None = None) -> str:
        out = ["digraph strategy {", "  rankdir=TB;"]
        loop = set(self.loop_backs)
        for c in sorted(self.conditions, key=_natural):
            fill = "white" if system_places is None or self.conditions[c] in system_places else "gray85"
            tokens = ", penwidth=2" if c in self.initial else ""
            out.append(f'  "{c}" [shape=circle, style=filled, fillcolor="{fill}", label="{c}"{tokens}];')
        for e in sorted(self.events, key=_natural):
            out.append(f'  "{e}" [shape=box, label="{e}"];')
            for c in self.pre[e]:
                out.append(f'  "{c}" -> "{e}";')
            for c in self.post[e]:
                style = " [style=dashed, constraint=false]" if (e, c) in loop else ""
                out.append(f'  "{e}" -> "{c}"{style};')
        out.append("}")
        return "\n".join(out) + "\n"


def _natural(name: str):
    """Sort key ordering ``x#2`` before ``x#10``."""
    base, _, num = name.rpartition("#")
    return (int(num), base) if num.isdigit() else (1 << 60, name)


class FiniteStrategy(LabelledNet):
    """Finite, possibly cyclic representation of a strategy for the system players."""


@dataclass
class BranchingProcess(LabelledNet):
    """Acyclic labelled net, typically obtained by unrolling a finite strategy.

    ``cutoff`` holds the conditions whose continuation was cut by the
    unrolling depth; checks that need complete behaviour skip them.
    """

    cutoff: frozenset[str] = frozenset()
