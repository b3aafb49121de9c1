"""Explicit two-player Büchi arenas and the repeated-attractor solver."""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product

from .errors import ArenaInvalid, ParseError

PLAYER0 = 0
PLAYER1 = 1


@dataclass
class BuchiArena:
    """Finite arena with integer states ``0..n-1``.

    ``succ[s]`` lists successors in a fixed order; that order breaks ties
    when the solver picks strategy edges. ``names`` is optional display data.
    """

    owner: list[int]
    succ: list[list[int]]
    initial: int
    accepting: frozenset[int]
    names: list[str] | None = None
    pred: list[list[int]] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.owner)
        if len(self.succ) != n:
            raise ArenaInvalid("owner and successor tables differ in length")
        self.accepting = frozenset(self.accepting)
        self.validate()
        self.pred = [[] for _ in range(n)]
        for s, targets in enumerate(self.succ):
            for d in targets:
                self.pred[d].append(s)

    @property
    def n(self) -> int:
        return len(self.owner)

    def validate(self) -> None:
        n = self.n
        if not 0 <= self.initial < n:
            raise ArenaInvalid(f"initial state {self.initial} out of range")
        for s in range(n):
            if self.owner[s] not in (PLAYER0, PLAYER1):
                raise ArenaInvalid(f"state {s} has owner {self.owner[s]!r}")
            if not self.succ[s]:
                raise ArenaInvalid(f"state {s} has no outgoing edge")
            for d in self.succ[s]:
                if not 0 <= d < n:
                    raise ArenaInvalid(f"edge {s}->{d} leaves the arena")
        for s in self.accepting:
            if not 0 <= s < n:
                raise ArenaInvalid(f"accepting state {s} out of range")


@dataclass
class Solution:
    win0: frozenset[int]
    win1: frozenset[int]
    strategy0: dict[int, int]
    ranks: dict[int, int]

    def winner(self, state: int) -> int:
        return PLAYER0 if state in self.win0 else PLAYER1


def attractor(
    arena: BuchiArena,
    player: int,
    target: Iterable[int],
    within: frozenset[int] | set[int] | None = None,
) -> tuple[set[int], dict[int, int]]:
    """States from which ``player`` forces a visit to ``target``.

    When ``within`` is given the game is restricted to that subarena: edges
    leaving it are ignored (the subarena must be a trap for the opponent of
    whoever needs it to be one; callers guarantee this). Ranks are the
    number of steps needed to force the visit.
    """
    universe = within if within is not None else None
    attr = {s for s in target if universe is None or s in universe}
    rank = {s: 0 for s in attr}
    remaining: dict[int, int] = {}
    queue = deque(sorted(attr))
    while queue:
        s = queue.popleft()
        for p in arena.pred[s]:
            if p in attr or (universe is not None and p not in universe):
                continue
            if arena.owner[p] == player:
                attr.add(p)
                rank[p] = rank[s] + 1
                queue.append(p)
            else:
                if p not in remaining:
                    remaining[p] = sum(1 for d in arena.succ[p] if universe is None or d in universe)
                remaining[p] -= 1
                if remaining[p] == 0:
                    attr.add(p)
                    rank[p] = rank[s] + 1
                    queue.append(p)
    return attr, rank


def solve(arena: BuchiArena) -> Solution:
    """Classical repeated-attractor Büchi solver with a memoryless strategy."""
    arena.validate()
    current = set(range(arena.n))
    while True:
        frozen = frozenset(current)
        a, _ = attractor(arena, PLAYER0, arena.accepting & frozen, frozen)
        b, _ = attractor(arena, PLAYER1, frozen - a, frozen)
        if not b:
            break
        current -= b
    win0 = frozenset(current)
    win1 = frozenset(range(arena.n)) - win0
    _, ranks = attractor(arena, PLAYER0, arena.accepting & win0, win0)
    strategy0: dict[int, int] = {}
    for s in sorted(win0):
        if arena.owner[s] != PLAYER0:
            continue
        if s in arena.accepting:
            choice = min(d for d in arena.succ[s] if d in win0)
        else:
            choice = min(
                (d for d in arena.succ[s] if d in win0 and ranks.get(d, -1) == ranks[s] - 1),
            )
        strategy0[s] = choice
    return Solution(win0, win1, strategy0, ranks)


def verify_certificate(arena: BuchiArena, solution: Solution) -> bool:
    """Independently re-check a solution without trusting the solver.

    Checks the partition, that the strategy follows real edges into win0,
    that Player 1 cannot leave win0, that the strategy-restricted graph on
    win0 has no cycle avoiding accepting states, and that win1 is a trap
    for Player 0 in which Player 1 has no obligation to visit anything.
    """
    states = set(range(arena.n))
    win0, win1 = set(solution.win0), set(solution.win1)
    if win0 & win1 or win0 | win1 != states:
        return False
    restricted: dict[int, list[int]] = {}
    for s in win0:
        if arena.owner[s] == PLAYER0:
            d = solution.strategy0.get(s)
            if d is None or d not in arena.succ[s] or d not in win0:
                return False
            restricted[s] = [d]
        else:
            if any(d not in win0 for d in arena.succ[s]):
                return False
            restricted[s] = list(arena.succ[s])
    for s in win1:
        if arena.owner[s] == PLAYER0 and any(d in win0 for d in arena.succ[s]):
            return False
        if arena.owner[s] == PLAYER1 and all(d in win0 for d in arena.succ[s]):
            return False
    non_acc = {s for s in win0 if s not in arena.accepting}
    return not _has_cycle(non_acc, {s: [d for d in restricted[s] if d in non_acc] for s in non_acc})


def _has_cycle(nodes: set[int], edges: dict[int, list[int]]) -> bool:
    """Kahn's algorithm: a cycle exists iff some node is never freed."""
    indeg = {s: 0 for s in nodes}
    for s in nodes:
        for d in edges[s]:
            indeg[d] += 1
    queue = deque(s for s in nodes if indeg[s] == 0)
    removed = 0
    while queue:
        s = queue.popleft()
        removed += 1
        for d in edges[s]:
            indeg[d] -= 1
            if indeg[d] == 0:
                queue.append(d)
    return removed != len(nodes)


def lasso_accepting(arena: BuchiArena, start: int, choice: Sequence[int]) -> bool:
    """Follow a positional profile from ``start``; True iff the loop hits an accepting state."""
    return _lasso_values(arena, choice)[start]


def _lasso_values(arena: BuchiArena, choice: Sequence[int]) -> list[bool]:
    """For every state, whether the lasso of a positional profile loops through acceptance."""
    values: list[bool | None] = [None] * arena.n
    for s in range(arena.n):
        if values[s] is not None:
            continue
        index: dict[int, int] = {}
        path: list[int] = []
        x = s
        while values[x] is None and x not in index:
            index[x] = len(path)
            path.append(x)
            x = choice[x]
        if values[x] is None:
            cycle = path[index[x]:]
            value = any(q in arena.accepting for q in cycle)
            for q in cycle:
                values[q] = value
            path = path[: index[x]]
        else:
            value = values[x]
        for q in path:
            values[q] = value
    return values  # type: ignore[return-value]


def brute_force_winners(arena: BuchiArena) -> list[int]:
    """Winner of every state by enumerating memoryless strategy pairs.

    Player 0 wins from ``s`` iff some Player 0 positional strategy beats
    every Player 1 positional strategy. Exponential; meant for tiny arenas.
    """
    p0 = [s for s in range(arena.n) if arena.owner[s] == PLAYER0]
    p1 = [s for s in range(arena.n) if arena.owner[s] == PLAYER1]
    p1_profiles = list(_profiles(arena, p1))
    won = [False] * arena.n
    for c0 in _profiles(arena, p0):
        surviving = [True] * arena.n
        for c1 in p1_profiles:
            values = _lasso_values(arena, _merge(arena.n, c0, c1))
            surviving = [a and b for a, b in zip(surviving, values)]
            if not any(surviving):
                break
        won = [a or b for a, b in zip(won, surviving)]
    return [PLAYER0 if w else PLAYER1 for w in won]


def _profiles(arena: BuchiArena, owned: list[int]):
    for combo in product(*(arena.succ[s] for s in owned)):
        yield dict(zip(owned, combo))


def _merge(n: int, c0: dict[int, int], c1: dict[int, int]) -> list[int]:
    out = [0] * n
    for s, d in c0.items():
        out[s] = d
    for s, d in c1.items():
        out[s] = d
    return out


def arena_to_text(arena: BuchiArena) -> str:
    """Adjacency format: header line, then one ``state owner acc succ...`` line per state."""
    lines = [f"arena {arena.n} initial {arena.initial}"]
    for s in range(arena.n):
        acc = "acc" if s in arena.accepting else "-"
        succ = " ".join(str(d) for d in arena.succ[s])
        lines.append(f"{s} {arena.owner[s]} {acc} {succ}")
    return "\n".join(lines) + "\n"


def arena_from_text(text: str) -> BuchiArena:
    rows = [(i + 1, line.split()) for i, line in enumerate(text.splitlines())]
    rows = [(i, r) for i, r in rows if r and not r[0].startswith("#")]
    if not rows or rows[0][1][0] != "arena" or len(rows[0][1]) != 4 or rows[0][1][2] != "initial":
        raise ParseError("expected header 'arena N initial S'", rows[0][0] if rows else None)
    n, initial = int(rows[0][1][1]), int(rows[0][1][3])
    owner = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    accepting = set()
    seen = set()
    for lineno, parts in rows[1:]:
        if len(parts) < 3:
            raise ParseError("state line needs 'state owner acc|- successors...'", lineno)
        s = int(parts[0])
        if not 0 <= s < n or s in seen:
            raise ParseError(f"bad or repeated state {s}", lineno)
        seen.add(s)
        owner[s] = int(parts[1])
        if parts[2] == "acc":
            accepting.add(s)
        elif parts[2] != "-":
            raise ParseError(f"expected 'acc' or '-', got {parts[2]!r}", lineno)
        succ[s] = [int(x) for x in parts[3:]]
    if len(seen) != n:
        raise ParseError(f"expected {n} state lines, got {len(seen)}")
    return BuchiArena(owner, succ, initial, frozenset(accepting))


def arena_to_dot(
    arena: BuchiArena,
    labels: Sequence[str] | None = None,
    edge_labels: dict[tuple[int, int], str] | None = None,
    states: Iterable[int] | None = None,
) -> str:
    """DOT rendering: Player 0 gray boxes, Player 1 white boxes, accepting double-bordered.

    With ``states`` only those states and the edges between them are drawn.
    """
    keep = sorted(set(states)) if states is not None else list(range(arena.n))
    kept = set(keep)
    out = ["digraph arena {", "  node [shape=box, fontname=monospace];"]
    for s in keep:
        text = labels[s] if labels is not None else str(s)
        text = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\l")
        style = 'style=filled, fillcolor="gray85"' if arena.owner[s] == PLAYER0 else 'style=filled, fillcolor="white"'
        periph = ", peripheries=2" if s in arena.accepting else ""
        init = ", penwidth=2" if s == arena.initial else ""
        out.append(f'  s{s} [label="{text}", {style}{periph}{init}];')
    for s in keep:
        for d in arena.succ[s]:
            if d not in kept:
                continue
            lab = edge_labels.get((s, d)) if edge_labels else None
            extra = f' [label="{lab}"]' if lab else ""
            out.append(f"  s{s} -> s{d}{extra};")
    out.append("}")
    return "\n".join(out) + "\n"
