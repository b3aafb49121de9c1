"""Translate a winning Büchi strategy into a finite Petri-game strategy, or explain a loss."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .buchi import PLAYER0, Solution
from .errors import InvariantBroken, NotWinning
from .net import Multiset
from .reduction import (
    FN,
    PL,
    Edge,
    EdgeKind,
    Flag,
    ReductionArena,
    dm_marking,
    is_sentinel,
)
from .strategy import FiniteStrategy

DEFAULT_NODE_CAP = 200_000


class _Aliases:
    """Union-find over condition names; the representative is the older name."""

    def __init__(self):
        self.parent: dict[str, str] = {}

    def find(self, c: str) -> str:
        root = c
        while self.parent.get(root, root) != root:
            root = self.parent[root]
        while self.parent.get(c, c) != root:
            self.parent[c], c = root, self.parent[c]
        return root

    def merge(self, younger: str, older: str) -> None:
        a, b = self.find(younger), self.find(older)
        if a != b:
            self.parent[a] = b


@dataclass
class _Node:
    state: int
    cut: dict[int, str]
    ancestors: tuple[tuple[int, tuple], ...]
    anchor: tuple[tuple[str, int, str], ...] | None = None


def extract(
    ra: ReductionArena,
    solution: Solution,
    node_cap: int = DEFAULT_NODE_CAP,
) -> FiniteStrategy:
    """Build a finite strategy following the winning Büchi strategy.

    Breadth-first over the tree of the strategy-restricted arena. Decision
    edges add nothing; transition edges add an event with fresh output
    conditions. A branch stops when it reaches the accepting sink or
    repeats an arena state of one of its ancestors; in the latter case the
    new conditions are merged into the ancestor's, closing a loop. When the
    no-environment phase finishes, the conditions of its players are merged
    into those of the phase's starting cut.
    """
    arena = ra.arena
    if arena.initial not in solution.win0:
        raise NotWinning("the system players have no winning strategy from the initial state")
    game = ra.reduction.game
    conditions: dict[str, str] = {}
    events: dict[str, str] = {}
    pre: dict[str, tuple[str, ...]] = {}
    post: dict[str, tuple[str, ...]] = {}
    aliases = _Aliases()
    serial = [0]

    def fresh(label: str) -> str:
        serial[0] += 1
        return f"{label}#{serial[0]}"

    root_state = ra.states[arena.initial]
    cut: dict[int, str] = {}
    for d in root_state.dm:
        c = fresh(d[PL])
        conditions[c] = d[PL]
        cut[d[0]] = c
    initial = tuple(cut[i] for i in sorted(cut))
    queue = deque([_Node(arena.initial, cut, ())])
    expanded = 0
    while queue:
        node = queue.popleft()
        expanded += 1
        if expanded > node_cap:
            raise InvariantBroken(f"strategy tree exceeds {node_cap} nodes")
        state = ra.states[node.state]
        if is_sentinel(state):
            if state == FN:
                raise InvariantBroken("winning strategy reaches the losing sink")
            continue
        _check_cut(ra, node, conditions)
        ancestors = node.ancestors + ((node.state, tuple(sorted(node.cut.items()))),)
        if arena.owner[node.state] == PLAYER0:
            if node.state not in solution.strategy0:
                raise InvariantBroken(f"strategy has no move at state {node.state}")
            targets = [solution.strategy0[node.state]]
        else:
            targets = list(arena.succ[node.state])
        for target in targets:
            edge = ra.edges[(node.state, target)]
            new_cut = dict(node.cut)
            anchor = node.anchor
            if edge.kind in (EdgeKind.SYS, EdgeKind.MCUT, EdgeKind.NES_FIRE, EdgeKind.NES_FINISH):
                ev = fresh(edge.transition)
                events[ev] = edge.transition
                pre[ev] = tuple(node.cut[i] for i in edge.consumed)
                outs = []
                for i in edge.consumed:
                    del new_cut[i]
                for ident, place in edge.produced:
                    c = fresh(place)
                    conditions[c] = place
                    new_cut[ident] = c
                    outs.append(c)
                post[ev] = tuple(outs)
            target_state = ra.states[target]
            if edge.flipped and not is_sentinel(target_state) and target_state.m_t2 and anchor is None:
                trues = [d for d in target_state.dm if d[2] == 1]
                anchor = tuple(sorted((d[PL], d[0], new_cut[d[0]]) for d in trues))
            if edge.kind == EdgeKind.NES_FINISH:
                if anchor is None:
                    raise InvariantBroken("NES phase finished without a recorded start")
                finals = sorted((conditions[new_cut[i]], i) for i in edge.released)
                if [lab for lab, _ in finals] != [lab for lab, _, _ in anchor]:
                    raise InvariantBroken("NES phase ended on a different marking")
                for (lab, i), (_, _, start) in zip(finals, anchor):
                    aliases.merge(new_cut[i], start)
                    new_cut[i] = aliases.find(start)
                anchor = None
            repeat = next((cut_items for s, cut_items in ancestors if s == target), None)
            if repeat is not None:
                for i, c in repeat:
                    if aliases.find(new_cut[i]) != aliases.find(c):
                        aliases.merge(new_cut[i], c)
                continue
            if edge.kind == EdgeKind.STOP and target_state == FN:
                raise InvariantBroken("winning strategy reaches the losing sink")
            queue.append(_Node(target, new_cut, ancestors, anchor))
    return _assemble(conditions, events, pre, post, initial, aliases, game.name)


def _check_cut(ra: ReductionArena, node: _Node, conditions) -> None:
    state = ra.states[node.state]
    labels = Multiset([conditions[c] for c in node.cut.values()])
    if labels != dm_marking(state.dm):
        raise InvariantBroken(f"cut {labels} differs from decision marking {dm_marking(state.dm)}")


def _assemble(conditions, events, pre, post, initial, aliases: _Aliases, game_name: str) -> FiniteStrategy:
    live = {}
    for c, lab in conditions.items():
        root = aliases.find(c)
        live.setdefault(root, lab)
    loop_backs = []
    new_pre = {}
    new_post = {}
    for e in events:
        new_pre[e] = tuple(aliases.find(c) for c in pre[e])
        outs = []
        for c in post[e]:
            root = aliases.find(c)
            if root != c:
                loop_backs.append((e, root))
            outs.append(root)
        new_post[e] = tuple(outs)
    return FiniteStrategy(
        live,
        dict(events),
        new_pre,
        new_post,
        tuple(aliases.find(c) for c in initial),
        loop_backs,
        game_name,
    )


# ----------------------------------------------------------------------
# diagnosis of losing states

_PRIORITY = [Flag.BAD, Flag.NDET, Flag.UR, Flag.SYNC_T2, Flag.VAN_T2, Flag.DL_T2, Flag.DL]
_RANK = {str(f): k for k, f in enumerate(_PRIORITY)} | {"NES_bad": _PRIORITY.index(Flag.SYNC_T2)}


@dataclass
class Witness:
    """A losing state reachable while Player 1 plays inside its winning region."""

    state: int
    path: list[str]
    flag: str
    detail: str
    marking: Multiset | None = None
    place: str | None = None


@dataclass
class Diagnosis:
    state: int
    witnesses: list[Witness] = field(default_factory=list)

    @property
    def primary(self) -> Witness | None:
        return self.witnesses[0] if self.witnesses else None

    def __bool__(self) -> bool:
        return bool(self.witnesses)

    def summary(self) -> str:
        w = self.primary
        if w is None:
            return "winning: nothing to explain"
        steps = " ; ".join(w.path) if w.path else "(initial state)"
        return f"{w.flag}: {w.detail}\n  via {steps}"


def explain(ra: ReductionArena, solution: Solution, state: int | None = None) -> Diagnosis:
    """Counterexample sketch for a state won by Player 1.

    Explores the states Player 1 can keep inside its winning region and
    reports every state whose only edge leads to the losing sink, with the
    reason. The most specific reason on the shortest path comes first.
    """
    start = ra.arena.initial if state is None else state
    diag = Diagnosis(start)
    if start in solution.win0:
        return diag
    win1 = solution.win1
    parent: dict[int, tuple[int, Edge] | None] = {start: None}
    queue = deque([start])
    found: list[tuple[int, int, Witness]] = []
    depth = {start: 0}
    while queue:
        s = queue.popleft()
        edges = ra.out_edges(s)
        witness_edge = [(e, d) for e, d in edges if ra.states[d] == FN and s != d]
        if witness_edge:
            for w in _witnesses(ra, s, witness_edge, _path(parent, s)):
                found.append((_RANK[w.flag], depth[s], w))
            continue
        for e, d in edges:
            if d not in win1 or d in parent or is_sentinel(ra.states[d]):
                continue
            parent[d] = (s, e)
            depth[d] = depth[s] + 1
            queue.append(d)
    found.sort(key=lambda x: (x[0], x[1], x[2].state))
    diag.witnesses = [w for _, _, w in found]
    return diag


def _path(parent, s: int) -> list[str]:
    steps = []
    while parent[s] is not None:
        prev, edge = parent[s]
        steps.append(str(edge))
        s = prev
    return list(reversed(steps))


def _witnesses(ra: ReductionArena, s: int, edges, path: list[str]) -> list[Witness]:
    state = ra.states[s]
    out = []
    for edge, _ in edges:
        if edge.kind == EdgeKind.NES_BAD:
            out.append(Witness(s, path + [str(edge)], "NES_bad", f"{edge.transition} repeats a marking of the NES phase"))
    if any(e.kind == EdgeKind.STOP for e, _ in edges):
        flags, details = ra.reduction.classify(state, with_details=True)
        for flag in _PRIORITY:
            if flag not in flags or (flag == Flag.DL and Flag.TERM in flags):
                continue
            info = details.get(flag)
            marking = None
            place = None
            if flag in (Flag.NDET, Flag.SYNC_T2):
                hit, marking = info
                place = hit if isinstance(hit, str) else hit[0]
                text = f"player in {place} is nondeterministic in {marking}" if flag == Flag.NDET else (
                    f"player in {hit[0]} needs a partner outside the NES phase for {hit[1]} in {marking}"
                )
            elif flag == Flag.BAD:
                marking = info
                text = f"bad marking {marking} is reachable"
            elif flag == Flag.UR:
                marking = info
                text = f"loop from {marking} repeated without new information"
            elif flag == Flag.DL:
                marking = info
                text = f"deadlock in {marking}"
            else:
                marking = info
                text = f"NES phase failed in {marking}"
            out.append(Witness(s, path, str(flag), text, marking, place))
    return out
