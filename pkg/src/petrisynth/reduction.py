"""Reduction of a bounded Petri game with one environment player to a Büchi game.

A reduction state carries a decision marking (one decision tuple per
token), the system marking that must be repeated while the players are in
the no-environment-synchronization phase (``m_t2``), and for every system
player id the sequence of backward moves that lets the construction rewind
system-only transitions.

Decision tuples are plain tuples ``(id, place, nes, decision, lmc)``:

* ``id`` is 0 for the environment token and ``1..max_s`` for system tokens;
* ``nes`` is ``FALSE``, ``TRUE`` or ``END``;
* ``decision`` is ``None`` for an unresolved decision (written as Top) or a
  sorted tuple of allowed transitions;
* ``lmc`` tags the last environment synchronization the player knows about.

A backward move is a pair ``(pre, post)`` of sorted tuple-tuples; it is
stored in the sequence of every id occurring in ``pre`` or ``post``.
"""

from __future__ import annotations

import enum
import json
from collections import Counter, deque
from collections.abc import Iterable
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb

from .buchi import PLAYER0, PLAYER1, BuchiArena, arena_to_dot
from .errors import BmCapExceeded, InvariantBroken, StateCapExceeded
from .game import PetriGame, bad_patterns, check_decidable_class, matches
from .net import DEFAULT_MARKING_CAP, Multiset, reachable_markings

FALSE, TRUE, END = 0, 1, 2
NES_NAMES = {FALSE: "false", TRUE: "true", END: "end"}
ID, PL, NES, DEC, LMC = range(5)

FB = "FB"
FN = "FN"

DEFAULT_MAX_STATES = 5_000_000
DEFAULT_MAX_BM = 10_000

Tuple = tuple
Move = tuple


class Flag(str, enum.Enum):
    TERM = "TERM"
    DL = "DL"
    NDET = "NDET"
    BAD = "BAD"
    DL_T2 = "DL_T2"
    SYNC_T2 = "SYNC_T2"
    VAN_T2 = "VAN_T2"
    UR = "UR"

    def __str__(self) -> str:
        return self.value


LOSING_FLAGS = frozenset({Flag.NDET, Flag.BAD, Flag.UR, Flag.DL_T2, Flag.SYNC_T2, Flag.VAN_T2})


class EdgeKind(str, enum.Enum):
    TOP = "TOP"
    SYS = "SYS"
    MCUT = "MCUT"
    NES_FIRE = "NES_fire"
    NES_FINISH = "NES_finish"
    NES_BAD = "NES_bad"
    STOP = "STOP"
    LOOP = "LOOP"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Edge:
    """Label of an arena edge.

    ``consumed`` lists the ids of the instance that fired; ``produced``
    pairs every post-place with the id that continues or is created there
    (env token id 0). ``released`` lists the ids whose NES status became
    END (only for NES_finish).
    """

    kind: EdgeKind
    transition: str | None = None
    consumed: tuple[int, ...] = ()
    produced: tuple[tuple[int, str], ...] = ()
    flipped: tuple[int, ...] = ()
    released: tuple[int, ...] = ()

    def __str__(self) -> str:
        if self.transition is None:
            return str(self.kind)
        return f"{self.kind} {self.transition}"


@dataclass(frozen=True)
class State:
    dm: tuple
    m_t2: tuple = ()
    bm: tuple = ()


def is_sentinel(state) -> bool:
    return state == FB or state == FN


def dm_marking(dm: Iterable[tuple]) -> Multiset:
    return Multiset(Counter(d[PL] for d in dm))


def format_tuple(d: tuple) -> str:
    dec = "T" if d[DEC] is None else "{" + ",".join(d[DEC]) + "}"
    return f"({d[ID]},{d[PL]},{NES_NAMES[d[NES]]},{dec},{d[LMC]})"


def format_state(state, verbose: bool = False) -> str:
    if is_sentinel(state):
        return state
    lines = [" ".join(format_tuple(d) for d in state.dm)]
    if state.m_t2:
        lines.append("m_t2=" + repr(Multiset(dict(state.m_t2))))
    if verbose:
        for i, seq in enumerate(state.bm, start=1):
            if seq:
                lines.append(f"bm[{i}]=" + " ; ".join(format_move(m) for m in seq))
    return "\n".join(lines)


def format_move(move: Move) -> str:
    pre, post = move
    return "[" + " ".join(map(format_tuple, pre)) + " <- " + " ".join(map(format_tuple, post)) + "]"


def move_ids(move: Move) -> tuple[int, ...]:
    return tuple(sorted({d[ID] for d in move[0]} | {d[ID] for d in move[1]}))


def _subsets(items: tuple) -> list[tuple]:
    return [c for r in range(len(items) + 1) for c in combinations(items, r)]


@dataclass
class ReductionArena:
    """Build result: the Büchi arena plus the decoded state table."""

    arena: BuchiArena
    states: list
    index: dict
    edges: dict[tuple[int, int], Edge]
    flags: dict[int, frozenset[Flag]]
    reduction: Reduction
    stats: dict = field(default_factory=dict)

    def out_edges(self, s: int) -> list[tuple[Edge, int]]:
        return [(self.edges[(s, d)], d) for d in self.arena.succ[s]]

    def label(self, s: int, verbose: bool = False) -> str:
        return format_state(self.states[s], verbose)

    def within_depth(self, depth: int | None) -> list[int]:
        """States at breadth-first distance at most ``depth`` from the initial state."""
        if depth is None:
            return list(range(self.arena.n))
        dist = {self.arena.initial: 0}
        queue = deque([self.arena.initial])
        while queue:
            s = queue.popleft()
            if dist[s] == depth:
                continue
            for d in self.arena.succ[s]:
                if d not in dist:
                    dist[d] = dist[s] + 1
                    queue.append(d)
        return sorted(dist)

    def to_json(self, states: Iterable[int] | None = None, verbose: bool = False) -> str:
        keep = sorted(set(states)) if states is not None else list(range(self.arena.n))
        kept = set(keep)
        doc = {
            "initial": self.arena.initial,
            "stats": self.stats,
            "states": [
                {
                    "id": s,
                    "owner": self.arena.owner[s],
                    "accepting": s in self.arena.accepting,
                    "flags": sorted(str(f) for f in self.flags.get(s, ())),
                    "label": self.label(s, verbose),
                    "dm": None if is_sentinel(self.states[s]) else [format_tuple(d) for d in self.states[s].dm],
                    "edges": [
                        {"to": d, "kind": str(e.kind), "transition": e.transition}
                        for e, d in self.out_edges(s)
                        if d in kept
                    ],
                }
                for s in keep
            ],
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    def to_dot(self, states: Iterable[int] | None = None, verbose: bool = False) -> str:
        labels = [f"v{s}\n" + self.label(s, verbose) for s in range(self.arena.n)]
        edge_labels = {key: str(e) for key, e in self.edges.items()}
        return arena_to_dot(self.arena, labels, edge_labels, states)


class Reduction:
    """Lazily expands the Büchi game of a Petri game.

    Construction checks the decidable class (per-place bound ``bound`` and
    exactly one environment token) and computes ``max_s``. With
    ``rewind=False`` bad markings and nondeterminism are checked on a
    state's own decision marking only; this ablation exists to show which verdicts need backward moves.
    """

    def __init__(
        self,
        game: PetriGame,
        bound: int | None = None,
        max_states: int = DEFAULT_MAX_STATES,
        max_bm: int = DEFAULT_MAX_BM,
        marking_cap: int = DEFAULT_MARKING_CAP,
        rewind: bool = True,
    ):
        self.game = game
        self.rewind = rewind
        net = game.net
        if bound is None:
            bound = _default_bound(game, marking_cap)
        self.bound = bound
        self.report = check_decidable_class(game, bound, marking_cap)
        self.max_s = self.report.max_system_tokens
        self.max_states = max_states
        self.max_bm = max_bm
        self.sys_places = game.system_places
        self.pre = {t: dict(net.pre[t].items_tuple) for t in net.transitions}
        self.post = {t: dict(net.post[t].items_tuple) for t in net.transitions}
        self.pre_sorted = {t: net.pre[t].items_tuple for t in net.transitions}
        self.transitions = net.sorted_transitions
        self.sys_only = {t: game.is_system_only(t) for t in self.transitions}
        self.sys_transitions = [t for t in self.transitions if self.sys_only[t]]
        self.env_transitions = [t for t in self.transitions if not self.sys_only[t]]
        self.post_place = {p: net.consumers(p) for p in net.places}
        self.env_post = {p: tuple(net.consumers(p)) for p in game.env_places}
        self.decisions = {p: _subsets(net.consumers(p)) for p in net.places}
        produced_by_sys = {p for t in self.sys_transitions for p in self.post[t]}
        consumed_by_sys = {p for t in self.sys_transitions for p in self.pre[t]}
        self.flippable_place = {
            p: p in self.sys_places and p in produced_by_sys and p in consumed_by_sys for p in net.places
        }
        self.pairs = {t: self._transit_pairs(t) for t in self.transitions}
        self.bad = bad_patterns(game.winning, bound)
        self._bad_cache: dict[Multiset, bool] = {}

    # ------------------------------------------------------------------
    # transit relation

    def _transit_pairs(self, t: str) -> list[tuple[str | None, str | None]]:
        """Token-level pairing of pre- and post-places for ``t``.

        Explicit ``flow`` annotations come first; remaining tokens of the
        same type are paired in lexicographic order, leftovers on the post
        side are created and leftovers on the pre side are removed.
        """
        pre = Counter(self.pre[t])
        post = Counter(self.post[t])
        pairs: list[tuple[str | None, str | None]] = []
        for src, dst in self.game.flows.get(t, ()):
            if src is not None:
                pre[src] -= 1
            if dst is not None:
                post[dst] -= 1
            pairs.append((src, dst))
        for env in (True, False):
            src_list = sorted(p for p, n in pre.items() for _ in range(n) if (p in self.game.env_places) == env)
            dst_list = sorted(p for p, n in post.items() for _ in range(n) if (p in self.game.env_places) == env)
            for i in range(max(len(src_list), len(dst_list))):
                pairs.append((src_list[i] if i < len(src_list) else None, dst_list[i] if i < len(dst_list) else None))
        return pairs

    def transit(self, dm: Iterable[tuple], ident: int, t: str):
        """Where player ``ident`` goes when ``t`` fires: a place, ``"Removed"`` or ``None``.

        ``None`` means the player does not take part (it is not on a
        preset place). Tokens sharing a place are matched by ascending id.
        """
        dm = sorted(dm)
        tuple_of = {d[ID]: d for d in dm}
        if ident not in tuple_of or tuple_of[ident][PL] not in self.pre[t]:
            return None
        instance = []
        for p, n in self.pre_sorted[t]:
            instance.extend([d for d in dm if d[PL] == p][:n])
        if tuple_of[ident] not in instance:
            return None
        for d, dst in self._assign(instance, t)[0]:
            if d[ID] == ident:
                return dst if dst is not None else "Removed"
        raise InvariantBroken("transit lost a participant")

    def _assign(self, instance: tuple, t: str):
        """Pair instance tuples with destinations; returns (moved, created_places)."""
        queues: dict[str, list[tuple]] = {}
        for d in sorted(instance):
            queues.setdefault(d[PL], []).append(d)
        moved = []
        created = []
        for src, dst in self.pairs[t]:
            if src is None:
                created.append(dst)
            else:
                moved.append((queues[src].pop(0), dst))
        return moved, created

    # ------------------------------------------------------------------
    # basic predicates

    def initial_state(self) -> State:
        init = self.game.net.initial
        env = [p for p in init if p in self.game.env_places]
        tuples = [(0, env[0], FALSE, self.env_post[env[0]], 0)]
        ident = 1
        for p in sorted(init):
            if p in self.sys_places:
                for _ in range(init[p]):
                    tuples.append((ident, p, FALSE, None, 1))
                    ident += 1
        return State(tuple(tuples), (), tuple(() for _ in range(self.max_s)))

    def _dpre(self, dm, t: str, only_true: bool = False) -> list[tuple]:
        pre = self.pre[t]
        out = []
        for d in dm:
            if d[PL] in pre and d[DEC] is not None and t in d[DEC] and d[NES] != END:
                if only_true and d[NES] != TRUE:
                    continue
                out.append(d)
        return out

    def _enabled_allowed(self, dm, t: str, only_true: bool = False) -> bool:
        counts = Counter(d[PL] for d in self._dpre(dm, t, only_true))
        return all(counts[p] >= n for p, n in self.pre[t].items())

    def _instances(self, dm, t: str, only_true: bool = False) -> list[tuple]:
        cands: dict[str, list[tuple]] = {}
        for d in self._dpre(dm, t, only_true):
            cands.setdefault(d[PL], []).append(d)
        choices = []
        for p, n in self.pre_sorted[t]:
            options = cands.get(p, [])
            if len(options) < n:
                return []
            choices.append(list(combinations(options, n)))
        return [tuple(sorted(sum(combo, ()))) for combo in product(*choices)]

    def is_mcut(self, dm) -> bool:
        """No Top, no TRUE tuple, and no system-only transition enabled and allowed."""
        if any(d[DEC] is None or d[NES] == TRUE for d in dm):
            return False
        return not any(self._enabled_allowed(dm, t) for t in self.sys_transitions)

    def _is_bad(self, marking: Multiset) -> bool:
        hit = self._bad_cache.get(marking)
        if hit is None:
            hit = any(matches(p, marking) for p in self.bad)
            self._bad_cache[marking] = hit
        return hit

    # ------------------------------------------------------------------
    # backward moves

    def rewind_configs(self, state: State, nes_only: bool = False) -> list[tuple[tuple, tuple]]:
        """All configurations reachable by applying backward moves.

        A configuration is ``(dm, lengths)``; ``lengths[i]`` is how much of
        player ``i+1``'s sequence is still unapplied. With ``nes_only`` the
        rewind starts from the TRUE tuples and uses only moves between
        TRUE tuples.
        """
        bm = state.bm
        start_dm = tuple(d for d in state.dm if d[NES] == TRUE) if nes_only else state.dm
        start = (frozenset(start_dm), tuple(len(s) for s in bm))
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            dm, lens = queue.popleft()
            tried = set()
            for i, n in enumerate(lens):
                if n == 0:
                    continue
                move = bm[i][n - 1]
                if move in tried:
                    continue
                tried.add(move)
                pre, post = move
                ids = move_ids(move)
                if any(j == 0 or lens[j - 1] == 0 or bm[j - 1][lens[j - 1] - 1] != move for j in ids):
                    continue
                if nes_only and any(d[NES] != TRUE for d in pre + post):
                    continue
                if not all(d in dm for d in post):
                    continue
                new_dm = (dm - frozenset(post)) | frozenset(pre)
                new_lens = list(lens)
                for j in ids:
                    new_lens[j - 1] -= 1
                cfg = (new_dm, tuple(new_lens))
                if cfg not in seen:
                    seen.add(cfg)
                    order.append(cfg)
                    queue.append(cfg)
        return [(tuple(sorted(dm)), lens) for dm, lens in order]

    def bm_reachable(self, state: State) -> list[tuple]:
        """Decision markings reachable by rewinding (including the state's own)."""
        out = []
        seen = set()
        for dm, _ in self.rewind_configs(state):
            if dm not in seen:
                seen.add(dm)
                out.append(dm)
        return out

    # ------------------------------------------------------------------
    # classification

    def classify(self, state: State, with_details: bool = False):
        """Flags of a state without Top tuples (see module docstring)."""
        flags: set[Flag] = set()
        details: dict[Flag, object] = {}
        dm = state.dm
        active = [d for d in dm if d[NES] != END]
        act_marking = Counter(d[PL] for d in active)
        if not any(all(act_marking[p] >= n for p, n in self.pre[t].items()) for t in self.transitions):
            flags.add(Flag.TERM)
        if not any(self._enabled_allowed(dm, t) for t in self.transitions):
            flags.add(Flag.DL)
            details[Flag.DL] = dm_marking(dm)
        trues = [d for d in dm if d[NES] == TRUE]
        if trues and not any(self._enabled_allowed(dm, t, only_true=True) for t in self.sys_transitions):
            flags.add(Flag.DL_T2)
            details[Flag.DL_T2] = dm_marking(trues)
        if state.m_t2 and not trues:
            flags.add(Flag.VAN_T2)
            details[Flag.VAN_T2] = Multiset(dict(state.m_t2))
        hit = self._sync_t2(dm)
        if hit is not None:
            flags.add(Flag.SYNC_T2)
            details[Flag.SYNC_T2] = (hit, dm_marking(dm))
        configs = self.rewind_configs(state)
        for cfg_dm, _ in configs if self.rewind else configs[:1]:
            marking = dm_marking(cfg_dm)
            if Flag.BAD not in flags and self._is_bad(marking):
                flags.add(Flag.BAD)
                details[Flag.BAD] = marking
            if Flag.NDET not in flags:
                hit = self._ndet(cfg_dm)
                if hit is not None:
                    flags.add(Flag.NDET)
                    details[Flag.NDET] = (hit, marking)
        ur = self._useless_repetition(state, configs)
        if ur is not None:
            flags.add(Flag.UR)
            details[Flag.UR] = ur
        if with_details:
            return frozenset(flags), details
        return frozenset(flags)

    def _candidate_counts(self, dm) -> dict[str, Counter]:
        counts: dict[str, Counter] = {}
        for d in dm:
            if d[DEC] is None or d[NES] == END:
                continue
            for t in d[DEC]:
                counts.setdefault(t, Counter())[d[PL]] += 1
        return counts

    def _count_with(self, d: tuple, t: str, counts: Counter) -> int:
        total = 1
        for p, n in self.pre_sorted[t]:
            avail, req = counts[p], n
            if p == d[PL]:
                avail, req = avail - 1, req - 1
            if avail < req:
                return 0
            total *= comb(avail, req)
        return total

    def _ndet(self, dm):
        """A system tuple with two or more instances (of one or several transitions) it can join."""
        counts = self._candidate_counts(dm)
        for d in dm:
            if d[ID] == 0 or d[DEC] is None or d[NES] == END:
                continue
            total = 0
            for t in d[DEC]:
                total += self._count_with(d, t, counts.get(t, Counter()))
                if total >= 2:
                    return d[PL]
        return None

    def _sync_t2(self, dm):
        """A TRUE tuple whose allowed transition is only enabled with a non-TRUE partner."""
        counts = self._candidate_counts(dm)
        true_counts = self._candidate_counts([d for d in dm if d[NES] == TRUE])
        for d in dm:
            if d[NES] != TRUE:
                continue
            for t in d[DEC]:
                if self._count_with(d, t, counts.get(t, Counter())) and not self._count_with(
                    d, t, true_counts.get(t, Counter())
                ):
                    return (d[PL], t)
        return None

    def _useless_repetition(self, state: State, configs):
        """Two consecutive, identical loops from one decision marking back to itself."""
        bm = state.bm
        by_dm: dict[tuple, list[tuple]] = {}
        for dm, lens in configs:
            by_dm.setdefault(dm, []).append(lens)
        loops: dict[tuple, list[tuple[tuple, tuple]]] = {}
        for dm, group in by_dm.items():
            if len(group) < 2:
                continue
            for a in group:
                for b in group:
                    if a != b and all(x <= y for x, y in zip(a, b)):
                        key = tuple(bm[i][a[i]:b[i]] for i in range(len(a)))
                        loops.setdefault(key, []).append((a, b))
        for key, pairs in loops.items():
            for a1, b1 in pairs:
                for a2, b2 in pairs:
                    if all(x <= y for x, y in zip(b1, a2)):
                        return dm_marking(next(dm for dm, lens in configs if lens == a1))
        return None

    # ------------------------------------------------------------------
    # successors

    def _sorted_dm(self, tuples) -> tuple:
        return tuple(sorted(tuples))

    def _next_ids(self, used: set[int], bm, count: int) -> list[int]:
        """Lowest free ids, preferring ones whose move sequence is empty."""
        free = [i for i in range(1, self.max_s + 1) if i not in used]
        preferred = [i for i in free if not bm[i - 1]] + [i for i in free if bm[i - 1]]
        if len(preferred) < count:
            raise InvariantBroken("ran out of system player ids")
        return preferred[:count]

    def _append_moves(self, bm, moves: list[Move]) -> tuple:
        seqs = list(bm)
        for move in moves:
            for j in move_ids(move):
                seqs[j - 1] = seqs[j - 1] + (move,)
                if len(seqs[j - 1]) > self.max_bm:
                    raise BmCapExceeded(f"backward-move sequence of player {j} exceeds {self.max_bm}")
        return tuple(seqs)

    def _flip_eligible(self, d: tuple) -> bool:
        return (
            d[ID] != 0
            and d[NES] == FALSE
            and d[DEC] is not None
            and self.flippable_place[d[PL]]
            and any(self.sys_only[t] for t in d[DEC])
        )

    def _flip_variants(self, tuples: list[tuple]):
        """All ways of switching eligible FALSE tuples to TRUE.

        Yields ``(new_tuples, flipped_ids)``. No flips are offered once an
        END tuple exists.
        """
        if any(d[NES] == END for d in tuples):
            yield list(tuples), ()
            return
        eligible = [i for i, d in enumerate(tuples) if self._flip_eligible(d)]
        for chosen in _subsets(tuple(eligible)):
            new = list(tuples)
            for i in chosen:
                d = new[i]
                new[i] = (d[ID], d[PL], TRUE, d[DEC], d[LMC])
            yield new, tuple(tuples[i][ID] for i in chosen)

    def _m_t2(self, tuples) -> tuple:
        return tuple(sorted(Counter(d[PL] for d in tuples if d[NES] == TRUE).items()))

    def successors(self, state) -> list[tuple[Edge, object]]:
        if is_sentinel(state):
            return [(Edge(EdgeKind.LOOP), state)]
        return self.expand(state)[1]

    def expand(self, state: State):
        """Flags and outgoing edges of a non-sentinel state."""
        dm = state.dm
        if any(d[DEC] is None for d in dm):
            return frozenset(), self._top_edges(state)
        flags = self.classify(state)
        if Flag.DL in flags and Flag.TERM not in flags or flags & LOSING_FLAGS:
            return flags, [(Edge(EdgeKind.STOP), FN)]
        if Flag.TERM in flags:
            return flags, [(Edge(EdgeKind.STOP), FB)]
        if any(d[NES] == TRUE for d in dm):
            return flags, self._nes_edges(state)
        if self.is_mcut(dm):
            if state.m_t2:
                raise InvariantBroken("mcut state with a pending NES marking")
            return flags, self._mcut_edges(state)
        return flags, self._sys_edges(state)

    def _top_edges(self, state: State):
        dm = state.dm
        if any(d[NES] == TRUE for d in dm) or state.m_t2:
            raise InvariantBroken("Top tuple during the NES phase")
        tops = [i for i, d in enumerate(dm) if d[DEC] is None]
        out = []
        for choice in product(*(self.decisions[dm[i][PL]] for i in tops)):
            resolved = list(dm)
            for i, dec in zip(tops, choice):
                d = resolved[i]
                resolved[i] = (d[ID], d[PL], d[NES], dec, d[LMC])
            for flipped_tuples, flipped in self._flip_variants(resolved):
                moves = []
                old = [resolved[i] for i, d in enumerate(dm) if d[DEC] is not None and d[ID] in flipped]
                if old:
                    new = [d for d in flipped_tuples if d[ID] in {o[ID] for o in old}]
                    moves.append((tuple(sorted(old)), tuple(sorted(new))))
                bm = self._append_moves(state.bm, moves)
                succ = State(self._sorted_dm(flipped_tuples), self._m_t2(flipped_tuples), bm)
                out.append((Edge(EdgeKind.TOP, flipped=flipped), succ))
        return out

    def _fire(self, dm, instance: tuple, t: str, bm):
        """Untouched tuples and the ``(id, place)`` of every produced token."""
        moved, created = self._assign(instance, t)
        rest = [d for d in dm if d not in instance]
        used = {d[ID] for d in rest} | {d[ID] for d, dst in moved if dst is not None}
        new_ids = self._next_ids(used, bm, len(created))
        produced = []
        for d, dst in moved:
            if dst is not None:
                produced.append((d[ID], dst))
        for ident, dst in zip(new_ids, created):
            produced.append((ident, dst))
        return rest, produced

    def _sys_edges(self, state: State):
        out = []
        for t in self.sys_transitions:
            for inst in self._instances(state.dm, t):
                out.extend(self._sys_successors(state, t, inst))
        return out

    def _sys_successors(self, state: State, t: str, inst: tuple):
        rest, produced = self._fire(state.dm, inst, t, state.bm)
        lmc = max(d[LMC] for d in inst)
        consumed = tuple(d[ID] for d in inst)
        out = []
        for decs in product(*(self.decisions[p] for _, p in produced)):
            pc = [(i, p, FALSE, dec, lmc) for (i, p), dec in zip(produced, decs)]
            tuples = rest + pc
            for flipped_tuples, flipped in self._flip_variants(tuples):
                status = {d[ID]: d for d in flipped_tuples}
                pc_final = tuple(sorted(status[i] for i, _ in produced))
                moves = [(inst, pc_final)]
                others = [d for d in rest if d[ID] in flipped]
                if others:
                    moves.append((tuple(sorted(others)), tuple(sorted(status[d[ID]] for d in others))))
                bm = self._append_moves(state.bm, moves)
                succ = State(self._sorted_dm(flipped_tuples), self._m_t2(flipped_tuples), bm)
                out.append((Edge(EdgeKind.SYS, t, consumed, tuple(produced), flipped), succ))
        return out

    def _nes_edges(self, state: State):
        trues = [d for d in state.dm if d[NES] == TRUE]
        if not state.m_t2:
            raise InvariantBroken("NES phase without a marking to repeat")
        history = [dm_marking(dm) for dm, _ in self.rewind_configs(state, nes_only=True)]
        target = Multiset(dict(state.m_t2))
        moved_everywhere = all(any(m[p] == 0 for m in history) for p in target)
        out = []
        for t in self.sys_transitions:
            for inst in self._instances(trues, t, only_true=True):
                rest, produced = self._fire(state.dm, inst, t, state.bm)
                lmc = max(d[LMC] for d in inst)
                consumed = tuple(d[ID] for d in inst)
                for decs in product(*(self.decisions[p] for _, p in produced)):
                    pc = [(i, p, TRUE, dec, lmc) for (i, p), dec in zip(produced, decs)]
                    tuples = rest + pc
                    new = dm_marking([d for d in tuples if d[NES] == TRUE])
                    if new == target and moved_everywhere:
                        ended = [(d[ID], d[PL], END, d[DEC], d[LMC]) for d in pc]
                        others = [d for d in rest if d[NES] == TRUE]
                        others_end = [(d[ID], d[PL], END, d[DEC], d[LMC]) for d in others]
                        moves = [(inst, tuple(sorted(ended)))]
                        if others:
                            moves.append((tuple(sorted(others)), tuple(sorted(others_end))))
                        final = [d for d in rest if d[NES] != TRUE] + others_end + ended
                        bm = self._append_moves(state.bm, moves)
                        released = tuple(sorted(d[ID] for d in final if d[NES] == END))
                        edge = Edge(EdgeKind.NES_FINISH, t, consumed, tuple(produced), released=released)
                        out.append((edge, State(self._sorted_dm(final), (), bm)))
                    elif new in history:
                        out.append((Edge(EdgeKind.NES_BAD, t, consumed, tuple(produced)), FN))
                    else:
                        bm = self._append_moves(state.bm, [(inst, tuple(sorted(pc)))])
                        edge = Edge(EdgeKind.NES_FIRE, t, consumed, tuple(produced))
                        out.append((edge, State(self._sorted_dm(tuples), state.m_t2, bm)))
        return out

    def _mcut_edges(self, state: State):
        out = []
        for t in self.env_transitions:
            for inst in self._instances(state.dm, t):
                out.append(self._mcut_successor(state, t, inst))
        return out

    def _mcut_successor(self, state: State, t: str, inst: tuple):
        rest, produced = self._fire(state.dm, inst, t, state.bm)
        cleared = {d[ID] for d in inst if d[ID] != 0} | {i for i, _ in produced if i != 0}
        seqs = [() if i + 1 in cleared else seq for i, seq in enumerate(state.bm)]
        seqs = _prune_dead_moves(seqs)
        values = sorted({d[LMC] for d in rest if d[ID] != 0} | {
            d[LMC] for seq in seqs for move in seq for side in move for d in side
        })
        renumber = {v: k for k, v in enumerate(values, start=1)}
        new_lmc = len(values) + 1

        def relabel(d: tuple) -> tuple:
            if d[ID] == 0:
                return d
            return (d[ID], d[PL], d[NES], d[DEC], renumber[d[LMC]])

        seqs = [
            tuple((tuple(map(relabel, pre)), tuple(map(relabel, post))) for pre, post in seq) for seq in seqs
        ]
        tuples = [relabel(d) for d in rest]
        for ident, p in produced:
            if ident == 0:
                tuples.append((0, p, FALSE, self.env_post[p], 0))
            else:
                tuples.append((ident, p, FALSE, None, new_lmc))
        consumed = tuple(d[ID] for d in inst)
        succ = State(self._sorted_dm(tuples), (), tuple(seqs))
        return Edge(EdgeKind.MCUT, t, consumed, tuple(produced)), succ

    # ------------------------------------------------------------------
    # arena

    def build_arena(self) -> ReductionArena:
        """Breadth-first expansion of the reachable arena with memoization."""
        init = self.initial_state()
        states: list = [init]
        index: dict = {init: 0}
        succ: list[list[int]] = []
        owner: list[int] = []
        accepting: set[int] = set()
        edges: dict[tuple[int, int], Edge] = {}
        flags_of: dict[int, frozenset[Flag]] = {}
        bm_max = 0
        i = 0
        while i < len(states):
            state = states[i]
            if is_sentinel(state):
                flags, out = frozenset(), [(Edge(EdgeKind.LOOP), state)]
                owner.append(PLAYER1)
                if state == FB:
                    accepting.add(i)
            else:
                flags, out = self.expand(state)
                mcut = self.is_mcut(state.dm)
                owner.append(PLAYER1 if mcut else PLAYER0)
                if mcut:
                    accepting.add(i)
                bm_max = max([bm_max] + [len(s) for s in state.bm])
            if not out:
                raise InvariantBroken(f"state without successors: {format_state(state)}")
            flags_of[i] = flags
            row: list[int] = []
            for edge, target in out:
                j = index.get(target)
                if j is None:
                    j = len(states)
                    if j >= self.max_states:
                        raise StateCapExceeded(
                            f"more than {self.max_states} arena states "
                            f"(frontier {len(states) - i}, deepest bm length {bm_max})"
                        )
                    index[target] = j
                    states.append(target)
                if (i, j) not in edges:
                    edges[(i, j)] = edge
                    row.append(j)
            succ.append(row)
            i += 1
        arena = BuchiArena(owner, succ, 0, frozenset(accepting))
        stats = {"states": len(states), "edges": len(edges), "max_bm": bm_max, "max_s": self.max_s}
        return ReductionArena(arena, states, index, edges, flags_of, self, stats)


def _prune_dead_moves(seqs: list[tuple]) -> list[tuple]:
    """Drop moves that can never be rewound again, to a fixpoint.

    A move is dead when it is missing from the sequence of one of its
    participants; everything recorded before a dead move in a sequence is
    dead too, because rewinding proceeds from the end.
    """
    seqs = list(seqs)
    changed = True
    while changed:
        changed = False
        for i, seq in enumerate(seqs):
            cut = 0
            for k, move in enumerate(seq):
                if any(j == 0 or move not in seqs[j - 1] for j in move_ids(move)):
                    cut = k + 1
            if cut:
                seqs[i] = seq[cut:]
                changed = True
    return seqs


def _default_bound(game: PetriGame, cap: int) -> int:
    """Smallest per-place bound witnessed by the reachable markings."""
    markings = reachable_markings(game.net, cap=cap)
    return max([1] + [n for m in markings for _, n in m.items_tuple])


def build_arena(
    game: PetriGame,
    bound: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
    max_bm: int = DEFAULT_MAX_BM,
    marking_cap: int = DEFAULT_MARKING_CAP,
) -> ReductionArena:
    return Reduction(game, bound, max_states, max_bm, marking_cap).build_arena()
