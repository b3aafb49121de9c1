"""Independent checks of strategies: structure, legality and winning.

Every check works on the labelled net directly. A finite strategy is
interpreted as a net whose reachable markings are the cuts of its
unrolling; all checks except the occurrence-net structure therefore
explore the reachable markings of that net and never consult the solver.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from itertools import combinations, product

from .errors import CapExceeded, InvariantBroken, NotEnabled, UnknownNode
from .game import MarkingClass, PetriGame, classify_marking, is_bad
from .net import DEFAULT_MARKING_CAP, Multiset, enabled, fire, reachable_markings
from .strategy import BranchingProcess, LabelledNet, _natural


@dataclass(frozen=True)
class Violation:
    condition: str
    witness: str

    def __str__(self) -> str:
        return f"{self.condition}: {self.witness}"


@dataclass
class Report:
    """Outcome of one check: the list of violated conditions with witnesses."""

    check: str
    violations: list[Violation] = field(default_factory=list)
    explored: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, condition: str, witness: str) -> None:
        self.violations.append(Violation(condition, witness))

    def __str__(self) -> str:
        head = f"{self.check}: {'ok' if self.ok else 'FAILED'}"
        return "\n".join([head] + [f"  {v}" for v in self.violations])


def _fmt(nodes) -> str:
    return "{" + ", ".join(sorted(nodes, key=_natural)) + "}"


def _strategy_markings(ln: LabelledNet, cap: int) -> list[Multiset]:
    return reachable_markings(ln.to_petri_net(), cap=cap)


def _cutoff(ln: LabelledNet) -> frozenset[str]:
    return getattr(ln, "cutoff", frozenset())


def _enabled_events(ln: LabelledNet, marking: Multiset) -> list[str]:
    return [e for e in sorted(ln.events, key=_natural) if Multiset(ln.pre[e]) <= marking]


# ----------------------------------------------------------------------
# homomorphism and occurrence-net structure


def check_homomorphism(ln: LabelledNet, game: PetriGame) -> Report:
    """Labels name game nodes and events map pre- and postsets onto their transition's."""
    rep = Report("homomorphism")
    net = game.net
    for c, lab in sorted(ln.conditions.items(), key=lambda kv: _natural(kv[0])):
        if lab not in net.places:
            rep.add("type preservation", f"condition {c} labelled {lab!r}, which is not a place")
    for e, lab in sorted(ln.events.items(), key=lambda kv: _natural(kv[0])):
        if lab not in net.transitions:
            rep.add("type preservation", f"event {e} labelled {lab!r}, which is not a transition")
            continue
        for side, nodes, want in (("pre", ln.pre[e], net.pre[lab]), ("post", ln.post[e], net.post[lab])):
            if any(c not in ln.conditions for c in nodes):
                rep.add("type preservation", f"event {e} names an unknown condition")
                continue
            got = Multiset(Counter(ln.conditions[c] for c in nodes))
            if got == want:
                continue
            if _env_count(game, got) != _env_count(game, want):
                rep.add("type preservation", f"{side} of {e} maps to {got}, expected {want} for {lab}")
            else:
                rep.add(f"{side}set image", f"{side} of {e} maps to {got}, expected {want} for {lab}")
    init = Multiset(Counter(ln.conditions.get(c, "?") for c in ln.initial))
    if init != net.initial:
        rep.add("initial marking", f"initial conditions map to {init}, game starts in {net.initial}")
    seen: dict[tuple, str] = {}
    for e in sorted(ln.events, key=_natural):
        key = (ln.events[e], frozenset(ln.pre[e]))
        if key in seen:
            rep.add("injectivity", f"events {seen[key]} and {e} share label {ln.events[e]} and preset")
        else:
            seen[key] = e
    return rep


def _env_count(game: PetriGame, marking: Multiset) -> int:
    return sum(n for p, n in marking.items() if p in game.env_places)


def validate_branching_process(bp: LabelledNet, game: PetriGame) -> Report:
    """Occurrence-net conditions plus the labelling homomorphism."""
    rep = Report("branching process")
    for e in sorted(bp.events, key=_natural):
        for side, nodes in (("pre", bp.pre[e]), ("post", bp.post[e])):
            if len(set(nodes)) != len(nodes):
                rep.add("set-valued arcs", f"{side} of {e} repeats a condition")
        if not bp.pre[e]:
            rep.add("non-empty preset", f"event {e} has an empty preset")
    producers = bp.producers()
    initial = set(bp.initial)
    for c in sorted(bp.conditions, key=_natural):
        n = len(producers[c])
        if c in initial and n:
            rep.add("initial places", f"initial condition {c} has incoming event {producers[c][0]}")
        elif c not in initial and n == 0:
            rep.add("initial places", f"condition {c} has no incoming event but is not initial")
        elif n > 1:
            rep.add("single predecessor", f"condition {c} is produced by {', '.join(producers[c])}")
    past = _causal_pasts(bp, rep)
    if past is not None:
        for e in sorted(bp.events, key=_natural):
            hist = past[e]
            taken: dict[str, str] = {}
            for f in sorted(hist, key=_natural):
                for c in bp.pre[f]:
                    if c in taken and taken[c] != f:
                        rep.add("self-conflict", f"event {e} depends on {taken[c]} and {f}, both consuming {c}")
                        break
                    taken[c] = f
                else:
                    continue
                break
    rep.violations.extend(check_homomorphism(bp, game).violations)
    return rep


def _causal_pasts(bp: LabelledNet, rep: Report) -> dict[str, frozenset[str]] | None:
    """Events causally before each event (inclusive); None if the net is cyclic."""
    producers = bp.producers()
    preds = {e: {p for c in bp.pre[e] for p in producers[c]} for e in bp.events}
    indegree = {e: len(preds[e]) for e in bp.events}
    succs: dict[str, list[str]] = {e: [] for e in bp.events}
    for e, ps in preds.items():
        for p in ps:
            succs[p].append(e)
    queue = deque(sorted((e for e, d in indegree.items() if d == 0), key=_natural))
    order = []
    while queue:
        e = queue.popleft()
        order.append(e)
        for f in sorted(succs[e], key=_natural):
            indegree[f] -= 1
            if indegree[f] == 0:
                queue.append(f)
    if len(order) != len(bp.events):
        stuck = sorted((e for e, d in indegree.items() if d > 0), key=_natural)
        rep.add("acyclic", f"cycle through {stuck[0]}")
        return None
    past: dict[str, frozenset[str]] = {}
    for e in order:
        acc = {e}
        for p in preds[e]:
            acc |= past[p]
        past[e] = frozenset(acc)
    return past


def unroll(fs: LabelledNet, depth: int, cap: int = DEFAULT_MARKING_CAP) -> BranchingProcess:
    """Prefix of the unfolding of a finite strategy, events up to ``depth`` deep.

    Conditions and events are renamed ``<label>#<n>`` in creation order;
    labels refer to the game, as in the strategy.
    """
    conditions: dict[str, str] = {}
    origin: dict[str, str] = {}
    events: dict[str, str] = {}
    pre: dict[str, tuple[str, ...]] = {}
    post: dict[str, tuple[str, ...]] = {}
    level: dict[str, int] = {}
    serial = [0]

    def fresh(label: str) -> str:
        serial[0] += 1
        return f"{label}#{serial[0]}"

    initial = []
    for c in sorted(fs.initial, key=_natural):
        u = fresh(fs.conditions[c])
        conditions[u], origin[u], level[u] = fs.conditions[c], c, 0
        initial.append(u)
    known: dict[tuple[str, frozenset[str]], str] = {}
    start = frozenset(initial)
    seen = {start}
    queue = deque([start])
    while queue:
        cut = queue.popleft()
        for e in sorted(fs.events, key=_natural):
            for chosen in _matchings(cut, fs.pre[e], origin):
                d = 1 + max((level[u] for u in chosen), default=0)
                if d > depth:
                    continue
                key = (e, frozenset(chosen))
                ev = known.get(key)
                if ev is None:
                    ev = fresh(fs.events[e])
                    known[key] = ev
                    events[ev] = fs.events[e]
                    pre[ev] = tuple(sorted(chosen, key=_natural))
                    outs = []
                    for c in fs.post[e]:
                        u = fresh(fs.conditions[c])
                        conditions[u], origin[u], level[u] = fs.conditions[c], c, d
                        outs.append(u)
                    post[ev] = tuple(outs)
                nxt = (cut - set(chosen)) | set(post[ev])
                if nxt not in seen:
                    if len(seen) >= cap:
                        raise CapExceeded(f"more than {cap} cuts while unrolling")
                    seen.add(nxt)
                    queue.append(nxt)
    consumed = {c for e in fs.events for c in fs.pre[e]}
    cutoff = frozenset(u for u, d in level.items() if d == depth and origin[u] in consumed)
    return BranchingProcess(conditions, events, pre, post, tuple(initial), [], fs.game, cutoff)


def _matchings(cut: frozenset[str], wanted: tuple[str, ...], origin: dict[str, str]):
    """All ways to pick distinct cut conditions whose origins are ``wanted``."""
    need = Counter(wanted)
    options = []
    for c, n in sorted(need.items()):
        avail = sorted((u for u in cut if origin[u] == c), key=_natural)
        if len(avail) < n:
            return []
        options.append(list(combinations(avail, n)))
    return [tuple(u for combo in pick for u in combo) for pick in product(*options)]


# ----------------------------------------------------------------------
# strategy conditions


def check_justified_refusal(ln: LabelledNet, game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> Report:
    """Every game transition enabled on a reachable co-set fires there or is refused by a system place."""
    rep = Report("justified refusal")
    net = game.net
    consumers = ln.consumers()
    refused = {c: {ln.events[e] for e in consumers[c]} for c in ln.conditions}
    fired: set[tuple[str, frozenset[str]]] = {(ln.events[e], frozenset(ln.pre[e])) for e in ln.events}
    reported = set()
    cutoff = _cutoff(ln)
    markings = _strategy_markings(ln, cap)
    rep.explored = len(markings)
    for m in markings:
        by_label: dict[str, list[str]] = {}
        for c in sorted(m.support(), key=_natural):
            by_label.setdefault(ln.conditions[c], []).append(c)
        for t in net.sorted_transitions:
            need = net.pre[t]
            if any(len(by_label.get(p, ())) < n for p, n in need.items()):
                continue
            choices = [list(combinations(by_label[p], n)) for p, n in need.items_tuple]
            for pick in product(*choices):
                coset = frozenset(c for combo in pick for c in combo)
                if (t, coset) in fired or coset & cutoff:
                    continue
                if any(ln.conditions[c] in game.system_places and t not in refused[c] for c in coset):
                    continue
                key = (t, coset)
                if key not in reported:
                    reported.add(key)
                    rep.add("refusal", f"{t} enabled on {_fmt(coset)} in marking {_fmt(m.support())} but not taken")
    return rep


def check_deterministic(ln: LabelledNet, game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> Report:
    """No system condition has two enabled outgoing events in a reachable marking."""
    rep = Report("deterministic")
    consumers = ln.consumers()
    markings = _strategy_markings(ln, cap)
    rep.explored = len(markings)
    for m in markings:
        for c in sorted(m.support(), key=_natural):
            if ln.conditions[c] not in game.system_places:
                continue
            live = [e for e in consumers[c] if Multiset(ln.pre[e]) <= m]
            if len(live) > 1:
                rep.add(
                    "nondeterminism",
                    f"{c} ({ln.conditions[c]}) can take {', '.join(live)} in {ln.label_marking(m)}",
                )
    return rep


def check_deadlock_avoiding(ln: LabelledNet, game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> Report:
    """A reachable marking with nothing enabled must be final in the game as well."""
    rep = Report("deadlock avoiding")
    cutoff = _cutoff(ln)
    markings = _strategy_markings(ln, cap)
    rep.explored = len(markings)
    for m in markings:
        if _enabled_events(ln, m) or m.support() & cutoff:
            continue
        image = ln.label_marking(m)
        live = [t for t in game.net.sorted_transitions if enabled(game.net, image, t)]
        if live:
            rep.add("deadlock", f"strategy stops in {image} where the game can still fire {', '.join(live)}")
    return rep


@dataclass
class WinningVerdict:
    winning: bool
    explored: int
    bad: Multiset | None = None
    deadlock: Multiset | None = None

    def __str__(self) -> str:
        if self.winning:
            return f"winning ({self.explored} strategy markings)"
        if self.bad is not None:
            return f"not winning: bad marking {self.bad} reachable"
        return f"not winning: deadlock in {self.deadlock}"


def check_winning_bad_markings(ln: LabelledNet, game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> WinningVerdict:
    """Winning iff no reachable marking maps to a bad one and no deadlock is reachable.

    Two traversals (breadth-first and depth-first) are run independently
    and must reach the same verdict.
    """
    bfs = _winning_search(ln, game, cap, depth_first=False)
    dfs = _winning_search(ln, game, cap, depth_first=True)
    if bfs.winning != dfs.winning or bfs.explored != dfs.explored:
        raise InvariantBroken(f"traversals disagree: {bfs} / {dfs}")
    return bfs


def _winning_search(ln: LabelledNet, game: PetriGame, cap: int, depth_first: bool) -> WinningVerdict:
    start = Multiset(ln.initial)
    seen = {start}
    frontier = [start]
    first_bad = None
    first_dead = None
    while frontier:
        m = frontier.pop() if depth_first else frontier.pop(0)
        image = ln.label_marking(m)
        if first_bad is None and is_bad(game, image):
            first_bad = image
        succ = _enabled_events(ln, m)
        if not succ and first_dead is None and not m.support() & _cutoff(ln):
            if any(enabled(game.net, image, t) for t in game.net.transitions):
                first_dead = image
        for e in succ:
            nxt = (m - Multiset(ln.pre[e])) + Multiset(ln.post[e])
            if nxt not in seen:
                if len(seen) >= cap:
                    raise CapExceeded(f"more than {cap} strategy markings")
                seen.add(nxt)
                frontier.append(nxt)
    ok = first_bad is None and first_dead is None
    return WinningVerdict(ok, len(seen), first_bad, None if first_bad is not None else first_dead)


def validate_strategy(ln: LabelledNet, game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> list:
    """All checks run by the ``validate`` command, in a fixed order."""
    structure = check_homomorphism(ln, game)
    if not structure.ok:
        return [structure]
    return [
        structure,
        check_justified_refusal(ln, game, cap),
        check_deterministic(ln, game, cap),
        check_deadlock_avoiding(ln, game, cap),
        check_winning_bad_markings(ln, game, cap),
    ]


def all_passed(results: list) -> bool:
    return all(r.ok if isinstance(r, Report) else r.winning for r in results)


# ----------------------------------------------------------------------
# plays


@dataclass(frozen=True)
class PlayStep:
    transition: str | None
    marking: Multiset
    cls: MarkingClass


def simulate_play(subject, game: PetriGame, sequence) -> list[PlayStep]:
    """Fire ``sequence`` (game transition names) and tag each marking Good/Bad/Neutral.

    ``subject`` is the game itself or a strategy; for a strategy, each step
    fires the enabled event with that label (the first in natural order).
    """
    trace = []
    if isinstance(subject, PetriGame):
        m = subject.net.initial
        trace.append(PlayStep(None, m, classify_marking(game, m)))
        for i, t in enumerate(sequence):
            if t not in subject.net.transitions:
                raise UnknownNode(f"unknown transition {t!r} at step {i}")
            if not enabled(subject.net, m, t):
                raise NotEnabled(t, m, i)
            m = fire(subject.net, m, t)
            trace.append(PlayStep(t, m, classify_marking(game, m)))
        return trace
    ln: LabelledNet = subject
    m = Multiset(ln.initial)
    trace.append(PlayStep(None, ln.label_marking(m), classify_marking(game, ln.label_marking(m))))
    for i, t in enumerate(sequence):
        options = [e for e in _enabled_events(ln, m) if ln.events[e] == t]
        if not options:
            raise NotEnabled(t, ln.label_marking(m), i)
        e = options[0]
        m = (m - Multiset(ln.pre[e])) + Multiset(ln.post[e])
        image = ln.label_marking(m)
        trace.append(PlayStep(t, image, classify_marking(game, image)))
    return trace
