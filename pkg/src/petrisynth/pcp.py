"""Post correspondence instances as Petri games, and the good-only translation.

Generated system places are named ``P<k>.<id>.x<i>.a<l>``, where ``id`` is
``start``, ``choice``, ``term``, ``i<n>`` (after index ``n``) or
``i<n>_<j>_<letter>`` (after letter ``j`` of word ``n``), and ``x``/``a``
are the two MOD-3 counters. Transitions are named
``t<k>.<label>.<source id>.<xa>.<target id>.<xa>`` so that the label can
be read back from the name; labels are index numbers, letters, ``tau``
and ``end``. The environment starts on ``e_ch`` and moves to one of the
six ``e_<check>_<suspect>`` places.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import CapExceeded, ParseError, WrongConditionKind
from .game import (
    GoodAndBad,
    GoodMarkings,
    MarkingClass,
    MarkingPattern,
    PetriGame,
    bad_patterns,
    classify_marking,
    good_patterns,
    is_bad,
    matches,
)
from .net import DEFAULT_MARKING_CAP, Multiset, PetriNet, enabled, fire, reachable_markings
from .validate import simulate_play

CHECKS = ("index", "letter")
SUSPECTS = ("first", "okay", "second")
ENV_START = "e_ch"
_SHIFTS = ((0, 1), (2, 0), (1, 2))
_LETTER = re.compile(r"^[A-Za-z0-9]$")


@dataclass(frozen=True)
class PcpInstance:
    alphabet: tuple[str, ...]
    r_words: tuple[str, ...]
    v_words: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "r_words", tuple(self.r_words))
        object.__setattr__(self, "v_words", tuple(self.v_words))
        if not self.r_words or len(self.r_words) != len(self.v_words):
            raise ValueError("the two word lists must be non-empty and of equal length")
        for a in self.alphabet:
            if not _LETTER.match(a):
                raise ValueError(f"letters must be single alphanumeric characters, got {a!r}")
        for w in self.r_words + self.v_words:
            if not w:
                raise ValueError("words must be non-empty")
            for a in w:
                if a not in self.alphabet:
                    raise ValueError(f"letter {a!r} of {w!r} is not in the alphabet")

    @property
    def n(self) -> int:
        return len(self.r_words) - 1

    def words(self, k: int) -> tuple[str, ...]:
        return self.r_words if k == 1 else self.v_words

    def is_solution(self, seq) -> bool:
        seq = list(seq)
        return bool(seq) and "".join(self.r_words[i] for i in seq) == "".join(self.v_words[i] for i in seq)


def parse_pcp(text: str) -> PcpInstance:
    """Three non-empty lines: alphabet letters, the r words, the v words."""
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) != 3:
        raise ParseError(f"expected 3 lines (alphabet, r words, v words), got {len(lines)}")
    try:
        return PcpInstance(tuple(lines[0]), tuple(lines[1]), tuple(lines[2]))
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def format_pcp(inst: PcpInstance) -> str:
    return "\n".join(" ".join(x) for x in (inst.alphabet, inst.r_words, inst.v_words)) + "\n"


def load_pcp(path: str | Path) -> PcpInstance:
    return parse_pcp(Path(path).read_text(encoding="utf-8"))


# ----------------------------------------------------------------------
# naming


def index_id(i: int) -> str:
    return f"i{i}"


def letter_id(i: int, j: int, letter: str) -> str:
    return f"i{i}_{j}_{letter}"


def place(k: int, ident: str, x: int, a: int) -> str:
    return f"P{k}.{ident}.x{x}.a{a}"


def env_place(check: str, suspect: str) -> str:
    return f"e_{check}_{suspect}"


def env_transition(check: str, suspect: str) -> str:
    return f"t_{check}_{suspect}"


def transition_label(t: str) -> str:
    """Output label of a generated transition (``t1.0.start...`` gives ``0``)."""
    parts = t.split(".")
    if len(parts) >= 2 and re.match(r"^t[12]$", parts[0]):
        return parts[1]
    return t


def player_ids(inst: PcpInstance, k: int) -> list[str]:
    ids = ["start", "choice", "term"] + [index_id(i) for i in range(inst.n + 1)]
    for i, w in enumerate(inst.words(k)):
        ids.extend(letter_id(i, j, a) for j, a in enumerate(w))
    return ids


def player_places(inst: PcpInstance, k: int, ids=None, x=None, a=None) -> list[str]:
    """Places of player ``k``, optionally restricted by id set and counter values."""
    out = []
    for ident in player_ids(inst, k):
        if ids is not None and ident not in ids:
            continue
        if ident == "start":
            combos = [(0, 0)]
        else:
            combos = [(xx, aa) for xx in range(3) for aa in range(3)]
        for xx, aa in combos:
            if (x is None or xx == x) and (a is None or aa == a):
                out.append(place(k, ident, xx, aa))
    return out


# ----------------------------------------------------------------------
# generation


def _player(inst: PcpInstance, k: int):
    pre: dict[str, dict[str, int]] = {}
    post: dict[str, dict[str, int]] = {}

    def arc(label: str, src: tuple, dst: tuple) -> None:
        t = f"t{k}.{label}.{src[0]}.{src[1]}{src[2]}.{dst[0]}.{dst[1]}{dst[2]}"
        pre[t] = {place(k, *src): 1}
        post[t] = {place(k, *dst): 1}

    words = inst.words(k)
    for i in range(inst.n + 1):
        arc(str(i), ("start", 0, 0), (index_id(i), 1, 0))
    for x in range(3):
        for a in range(3):
            for i in range(inst.n + 1):
                arc(str(i), ("choice", x, a), (index_id(i), (x + 1) % 3, a))
            arc("end", ("choice", x, a), ("term", x, a))
            for i, w in enumerate(words):
                arc(w[0], (index_id(i), x, a), (letter_id(i, 0, w[0]), x, (a + 1) % 3))
                for j in range(1, len(w)):
                    arc(w[j], (letter_id(i, j - 1, w[j - 1]), x, a), (letter_id(i, j, w[j]), x, (a + 1) % 3))
                last = len(w) - 1
                arc("tau", (letter_id(i, last, w[last]), x, a), ("choice", x, a))
    return player_places(inst, k), pre, post


def _env():
    pre, post = {}, {}
    places = [ENV_START]
    for check in CHECKS:
        for suspect in SUSPECTS:
            places.append(env_place(check, suspect))
            t = env_transition(check, suspect)
            pre[t] = {ENV_START: 1}
            post[t] = {env_place(check, suspect): 1}
    return places, pre, post


def _env_sum(checks, suspects) -> tuple[tuple[str, ...], int, int]:
    return (tuple(env_place(c, s) for c in checks for s in suspects), 1, 1)


def _one_of(places) -> tuple[tuple[str, ...], int, int]:
    return (tuple(places), 1, 1)


def _pattern(*sums) -> MarkingPattern:
    return MarkingPattern(sums=tuple(sums))


def good_families(inst: PcpInstance) -> dict[str, list[MarkingPattern]]:
    n = inst.n
    non_term = {k: [i for i in player_ids(inst, k) if i != "term"] for k in (1, 2)}
    letters = {k: [letter_id(i, j, a) for i, w in enumerate(inst.words(k)) for j, a in enumerate(w)] for k in (1, 2)}
    fam: dict[str, list[MarkingPattern]] = {}
    fam["finish"] = [
        _pattern(
            _one_of([place(1, "term", x, a)]),
            _one_of([place(2, "term", x, a)]),
            _env_sum(CHECKS, ["okay"]),
        )
        for x in range(3)
        for a in range(3)
    ]
    index = []
    for y, z in _SHIFTS:
        for i in range(n + 1):
            index.append(
                _pattern(
                    _one_of(player_places(inst, 1, {index_id(i)}, x=y)),
                    _one_of(player_places(inst, 2, non_term[2], x=z)),
                    _env_sum(["index"], SUSPECTS),
                )
            )
            index.append(
                _pattern(
                    _one_of(player_places(inst, 1, non_term[1], x=y)),
                    _one_of(player_places(inst, 2, {index_id(i)}, x=z)),
                    _env_sum(["index"], SUSPECTS),
                )
            )
    fam["index"] = index
    letter = []
    for b, c in _SHIFTS:
        for lid in letters[1]:
            letter.append(
                _pattern(
                    _one_of(player_places(inst, 1, {lid}, a=b)),
                    _one_of(player_places(inst, 2, non_term[2], a=c)),
                    _env_sum(["letter"], SUSPECTS),
                )
            )
        for lid in letters[2]:
            letter.append(
                _pattern(
                    _one_of(player_places(inst, 1, non_term[1], a=b)),
                    _one_of(player_places(inst, 2, {lid}, a=c)),
                    _env_sum(["letter"], SUSPECTS),
                )
            )
    fam["letter"] = letter
    fam["term"] = [
        _pattern(_one_of(player_places(inst, 1, {"term"})), _env_sum(CHECKS, ["first"])),
        _pattern(_one_of(player_places(inst, 2, {"term"})), _env_sum(CHECKS, ["second"])),
    ]
    envfirst = []
    for k in (1, 2):
        for i in range(n + 1):
            envfirst.append(MarkingPattern(exact=((place(k, index_id(i), 1, 0), 1), (ENV_START, 1))))
    fam["envfirst"] = envfirst
    return fam


def bad_families(inst: PcpInstance) -> dict[str, list[MarkingPattern]]:
    """Bad families; the terminated-player families leave out the suspicion of that player.

    Without that restriction a player that terminated while being
    suspected would make the marking good and bad at once.
    """
    n = inst.n
    fam: dict[str, list[MarkingPattern]] = {}
    fam["index"] = [
        _pattern(
            _one_of(player_places(inst, 1, {index_id(i1)}, x=x)),
            _one_of(player_places(inst, 2, {index_id(i2)}, x=x)),
            _env_sum(["index"], SUSPECTS),
        )
        for i1 in range(n + 1)
        for i2 in range(n + 1)
        if i1 != i2
        for x in range(3)
    ]
    letter = []
    for i1, w1 in enumerate(inst.r_words):
        for j1, l1 in enumerate(w1):
            for i2, w2 in enumerate(inst.v_words):
                for j2, l2 in enumerate(w2):
                    if l1 == l2:
                        continue
                    for a in range(3):
                        letter.append(
                            _pattern(
                                _one_of(player_places(inst, 1, {letter_id(i1, j1, l1)}, a=a)),
                                _one_of(player_places(inst, 2, {letter_id(i2, j2, l2)}, a=a)),
                                _env_sum(["letter"], SUSPECTS),
                            )
                        )
    fam["letter"] = letter
    term_index = []
    for i in range(n + 1):
        for y, z in _SHIFTS:
            term_index.append(
                _pattern(
                    _one_of(player_places(inst, 1, {"term"}, x=y)),
                    _one_of(player_places(inst, 2, {index_id(i)}, x=z)),
                    _env_sum(["index"], ["okay", "second"]),
                )
            )
            term_index.append(
                _pattern(
                    _one_of(player_places(inst, 1, {index_id(i)}, x=y)),
                    _one_of(player_places(inst, 2, {"term"}, x=z)),
                    _env_sum(["index"], ["first", "okay"]),
                )
            )
    fam["term_index"] = term_index
    term_letter = []
    for b, c in _SHIFTS:
        for i, w in enumerate(inst.v_words):
            for j, a in enumerate(w):
                term_letter.append(
                    _pattern(
                        _one_of(player_places(inst, 1, {"term"}, a=b)),
                        _one_of(player_places(inst, 2, {letter_id(i, j, a)}, a=c)),
                        _env_sum(["letter"], ["okay", "second"]),
                    )
                )
        for i, w in enumerate(inst.r_words):
            for j, a in enumerate(w):
                term_letter.append(
                    _pattern(
                        _one_of(player_places(inst, 1, {letter_id(i, j, a)}, a=b)),
                        _one_of(player_places(inst, 2, {"term"}, a=c)),
                        _env_sum(["letter"], ["first", "okay"]),
                    )
                )
    fam["term_letter"] = term_letter
    return fam


def gen_pcp_game(inst: PcpInstance, name: str = "pcp") -> PetriGame:
    system: list[str] = []
    pre: dict = {}
    post: dict = {}
    for k in (1, 2):
        places, tpre, tpost = _player(inst, k)
        system.extend(places)
        pre.update(tpre)
        post.update(tpost)
    env, epre, epost = _env()
    pre.update(epre)
    post.update(epost)
    initial = Multiset({place(1, "start", 0, 0): 1, place(2, "start", 0, 0): 1, ENV_START: 1})
    net = PetriNet(frozenset(system) | frozenset(env), frozenset(pre), pre, post, initial)
    good = tuple(p for ps in good_families(inst).values() for p in ps)
    bad = tuple(p for ps in bad_families(inst).values() for p in ps)
    return PetriGame(net, frozenset(system), frozenset(env), GoodAndBad(good, bad), name)


# ----------------------------------------------------------------------
# canonical plays


class PlayVerdict(str, Enum):
    GOOD_BEFORE_BAD = "GoodBeforeBad"
    BAD_FIRST = "BadFirst"
    NEITHER = "NeitherReached"

    def __str__(self) -> str:
        return self.value


@dataclass
class PcpPlayResult:
    verdict: PlayVerdict
    per_check: dict[str, PlayVerdict]
    sequences: dict[str, list[str]]


def _player_run(inst: PcpInstance, k: int, seq) -> list[tuple[str, str]]:
    """Transitions of player ``k`` outputting ``seq``, tagged ``index``, ``letter`` or ``other``."""
    run = []
    ident, x, a = "start", 0, 0
    words = inst.words(k)
    for i in seq:
        nx = (x + 1) % 3
        run.append((f"t{k}.{i}.{ident}.{x}{a}.{index_id(i)}.{nx}{a}", "index"))
        ident, x = index_id(i), nx
        w = words[i]
        for j, letter in enumerate(w):
            na = (a + 1) % 3
            target = letter_id(i, j, letter)
            run.append((f"t{k}.{letter}.{ident}.{x}{a}.{target}.{x}{na}", "letter"))
            ident, a = target, na
        run.append((f"t{k}.tau.{ident}.{x}{a}.choice.{x}{a}", "other"))
        ident = "choice"
    run.append((f"t{k}.end.{ident}.{x}{a}.term.{x}{a}", "other"))
    return run


def _segments(run, kind: str) -> list[list[str]]:
    segs: list[list[str]] = [[]]
    for t, tag in run:
        segs[-1].append(t)
        if tag == kind:
            segs.append([])
    return [s for s in segs if s]


def canonical_sequence(inst: PcpInstance, seq, check: str) -> list[str]:
    """Environment first, then strict turns on ``check`` outputs with player 1 leading."""
    first = _segments(_player_run(inst, 1, seq), check)
    second = _segments(_player_run(inst, 2, seq), check)
    out = [env_transition(check, "okay")]
    for i in range(max(len(first), len(second))):
        if i < len(first):
            out.extend(first[i])
        if i < len(second):
            out.extend(second[i])
    return out


def _verdict(trace) -> PlayVerdict:
    for step in trace:
        if step.cls is MarkingClass.GOOD:
            return PlayVerdict.GOOD_BEFORE_BAD
        if step.cls is MarkingClass.BAD:
            return PlayVerdict.BAD_FIRST
    return PlayVerdict.NEITHER


def check_pcp_play(game: PetriGame, inst: PcpInstance, seq) -> PcpPlayResult:
    """Play the index sequence at both players under both environment checks.

    BadFirst if either check reaches a bad marking first, GoodBeforeBad if
    both reach a good marking first.
    """
    seq = list(seq)
    if not seq:
        raise ValueError("the index sequence must be non-empty")
    for i in seq:
        if not 0 <= i <= inst.n:
            raise ValueError(f"index {i} out of range 0..{inst.n}")
    per_check = {}
    sequences = {}
    for check in CHECKS:
        sequences[check] = canonical_sequence(inst, seq, check)
        per_check[check] = _verdict(simulate_play(game, game, sequences[check]))
    verdicts = set(per_check.values())
    if PlayVerdict.BAD_FIRST in verdicts:
        overall = PlayVerdict.BAD_FIRST
    elif verdicts == {PlayVerdict.GOOD_BEFORE_BAD}:
        overall = PlayVerdict.GOOD_BEFORE_BAD
    else:
        overall = PlayVerdict.NEITHER
    return PcpPlayResult(overall, per_check, sequences)


# ----------------------------------------------------------------------
# good-and-bad to good-only

SINK = "pi_sink"
TAU_IN = "tau_In"


def shadow(p: str) -> str:
    return f"pi_{p}"


def start_copy(p: str) -> str:
    return f"pi0_{p}"


def return_transition(t: str) -> str:
    return f"tau_{t}"


def bad_transition(i: int) -> str:
    return f"tau_M{i}"


def explicit_bad_markings(game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> list[Multiset]:
    """Reachable markings matching a bad pattern, in reachability order."""
    return [m for m in reachable_markings(game.net, cap=cap) if is_bad(game, m)]


def good_bad_to_good(game: PetriGame, cap: int = DEFAULT_MARKING_CAP) -> PetriGame:
    """Encode bad markings as a sink the environment can reach; keep the good markings."""
    w = game.winning
    if not isinstance(w, GoodAndBad):
        raise WrongConditionKind(f"expected good-and-bad, got {w.kind}")
    net = game.net
    bad = explicit_bad_markings(game, cap)
    names = set(net.places) | set(net.transitions)
    fresh_places = [shadow(p) for p in net.places] + [start_copy(p) for p in net.initial.support()] + [SINK]
    fresh_transitions = [return_transition(t) for t in net.transitions]
    fresh_transitions += [bad_transition(i) for i in range(len(bad))] + [TAU_IN]
    clash = names & (set(fresh_places) | set(fresh_transitions))
    if clash:
        raise ValueError(f"generated names clash with existing nodes: {sorted(clash)}")
    pre: dict[str, dict[str, int]] = {}
    post: dict[str, dict[str, int]] = {}
    for t in net.transitions:
        pre[t] = dict(net.pre[t])
        post[t] = {shadow(p): n for p, n in net.post[t].items()}
        pre[return_transition(t)] = {shadow(p): n for p, n in net.post[t].items()}
        post[return_transition(t)] = dict(net.post[t])
    for i, m in enumerate(bad):
        pre[bad_transition(i)] = {shadow(p): n for p, n in m.items()}
        post[bad_transition(i)] = {SINK: 1}
    pre[TAU_IN] = {start_copy(p): n for p, n in net.initial.items()}
    post[TAU_IN] = dict(net.initial)
    system = set(game.system_places) | {start_copy(p) for p in net.initial.support() if p in game.system_places}
    env = set(game.env_places) | {start_copy(p) for p in net.initial.support() if p in game.env_places}
    env |= {shadow(p) for p in net.places} | {SINK}
    initial = Multiset({start_copy(p): n for p, n in net.initial.items()})
    new_net = PetriNet(frozenset(system | env), frozenset(pre), pre, post, initial)
    return PetriGame(new_net, frozenset(system), frozenset(env), GoodMarkings(w.good), f"{game.name}_good_only")


def project(marking) -> Multiset:
    """Map shadow and start copies back to their original places; the sink is dropped."""
    out: Counter = Counter()
    for p, n in marking.items():
        if p == SINK:
            continue
        if p.startswith("pi0_"):
            out[p[4:]] += n
        elif p.startswith("pi_"):
            out[p[3:]] += n
        else:
            out[p] += n
    return Multiset(out)


@dataclass
class ProjectionPlay:
    sequence: list[str]
    projected: list[str]
    reached_sink: bool
    maximal: bool


def random_play(gb: PetriGame, ga: PetriGame, rng: random.Random, max_steps: int = 10_000) -> ProjectionPlay:
    """One random maximal play of the translated game.

    The environment is sink-seeking: a bad-marking transition fires as
    soon as it is enabled. Returns are lazy: a shadow token goes back only
    when the original transition chosen next needs it, immediately before
    that transition fires, and all remaining returns fire once no original
    transition can be taken.
    """
    net = gb.net
    originals = ga.net.sorted_transitions
    returns = {t: return_transition(t) for t in originals}
    sinks = sorted(t for t in net.transitions if t.startswith("tau_M"))
    m = fire(net, net.initial, TAU_IN)
    seq = [TAU_IN]
    projected: list[str] = []

    def sink_step() -> bool:
        nonlocal m
        for s in sinks:
            if enabled(net, m, s):
                m = fire(net, m, s)
                seq.append(s)
                return True
        return False

    while len(seq) < max_steps:
        if sink_step():
            return ProjectionPlay(seq, projected, True, False)
        image = project(m)
        candidates = [t for t in originals if enabled(ga.net, image, t)]
        rng.shuffle(candidates)
        for t in candidates:
            plan = _plan_returns(net, m, t, originals, returns)
            if plan is None:
                continue
            for r in plan:
                m = fire(net, m, r)
                seq.append(r)
            m = fire(net, m, t)
            seq.append(t)
            projected.append(t)
            break
        else:
            pending = [returns[t] for t in originals if enabled(net, m, returns[t])]
            if not pending:
                return ProjectionPlay(seq, projected, False, True)
            r = rng.choice(pending)
            m = fire(net, m, r)
            seq.append(r)
    return ProjectionPlay(seq, projected, False, False)


def _plan_returns(net: PetriNet, m: Multiset, t: str, originals, returns) -> list[str] | None:
    """Returns that put enough tokens on the preset of ``t``; None if impossible."""
    plan = []
    cur = m
    while True:
        missing = [p for p, n in net.pre[t].items() if cur.get(p, 0) < n]
        if not missing:
            return plan
        options = [returns[u] for u in originals if enabled(net, cur, returns[u]) and missing[0] in net.post[returns[u]]]
        if not options:
            return None
        cur = fire(net, cur, options[0])
        plan.append(options[0])


@dataclass
class ProjectionReport:
    plays: int
    avoided_sink: int
    reached_sink: int
    violations: list[tuple[list[str], Multiset]]

    @property
    def ok(self) -> bool:
        return not self.violations


def check_projection(ga: PetriGame, gb: PetriGame, plays: int, seed: int = 0, max_attempts: int | None = None):
    """Sample random maximal plays until ``plays`` of them avoid the sink.

    Each sink-avoiding play is projected onto the original game and
    replayed there; a violation is a projected play reaching a bad marking.
    """
    rng = random.Random(seed)
    attempts = max_attempts if max_attempts is not None else 50 * plays
    avoided = sunk = 0
    violations = []
    for _ in range(attempts):
        if avoided >= plays:
            break
        play = random_play(gb, ga, rng)
        if play.reached_sink:
            sunk += 1
            continue
        if not play.maximal:
            continue
        avoided += 1
        trace = simulate_play(ga, ga, play.projected)
        hit = next((s.marking for s in trace if is_bad(ga, s.marking)), None)
        if hit is not None:
            violations.append((play.projected, hit))
    if avoided < plays:
        raise CapExceeded(f"only {avoided} of {plays} sink-avoiding plays in {attempts} attempts")
    return ProjectionReport(avoided, avoided, sunk, violations)


# ----------------------------------------------------------------------
# census


@dataclass
class Census:
    places: int
    system_places: int
    env_places: int
    transitions: int
    system_transitions: int
    env_transitions: int
    arcs: int
    initial_tokens: int
    initial_places: int
    good_patterns: int
    bad_patterns: int
    components: list[dict]

    def lines(self) -> list[str]:
        out = [
            f"places {self.places} (system {self.system_places}, env {self.env_places})",
            f"transitions {self.transitions} (system-only {self.system_transitions}, with env {self.env_transitions})",
            f"arcs {self.arcs}",
            f"initial {self.initial_tokens} tokens on {self.initial_places} places",
            f"patterns good {self.good_patterns}, bad {self.bad_patterns}",
        ]
        for comp in self.components:
            out.append(
                f"group {comp['name']}: places {comp['places']} (system {comp['system_places']}, env {comp['env_places']}), "
                f"transitions {comp['transitions']}, initial {comp['initial']}"
            )
        return out


def census(game: PetriGame, groups: dict[str, set[str]] | None = None) -> Census:
    """Structural counts, overall and per group of places.

    Without explicit ``groups`` the places are grouped by connected
    component of the net.
    """
    net = game.net
    if groups is None:
        groups = connected_components(net)
    comps = []
    for name, members in groups.items():
        members = set(members)
        ts = [t for t in net.transitions if (net.pre[t].support() | net.post[t].support()) & members]
        comps.append(
            {
                "name": name,
                "places": len(members),
                "system_places": len(members & game.system_places),
                "env_places": len(members & game.env_places),
                "transitions": len(ts),
                "initial": str(Multiset({p: n for p, n in net.initial.items() if p in members})),
            }
        )
    return Census(
        places=len(net.places),
        system_places=len(game.system_places),
        env_places=len(game.env_places),
        transitions=len(net.transitions),
        system_transitions=len(game.system_transitions),
        env_transitions=len(game.env_transitions),
        arcs=sum(len(net.pre[t].support()) + len(net.post[t].support()) for t in net.transitions),
        initial_tokens=net.initial.size(),
        initial_places=len(net.initial.support()),
        good_patterns=len(good_patterns(game.winning)),
        bad_patterns=len(bad_patterns(game.winning)),
        components=comps,
    )


def connected_components(net: PetriNet) -> dict[str, set[str]]:
    """Places grouped by connected component, named ``c0``, ``c1``, ... by decreasing size."""
    parent = {p: p for p in net.places}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for t in net.sorted_transitions:
        nodes = sorted(net.pre[t].support() | net.post[t].support())
        for p in nodes[1:]:
            a, b = find(nodes[0]), find(p)
            if a != b:
                parent[max(a, b)] = min(a, b)
    found: dict[str, set[str]] = {}
    for p in sorted(net.places):
        found.setdefault(find(p), set()).add(p)
    ordered = sorted(found.values(), key=lambda g: (-len(g), min(g)))
    return {f"c{i}": g for i, g in enumerate(ordered)}


def prefix_groups(places) -> dict[str, set[str]]:
    """Places grouped by the part of their name before the first dot (whole name if none)."""
    out: dict[str, set[str]] = {}
    for p in sorted(places):
        out.setdefault(p.split(".", 1)[0] if "." in p else "other", set()).add(p)
    return out


def player_groups(inst: PcpInstance) -> dict[str, set[str]]:
    """The three players of a generated game: ``P1``, ``P2`` and ``env``."""
    env = {ENV_START} | {env_place(c, s) for c in CHECKS for s in SUSPECTS}
    return {"P1": set(player_places(inst, 1)), "P2": set(player_places(inst, 2)), "env": env}


def disjointness_violations(game: PetriGame, markings) -> list[Multiset]:
    """Markings matched by a good and a bad pattern at once."""
    good = good_patterns(game.winning)
    bad = bad_patterns(game.winning)
    return [
        m for m in markings if any(matches(p, m) for p in good) and any(matches(p, m) for p in bad)
    ]


def classify_trace(game: PetriGame, markings) -> list[MarkingClass]:
    return [classify_marking(game, m) for m in markings]
