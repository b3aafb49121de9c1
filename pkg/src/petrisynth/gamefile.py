"""Text format for Petri games.

Example::

    game fig1
    places {
      system: k p w;
      env: forecast s s';
    }
    init { forecast:1 }
    transition sunny { pre: forecast; post: s, p:2 }
    transition s_h { pre: s; post: s', w:3; flow: s->s', new->w }
    winning {
      kind: bad-markings;
      bad { exact s':1; sum k+w 0 3; others-zero }
    }

Whitespace and newlines are insignificant; ``#`` starts a comment. Flow
pairs are ``src->dst``, ``new->dst`` or ``src->drop``. Winning kinds are
``bad-places`` (entries ``place NAME;``), ``bad-markings`` (``bad {...}``),
``good-markings`` (``good {...}``) and ``good-and-bad`` (both).
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import ParseError
from .game import (
    BadMarkings,
    BadPlaces,
    GoodAndBad,
    GoodMarkings,
    MarkingPattern,
    PetriGame,
    bad_patterns,
    good_patterns,
)
from .net import Multiset, PetriNet

_TOKEN = re.compile(r"\s+|#[^\n]*|(->|[{}:;,+])|((?:[A-Za-z0-9_.'~]|-(?!>))+)")
NAME_RE = re.compile(r"^(?:[A-Za-z0-9_.'~]|-(?!>))+$")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    line = 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        tok = m.group(1) or m.group(2)
        if tok:
            tokens.append((tok, line))
        line += m.group(0).count("\n")
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def line(self) -> int | None:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return self.tokens[-1][1] if self.tokens else None

    def peek(self, offset: int = 0) -> str | None:
        j = self.i + offset
        return self.tokens[j][0] if j < len(self.tokens) else None

    def next(self) -> str:
        if self.i >= len(self.tokens):
            raise ParseError("unexpected end of input", self.line)
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.next()
        if got != tok:
            raise ParseError(f"expected {tok!r}, got {got!r}", self.line)

    def name(self) -> str:
        tok = self.next()
        if not NAME_RE.match(tok):
            raise ParseError(f"expected a name, got {tok!r}", self.line)
        return tok

    def integer(self) -> int:
        tok = self.next()
        if not tok.isdigit():
            raise ParseError(f"expected a non-negative integer, got {tok!r}", self.line)
        return int(tok)

    def accept(self, tok: str) -> bool:
        if self.peek() == tok:
            self.i += 1
            return True
        return False

    def weighted_list(self, stop: set[str]) -> dict[str, int]:
        out: dict[str, int] = {}
        while self.peek() not in stop:
            if self.accept(","):
                continue
            p = self.name()
            n = 1
            if self.accept(":"):
                n = self.integer()
            if n == 0:
                raise ParseError(f"zero weight for {p!r}", self.line)
            out[p] = out.get(p, 0) + n
        return out


def parse_game(text: str) -> PetriGame:
    ps = _Parser(text)
    name = "game"
    system: list[str] = []
    env: list[str] = []
    initial: dict[str, int] = {}
    pre: dict[str, dict[str, int]] = {}
    post: dict[str, dict[str, int]] = {}
    flows: dict[str, list[tuple[str | None, str | None]]] = {}
    winning = None
    seen_places = False
    while ps.peek() is not None:
        kw = ps.next()
        if kw == "game":
            name = ps.name()
        elif kw == "places":
            seen_places = True
            ps.expect("{")
            while not ps.accept("}"):
                side = ps.next()
                if side not in ("system", "env"):
                    raise ParseError(f"expected 'system' or 'env', got {side!r}", ps.line)
                ps.expect(":")
                target = system if side == "system" else env
                while ps.peek() not in (";", "}"):
                    if not ps.accept(","):
                        target.append(ps.name())
                ps.accept(";")
        elif kw == "init":
            ps.expect("{")
            for p, n in ps.weighted_list({"}"}).items():
                initial[p] = initial.get(p, 0) + n
            ps.expect("}")
        elif kw == "transition":
            t = ps.name()
            if t in pre:
                raise ParseError(f"transition {t!r} declared twice", ps.line)
            pre[t], post[t] = {}, {}
            ps.expect("{")
            while not ps.accept("}"):
                field_name = ps.next()
                ps.expect(":")
                if field_name == "pre":
                    pre[t] = ps.weighted_list({";", "}"})
                elif field_name == "post":
                    post[t] = ps.weighted_list({";", "}"})
                elif field_name == "flow":
                    flows[t] = _flow_pairs(ps)
                else:
                    raise ParseError(f"unknown transition field {field_name!r}", ps.line)
                ps.accept(";")
        elif kw == "winning":
            winning = _parse_winning(ps)
        else:
            raise ParseError(f"unknown section {kw!r}", ps.line)
    if not seen_places:
        raise ParseError("missing 'places' section")
    for p in set(system) & set(env):
        raise ParseError(f"place {p!r} declared as both system and env")
    places = set(system) | set(env)
    if len(places) != len(system) + len(env):
        raise ParseError("a place is declared twice")
    if winning is None:
        winning = BadMarkings(())
    try:
        net = PetriNet(frozenset(places), frozenset(pre), pre, post, Multiset(initial))
        return PetriGame(net, frozenset(system), frozenset(env), winning, name, flows)
    except (ValueError, KeyError) as exc:
        raise ParseError(str(exc)) from exc


def _flow_pairs(ps: _Parser) -> list[tuple[str | None, str | None]]:
    pairs: list[tuple[str | None, str | None]] = []
    while ps.peek() not in (";", "}"):
        if ps.accept(","):
            continue
        src = ps.name()
        ps.expect("->")
        dst = ps.name()
        pairs.append((None if src == "new" else src, None if dst == "drop" else dst))
    return pairs


def _parse_pattern(ps: _Parser) -> MarkingPattern:
    exact: dict[str, int] = {}
    ranges: list[tuple[str, int, int]] = []
    sums: list[tuple[tuple[str, ...], int, int]] = []
    others_zero = False
    ps.expect("{")
    while not ps.accept("}"):
        clause = ps.next()
        if clause == "exact":
            for p, n in _exact_list(ps).items():
                exact[p] = n
        elif clause == "range":
            p = ps.name()
            ranges.append((p, ps.integer(), ps.integer()))
        elif clause == "sum":
            names = [ps.name()]
            while ps.accept("+"):
                names.append(ps.name())
            sums.append((tuple(names), ps.integer(), ps.integer()))
        elif clause == "others-zero":
            others_zero = True
        else:
            raise ParseError(f"unknown pattern clause {clause!r}", ps.line)
        ps.accept(";")
    try:
        return MarkingPattern(tuple(exact.items()), tuple(ranges), tuple(sums), others_zero)
    except ValueError as exc:
        raise ParseError(str(exc), ps.line) from exc


def _exact_list(ps: _Parser) -> dict[str, int]:
    out: dict[str, int] = {}
    while ps.peek() not in (";", "}"):
        if ps.accept(","):
            continue
        p = ps.name()
        ps.expect(":")
        out[p] = ps.integer()
    return out


def _parse_winning(ps: _Parser):
    ps.expect("{")
    kind = None
    good: list[MarkingPattern] = []
    bad: list[MarkingPattern] = []
    places: list[str] = []
    while not ps.accept("}"):
        entry = ps.next()
        if entry == "kind":
            ps.expect(":")
            kind = ps.name()
        elif entry == "good":
            good.append(_parse_pattern(ps))
        elif entry == "bad":
            bad.append(_parse_pattern(ps))
        elif entry == "place":
            places.append(ps.name())
        else:
            raise ParseError(f"unknown winning entry {entry!r}", ps.line)
        ps.accept(";")
    if kind == "bad-places":
        if good or bad:
            raise ParseError("bad-places takes only 'place' entries")
        return BadPlaces(frozenset(places))
    if places:
        raise ParseError("'place' entries are only valid for bad-places")
    if kind == "bad-markings":
        if good:
            raise ParseError("bad-markings takes only 'bad' patterns")
        return BadMarkings(tuple(bad))
    if kind == "good-markings":
        if bad:
            raise ParseError("good-markings takes only 'good' patterns")
        return GoodMarkings(tuple(good))
    if kind == "good-and-bad":
        return GoodAndBad(tuple(good), tuple(bad))
    raise ParseError(f"unknown winning kind {kind!r}")


def _weighted(ms) -> str:
    return ", ".join(p if n == 1 else f"{p}:{n}" for p, n in Multiset(ms).items_tuple)


def format_pattern(pattern: MarkingPattern) -> str:
    clauses = []
    if pattern.exact:
        clauses.append("exact " + " ".join(f"{p}:{n}" for p, n in pattern.exact))
    clauses.extend(f"range {p} {lo} {hi}" for p, lo, hi in pattern.ranges)
    clauses.extend(f"sum {'+'.join(ps)} {lo} {hi}" for ps, lo, hi in pattern.sums)
    if pattern.others_zero:
        clauses.append("others-zero")
    return "{ " + "; ".join(clauses) + (" }" if clauses else "}")


def format_game(game: PetriGame) -> str:
    """Canonical text: sorted places and transitions, patterns in stored order."""
    net = game.net
    lines = [f"game {game.name}", "places {"]
    lines.append("  system: " + " ".join(sorted(game.system_places)) + ";")
    lines.append("  env: " + " ".join(sorted(game.env_places)) + ";")
    lines.append("}")
    lines.append("init { " + _weighted(net.initial) + " }")
    for t in net.sorted_transitions:
        fields = [f"pre: {_weighted(net.pre[t])}", f"post: {_weighted(net.post[t])}"]
        if t in game.flows:
            pairs = ", ".join(
                f"{'new' if s is None else s}->{'drop' if d is None else d}" for s, d in game.flows[t]
            )
            fields.append(f"flow: {pairs}")
        lines.append(f"transition {t} {{ " + "; ".join(fields) + " }")
    w = game.winning
    lines.append("winning {")
    lines.append(f"  kind: {w.kind};")
    if isinstance(w, BadPlaces):
        lines.extend(f"  place {p};" for p in sorted(w.places))
    else:
        lines.extend(f"  good {format_pattern(p)}" for p in good_patterns(w))
        lines.extend(f"  bad {format_pattern(p)}" for p in bad_patterns(w))
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_game(path: str | Path) -> PetriGame:
    return parse_game(Path(path).read_text(encoding="utf-8"))


def save_game(game: PetriGame, path: str | Path) -> None:
    Path(path).write_text(format_game(game), encoding="utf-8")


def bundled_game_path(name: str) -> Path:
    """Path of a game file shipped with the package (``fig1``, ``fig3b``, ...)."""
    return Path(__file__).parent / "games" / f"{name}.game"


def load_bundled(name: str) -> PetriGame:
    return load_game(bundled_game_path(name))
