"""Command-line interface.

Exit codes: 0 winning or valid, 10 losing or invalid, 2 input or class
error, 3 cap exceeded. Artifacts are deterministic; timings go to stderr.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import click

from .buchi import solve as solve_arena
from .errors import CapExceeded, ClassError, NotEnabled, ParseError, PetrisynthError, UnknownNode
from .extract import explain, extract
from .game import PetriGame
from .gamefile import bundled_game_path, format_game, load_game
from .net import DEFAULT_MARKING_CAP
from .pcp import census as census_of
from .pcp import check_pcp_play, gen_pcp_game, good_bad_to_good, load_pcp, player_groups, prefix_groups
from .reduction import DEFAULT_MAX_BM, DEFAULT_MAX_STATES, Reduction
from .strategy import FiniteStrategy
from .validate import Report, all_passed, simulate_play, validate_strategy

EXIT_OK = 0
EXIT_LOSE = 10
EXIT_INPUT = 2
EXIT_CAP = 3

EMIT_CHOICES = {"dot", "json"}


def _load(name_or_path: str) -> PetriGame:
    """A path to a game file, or the name of a bundled game such as ``fig1``."""
    path = Path(name_or_path)
    if not path.exists() and bundled_game_path(name_or_path).exists():
        path = bundled_game_path(name_or_path)
    return load_game(path)


def _emit_set(value: str) -> set[str]:
    chosen = {v.strip() for v in value.split(",") if v.strip()}
    unknown = chosen - EMIT_CHOICES
    if unknown:
        raise click.BadParameter(f"unknown target(s) {sorted(unknown)}; use dot and/or json")
    return chosen


def _write(out: Path | None, name: str, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
        return
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text, encoding="utf-8")
    click.echo(f"wrote {out / name}")


def _timing(label: str, start: float) -> None:
    click.echo(f"{label}: {time.perf_counter() - start:.3f}s", err=True)


def _run(fn):
    """Map library errors onto the stable exit codes."""
    try:
        return fn()
    except CapExceeded as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        return EXIT_CAP
    except (ClassError, ParseError, NotEnabled, UnknownNode, FileNotFoundError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_INPUT
    except PetrisynthError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_INPUT


def _caps(f):
    f = click.option("--bound", type=click.IntRange(min=1), default=None, help="Per-place token bound k.")(f)
    f = click.option("--max-states", type=click.IntRange(min=1), default=DEFAULT_MAX_STATES, show_default=True)(f)
    f = click.option("--max-bm", type=click.IntRange(min=1), default=DEFAULT_MAX_BM, show_default=True)(f)
    f = click.option("--marking-cap", type=click.IntRange(min=1), default=DEFAULT_MARKING_CAP, show_default=True)(f)
    return f


def _outputs(f):
    f = click.option("--emit", default="json,dot", show_default=True, help="Comma-separated: json, dot.")(f)
    f = click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")(f)
    f = click.option("--verbose-states", is_flag=True, help="Include backward-move sequences in state labels.")(f)
    return f


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Synthesis for bounded Petri games with one environment player and bad markings."""


@main.command()
@click.argument("game")
@_caps
@_outputs
def solve(game, bound, max_states, max_bm, marking_cap, emit, out, verbose_states):
    """Decide GAME; write the strategy when winning, a diagnosis when losing."""
    emit = _emit_set(emit)

    def body():
        g = _load(game)
        start = time.perf_counter()
        red = Reduction(g, bound, max_states, max_bm, marking_cap)
        ra = red.build_arena()
        _timing("arena", start)
        start = time.perf_counter()
        sol = solve_arena(ra.arena)
        _timing("solve", start)
        click.echo(f"game {g.name}: bound {red.bound}, max_s {red.max_s}, arena {ra.stats['states']} states")
        if ra.arena.initial in sol.win0:
            fs = extract(ra, sol)
            click.echo(f"winning: strategy with {len(fs.conditions)} conditions, {len(fs.events)} events")
            if out is None:
                click.echo(_allowed_summary(fs))
                return EXIT_OK
            if "json" in emit:
                _write(out, f"{g.name}.strategy.json", fs.to_json())
            if "dot" in emit:
                _write(out, f"{g.name}.strategy.dot", fs.to_dot(g.system_places))
            return EXIT_OK
        diag = explain(ra, sol)
        click.echo("losing")
        click.echo(diag.summary())
        if out is not None:
            _write(out, f"{g.name}.diagnosis.txt", diag.summary() + "\n")
        return EXIT_LOSE

    sys.exit(_run(body))


def _allowed_summary(fs: FiniteStrategy) -> str:
    lines = []
    for e in sorted(fs.events, key=lambda x: (fs.events[x], x)):
        lines.append(f"  {e}: {' '.join(fs.pre[e])} -> {' '.join(fs.post[e])}")
    return "\n".join(lines)


@main.command()
@click.argument("game")
@click.argument("strategy", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--marking-cap", type=click.IntRange(min=1), default=DEFAULT_MARKING_CAP, show_default=True)
def validate(game, strategy, marking_cap):
    """Check STRATEGY (JSON) against GAME without using the solver."""

    def body():
        g = _load(game)
        fs = FiniteStrategy.from_json(strategy.read_text(encoding="utf-8"))
        results = validate_strategy(fs, g, marking_cap)
        for r in results:
            click.echo(str(r) if isinstance(r, Report) else f"winning: {r}")
        ok = all_passed(results)
        click.echo("valid" if ok else "invalid")
        return EXIT_OK if ok else EXIT_LOSE

    sys.exit(_run(body))


@main.command("reduce-dump")
@click.argument("game")
@_caps
@_outputs
@click.option("--depth", type=click.IntRange(min=0), default=None, help="Only states this close to the initial one.")
def reduce_dump(game, bound, max_states, max_bm, marking_cap, emit, out, verbose_states, depth):
    """Write the Büchi arena of GAME as DOT and/or JSON."""
    emit = _emit_set(emit)

    def body():
        g = _load(game)
        start = time.perf_counter()
        ra = Reduction(g, bound, max_states, max_bm, marking_cap).build_arena()
        _timing("arena", start)
        keep = ra.within_depth(depth)
        if out is None:
            click.echo(f"arena {ra.stats['states']} states, {ra.stats['edges']} edges; showing {len(keep)}", err=True)
        if "json" in emit:
            _write(out, f"{g.name}.arena.json", ra.to_json(keep, verbose_states))
        if "dot" in emit:
            _write(out, f"{g.name}.arena.dot", ra.to_dot(keep, verbose_states))
        return EXIT_OK

    sys.exit(_run(body))


@main.command("gen-pcp")
@click.argument("instance", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--name", default=None, help="Game name (defaults to the file stem).")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write the game here.")
@click.option("--play", default=None, help="Also check a canonical play for this index sequence, e.g. '2 1 2 0'.")
def gen_pcp(instance, name, out, play):
    """Generate the good-and-bad Petri game of a PCP INSTANCE (3-line file)."""

    def body():
        inst = load_pcp(instance)
        g = gen_pcp_game(inst, name or instance.stem)
        text = format_game(g)
        if out is None:
            click.echo(text, nl=False)
        else:
            out.write_text(text, encoding="utf-8")
            click.echo(f"wrote {out}")
        for line in census_of(g, player_groups(inst)).lines():
            click.echo(line, err=True)
        if play is not None:
            seq = [int(x) for x in play.replace(",", " ").split()]
            result = check_pcp_play(g, inst, seq)
            click.echo(f"play {seq}: {result.verdict} ({', '.join(f'{k} {v}' for k, v in result.per_check.items())})", err=True)
        return EXIT_OK

    sys.exit(_run(body))


@main.command("to-good-only")
@click.argument("game")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Write the game here.")
@click.option("--marking-cap", type=click.IntRange(min=1), default=DEFAULT_MARKING_CAP, show_default=True)
def to_good_only(game, out, marking_cap):
    """Translate a good-and-bad GAME into a game with good markings only."""

    def body():
        gb = good_bad_to_good(_load(game), marking_cap)
        text = format_game(gb)
        if out is None:
            click.echo(text, nl=False)
        else:
            out.write_text(text, encoding="utf-8")
            click.echo(f"wrote {out}")
        return EXIT_OK

    sys.exit(_run(body))


@main.command()
@click.argument("game")
@click.argument("sequence", default="")
@click.option("--strategy", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
def simulate(game, sequence, strategy):
    """Fire SEQUENCE (space-separated transitions) and print the classified markings."""

    def body():
        g = _load(game)
        subject = g if strategy is None else FiniteStrategy.from_json(strategy.read_text(encoding="utf-8"))
        trace = simulate_play(subject, g, sequence.split())
        for i, step in enumerate(trace):
            click.echo(f"{i:>3} {step.transition or '-':<12} {step.cls!s:<8} {step.marking}")
        return EXIT_OK

    sys.exit(_run(body))


@main.command()
@click.argument("game")
@click.option(
    "--groups",
    type=click.Choice(["components", "prefix"]),
    default="components",
    show_default=True,
    help="Group places by connected component or by name prefix before the first dot.",
)
def census(game, groups):
    """Structural counts of GAME."""

    def body():
        g = _load(game)
        grouping = prefix_groups(g.net.places) if groups == "prefix" else None
        for line in census_of(g, grouping).lines():
            click.echo(line)
        return EXIT_OK

    sys.exit(_run(body))
