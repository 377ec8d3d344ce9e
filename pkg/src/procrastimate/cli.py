"""Command-line entry point: validate, play, simulate-proto, serve, customize."""

from __future__ import annotations

import json
import statistics
import sys
from pathlib import Path

import click

from . import motivation, report
from .bots import BotRun, perfect_play, random_play
from .dialogue import ProviderTextSource, generate_feedback, get_provider
from .domain import Cause, default_deck
from .engine import RulesEngine
from .errors import DomainError, PackError, ProcrastimateError, StateError
from .persistence import default_save_path, save_state, state_to_payload
from .storypack import (
    PersonalStory,
    StoryPack,
    customize_level2,
    load_reference_pack,
    parse_pack,
    personalized,
    serialize_pack,
)

EXIT_INVALID = 1
EXIT_UNREADABLE = 2
EXIT_DEADLOCK = 3


@click.group()
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for every random draw a command makes.")
@click.option("--save-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Directory for session save files.")
@click.option("--provider", type=click.Choice(["stub", "remote"]), default="stub",
              show_default=True, help="Dialogue text provider.")
@click.pass_context
def main(ctx: click.Context, seed: int, save_dir: Path | None, provider: str) -> None:
    """ProcrastiMate: a serious game about beating procrastination."""
    ctx.obj = {"seed": seed, "save_dir": save_dir, "provider": provider}


def _load_pack(pack_path: Path | None) -> StoryPack:
    if pack_path is None:
        return load_reference_pack()
    try:
        data = pack_path.read_bytes()
    except OSError as exc:
        click.echo(f"error: cannot read {pack_path}: {exc}", err=True)
        sys.exit(EXIT_UNREADABLE)
    return parse_pack(data)


@main.command()
@click.argument("pack_path", type=click.Path(path_type=Path))
def validate(pack_path: Path) -> None:
    """Check a pack file; print one code:path:message line per finding."""
    try:
        data = pack_path.read_bytes()
    except OSError as exc:
        click.echo(f"error: cannot read {pack_path}: {exc}", err=True)
        sys.exit(EXIT_UNREADABLE)
    try:
        pack = parse_pack(data)
    except PackError as exc:
        for diagnostic in exc.diagnostics:
            click.echo(str(diagnostic))
        sys.exit(EXIT_INVALID)
    total = len(pack.all_cases())
    click.echo(f"ok: {pack.pack_id} ({total} cases)")


@main.command()
@click.argument("pack_path", required=False, type=click.Path(path_type=Path))
@click.option("--bot", type=click.Choice(["perfect", "random"]), default=None,
              help="Run a scripted player instead of reading stdin.")
@click.option("--interactive", is_flag=True, help="Play by typed commands.")
@click.option("--max-actions", type=int, default=20_000, show_default=True,
              help="Action cap for the random bot.")
@click.option("--report-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Write actions.csv and progress.png here.")
@click.option("--session-id", default="cli", show_default=True)
@click.pass_context
def play(ctx: click.Context, pack_path: Path | None, bot: str | None,
         interactive: bool, max_actions: int, report_dir: Path | None,
         session_id: str) -> None:
    """Play a pack headlessly, as a bot or interactively."""
    if bot is None and not interactive:
        raise click.UsageError("choose --bot perfect|random or --interactive")
    if bot is not None and interactive:
        raise click.UsageError("--bot and --interactive are mutually exclusive")

    pack = _load_pack(pack_path)
    deck = default_deck()
    provider = get_provider(ctx.obj["provider"])
    engine = RulesEngine(pack, deck, ProviderTextSource(provider, deck))
    seed = ctx.obj["seed"]

    if interactive:
        _interactive_loop(engine, provider, session_id, seed, ctx.obj["save_dir"])
        return

    if bot == "perfect":
        run = perfect_play(engine, session_id=session_id, seed=seed)
    else:
        run = random_play(engine, session_id=session_id, seed=seed,
                          max_actions=max_actions)
    for line in run.transcript:
        click.echo(line)

    if ctx.obj["save_dir"] is not None:
        path = default_save_path(session_id, ctx.obj["save_dir"])
        save_state(run.state, path)
        click.echo(f"saved: {path}")
    if report_dir is not None:
        _write_play_report(engine, run, report_dir, f"{bot} bot, seed {seed}")
        click.echo(f"report: {report_dir}")
    if run.deadlocked:
        click.echo("deadlock state dump:")
        click.echo(json.dumps(state_to_payload(run.state), indent=2))
        sys.exit(EXIT_DEADLOCK)


def _write_play_report(engine: RulesEngine, run: BotRun, report_dir: Path,
                       label: str) -> None:
    """Replay the log to chart unspent points and owned cards per action."""
    state = engine.initial_state(run.state.session_id, run.state.rng_seed)
    points = [state.points_unspent]
    owned = [len(state.owned_cards)]
    rows = []
    for record in run.state.action_log:
        state, _ = engine.apply(state, record.action, at=record.at)
        points.append(state.points_unspent)
        owned.append(len(state.owned_cards))
        rows.append([record.seq, record.action.kind, state.current_level.value,
                     state.points_unspent, len(state.owned_cards)])
    report.write_csv(report_dir / "actions.csv",
                     ["seq", "kind", "level", "unspent_points", "owned_cards"], rows)
    report.write_playthrough_progress(report_dir / "progress.png", points, owned,
                                      label)


def _print_view(engine: RulesEngine, state) -> None:
    click.echo(f"level {state.current_level.value} | points "
               f"{state.points_unspent} unspent | owned {len(state.owned_cards)}")
    case = engine.current_case(state)
    if case is None:
        click.echo("no pending case")
        return
    click.echo(f"case {case.case_id} ({case.npc.name}): {case.narrative}")
    if case.level.value == "L0":
        click.echo("options: " + ", ".join(c.value for c in Cause))
    elif case.level.value == "L1":
        click.echo(f"labeled cause: {case.major_cause.value}")
        click.echo("hand: " + ", ".join(str(c) for c in sorted(state.owned_cards)))
    else:
        click.echo("handbook hand: "
                   + ", ".join(str(c) for c in sorted(engine.level2_hand(state))))


def _interactive_loop(engine: RulesEngine, provider, session_id: str, seed: int,
                      save_dir: Path | None) -> None:
    state = engine.initial_state(session_id, seed)
    save_path = (default_save_path(session_id, save_dir)
                 if save_dir is not None else None)

    def autosave() -> None:
        if save_path is not None:
            save_state(state, save_path)

    click.echo("commands: choose <case> <cause> | play <case> <card> | "
               "pair <case> <a> <b> | buy <card> | next | view | quit")
    _print_view(engine, state)
    autosave()
    while True:
        try:
            raw = click.prompt("", prompt_suffix="> ", default="", show_default=False)
        except (click.Abort, EOFError):
            break
        words = raw.split()
        if not words:
            continue
        cmd, args = words[0], words[1:]
        if cmd == "quit":
            break
        if cmd == "view":
            _print_view(engine, state)
            continue
        try:
            if cmd == "next":
                from .domain import AdvanceCase
                state, _ = engine.apply(state, AdvanceCase())
                _print_view(engine, state)
            elif cmd == "choose" and len(args) == 2:
                case = engine.case(args[0])
                state, outcome = engine.adjudicate_level0(
                    state, case, Cause.from_name(args[1]))
                feedback = generate_feedback(provider, state, case, [], outcome,
                                             choice=Cause.from_name(args[1]))
                click.echo(f"[{feedback.tone.value}] {feedback.text}")
            elif cmd == "play" and len(args) == 2:
                case = engine.case(args[0])
                card_id = int(args[1])
                state, outcome = engine.adjudicate_level1(state, case, card_id)
                feedback = generate_feedback(provider, state, case,
                                             [engine.deck[card_id]], outcome)
                click.echo(f"[{feedback.tone.value}] {feedback.text}")
            elif cmd == "pair" and len(args) == 3:
                case = engine.case(args[0])
                a, b = int(args[1]), int(args[2])
                state, outcome, merged = engine.adjudicate_level2(state, case, a, b)
                feedback = generate_feedback(provider, state, case,
                                             [engine.deck[a], engine.deck[b]], outcome)
                click.echo(f"[{feedback.tone.value}] {feedback.text}")
                if merged is not None:
                    click.echo(f"merged card: {merged.generated_title}")
            elif cmd == "buy" and len(args) == 1:
                state = engine.buy_card(state, int(args[0]))
                click.echo(f"bought {args[0]}; {state.points_unspent} unspent")
            else:
                click.echo("unknown command")
                continue
        except (ProcrastimateError, ValueError) as exc:
            click.echo(f"error: {exc}")
            continue
        autosave()
        if state.current_level.value == "Completed":
            click.echo("all cases solved; session complete")
            break
    autosave()
    click.echo("bye")


@main.command("simulate-proto")
@click.option("--policy", type=click.Choice(sorted(motivation.POLICIES)),
              default="perfect", show_default=True)
@click.option("--n", type=int, default=1000, show_default=True,
              help="Number of simulated sessions.")
@click.option("--floor/--no-floor", default=False, show_default=True,
              help="Variant rule: a both-wrong turn still gains 5.")
@click.option("--report-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Write turns.csv and turns_hist.png here.")
@click.pass_context
def simulate_proto(ctx: click.Context, policy: str, n: int, floor: bool,
                   report_dir: Path | None) -> None:
    """Run motivation-loop sessions and print the turns-to-win table."""
    if n < 1:
        raise click.UsageError("--n must be at least 1")
    turns = motivation.simulate(n, policy, seed=ctx.obj["seed"], floor_rule=floor)
    mean = statistics.fmean(turns)
    median = statistics.median(turns)
    click.echo(f"{'policy':<12}{'n':>8}{'mean':>10}{'median':>10}{'min':>8}{'max':>8}")
    click.echo(f"{policy:<12}{n:>8}{mean:>10.2f}{median:>10.1f}"
               f"{min(turns):>8}{max(turns):>8}")
    click.echo("")
    click.echo(f"{'turns':<8}{'sessions':>10}")
    for value, count in motivation.distribution(turns):
        click.echo(f"{value:<8}{count:>10}")
    if report_dir is not None:
        report.write_csv(Path(report_dir) / "turns.csv", ["session", "turns"],
                         [[i, t] for i, t in enumerate(turns)])
        report.write_turns_histogram(Path(report_dir) / "turns_hist.png",
                                     turns, policy)
        click.echo(f"report: {report_dir}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--packs-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Extra pack files to serve.")
@click.option("--static-dir", type=click.Path(file_okay=False, path_type=Path),
              default=None, help="Built web client to serve at /.")
@click.pass_context
def serve(ctx: click.Context, host: str, port: int, packs_dir: Path | None,
          static_dir: Path | None) -> None:
    """Start the HTTP/WebSocket session service."""
    import uvicorn

    from .service import create_app, load_packs

    app = create_app(load_packs(packs_dir), save_dir=ctx.obj["save_dir"],
                     provider_name=ctx.obj["provider"], static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--stories", type=click.Path(path_type=Path), required=True,
              help="JSON list of personal stories.")
@click.option("--pack", "pack_path", type=click.Path(path_type=Path), default=None,
              help="Base pack supplying the shared pool; bundled pack by default.")
@click.option("--out", type=click.Path(path_type=Path), default=None,
              help="Write the personalized pack here instead of stdout.")
@click.pass_context
def customize(ctx: click.Context, stories: Path, pack_path: Path | None,
              out: Path | None) -> None:
    """Build a personalized pack: your stories first, pool cases fill to 8."""
    try:
        raw = json.loads(stories.read_text(encoding="utf-8"))
    except OSError as exc:
        click.echo(f"error: cannot read {stories}: {exc}", err=True)
        sys.exit(EXIT_UNREADABLE)
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"{stories} is not valid JSON: {exc}")
    if not isinstance(raw, list):
        raise click.ClickException(f"{stories} must hold a JSON list")
    try:
        personal = [PersonalStory(
            scenario_text=item["scenario_text"],
            inferred_causes=frozenset(Cause.from_name(c)
                                      for c in item["inferred_causes"]),
            context_cluster=item["context_cluster"],
        ) for item in raw]
    except (KeyError, TypeError, DomainError) as exc:
        raise click.ClickException(f"bad personal story: {exc}")

    base = _load_pack(pack_path)
    try:
        cases = customize_level2(personal, base.l2_cases, ctx.obj["seed"])
    except (DomainError, PackError) as exc:
        raise click.ClickException(str(exc))
    document = serialize_pack(personalized(base, cases))
    if out is None:
        click.echo(document)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(document + "\n", encoding="utf-8")
        click.echo(f"wrote {out}", err=True)
        for i, case in enumerate(cases):
            pair = " + ".join(sorted(c.value for c in case.cause_pair))
            click.echo(f"l2[{i}]: {case.case_id} ({pair})", err=True)


if __name__ == "__main__":
    main()
