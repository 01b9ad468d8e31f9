"""Command-line entry point.

Subcommands:
  run <scenario> [--config F] [--seed N] [--out DIR]   headless scripted session
  replay <log>                                         verify a recorded log
  train <corpus> --out <model>                         fit and save a chord model
  serve [--port N] [--config F]                        live websocket session

Exit codes are a stable CI contract: 0 success, 1 verification failure,
2 input error, 3 config error.  MELOPAINT_CONFIG names a default config file.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from .chords import (
    EmptyCorpusError,
    ParseError,
    parse_chord_corpus,
    save_model,
    train_markov,
)
from .commands import ControlCommand, InvalidCommandError
from .composition import NoteEvent
from .config import ConfigError, EngineConfig, apply_overrides, load_config
from .engine import Engine
from .geometry import Vec2
from .interaction import (
    BrushButton,
    EraserHeld,
    FloorMove,
    HandMove,
    InputEvent,
    TickEvent,
)
from .protocol import (
    HashMismatchError,
    LogFormatError,
    SessionRecorder,
    read_session_log,
    replay as replay_log,
)

ENV_CONFIG = "MELOPAINT_CONFIG"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_CONFIG_ERROR = 3


class ScenarioError(ValueError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"scenario line {line}: {reason}")


@dataclass
class Scenario:
    """A scripted session: header overrides plus tick-ordered steps."""

    seed: int | None = None
    overrides: dict[str, str] = field(default_factory=dict)
    steps: list[tuple[int, object]] = field(default_factory=list)  # InputEvent | ControlCommand
    end_tick: int = 0


def _parse_player(token: str, lineno: int):
    from .scene import Player

    if token not in ("P1", "P2"):
        raise ScenarioError(lineno, f"unknown player {token!r}")
    return Player(token)


def _parse_control(parts: list[str], lineno: int) -> ControlCommand:
    name = parts[0]
    rest = parts[1:]
    try:
        if name in ("pause", "resume", "remove_lines", "remove_circles",
                    "toggle_bg_music", "play_all_melodies", "toggle_blobs",
                    "swap_players"):
            return ControlCommand(name)
        if name == "set_evolution_mode":
            return ControlCommand(name, {"mode": rest[0]})
        if name == "swap_hands":
            return ControlCommand(name, {"player": rest[0]})
        if name == "set_brush_color":
            return ControlCommand(name, {"player": rest[0], "r": int(rest[1]),
                                         "g": int(rest[2]), "b": int(rest[3])})
        if name == "set_background_color":
            return ControlCommand(name, {"r": int(rest[0]), "g": int(rest[1]),
                                         "b": int(rest[2])})
        if name == "set_vibration_enabled":
            if rest[0] not in ("on", "off"):
                raise ScenarioError(lineno, "set_vibration_enabled takes on|off")
            return ControlCommand(name, {"enabled": rest[0] == "on"})
        if name == "trigger_hint":
            return ControlCommand(name, {"shape": rest[0], "x": float(rest[1]),
                                         "y": float(rest[2]), "player": rest[3],
                                         "style": rest[4]})
        if name == "tutorial_step":
            return ControlCommand(name, {"index": int(rest[0])})
    except (IndexError, ValueError) as exc:
        raise ScenarioError(lineno, f"bad arguments for {name}: {exc}")
    except InvalidCommandError as exc:
        raise ScenarioError(lineno, str(exc))
    raise ScenarioError(lineno, f"unknown control command {name!r}")


def parse_scenario(text: str) -> Scenario:
    sc = Scenario()
    last_tick = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        head = parts[0]
        if head == "seed":
            if len(parts) != 2 or not parts[1].lstrip("-").isdigit():
                raise ScenarioError(lineno, "seed takes one integer")
            sc.seed = int(parts[1])
        elif head == "set":
            if len(parts) < 3:
                raise ScenarioError(lineno, "set takes a key and a value")
            sc.overrides[parts[1]] = " ".join(parts[2:])
        elif head == "end":
            if len(parts) != 2 or not parts[1].isdigit():
                raise ScenarioError(lineno, "end takes one tick number")
            sc.end_tick = int(parts[1])
            if sc.end_tick < last_tick:
                raise ScenarioError(lineno, "end tick before last step")
        elif head == "at":
            if len(parts) < 3 or not parts[1].isdigit():
                raise ScenarioError(lineno, "expected: at <tick> <event...>")
            tick = int(parts[1])
            if tick < last_tick:
                raise ScenarioError(lineno, f"tick {tick} decreases (last {last_tick})")
            last_tick = tick
            kind = parts[2]
            args = parts[3:]
            try:
                if kind == "hand":
                    player = _parse_player(args[0], lineno)
                    dist = float(args[3]) if len(args) > 3 else 1.5
                    step: object = HandMove(player, Vec2.of(float(args[1]), float(args[2])), dist)
                elif kind == "brush":
                    player = _parse_player(args[0], lineno)
                    if args[1] not in ("down", "up"):
                        raise ScenarioError(lineno, "brush takes down|up")
                    step = BrushButton(player, args[1] == "down")
                elif kind == "eraser":
                    player = _parse_player(args[0], lineno)
                    if args[1] not in ("held", "free"):
                        raise ScenarioError(lineno, "eraser takes held|free")
                    step = EraserHeld(player, args[1] == "held")
                elif kind == "floor":
                    player = _parse_player(args[0], lineno)
                    step = FloorMove(player, Vec2.of(float(args[1]), float(args[2])))
                elif kind == "tick":
                    step = TickEvent()
                elif kind == "control":
                    if not args:
                        raise ScenarioError(lineno, "control needs a command name")
                    step = _parse_control(args, lineno)
                else:
                    raise ScenarioError(lineno, f"unknown step kind {kind!r}")
            except ScenarioError:
                raise
            except (IndexError, ValueError) as exc:
                raise ScenarioError(lineno, f"bad arguments for {kind}: {exc}")
            sc.steps.append((tick, step))
        else:
            raise ScenarioError(lineno, f"unknown directive {head!r}")
    if sc.end_tick == 0:
        sc.end_tick = last_tick + 1
    return sc


# --- note timeline -------------------------------------------------------------

TIMELINE_HEADER = "tick\tseconds\tplayer\tinstrument\tpitch\tvelocity\tpan\tsource"


def timeline_rows(events: list[NoteEvent], tick_rate: int) -> list[str]:
    """TSV rows sorted by tick, then player, then source (stable)."""
    def key(ev: NoteEvent):
        return (ev.tick, ev.player.value if ev.player else "",
                ev.source.value)

    rows = []
    for ev in sorted(events, key=key):
        rows.append("\t".join([
            str(ev.tick),
            f"{ev.tick / tick_rate:.4f}",
            ev.player.value if ev.player else "-",
            ev.instrument.value if ev.instrument else "-",
            str(ev.pitch),
            str(ev.velocity),
            f"{ev.pan:+.3f}",
            ev.source.value,
        ]))
    return rows


@dataclass
class ScenarioResult:
    final_hash: int
    events: list[NoteEvent]
    log_text: str
    timeline_text: str
    summary: dict


def run_scenario(scenario: Scenario, config: EngineConfig) -> ScenarioResult:
    """Execute a parsed scenario headlessly; deterministic given (scenario, config)."""
    if scenario.seed is not None:
        config = apply_overrides(config, {"seed": str(scenario.seed)})
    if scenario.overrides:
        config = apply_overrides(config, scenario.overrides)
    engine = Engine(config)
    recorder = SessionRecorder(engine, started="1970-01-01T00:00:00Z")
    for tick, step in scenario.steps:
        if isinstance(step, ControlCommand):
            recorder.record_control(step, tick)
        else:
            recorder.record_input(step, tick)
    notes: list[NoteEvent] = []
    for _ in range(scenario.end_tick):
        for effect in recorder.tick():
            if isinstance(effect, NoteEvent):
                notes.append(effect)
    log = recorder.finish()
    timeline = TIMELINE_HEADER + "\n" + "\n".join(
        timeline_rows(notes, config.tick_rate)
    ) + ("\n" if notes else "")
    per_source: dict[str, int] = {}
    per_player: dict[str, int] = {}
    for ev in notes:
        per_source[ev.source.value] = per_source.get(ev.source.value, 0) + 1
        who = ev.player.value if ev.player else "-"
        per_player[who] = per_player.get(who, 0) + 1
    return ScenarioResult(
        final_hash=log.final_hash,
        events=notes,
        log_text=log.to_text(),
        timeline_text=timeline,
        summary={"events": len(notes), "per_source": per_source,
                 "per_player": per_player, "final_tick": log.final_tick},
    )


# --- subcommands -----------------------------------------------------------------

def _load_base_config(path: str | None) -> EngineConfig:
    cfg = EngineConfig()
    env_path = os.environ.get(ENV_CONFIG)
    if env_path:
        cfg = load_config(env_path, cfg)
    if path:
        cfg = load_config(path, cfg)
    return cfg


def cmd_run(args) -> int:
    try:
        cfg = _load_base_config(args.config)
        if args.seed is not None:
            cfg = apply_overrides(cfg, {"seed": str(args.seed)})
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        with open(args.scenario, "r", encoding="utf-8") as fh:
            scenario = parse_scenario(fh.read())
    except OSError as exc:
        print(f"cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        result = run_scenario(scenario, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, "session.log")
    timeline_path = os.path.join(out_dir, "timeline.tsv")
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write(result.log_text)
    with open(timeline_path, "w", encoding="utf-8") as fh:
        fh.write(result.timeline_text)
    print(f"final_tick {result.summary['final_tick']}")
    print(f"final_hash {result.final_hash:016x}")
    print(f"note_events {result.summary['events']}")
    for source, n in sorted(result.summary["per_source"].items()):
        print(f"  {source} {n}")
    print(f"log {log_path}")
    print(f"timeline {timeline_path}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        log = read_session_log(args.log)
    except (OSError, LogFormatError) as exc:
        print(f"cannot read log: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        final = replay_log(log)
    except HashMismatchError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        print(f"first_divergent_tick {exc.tick}")
        return EXIT_VERIFY_FAILED
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    print(f"replay ok: final_hash {final:016x} at tick {log.final_tick}")
    return EXIT_OK


def cmd_train(args) -> int:
    try:
        with open(args.corpus, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"cannot read corpus: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        parsed = parse_chord_corpus(text)
        model = train_markov(parsed.sequences)
    except ParseError as exc:
        print(f"corpus parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except EmptyCorpusError as exc:
        print(f"corpus error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    save_model(model, args.out)
    print(f"vocabulary {len(model.vocabulary)}")
    print(f"sequences {len(parsed.sequences)}")
    if parsed.dropped_short:
        print(f"dropped_short {parsed.dropped_short}")
    for i, chord in enumerate(model.vocabulary):
        row = model.transitions[i]
        top = sorted(range(len(row)), key=lambda j: (-row[j], j))[:3]
        shown = ", ".join(
            f"{model.vocabulary[j].name()} {row[j]:.3f}" for j in top if row[j] > 0
        )
        print(f"  {chord.name()}: {shown}")
    print(f"model {args.out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        cfg = _load_base_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    from .server import serve_forever

    try:
        serve_forever(cfg, host=args.host, port=args.port)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="melopaint",
        description="Deterministic music-and-painting session engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scripted scenario headlessly")
    p_run.add_argument("scenario")
    p_run.add_argument("--config")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--out", help="output directory (default: cwd)")
    p_run.set_defaults(func=cmd_run)

    p_replay = sub.add_parser("replay", help="verify a recorded session log")
    p_replay.add_argument("log")
    p_replay.set_defaults(func=cmd_replay)

    p_train = sub.add_parser("train", help="train a chord model from a corpus")
    p_train.add_argument("corpus")
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(func=cmd_train)

    p_serve = sub.add_parser("serve", help="run the live session server")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--config")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
