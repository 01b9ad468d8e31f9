"""Wire protocol and session persistence.

Messages are UTF-8 JSON, one per line, framed for both the log file and the
live socket.  The decoder is total: any byte string yields either a Message
or a DecodeError, never an uncaught exception.  A session log holds a
header, tick-ordered records, periodic hash checks, and a final hash, and
replaying it through a fresh engine must land on that hash exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chords import ChordModel
from .commands import ControlCommand, InvalidCommandError
from .composition import NoteEvent
from .config import EngineConfig, apply_overrides
from .engine import ChordChange, Effect, Engine
from .geometry import Vec2
from .hints import Notification
from .interaction import (
    BrushButton,
    DeviceCommand,
    EraserHeld,
    FloorMove,
    HandMove,
    InputEvent,
    TickEvent,
)
from .scene import (
    Cursor,
    HintLine,
    Node,
    PathLine,
    Player,
    SceneState,
    TemporaryStroke,
)

PROTOCOL_VERSION = 1

MESSAGE_KINDS = (
    "input",
    "state_delta",
    "snapshot",
    "notification",
    "device_command",
    "control",
    "note_event",
    "hash_check",
    "ack",
    "error",
)


class DecodeError(ValueError):
    def __init__(self, position: int, reason: str):
        self.position = position
        self.reason = reason
        super().__init__(f"decode error at byte {position}: {reason}")


@dataclass(frozen=True)
class Message:
    version: int
    seq: int
    tick: int
    kind: str
    body: dict = field(default_factory=dict)


def encode(msg: Message) -> bytes:
    payload = {
        "v": msg.version,
        "seq": msg.seq,
        "tick": msg.tick,
        "kind": msg.kind,
        "body": msg.body,
    }
    return (json.dumps(payload, separators=(",", ":"), sort_keys=True) + "\n").encode("utf-8")


def decode(data: bytes) -> Message:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(exc.start, "invalid utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecodeError(exc.pos, f"invalid json: {exc.msg}")
    if not isinstance(raw, dict):
        raise DecodeError(0, "message must be a json object")
    for key, want in (("v", int), ("seq", int), ("tick", int), ("kind", str)):
        if key not in raw:
            raise DecodeError(0, f"missing field {key!r}")
        if not isinstance(raw[key], want) or isinstance(raw[key], bool):
            raise DecodeError(0, f"field {key!r} has wrong type")
    if raw["kind"] not in MESSAGE_KINDS:
        raise DecodeError(0, f"unknown kind {raw['kind']!r}")
    body = raw.get("body", {})
    if not isinstance(body, dict):
        raise DecodeError(0, "body must be a json object")
    return Message(raw["v"], raw["seq"], raw["tick"], raw["kind"], body)


# --- input/control message bodies --------------------------------------------

def input_to_body(event: InputEvent) -> dict:
    if isinstance(event, HandMove):
        return {"type": "hand_move", "player": event.player.value,
                "x": event.pos.x, "y": event.pos.y, "dist": event.screen_distance}
    if isinstance(event, BrushButton):
        return {"type": "brush_button", "player": event.player.value,
                "pressed": event.pressed}
    if isinstance(event, EraserHeld):
        return {"type": "eraser_held", "player": event.player.value,
                "held": event.held}
    if isinstance(event, FloorMove):
        return {"type": "floor_move", "player": event.player.value,
                "x": event.floor_pos.x, "y": event.floor_pos.y}
    if isinstance(event, TickEvent):
        return {"type": "tick"}
    raise TypeError(f"not an input event: {event!r}")


def _player_from(body: dict) -> Player:
    token = body.get("player")
    try:
        return Player(token)
    except ValueError:
        raise DecodeError(0, f"unknown player {token!r}")


def body_to_input(body: dict) -> InputEvent:
    kind = body.get("type")
    try:
        if kind == "hand_move":
            return HandMove(_player_from(body),
                            Vec2.of(float(body["x"]), float(body["y"])),
                            float(body.get("dist", 1.5)))
        if kind == "brush_button":
            return BrushButton(_player_from(body), bool(body["pressed"]))
        if kind == "eraser_held":
            return EraserHeld(_player_from(body), bool(body["held"]))
        if kind == "floor_move":
            return FloorMove(_player_from(body),
                             Vec2.of(float(body["x"]), float(body["y"])))
        if kind == "tick":
            return TickEvent()
    except (KeyError, TypeError, ValueError) as exc:
        raise DecodeError(0, f"bad input body: {exc}")
    raise DecodeError(0, f"unknown input type {kind!r}")


def control_to_body(cmd: ControlCommand) -> dict:
    return {"name": cmd.name, "args": dict(cmd.args)}


def body_to_control(body: dict) -> ControlCommand:
    name = body.get("name")
    args = body.get("args", {})
    if not isinstance(name, str) or not isinstance(args, dict):
        raise DecodeError(0, "bad control body")
    try:
        return ControlCommand(name, args)
    except InvalidCommandError as exc:
        raise DecodeError(0, str(exc))


# --- scene serialization ------------------------------------------------------

def object_to_dict(obj) -> dict:
    if isinstance(obj, Node):
        return {"kind": "node", "id": obj.id, "owner": obj.owner.value,
                "x": obj.pos.x, "y": obj.pos.y,
                "color": [obj.color.r, obj.color.g, obj.color.b],
                "pitch": obj.pitch}
    if isinstance(obj, PathLine):
        return {"kind": "line", "id": obj.id, "owner": obj.owner.value,
                "points": [[p.x, p.y] for p in obj.points],
                "closed": obj.closed, "silent": obj.silent,
                "thickness": obj.thickness,
                "color": [obj.color.r, obj.color.g, obj.color.b],
                "fill": ([obj.fill_color.r, obj.fill_color.g, obj.fill_color.b]
                         if obj.fill_color else None),
                "melody": list(obj.melody)}
    if isinstance(obj, TemporaryStroke):
        return {"kind": "stroke", "id": obj.id, "owner": obj.owner.value,
                "points": [[p.x, p.y] for p in obj.points],
                "alpha": round(obj.alpha, 4), "ended": obj.ended}
    if isinstance(obj, HintLine):
        return {"kind": "hint", "id": obj.id, "shape": obj.shape,
                "style": obj.style,
                "points": [[p.x, p.y] for p in obj.points],
                "player": obj.target_player.value,
                "expires_tick": obj.expires_tick,
                "color": [obj.color.r, obj.color.g, obj.color.b]}
    if isinstance(obj, Cursor):
        return {"kind": "cursor", "id": obj.id, "line_id": obj.line_id,
                "player": obj.player.value, "pos": round(obj.arclength_pos, 5),
                "gain": round(obj.gain, 4)}
    raise TypeError(f"unknown scene object {obj!r}")


def snapshot_body(engine: Engine) -> dict:
    scene = engine.scene
    return {
        "tick": scene.tick,
        "chord": scene.current_chord.name(),
        "paused": scene.paused,
        "background": [scene.background_color.r, scene.background_color.g,
                       scene.background_color.b],
        "players": {
            p.value: {
                "color": [ps.binding.color.r, ps.binding.color.g, ps.binding.color.b],
                "instrument": ps.binding.instrument.value,
                "hand": ps.binding.active_hand.value,
            }
            for p, ps in engine.players.items()
        },
        "objects": [object_to_dict(o) for o in scene.objects.values()],
        "crossings": [
            {"line_a": c.line_a, "line_b": c.line_b, "x": c.at.x, "y": c.at.y,
             "color": [c.blended.r, c.blended.g, c.blended.b]}
            for c in scene.crossings
        ],
        "area_fractions": engine.area_fractions(),
        "area_flags": engine.area_flags(),
        "vibration_enabled": engine.vibration_enabled,
        "evolution_mode": engine.floor.evolution_mode.value,
        "bg_active": engine.floor.bg_active,
        "blobs_active": engine.floor.blobs_active,
        "hash": f"{engine.state_hash():016x}",
    }


def effect_to_message(effect: Effect, seq: int) -> Message:
    if isinstance(effect, NoteEvent):
        return Message(PROTOCOL_VERSION, seq, effect.tick, "note_event", {
            "player": effect.player.value if effect.player else None,
            "instrument": effect.instrument.value if effect.instrument else None,
            "pitch": effect.pitch,
            "velocity": effect.velocity,
            "pan": effect.pan,
            "source": effect.source.value,
        })
    if isinstance(effect, DeviceCommand):
        return Message(PROTOCOL_VERSION, seq, effect.tick, "device_command", {
            "target": effect.target.value,
            "action": effect.action,
            "on": effect.on,
            "color": ([effect.color.r, effect.color.g, effect.color.b]
                      if effect.color else None),
            "brightness": effect.brightness,
        })
    if isinstance(effect, Notification):
        return Message(PROTOCOL_VERSION, seq, effect.tick, "notification", {
            "id": effect.id,
            "kind": effect.kind.value,
            "player": effect.player.value if effect.player else None,
            "payload": effect.payload,
        })
    if isinstance(effect, ChordChange):
        return Message(PROTOCOL_VERSION, seq, effect.tick, "state_delta", {
            "chord": effect.chord.name(),
        })
    raise TypeError(f"unknown effect {effect!r}")


# --- state deltas -------------------------------------------------------------

def scene_index(engine: Engine) -> dict[int, dict]:
    return {o.id: object_to_dict(o) for o in engine.scene.objects.values()}


def delta_body(engine: Engine, before: dict[int, dict]) -> tuple[dict | None, dict[int, dict]]:
    """Diff the scene against a previous index; None when nothing changed."""
    after = scene_index(engine)
    added = [obj for oid, obj in after.items() if oid not in before]
    removed = [oid for oid in before if oid not in after]
    updated = [obj for oid, obj in after.items()
               if oid in before and before[oid] != obj]
    scene = engine.scene
    body = {
        "tick": scene.tick,
        "chord": scene.current_chord.name(),
        "paused": scene.paused,
        "background": [scene.background_color.r, scene.background_color.g,
                       scene.background_color.b],
        "added": added,
        "removed": removed,
        "updated": updated,
        "area_fractions": engine.area_fractions(),
        "area_flags": engine.area_flags(),
    }
    return body, after


# --- session log ----------------------------------------------------------------

LOG_MAGIC = "#mtlog v1"
LOG_FINAL = "#final"


class HashMismatchError(ValueError):
    def __init__(self, tick: int, expected: int, actual: int):
        self.tick = tick
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"hash mismatch at tick {tick}: logged {expected:016x}, replay {actual:016x}"
        )


class LogFormatError(ValueError):
    pass


@dataclass
class SessionLog:
    version: int
    seed: int
    config: EngineConfig
    started: str
    records: list[tuple[int, Message]] = field(default_factory=list)
    final_tick: int = 0
    final_hash: int = 0

    def to_text(self) -> str:
        lines = [f"{LOG_MAGIC} seed={self.seed} config={self.config.digest()} started={self.started}"]
        cfg_json = json.dumps(
            {k: v for k, v in sorted(self.config.__dict__.items())},
            separators=(",", ":"),
        )
        lines.append(f"#config {cfg_json}")
        for tick, msg in self.records:
            lines.append(json.dumps(
                {"tick": tick, "msg": {"v": msg.version, "seq": msg.seq,
                                       "tick": msg.tick, "kind": msg.kind,
                                       "body": msg.body}},
                separators=(",", ":"), sort_keys=True))
        lines.append(f"{LOG_FINAL} tick={self.final_tick} hash={self.final_hash:016x}")
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())


def parse_session_log(text: str) -> SessionLog:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(LOG_MAGIC):
        raise LogFormatError("missing log header")
    header = dict(
        part.split("=", 1) for part in lines[0][len(LOG_MAGIC):].split() if "=" in part
    )
    try:
        seed = int(header["seed"])
    except (KeyError, ValueError):
        raise LogFormatError("bad or missing seed in header")
    started = header.get("started", "")
    config = EngineConfig()
    records: list[tuple[int, Message]] = []
    final_tick = None
    final_hash = None
    for lineno, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        if ln.startswith("#config "):
            try:
                raw = json.loads(ln[len("#config "):])
                config = apply_overrides(EngineConfig(), {k: str(v) for k, v in raw.items()})
            except (json.JSONDecodeError, ValueError) as exc:
                raise LogFormatError(f"line {lineno}: bad config: {exc}")
            continue
        if ln.startswith(LOG_FINAL):
            trailer = dict(
                part.split("=", 1) for part in ln[len(LOG_FINAL):].split() if "=" in part
            )
            try:
                final_tick = int(trailer["tick"])
                final_hash = int(trailer["hash"], 16)
            except (KeyError, ValueError):
                raise LogFormatError(f"line {lineno}: bad trailer")
            continue
        if ln.startswith("#"):
            continue
        try:
            raw = json.loads(ln)
            tick = raw["tick"]
            m = raw["msg"]
            msg = Message(m["v"], m["seq"], m["tick"], m["kind"], m.get("body", {}))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise LogFormatError(f"line {lineno}: bad record: {exc}")
        if msg.kind not in MESSAGE_KINDS:
            raise LogFormatError(f"line {lineno}: unknown kind {msg.kind!r}")
        records.append((tick, msg))
    if final_tick is None or final_hash is None:
        raise LogFormatError("missing final trailer")
    log = SessionLog(PROTOCOL_VERSION, seed, config, started, records,
                     final_tick, final_hash)
    return log


def read_session_log(path: str) -> SessionLog:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_session_log(fh.read())


class SessionRecorder:
    """Tees the messages applied to a live engine into a SessionLog."""

    def __init__(self, engine: Engine, started: str = ""):
        self.engine = engine
        self.log = SessionLog(
            version=PROTOCOL_VERSION,
            seed=engine.config.seed,
            config=engine.config,
            started=started,
        )
        self._seq = 0

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def record_input(self, event: InputEvent, tick: int) -> None:
        msg = Message(PROTOCOL_VERSION, self._next_seq(), tick, "input",
                      input_to_body(event))
        self.log.records.append((tick, msg))
        self.engine.post_input(event, tick)

    def record_control(self, cmd: ControlCommand, tick: int) -> None:
        msg = Message(PROTOCOL_VERSION, self._next_seq(), tick, "control",
                      control_to_body(cmd))
        self.log.records.append((tick, msg))
        self.engine.post_control(cmd, tick)

    def tick(self) -> list[Effect]:
        effects = self.engine.tick()
        now = self.engine.scene.tick
        if now % self.engine.config.hash_check_ticks == 0:
            self.log.records.append((now, Message(
                PROTOCOL_VERSION, self._next_seq(), now, "hash_check",
                {"hash": f"{self.engine.state_hash():016x}"},
            )))
        return effects

    def finish(self) -> SessionLog:
        self.log.final_tick = self.engine.scene.tick
        self.log.final_hash = self.engine.state_hash()
        return self.log


def replay(log: SessionLog, model: ChordModel | None = None) -> int:
    """Run a fresh engine over the log; returns the final hash.

    Raises HashMismatchError at the first diverging hash_check record (or at
    the trailer), which localizes divergence to one check interval.
    """
    engine = Engine(log.config, model=model)
    checks: dict[int, list[int]] = {}
    for tick, msg in log.records:
        if msg.kind == "input":
            engine.post_input(body_to_input(msg.body), tick)
        elif msg.kind == "control":
            engine.post_control(body_to_control(msg.body), tick)
        elif msg.kind == "hash_check":
            checks.setdefault(tick, []).append(int(msg.body["hash"], 16))
    for _ in range(log.final_tick):
        engine.tick()
        now = engine.scene.tick
        for expected in checks.get(now, ()):
            actual = engine.state_hash()
            if actual != expected:
                raise HashMismatchError(now, expected, actual)
    final = engine.state_hash()
    if final != log.final_hash:
        raise HashMismatchError(log.final_tick, log.final_hash, final)
    return final
