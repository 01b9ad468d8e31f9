"""Regenerate session_fixture.json from the engine's own wire encoder.

Run from the repository root:  python3 frontend/tests/fixtures/make_fixture.py
"""

import json
import os

from melopaint.commands import ControlCommand
from melopaint.config import EngineConfig
from melopaint.engine import Engine
from melopaint.geometry import Vec2
from melopaint.interaction import BrushButton, FloorMove, HandMove
from melopaint.protocol import (
    PROTOCOL_VERSION,
    Message,
    delta_body,
    effect_to_message,
    encode,
    scene_index,
    snapshot_body,
)
from melopaint.scene import Player


def main():
    engine = Engine(EngineConfig(seed=2026))
    frames = []
    seq = 0

    def grab(kind, body, tick):
        nonlocal seq
        seq += 1
        msg = Message(PROTOCOL_VERSION, seq, tick, kind, body)
        frames.append(encode(msg).decode().rstrip("\n"))

    before = scene_index(engine)
    # P1 draws a sonic line (dwell a spot at the start), then floor music on
    engine.post_input(HandMove(Player.P1, Vec2.of(0.2, 0.4)), 1)
    engine.post_input(BrushButton(Player.P1, True), 2)
    for k in range(10):
        engine.post_input(HandMove(Player.P1, Vec2.of(0.25 + 0.05 * k, 0.4)), 40 + k)
    engine.post_input(BrushButton(Player.P1, False), 52)
    engine.post_control(ControlCommand("trigger_hint", {
        "shape": "house", "x": 0.3, "y": 0.7, "player": "P2", "style": "dashed"}), 60)
    engine.post_input(FloorMove(Player.P2, Vec2.of(0.5, 0.1)), 65)
    effects = []
    for _ in range(70):
        effects.extend(engine.tick())
    for effect in effects:
        seq += 1
        msg = effect_to_message(effect, seq)
        frames.append(encode(msg).decode().rstrip("\n"))
    body, _after = delta_body(engine, before)
    grab("state_delta", body, engine.scene.tick)
    grab("snapshot", snapshot_body(engine), engine.scene.tick)
    grab("hash_check", {"hash": f"{engine.state_hash():016x}"}, engine.scene.tick)
    grab("ack", {"seq_ref": 12, "ok": True}, engine.scene.tick)
    grab("error", {"reason": "example", "seq_ref": None}, engine.scene.tick)

    out = {
        "snapshot": snapshot_body(engine),
        "delta": body,
        "frames": frames,
    }
    path = os.path.join(os.path.dirname(__file__), "session_fixture.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
    print(f"wrote {path}: {len(frames)} frames, "
          f"{len(out['snapshot']['objects'])} snapshot objects")


if __name__ == "__main__":
    main()
