"""Live session server: one sensor client, up to two caregiver consoles.

Clients connect over a websocket and handshake with {"version", "role"}.
The sensor streams input messages and receives device commands; consoles
receive a snapshot, then state deltas, note events, notifications, and
periodic hash checks, and may send control messages.  The engine itself
stays single-threaded: connection handlers only enqueue messages, and one
30 Hz task drives ticks and fans out the results.
"""

from __future__ import annotations

import asyncio
import contextlib
from dataclasses import dataclass, field
from datetime import datetime, timezone

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from .commands import ControlCommand, InvalidCommandError
from .config import EngineConfig
from .engine import ChordChange, Engine
from .interaction import DeviceCommand
from .protocol import (
    PROTOCOL_VERSION,
    DecodeError,
    Message,
    SessionRecorder,
    body_to_control,
    body_to_input,
    decode,
    delta_body,
    effect_to_message,
    encode,
    scene_index,
    snapshot_body,
)

HANDSHAKE_TIMEOUT_S = 5.0


class RoleConflictError(Exception):
    pass


@dataclass
class ClientSlot:
    role: str
    socket: object
    seq_in: int = 0


@dataclass
class SessionServer:
    config: EngineConfig
    engine: Engine = None  # type: ignore[assignment]
    recorder: SessionRecorder = None  # type: ignore[assignment]
    sensor: ClientSlot | None = None
    consoles: list[ClientSlot] = field(default_factory=list)
    _seq_out: int = 0
    _scene_before: dict = field(default_factory=dict)
    _last_paused: bool = False

    def __post_init__(self):
        self.engine = Engine(self.config)
        started = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.recorder = SessionRecorder(self.engine, started=started)
        self._scene_before = scene_index(self.engine)

    # -- outgoing ------------------------------------------------------------

    def next_seq(self) -> int:
        self._seq_out += 1
        return self._seq_out

    async def _send(self, slot: ClientSlot, msg: Message) -> None:
        try:
            await slot.socket.send(encode(msg).decode("utf-8"))
        except ConnectionClosed:
            pass

    async def _broadcast_consoles(self, msg: Message) -> None:
        for slot in list(self.consoles):
            await self._send(slot, msg)

    async def _fan_out(self, effects) -> None:
        for effect in effects:
            msg = effect_to_message(effect, self.next_seq())
            if isinstance(effect, DeviceCommand):
                if self.sensor is not None:
                    await self._send(self.sensor, msg)
                await self._broadcast_consoles(msg)
            else:
                await self._broadcast_consoles(msg)

    # -- tick loop -------------------------------------------------------------

    async def tick_once(self) -> None:
        effects = self.recorder.tick()
        await self._fan_out(effects)
        body, after = delta_body(self.engine, self._scene_before)
        changed = bool(body["added"] or body["removed"] or body["updated"])
        chord_moved = any(isinstance(e, ChordChange) for e in effects)
        pause_edge = body["paused"] != self._last_paused
        if changed or chord_moved or pause_edge:
            await self._broadcast_consoles(Message(
                PROTOCOL_VERSION, self.next_seq(), self.engine.scene.tick,
                "state_delta", body,
            ))
        self._scene_before = after
        self._last_paused = body["paused"]
        now = self.engine.scene.tick
        if now % self.config.hash_check_ticks == 0:
            await self._broadcast_consoles(Message(
                PROTOCOL_VERSION, self.next_seq(), now, "hash_check",
                {"hash": f"{self.engine.state_hash():016x}"},
            ))

    async def run_ticks(self, stop: asyncio.Event) -> None:
        dt = 1.0 / self.config.tick_rate
        loop = asyncio.get_running_loop()
        next_at = loop.time()
        while not stop.is_set():
            await self.tick_once()
            next_at += dt
            delay = next_at - loop.time()
            if delay > 0:
                with contextlib.suppress(asyncio.TimeoutError):
                    await asyncio.wait_for(stop.wait(), timeout=delay)
            else:
                next_at = loop.time()

    # -- connection handling ------------------------------------------------------

    async def _error(self, socket, reason: str, seq_ref: int | None = None) -> None:
        msg = Message(PROTOCOL_VERSION, self.next_seq(), self.engine.scene.tick,
                      "error", {"reason": reason, "seq_ref": seq_ref})
        with contextlib.suppress(ConnectionClosed):
            await socket.send(encode(msg).decode("utf-8"))

    async def handle(self, socket) -> None:
        try:
            first = await asyncio.wait_for(socket.recv(), timeout=HANDSHAKE_TIMEOUT_S)
        except (asyncio.TimeoutError, ConnectionClosed):
            return
        try:
            hello = decode(first.encode("utf-8") if isinstance(first, str) else first)
        except DecodeError as exc:
            await self._error(socket, f"handshake: {exc.reason}")
            return
        role = hello.body.get("role")
        if hello.version != PROTOCOL_VERSION:
            await self._error(socket, f"unsupported version {hello.version}")
            return
        if role == "sensor":
            if self.sensor is not None:
                await self._error(socket, "role conflict: sensor already connected")
                return
            slot = ClientSlot("sensor", socket)
            self.sensor = slot
        elif role == "console":
            if len(self.consoles) >= 2:
                await self._error(socket, "too many consoles")
                return
            slot = ClientSlot("console", socket)
            self.consoles.append(slot)
        else:
            await self._error(socket, f"unknown role {role!r}")
            return

        await self._send(slot, Message(
            PROTOCOL_VERSION, self.next_seq(), self.engine.scene.tick, "ack",
            {"seq_ref": hello.seq, "ok": True, "role": role},
        ))
        if role == "console":
            await self._send(slot, Message(
                PROTOCOL_VERSION, self.next_seq(), self.engine.scene.tick,
                "snapshot", snapshot_body(self.engine),
            ))
        try:
            async for frame in socket:
                await self._on_frame(slot, frame)
        except ConnectionClosed:
            pass
        finally:
            await self._drop(slot)

    async def _drop(self, slot: ClientSlot) -> None:
        if slot is self.sensor:
            self.sensor = None
            # safety default: nobody is steering the room, freeze the session
            if not self.engine.scene.paused:
                self.recorder.record_control(ControlCommand("pause"),
                                             self.engine.scene.tick + 1)
            note = Message(
                PROTOCOL_VERSION, self.next_seq(), self.engine.scene.tick,
                "notification",
                {"id": 0, "kind": "sensor_disconnected", "player": None,
                 "payload": {"auto_paused": True}},
            )
            await self._broadcast_consoles(note)
        elif slot in self.consoles:
            self.consoles.remove(slot)

    async def _on_frame(self, slot: ClientSlot, frame) -> None:
        data = frame.encode("utf-8") if isinstance(frame, str) else frame
        try:
            msg = decode(data)
        except DecodeError as exc:
            await self._error(slot.socket, exc.reason)
            return
        if msg.seq <= slot.seq_in:
            await self._error(slot.socket, f"seq {msg.seq} not increasing", msg.seq)
            return
        slot.seq_in = msg.seq
        now = self.engine.scene.tick
        if msg.kind == "input":
            if slot.role != "sensor":
                await self._error(slot.socket, "input allowed from sensor only", msg.seq)
                return
            try:
                event = body_to_input(msg.body)
            except DecodeError as exc:
                await self._error(slot.socket, exc.reason, msg.seq)
                return
            self.recorder.record_input(event, now + 1)
        elif msg.kind == "control":
            if slot.role != "console":
                await self._error(slot.socket, "control allowed from consoles only", msg.seq)
                return
            try:
                cmd = body_to_control(msg.body)
            except DecodeError as exc:
                await self._error(slot.socket, exc.reason, msg.seq)
                return
            try:
                self.recorder.record_control(cmd, now + 1)
            except InvalidCommandError as exc:
                await self._error(slot.socket, str(exc), msg.seq)
                return
            await self._send(slot, Message(
                PROTOCOL_VERSION, self.next_seq(), now, "ack",
                {"seq_ref": msg.seq, "ok": True},
            ))
        else:
            await self._error(slot.socket, f"unexpected kind {msg.kind!r}", msg.seq)


async def serve_session(config: EngineConfig, host: str = "127.0.0.1",
                        port: int = 8765, stop: asyncio.Event | None = None):
    """Run the server until `stop` is set; returns the SessionServer."""
    server = SessionServer(config)
    stop = stop or asyncio.Event()
    async with ws_serve(server.handle, host, port):
        ticker = asyncio.create_task(server.run_ticks(stop))
        await stop.wait()
        ticker.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await ticker
    return server


def serve_forever(config: EngineConfig, host: str = "127.0.0.1", port: int = 8765) -> None:
    print(f"melopaint session server on ws://{host}:{port}")
    asyncio.run(serve_session(config, host, port))
