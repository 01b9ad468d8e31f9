"""The engine tick loop: one place where all state changes happen.

Every mutation — player input, caregiver commands, cursor motion, blob
physics, hint staging — runs inside tick(), in a fixed order, drawing
randomness only from the seeded generator in the scene.  That makes a
session a pure function of (seed, config, tick-ordered message sequence),
which record/replay relies on.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import struct
from dataclasses import dataclass, field

from .chords import ChordModel, ChordSymbol, next_chord, parse_chord_corpus, train_markov
from .commands import ControlCommand, InvalidCommandError
from .composition import (
    NoteEvent,
    NoteSource,
    PitchGrid,
    attach_nodes,
    build_pitch_grid,
    finalize_stroke,
    melody_pan,
    quantize_pitch,
    rechord,
    refresh_melody,
    spawn_cursor,
    tick_cursor,
)
from .config import EngineConfig
from .geometry import Vec2, nearest_on_polyline
from .hints import (
    IdleAction,
    IdleStage,
    IdleState,
    InvalidShapeError,
    IsolationTracker,
    Notification,
    NotificationKind,
    area_usage,
    detect_repetition,
    spawn_hint,
    update_idleness,
)
from .interaction import (
    BRUSH_YELLOW,
    BrushButton,
    DeviceCommand,
    DwellTracker,
    EraserHeld,
    EvolutionMode,
    FloorCircle,
    FloorMove,
    FloorState,
    HandMove,
    InputEvent,
    TickEvent,
    UnknownPlayerError,
    ambient_for,
    brush_target,
    spawn_blob,
    step_blob,
    stroke_thickness,
)
from .rng import Rng
from .scene import (
    ColorRGB,
    DegenerateStrokeError,
    Hand,
    HintShape,
    HintStyle,
    Instrument,
    Node,
    PathLine,
    Player,
    PlayerBinding,
    SceneState,
    TemporaryStroke,
    erase_at,
    hit_test,
    remove_object,
    scene_hash,
)

BLOB_PERCUSSION = (35, 38, 42)  # cycled per blob slot; unpitched by contract

DEFAULT_P1_COLOR = ColorRGB(220, 60, 50)
DEFAULT_P2_COLOR = ColorRGB(60, 90, 220)


@dataclass(frozen=True)
class ChordChange:
    """Effect marker: the scene chord switched at this tick."""

    tick: int
    chord: ChordSymbol


Effect = NoteEvent | DeviceCommand | Notification | ChordChange


@dataclass
class PlayerState:
    """Everything the engine tracks per player outside the scene objects."""

    binding: PlayerBinding
    brush_pressed: bool = False
    eraser_held: bool = False
    hand: Vec2 | None = None
    screen_distance: float = 1.5
    stroke_id: int | None = None
    stroke_thickness: float = 0.012
    stroke_dwell_nodes: list[int] = field(default_factory=list)
    explore_acc: float = 0.0
    dwell: DwellTracker = None  # type: ignore[assignment]
    idle: IdleState = None  # type: ignore[assignment]
    iso: IsolationTracker = None  # type: ignore[assignment]
    touching: dict[int, bool] = field(default_factory=dict)
    recent_lines: list[PathLine] = field(default_factory=list)
    acted: bool = False


def load_default_model() -> ChordModel:
    text = (
        importlib.resources.files("melopaint.data")
        .joinpath("default_corpus.txt")
        .read_text(encoding="utf-8")
    )
    return train_markov(parse_chord_corpus(text).sequences)


def model_for_config(config: EngineConfig) -> ChordModel:
    if config.corpus_path:
        with open(config.corpus_path, "r", encoding="utf-8") as fh:
            return train_markov(parse_chord_corpus(fh.read()).sequences)
    return load_default_model()


class Engine:
    def __init__(self, config: EngineConfig | None = None,
                 model: ChordModel | None = None):
        self.config = config or EngineConfig()
        self.model = model or model_for_config(self.config)
        self.rng = Rng(self.config.seed)
        cfg = self.config
        self.scene = SceneState(
            tick=0,
            current_chord=self.model.vocabulary[0],
            background_color=ColorRGB(16, 16, 24),
            rng_state=self.rng.state,
        )
        self.grid: PitchGrid = build_pitch_grid(
            self.scene.current_chord, cfg.octave_span, cfg.base_midi
        )
        self.players: dict[Player, PlayerState] = {
            Player.P1: self._new_player(Player.P1, DEFAULT_P1_COLOR, Instrument.MARIMBA),
            Player.P2: self._new_player(Player.P2, DEFAULT_P2_COLOR, Instrument.HANDPAN),
        }
        self.floor = FloorState(
            bg_rect=(cfg.bg_x0, cfg.bg_y0, cfg.bg_x1, cfg.bg_y1),
            circles={
                Player.P1: FloorCircle(Vec2.of(cfg.circle1_x, cfg.circle1_y), cfg.circle_radius),
                Player.P2: FloorCircle(Vec2.of(cfg.circle2_x, cfg.circle2_y), cfg.circle_radius),
            },
            evolution_mode=EvolutionMode(cfg.evolution_mode),
        )
        self.vibration_enabled = True
        self.tutorial_step = 0
        self._next_id = 1
        self._next_notification = 1
        self._attachments: dict[int, list[tuple[int, float]]] = {}
        self._queue: list[tuple[int, object]] = []
        self._queue_head = 0
        self._bg_lockout_until = 0
        self._cooldown_until = 0
        self._dual_latch = False
        self._next_auto_tick = (
            self._ticks(cfg.t_auto_s)
            if self.floor.evolution_mode is EvolutionMode.AUTOMATIC
            else 0
        )
        self._pause_started = 0
        self._last_ambient_inside: bool | None = None
        self._area_dirty = True
        self._area_flags = [False] * 4
        self._started = False
        # rolling digest of every message the engine consumed, applied or
        # not: makes any tampered log record show up in the final hash
        self._input_chain = 0

    # -- small helpers -------------------------------------------------------

    def _new_player(self, p: Player, color: ColorRGB, instrument: Instrument) -> PlayerState:
        cfg = self.config
        return PlayerState(
            binding=PlayerBinding(p, color, instrument),
            dwell=DwellTracker(p),
            idle=IdleState(p),
            iso=IsolationTracker(
                p,
                window_ticks=self._ticks(cfg.isolation_window_s),
                radius_limit=cfg.isolation_radius,
            ),
        )

    def _ticks(self, seconds: float) -> int:
        return int(round(seconds * self.config.tick_rate))

    def _alloc_id(self) -> int:
        oid = self._next_id
        self._next_id += 1
        return oid

    def _notify(self, effects: list[Effect], kind: NotificationKind,
                player: Player | None, payload: dict) -> None:
        effects.append(
            Notification(self._next_notification, self.scene.tick, kind, player, payload)
        )
        self._next_notification += 1

    def instruments(self) -> dict[Player, Instrument]:
        return {p: ps.binding.instrument for p, ps in self.players.items()}

    def _sync_rng_state(self) -> None:
        self.scene.rng_state = self.rng.state

    # -- input queue ---------------------------------------------------------

    def _stamp(self, tick: int) -> int:
        # the queue is consumed head-first, so stamps must never decrease
        stamp = max(tick, self.scene.tick + 1)
        if self._queue:
            stamp = max(stamp, self._queue[-1][0])
        return stamp

    def post_input(self, event: InputEvent, tick: int) -> None:
        self._queue.append((self._stamp(tick), event))

    def post_control(self, cmd: ControlCommand, tick: int) -> None:
        self._queue.append((self._stamp(tick), cmd))

    def _fold_message(self, stamp: int, item: object) -> None:
        h = hashlib.blake2b(digest_size=8)
        h.update(struct.pack("<Qq", self._input_chain, stamp))
        if isinstance(item, ControlCommand):
            h.update(b"cmd")
            h.update(item.name.encode())
            for key in sorted(item.args):
                h.update(key.encode())
                h.update(repr(item.args[key]).encode())
                h.update(b"\x1f")
        else:
            h.update(type(item).__name__.encode())
            player = getattr(item, "player", None)
            if player is not None:
                h.update(player.value.encode())
            if isinstance(item, HandMove):
                h.update(struct.pack("<ddd", item.pos.x, item.pos.y,
                                     item.screen_distance))
            elif isinstance(item, BrushButton):
                h.update(b"1" if item.pressed else b"0")
            elif isinstance(item, EraserHeld):
                h.update(b"1" if item.held else b"0")
            elif isinstance(item, FloorMove):
                h.update(struct.pack("<dd", item.floor_pos.x, item.floor_pos.y))
        self._input_chain = int.from_bytes(h.digest(), "little")

    # -- the tick loop -------------------------------------------------------

    def tick(self) -> list[Effect]:
        self.scene.tick += 1
        now = self.scene.tick
        effects: list[Effect] = []
        if not self._started:
            self._started = True
            for p in (Player.P1, Player.P2):
                effects.append(DeviceCommand(now, brush_target(p), "led",
                                             color=BRUSH_YELLOW, brightness=0.8))
        while self._queue_head < len(self._queue) and self._queue[self._queue_head][0] <= now:
            stamp, item = self._queue[self._queue_head]
            self._queue_head += 1
            self._fold_message(stamp, item)
            if isinstance(item, ControlCommand):
                self.apply_command(item, effects)
            elif not self.scene.paused:
                self._process_input(item, effects)
        if self._queue_head > 512 and self._queue_head == len(self._queue):
            self._queue.clear()
            self._queue_head = 0
        if not self.scene.paused:
            self._update_dwell(effects)
            self._update_cursors(effects)
            self._update_stroke_fade()
            self._update_blobs(effects)
            self._update_evolution(effects)
            self._update_idleness(effects)
            self._expire_hints()
            self._update_area_flags(effects)
            self._update_ambient(effects)
            for ps in self.players.values():
                ps.acted = False
        self._sync_rng_state()
        return effects

    def run_ticks(self, n: int) -> list[Effect]:
        out: list[Effect] = []
        for _ in range(n):
            out.extend(self.tick())
        return out

    # -- input processing ----------------------------------------------------

    def _process_input(self, event: InputEvent, effects: list[Effect]) -> None:
        if isinstance(event, TickEvent):
            return
        ps = self.players.get(event.player)
        if ps is None:
            raise UnknownPlayerError(str(event.player))
        if isinstance(event, HandMove):
            self._on_hand_move(ps, event, effects)
        elif isinstance(event, BrushButton):
            self._on_brush_button(ps, event, effects)
        elif isinstance(event, EraserHeld):
            self._on_eraser(ps, event)
        elif isinstance(event, FloorMove):
            self._on_floor_move(ps, event, effects)

    def _on_hand_move(self, ps: PlayerState, ev: HandMove, effects: list[Effect]) -> None:
        ps.hand = ev.pos
        ps.screen_distance = ev.screen_distance
        now = self.scene.tick
        if ps.eraser_held:
            removed = erase_at(self.scene, ev.pos, self.config.r_erase)
            if removed:
                ps.acted = True
                self._area_dirty = True
            return
        if ps.brush_pressed and ps.stroke_id is not None:
            stroke = self.scene.objects.get(ps.stroke_id)
            if isinstance(stroke, TemporaryStroke):
                last = stroke.points[-1] if stroke.points else None
                if last is None or last != ev.pos:
                    if last is not None:
                        step = last.dist(ev.pos)
                        ps.explore_acc += step
                    stroke.points.append(ev.pos)
                    while ps.explore_acc >= self.config.explore_step:
                        ps.explore_acc -= self.config.explore_step
                        effects.append(NoteEvent(
                            tick=now,
                            player=ps.binding.player,
                            instrument=ps.binding.instrument,
                            pitch=quantize_pitch(ev.pos.y, self.grid),
                            velocity=self.config.velocity_explore,
                            pan=melody_pan(ev.pos.x),
                            source=NoteSource.EXPLORE,
                        ))
                    ps.acted = True
                    if ps.iso.add(now, ev.pos):
                        center = ps.iso.center()
                        self._notify(effects, NotificationKind.ISOLATION, ps.binding.player, {
                            "radius": round(ps.iso.radius_limit, 4),
                            "center_x": center.x if center else 0.5,
                            "center_y": center.y if center else 0.5,
                        })
            return
        # play mode: touching spots and lines
        hits = hit_test(self.scene, ev.pos, self.config.hit_radius)
        entered = [oid for oid in hits if oid not in ps.touching]
        ps.touching = {oid: True for oid in hits}
        for oid in entered:
            obj = self.scene.objects.get(oid)
            if isinstance(obj, Node):
                owner_ps = self.players[obj.owner]
                effects.append(NoteEvent(
                    tick=now,
                    player=obj.owner,
                    instrument=owner_ps.binding.instrument,
                    pitch=obj.pitch,
                    velocity=self.config.velocity_touch,
                    pan=melody_pan(obj.pos.x),
                    source=NoteSource.NODE_TOUCH,
                ))
                ps.acted = True
            elif isinstance(obj, PathLine) and not obj.silent:
                self._start_cursor(obj, ev.pos, ps.binding.player)
                ps.acted = True

    def _start_cursor(self, line: PathLine, hit_pos: Vec2, player: Player) -> None:
        fresh = spawn_cursor(
            line, hit_pos, player, 0,
            speed=self.config.cursor_speed,
            loop_count=self.config.loop_count,
        )
        for cur in self.scene.cursors():
            if cur.line_id == line.id and cur.player == player:
                # re-hit: same cursor object, restarted from the touch point
                cur.arclength_pos = fresh.arclength_pos
                cur.origin = fresh.origin
                cur.traveled = 0.0
                cur.budget = fresh.budget
                cur.loops_remaining = fresh.loops_remaining
                cur.gain = 1.0
                return
        fresh.id = self._alloc_id()
        self.scene.objects[fresh.id] = fresh

    def _on_brush_button(self, ps: PlayerState, ev: BrushButton, effects: list[Effect]) -> None:
        if ps.eraser_held:
            return  # eraser precedence: brush input ignored while holding it
        if ev.pressed and not ps.brush_pressed:
            ps.brush_pressed = True
            ps.acted = True
            sid = self._alloc_id()
            start = [ps.hand] if ps.hand is not None else []
            self.scene.objects[sid] = TemporaryStroke(
                id=sid, owner=ps.binding.player, points=list(start),
                created_tick=self.scene.tick,
            )
            ps.stroke_id = sid
            ps.stroke_thickness = stroke_thickness(ps.screen_distance)
            ps.stroke_dwell_nodes = []
            ps.explore_acc = 0.0
            # anchor on the next dwell pass so the stationary clock starts at 0
            ps.dwell.reset(None)
        elif not ev.pressed and ps.brush_pressed:
            ps.brush_pressed = False
            ps.acted = True
            self._finish_stroke(ps, effects)

    def _finish_stroke(self, ps: PlayerState, effects: list[Effect]) -> None:
        sid = ps.stroke_id
        ps.stroke_id = None
        stroke = self.scene.objects.get(sid) if sid is not None else None
        if not isinstance(stroke, TemporaryStroke):
            return
        stroke.ended = True
        if len(stroke.points) < 2:
            return
        try:
            line = finalize_stroke(
                self.scene, ps.binding.player, stroke,
                list(ps.stroke_dwell_nodes),
                line_id=self._alloc_id(),
                color=ps.binding.color,
                thickness=ps.stroke_thickness,
                eps_close=self.config.eps_close,
                len_min=self.config.len_min,
                r_prox=self.config.r_prox,
                fill_opacity=self.config.fill_opacity,
            )
        except DegenerateStrokeError:
            return
        self._attachments[line.id] = attach_nodes(line, self.scene.nodes(), self.config.r_prox)
        self._area_dirty = True
        score = detect_repetition(
            ps.recent_lines[-self.config.repetition_history:], line,
            self.config.repetition_threshold,
        )
        if score is not None:
            self._notify(effects, NotificationKind.REPETITION, ps.binding.player, {
                "similarity": round(score, 4),
                "line_id": line.id,
            })
        ps.recent_lines.append(line)
        if len(ps.recent_lines) > self.config.repetition_history:
            ps.recent_lines.pop(0)
        ps.idle.has_drawn_first_line = True

    def _on_eraser(self, ps: PlayerState, ev: EraserHeld) -> None:
        if ev.held == ps.eraser_held:
            return
        ps.eraser_held = ev.held
        ps.acted = True
        if ev.held and ps.brush_pressed:
            # picking up the eraser abandons the stroke in progress
            ps.brush_pressed = False
            sid = ps.stroke_id
            ps.stroke_id = None
            stroke = self.scene.objects.get(sid) if sid is not None else None
            if isinstance(stroke, TemporaryStroke):
                stroke.ended = True

    def _on_floor_move(self, ps: PlayerState, ev: FloorMove, effects: list[Effect]) -> None:
        player = ps.binding.player
        was_in_bg = self.floor.in_bg_area.get(player, False)
        now_in_bg = self.floor.bg_contains(ev.floor_pos)
        self.floor.positions[player] = ev.floor_pos
        self.floor.in_bg_area[player] = now_in_bg
        if now_in_bg and not was_in_bg and self.scene.tick >= self._bg_lockout_until:
            self._bg_lockout_until = self.scene.tick + self._ticks(self.config.bg_lockout_s)
            self._toggle_background(effects)
            ps.acted = True
        circle = self.floor.circles[player]
        was_in_circle = self.floor.in_circle.get(player, False)
        now_in_circle = circle.contains(ev.floor_pos)
        self.floor.in_circle[player] = now_in_circle
        if was_in_circle and not now_in_circle:
            self._dual_latch = False  # stepping out re-arms the next episode

    def _toggle_background(self, effects: list[Effect]) -> None:
        self.floor.bg_active = not self.floor.bg_active
        effects.append(NoteEvent(
            tick=self.scene.tick,
            player=None,
            instrument=None,
            pitch=self.config.base_midi + self.scene.current_chord.root,
            velocity=90 if self.floor.bg_active else 0,
            pan=0.0,
            source=NoteSource.BACKGROUND,
        ))

    # -- per-tick updates ------------------------------------------------------

    def _update_dwell(self, effects: list[Effect]) -> None:
        dt = self.config.dt
        for p in (Player.P1, Player.P2):
            ps = self.players[p]
            if not ps.brush_pressed or ps.hand is None:
                continue
            if ps.dwell.update(ps.hand, dt, self.config.eps_dwell,
                               self.config.dwell_threshold_s):
                self._create_node(ps, ps.hand, effects)

    def _create_node(self, ps: PlayerState, pos: Vec2, effects: list[Effect]) -> None:
        node = Node(
            id=self._alloc_id(),
            owner=ps.binding.player,
            pos=pos,
            color=ps.binding.color,
            pitch=quantize_pitch(pos.y, self.grid),
        )
        self.scene.objects[node.id] = node
        ps.stroke_dwell_nodes.append(node.id)
        ps.acted = True
        self._area_dirty = True
        for line in self.scene.lines():
            d, _ = nearest_on_polyline(pos, line.traversal_points())
            if d <= self.config.r_prox:
                self._attachments[line.id] = refresh_melody(
                    line, self.scene.nodes(), self.config.r_prox
                )
        effects.append(NoteEvent(
            tick=self.scene.tick,
            player=ps.binding.player,
            instrument=ps.binding.instrument,
            pitch=node.pitch,
            velocity=self.config.velocity_touch,
            pan=melody_pan(pos.x),
            source=NoteSource.NODE_TOUCH,
        ))

    def _update_cursors(self, effects: list[Effect]) -> None:
        dt = self.config.dt
        instruments = self.instruments()
        for cur in self.scene.cursors():
            line = self.scene.objects.get(cur.line_id)
            if not isinstance(line, PathLine) or line.silent:
                self.scene.objects.pop(cur.id, None)
                continue
            attachments = self._attachments.get(line.id, [])
            live = [(nid, s) for nid, s in attachments if nid in self.scene.objects]
            updated, notes = tick_cursor(
                self.scene, cur, line, live, dt, instruments,
                self.scene.tick, self.config.velocity_cursor,
            )
            effects.extend(notes)
            if updated is None:
                self.scene.objects.pop(cur.id, None)

    def _update_stroke_fade(self) -> None:
        decay = self.config.dt / self.config.stroke_fade_s
        for stroke in self.scene.strokes():
            if not stroke.ended:
                continue
            stroke.alpha -= decay
            if stroke.alpha <= 1e-12:
                self.scene.objects.pop(stroke.id, None)

    def _update_blobs(self, effects: list[Effect]) -> None:
        if not self.floor.blobs_active:
            return
        dt = self.config.dt
        avoid = [pos for pos in self.floor.positions.values()]
        for idx, blob in enumerate(self.floor.blobs):
            step_blob(blob, dt)
            for p in (Player.P1, Player.P2):
                pos = self.floor.positions.get(p)
                if pos is None or pos.dist(blob.pos) > blob.radius:
                    continue
                ps = self.players[p]
                effects.append(NoteEvent(
                    tick=self.scene.tick,
                    player=p,
                    instrument=ps.binding.instrument,
                    pitch=BLOB_PERCUSSION[idx % len(BLOB_PERCUSSION)],
                    velocity=self.config.velocity_blob,
                    pan=melody_pan(blob.pos.x),
                    source=NoteSource.BLOB,
                ))
                ps.acted = True
                self.floor.blobs[idx] = spawn_blob(
                    self.rng, self.config.blob_radius, self.config.blob_speed,
                    avoid, self.config.blob_radius * 2.0,
                )
                break

    def _players_each_own_object(self) -> bool:
        owners = {Player.P1: False, Player.P2: False}
        for obj in self.scene.objects.values():
            if isinstance(obj, (Node, PathLine)):
                owners[obj.owner] = True
        return owners[Player.P1] and owners[Player.P2]

    def _update_evolution(self, effects: list[Effect]) -> None:
        mode = self.floor.evolution_mode
        now = self.scene.tick
        if mode is EvolutionMode.INTERACTABLE:
            visible = (now >= self._cooldown_until) and self._players_each_own_object()
            for circle in self.floor.circles.values():
                circle.visible = visible
            both_in = (self.floor.in_circle.get(Player.P1, False)
                       and self.floor.in_circle.get(Player.P2, False))
            if visible and both_in and not self._dual_latch:
                self._dual_latch = True
                self._cooldown_until = now + self._ticks(self.config.evolution_cooldown_s)
                self._advance_chord(effects)
        elif mode is EvolutionMode.AUTOMATIC:
            for circle in self.floor.circles.values():
                circle.visible = False
            if self._next_auto_tick and now >= self._next_auto_tick:
                self._next_auto_tick += self._ticks(self.config.t_auto_s)
                self._advance_chord(effects)
        else:
            for circle in self.floor.circles.values():
                circle.visible = False

    def _advance_chord(self, effects: list[Effect]) -> None:
        new = next_chord(self.model, self.scene.current_chord, self.rng)
        self.grid = rechord(self.scene, new, self.config.octave_span, self.config.base_midi)
        effects.append(ChordChange(self.scene.tick, new))

    def _update_idleness(self, effects: list[Effect]) -> None:
        dt = self.config.dt
        thresholds = (self.config.idle_vibrate_s, self.config.idle_light_s,
                      self.config.idle_line_s)
        now = self.scene.tick
        for p in (Player.P1, Player.P2):
            ps = self.players[p]
            prev_stage = ps.idle.stage
            fired = update_idleness(ps.idle, dt, ps.acted, thresholds)
            if ps.acted and prev_stage != IdleStage.NONE:
                if self.vibration_enabled:
                    effects.append(DeviceCommand(now, brush_target(p), "vibrate", on=False))
                if prev_stage in (IdleStage.LIGHT, IdleStage.LINE_OR_NOTIFY):
                    effects.append(DeviceCommand(now, brush_target(p), "led",
                                                 color=BRUSH_YELLOW, brightness=0.8))
            for action in fired:
                if action is IdleAction.VIBRATE:
                    if self.vibration_enabled:
                        effects.append(DeviceCommand(now, brush_target(p), "vibrate", on=True))
                elif action is IdleAction.LIGHT:
                    effects.append(DeviceCommand(now, brush_target(p), "led",
                                                 color=ps.binding.color, brightness=1.0))
                elif action is IdleAction.AUTO_LINE:
                    anchor = ps.hand if ps.hand is not None else Vec2.of(0.5, 0.5)
                    shape = self.rng.choice([s.value for s in HintShape])
                    hint = spawn_hint(
                        shape, anchor, p, HintStyle.DASHED.value,
                        hint_id=self._alloc_id(),
                        expires_tick=now + self._ticks(self.config.hint_ttl_s),
                        color=ps.binding.color,
                        scale=self.config.hint_scale,
                    )
                    self.scene.objects[hint.id] = hint
                elif action is IdleAction.NOTIFY:
                    self._notify(effects, NotificationKind.IDLE_STUCK, p, {
                        "seconds_idle": round(ps.idle.seconds_idle, 2),
                    })

    def _expire_hints(self) -> None:
        now = self.scene.tick
        for hint in self.scene.hint_lines():
            if hint.expires_tick <= now:
                self.scene.objects.pop(hint.id, None)

    def _update_area_flags(self, effects: list[Effect]) -> None:
        if not self._area_dirty:
            return
        self._area_dirty = False
        fractions = area_usage(self.scene)
        threshold = self.config.area_overuse_threshold
        for q, frac in enumerate(fractions):
            flagged = frac > threshold
            if flagged and not self._area_flags[q]:
                self._notify(effects, NotificationKind.AREA_OVERUSE, None, {
                    "quadrant": q,
                    "fraction": round(frac, 4),
                })
            self._area_flags[q] = flagged
        self._area_fractions = fractions

    def area_fractions(self) -> list[float]:
        return list(getattr(self, "_area_fractions", [0.0] * 4))

    def area_flags(self) -> list[bool]:
        return list(self._area_flags)

    def _update_ambient(self, effects: list[Effect]) -> None:
        cfg = self.config
        all_inside = True
        for p in (Player.P1, Player.P2):
            pos = self.floor.positions.get(p)
            if pos is None or not (cfg.space_x0 <= pos.x <= cfg.space_x1
                                   and cfg.space_y0 <= pos.y <= cfg.space_y1):
                all_inside = False
                break
        if all_inside != self._last_ambient_inside:
            self._last_ambient_inside = all_inside
            effects.append(ambient_for(all_inside, self.scene.tick))

    # -- control commands ------------------------------------------------------

    def apply_command(self, cmd: ControlCommand, effects: list[Effect]) -> None:
        now = self.scene.tick
        name = cmd.name
        args = cmd.args
        if name == "pause":
            if not self.scene.paused:
                self.scene.paused = True
                self._pause_started = now
        elif name == "resume":
            if self.scene.paused:
                self.scene.paused = False
                span = now - self._pause_started
                for hint in self.scene.hint_lines():
                    hint.expires_tick += span
                self._bg_lockout_until += span if self._bg_lockout_until > self._pause_started else 0
                self._cooldown_until += span if self._cooldown_until > self._pause_started else 0
                if self._next_auto_tick:
                    self._next_auto_tick += span
        elif name == "remove_lines":
            for line in self.scene.lines():
                remove_object(self.scene, line.id)
                self._attachments.pop(line.id, None)
            self._area_dirty = True
        elif name == "remove_circles":
            for node in self.scene.nodes():
                remove_object(self.scene, node.id)
            self._area_dirty = True
        elif name == "toggle_bg_music":
            self._toggle_background(effects)
        elif name == "set_evolution_mode":
            mode = args["mode"]
            try:
                self.floor.evolution_mode = EvolutionMode(mode)
            except ValueError:
                raise InvalidCommandError(f"unknown evolution mode {mode!r}")
            if self.floor.evolution_mode is EvolutionMode.AUTOMATIC:
                self._next_auto_tick = now + self._ticks(self.config.t_auto_s)
            else:
                self._next_auto_tick = 0
            self._dual_latch = False
        elif name == "play_all_melodies":
            for line in self.scene.lines():
                if not line.silent:
                    self._start_cursor(line, line.points[0], line.owner)
        elif name == "toggle_blobs":
            self.floor.blobs_active = not self.floor.blobs_active
            self.floor.blobs = []
            if self.floor.blobs_active:
                avoid = list(self.floor.positions.values())
                for _ in range(self.config.blob_count):
                    self.floor.blobs.append(spawn_blob(
                        self.rng, self.config.blob_radius, self.config.blob_speed,
                        avoid, self.config.blob_radius * 2.0,
                    ))
        elif name == "swap_players":
            b1 = self.players[Player.P1].binding
            b2 = self.players[Player.P2].binding
            b1.color, b2.color = b2.color, b1.color
            b1.instrument, b2.instrument = b2.instrument, b1.instrument
        elif name == "swap_hands":
            ps = self._player_state(args["player"])
            ps.binding.active_hand = (
                Hand.LEFT if ps.binding.active_hand is Hand.RIGHT else Hand.RIGHT
            )
        elif name == "set_brush_color":
            ps = self._player_state(args["player"])
            ps.binding.color = self._color_arg(args)
        elif name == "set_background_color":
            self.scene.background_color = self._color_arg(args)
        elif name == "set_vibration_enabled":
            self.vibration_enabled = bool(args["enabled"])
        elif name == "trigger_hint":
            self._trigger_hint(args, effects)
        elif name == "tutorial_step":
            try:
                self.tutorial_step = int(args["index"])
            except (TypeError, ValueError):
                raise InvalidCommandError(f"bad tutorial step {args['index']!r}")
        else:
            raise InvalidCommandError(f"unknown command {name!r}")

    def _player_state(self, token) -> PlayerState:
        try:
            return self.players[Player(token)]
        except (KeyError, ValueError):
            raise InvalidCommandError(f"unknown player {token!r}")

    @staticmethod
    def _color_arg(args: dict) -> ColorRGB:
        try:
            return ColorRGB(int(args["r"]), int(args["g"]), int(args["b"]))
        except (TypeError, ValueError) as exc:
            raise InvalidCommandError(f"bad color: {exc}")

    def _trigger_hint(self, args: dict, effects: list[Effect]) -> None:
        player = Player(args["player"]) if args["player"] in ("P1", "P2") else None
        if player is None:
            raise InvalidCommandError(f"unknown player {args['player']!r}")
        ps = self.players[player]
        style = args["style"]
        if style not in (HintStyle.DASHED.value, HintStyle.WAVY.value):
            raise InvalidCommandError(f"unknown hint style {style!r}")
        try:
            anchor = Vec2.of(float(args["x"]), float(args["y"]))
        except (TypeError, ValueError):
            raise InvalidCommandError("bad hint anchor")
        try:
            hint = spawn_hint(
                args["shape"], anchor, player, style,
                hint_id=self._alloc_id(),
                expires_tick=self.scene.tick + self._ticks(self.config.hint_ttl_s),
                color=ps.binding.color,
                scale=self.config.hint_scale,
                hand_pos=ps.hand if ps.hand is not None else Vec2.of(0.5, 0.5),
            )
        except InvalidShapeError as exc:
            raise InvalidCommandError(str(exc))
        self.scene.objects[hint.id] = hint

    # -- hashing ----------------------------------------------------------------

    def state_hash(self) -> int:
        """Digest of scene plus engine-side behavior state, for record/replay."""
        h = hashlib.blake2b(digest_size=8)
        h.update(struct.pack("<Q", scene_hash(self.scene)))
        for p in (Player.P1, Player.P2):
            ps = self.players[p]
            b = ps.binding
            h.update(bytes((b.color.r, b.color.g, b.color.b)))
            h.update(b.instrument.value.encode())
            h.update(b.active_hand.value.encode())
            h.update(b"B" if ps.brush_pressed else b"b")
            h.update(b"E" if ps.eraser_held else b"e")
            if ps.hand is not None:
                h.update(struct.pack("<dd", ps.hand.x, ps.hand.y))
            h.update(struct.pack("<d", ps.screen_distance))
            h.update(struct.pack("<d", ps.explore_acc))
            h.update(struct.pack("<d", ps.dwell.elapsed))
            h.update(struct.pack("<d", ps.idle.seconds_idle))
            h.update(ps.idle.stage.value.encode())
            h.update(b"F" if ps.idle.has_drawn_first_line else b"f")
            h.update(struct.pack("<i", len(ps.iso.points)))
            h.update(b"I" if ps.iso.flagged else b"i")
            pos = self.floor.positions.get(p)
            if pos is not None:
                h.update(struct.pack("<dd", pos.x, pos.y))
            h.update(b"C" if self.floor.in_circle.get(p, False) else b"c")
        h.update(b"G" if self.floor.bg_active else b"g")
        h.update(self.floor.evolution_mode.value.encode())
        h.update(b"V" if self.vibration_enabled else b"v")
        h.update(struct.pack("<i", self.tutorial_step))
        h.update(struct.pack("<i", self._next_id))
        h.update(struct.pack("<q", self._bg_lockout_until))
        h.update(struct.pack("<q", self._cooldown_until))
        h.update(struct.pack("<q", self._next_auto_tick))
        h.update(b"D" if self._dual_latch else b"d")
        for blob in self.floor.blobs:
            h.update(struct.pack("<dddd", blob.pos.x, blob.pos.y, blob.vel[0], blob.vel[1]))
        h.update(b"A" if self.floor.blobs_active else b"a")
        h.update(struct.pack("<Q", self._input_chain))
        return int.from_bytes(h.digest(), "little")
