"""Authoritative scene model: objects, colors, lifecycle, and state hashing.

The scene is a value owned by the engine tick loop.  Everything that affects
behavior lives here (including temporary strokes and cursors), so two runs
that agree on the seed and the event sequence agree on scene_hash at every
tick.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from enum import Enum

from .chords import ChordSymbol
from .geometry import (
    Vec2,
    nearest_on_polyline,
    polyline_intersections,
    polyline_length,
)


class Player(str, Enum):
    P1 = "P1"
    P2 = "P2"

    def other(self) -> "Player":
        return Player.P2 if self is Player.P1 else Player.P1


class Instrument(str, Enum):
    MARIMBA = "marimba"
    HANDPAN = "handpan"


class Hand(str, Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ColorRGB:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for v in (self.r, self.g, self.b):
            if not 0 <= v <= 255:
                raise ValueError(f"color channel out of range: {v}")

    def blend(self, other: "ColorRGB") -> "ColorRGB":
        # channel-wise arithmetic mean, round half up
        return ColorRGB(
            (self.r + other.r + 1) // 2,
            (self.g + other.g + 1) // 2,
            (self.b + other.b + 1) // 2,
        )

    def over(self, background: "ColorRGB", alpha: float) -> "ColorRGB":
        """Composite self at `alpha` over `background` (round half up)."""

        def mix(a: int, b: int) -> int:
            return int(a * alpha + b * (1.0 - alpha) + 0.5)

        return ColorRGB(
            mix(self.r, background.r),
            mix(self.g, background.g),
            mix(self.b, background.b),
        )


@dataclass
class PlayerBinding:
    """Live color/instrument/hand assignment of one player slot."""

    player: Player
    color: ColorRGB
    instrument: Instrument
    active_hand: Hand = Hand.RIGHT


@dataclass
class Node:
    """A paint spot: the shortest musical unit, pitched on the chord grid."""

    id: int
    owner: Player
    pos: Vec2
    color: ColorRGB
    pitch: int


@dataclass
class PathLine:
    """A permanent melody line; silent when no node is attached."""

    id: int
    owner: Player
    points: list[Vec2]
    closed: bool
    silent: bool
    thickness: float
    color: ColorRGB
    fill_color: ColorRGB | None
    melody: list[int] = field(default_factory=list)

    def length(self) -> float:
        pts = self.points + [self.points[0]] if self.closed else self.points
        return polyline_length(pts)

    def traversal_points(self) -> list[Vec2]:
        """Points the cursor walks: closed lines repeat the first point."""
        return self.points + [self.points[0]] if self.closed else self.points


@dataclass
class TemporaryStroke:
    """In-progress or fading brush trail.  Part of hashed state."""

    id: int
    owner: Player
    points: list[Vec2]
    created_tick: int
    alpha: float = 1.0
    ended: bool = False


class HintShape(str, Enum):
    HOUSE = "house"
    CIRCLE = "circle"
    STAR = "star"
    WAVE = "wave"


class HintStyle(str, Enum):
    DASHED = "dashed"
    WAVY = "wavy"


@dataclass
class HintLine:
    """System- or caregiver-spawned guide: silent, not player-erasable."""

    id: int
    shape: str
    style: str
    points: list[Vec2]
    target_player: Player
    expires_tick: int
    color: ColorRGB


@dataclass
class Cursor:
    """Animated dot playing one line's melody at fixed speed."""

    id: int
    line_id: int
    player: Player
    arclength_pos: float
    speed: float
    loops_remaining: int
    gain: float = 1.0
    direction: int = 1
    origin: float = 0.0  # spawn arclength; crossing times derive from this
    traveled: float = 0.0
    budget: float = 0.0


@dataclass
class CrossingPatch:
    line_a: int
    line_b: int
    at: Vec2
    blended: ColorRGB


@dataclass
class SceneState:
    tick: int
    current_chord: ChordSymbol
    background_color: ColorRGB
    rng_state: int
    paused: bool = False
    objects: dict[int, object] = field(default_factory=dict)
    crossings: list[CrossingPatch] = field(default_factory=list)

    # -- typed views -------------------------------------------------------
    def nodes(self) -> list[Node]:
        return [o for o in self.objects.values() if isinstance(o, Node)]

    def lines(self) -> list[PathLine]:
        return [o for o in self.objects.values() if isinstance(o, PathLine)]

    def strokes(self) -> list[TemporaryStroke]:
        return [o for o in self.objects.values() if isinstance(o, TemporaryStroke)]

    def hint_lines(self) -> list[HintLine]:
        return [o for o in self.objects.values() if isinstance(o, HintLine)]

    def cursors(self) -> list[Cursor]:
        return [o for o in self.objects.values() if isinstance(o, Cursor)]


class DegenerateStrokeError(ValueError):
    """Stroke too short to become a line; it is discarded."""


def hit_test(scene: SceneState, pos: Vec2, radius: float) -> list[int]:
    """Ids of nodes and lines within reach of pos, nearest first.

    Nodes hit when their center is within `radius`; lines when the distance
    to the polyline is at most radius + thickness/2.  Hint lines and
    temporary strokes never hit.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    found: list[tuple[float, int]] = []
    for oid, obj in scene.objects.items():
        if isinstance(obj, Node):
            d = pos.dist(obj.pos)
            if d <= radius:
                found.append((d, oid))
        elif isinstance(obj, PathLine):
            d, _ = nearest_on_polyline(pos, obj.traversal_points())
            if d <= radius + obj.thickness / 2.0:
                found.append((d, oid))
    found.sort(key=lambda pair: (pair[0], pair[1]))
    return [oid for _, oid in found]


def blend_crossings(scene: SceneState, new_line: PathLine) -> list[CrossingPatch]:
    """One patch per intersection of new_line with the other player's lines."""
    patches: list[CrossingPatch] = []
    new_pts = new_line.traversal_points()
    for other in scene.lines():
        if other.id == new_line.id or other.owner == new_line.owner:
            continue
        for at in polyline_intersections(new_pts, other.traversal_points()):
            patches.append(
                CrossingPatch(
                    line_a=new_line.id,
                    line_b=other.id,
                    at=Vec2.of(at.x, at.y),
                    blended=new_line.color.blend(other.color),
                )
            )
    return patches


def remove_object(scene: SceneState, oid: int) -> None:
    """Drop one object, cleaning up whatever referenced it."""
    obj = scene.objects.pop(oid, None)
    if obj is None:
        return
    if isinstance(obj, Node):
        for line in scene.lines():
            if oid in line.melody:
                line.melody.remove(oid)
                line.silent = not line.melody
    elif isinstance(obj, PathLine):
        scene.crossings = [
            c for c in scene.crossings if c.line_a != oid and c.line_b != oid
        ]
        for cur in scene.cursors():
            if cur.line_id == oid:
                scene.objects.pop(cur.id, None)


def erase_at(scene: SceneState, pos: Vec2, radius: float) -> list[int]:
    """Remove every node and line under the eraser; returns removed ids."""
    victims = hit_test(scene, pos, radius)
    for oid in victims:
        remove_object(scene, oid)
    return victims


# --- hashing ---------------------------------------------------------------

def _h_f(h, v: float) -> None:
    h.update(struct.pack("<d", v))


def _h_i(h, v: int) -> None:
    h.update(struct.pack("<q", v))


def _h_color(h, c: ColorRGB) -> None:
    h.update(bytes((c.r, c.g, c.b)))


def _h_points(h, pts: list[Vec2]) -> None:
    _h_i(h, len(pts))
    for p in pts:
        _h_f(h, p.x)
        _h_f(h, p.y)


def scene_hash(scene: SceneState, include_tick: bool = True) -> int:
    """Stable 64-bit digest of the full scene.

    include_tick=False compares scene content across a pause span, where the
    tick counter keeps running but nothing else may change.
    """
    h = hashlib.blake2b(digest_size=8)
    if include_tick:
        _h_i(h, scene.tick)
    h.update(scene.current_chord.name().encode())
    _h_color(h, scene.background_color)
    h.update(struct.pack("<Q", scene.rng_state))
    h.update(b"P" if scene.paused else b"p")
    for oid in sorted(scene.objects):
        obj = scene.objects[oid]
        _h_i(h, oid)
        if isinstance(obj, Node):
            h.update(b"N")
            h.update(obj.owner.value.encode())
            _h_f(h, obj.pos.x)
            _h_f(h, obj.pos.y)
            _h_color(h, obj.color)
            _h_i(h, obj.pitch)
        elif isinstance(obj, PathLine):
            h.update(b"L")
            h.update(obj.owner.value.encode())
            _h_points(h, obj.points)
            h.update(b"c" if obj.closed else b"o")
            h.update(b"s" if obj.silent else b"v")
            _h_f(h, obj.thickness)
            _h_color(h, obj.color)
            if obj.fill_color is not None:
                _h_color(h, obj.fill_color)
            _h_i(h, len(obj.melody))
            for nid in obj.melody:
                _h_i(h, nid)
        elif isinstance(obj, TemporaryStroke):
            h.update(b"T")
            h.update(obj.owner.value.encode())
            _h_points(h, obj.points)
            _h_i(h, obj.created_tick)
            _h_f(h, obj.alpha)
            h.update(b"e" if obj.ended else b"a")
        elif isinstance(obj, HintLine):
            h.update(b"H")
            h.update(obj.shape.encode())
            h.update(obj.style.encode())
            _h_points(h, obj.points)
            h.update(obj.target_player.value.encode())
            _h_i(h, obj.expires_tick)
            _h_color(h, obj.color)
        elif isinstance(obj, Cursor):
            h.update(b"C")
            _h_i(h, obj.line_id)
            h.update(obj.player.value.encode())
            _h_f(h, obj.arclength_pos)
            _h_f(h, obj.speed)
            _h_i(h, obj.loops_remaining)
            _h_f(h, obj.gain)
            _h_f(h, obj.origin)
            _h_f(h, obj.traveled)
            _h_f(h, obj.budget)
    _h_i(h, len(scene.crossings))
    for c in sorted(scene.crossings, key=lambda c: (c.line_a, c.line_b, c.at.x, c.at.y)):
        _h_i(h, c.line_a)
        _h_i(h, c.line_b)
        _h_f(h, c.at.x)
        _h_f(h, c.at.y)
        _h_color(h, c.blended)
    return int.from_bytes(h.digest(), "little")
