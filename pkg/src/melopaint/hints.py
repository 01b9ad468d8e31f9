"""Behavior detection and hinting.

Idleness is staged (brush vibration, brush light, then a hint line or a
caregiver notification), isolation watches for long drawing confined to a
small area, and repetition compares each new line against the player's
recent ones with a translation- and direction-invariant shape metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .geometry import Vec2, centroid, polyline_length, resample, spread_radius
from .scene import (
    ColorRGB,
    HintLine,
    HintShape,
    HintStyle,
    Node,
    PathLine,
    Player,
    SceneState,
)

IDLE_VIBRATE_S = 20.0
IDLE_LIGHT_S = 40.0
IDLE_LINE_S = 60.0
_EPS = 1e-9  # absorbs float accumulation over long idle spans


class IdleStage(str, Enum):
    NONE = "none"
    VIBRATE = "vibrate"
    LIGHT = "light"
    LINE_OR_NOTIFY = "line_or_notify"


class NotificationKind(str, Enum):
    REPETITION = "repetition"
    ISOLATION = "isolation"
    IDLE_STUCK = "idle_stuck"
    AREA_OVERUSE = "area_overuse"


@dataclass(frozen=True)
class Notification:
    id: int
    tick: int
    kind: NotificationKind
    player: Player | None
    payload: dict


@dataclass
class IdleState:
    player: Player
    seconds_idle: float = 0.0
    stage: IdleStage = IdleStage.NONE
    has_drawn_first_line: bool = False


class IdleAction(str, Enum):
    """What the staging machine asks the engine to do on a threshold."""

    VIBRATE = "vibrate"
    LIGHT = "light"
    AUTO_LINE = "auto_line"
    NOTIFY = "notify"


def update_idleness(
    idle: IdleState,
    dt: float,
    acted: bool,
    thresholds: tuple[float, float, float] = (IDLE_VIBRATE_S, IDLE_LIGHT_S, IDLE_LINE_S),
) -> list[IdleAction]:
    """Advance one player's idle clock; returns stage actions fired this step.

    Stages run none -> vibrate -> light -> line_or_notify at strictly more
    than 20/40/60 seconds.  Any action resets the episode.  The caller
    decides whether vibrate becomes a device command (the stage advances
    regardless of the vibration toggle) and whether the final stage draws
    an auto hint line (no first line yet) or notifies the caregiver.
    """
    if acted:
        idle.seconds_idle = 0.0
        idle.stage = IdleStage.NONE
        return []
    idle.seconds_idle += dt
    t_vibrate, t_light, t_line = thresholds
    fired: list[IdleAction] = []
    if idle.stage == IdleStage.NONE and idle.seconds_idle > t_vibrate + _EPS:
        idle.stage = IdleStage.VIBRATE
        fired.append(IdleAction.VIBRATE)
    if idle.stage == IdleStage.VIBRATE and idle.seconds_idle > t_light + _EPS:
        idle.stage = IdleStage.LIGHT
        fired.append(IdleAction.LIGHT)
    if idle.stage == IdleStage.LIGHT and idle.seconds_idle > t_line + _EPS:
        idle.stage = IdleStage.LINE_OR_NOTIFY
        fired.append(
            IdleAction.NOTIFY if idle.has_drawn_first_line else IdleAction.AUTO_LINE
        )
    return fired


@dataclass
class IsolationTracker:
    """Sliding window of draw points; flags long drawing in one small area."""

    player: Player
    window_ticks: int
    radius_limit: float
    points: list[tuple[int, Vec2]] = field(default_factory=list)
    flagged: bool = False

    def add(self, tick: int, pos: Vec2) -> bool:
        """Record a draw point; True when an isolation episode starts."""
        self.points.append((tick, pos))
        cutoff = tick - self.window_ticks
        while self.points and self.points[0][0] < cutoff:
            self.points.pop(0)
        span = tick - self.points[0][0]
        radius = spread_radius([p for _, p in self.points])
        if span >= self.window_ticks and radius <= self.radius_limit:
            if not self.flagged:
                self.flagged = True
                return True
        elif radius > self.radius_limit:
            self.flagged = False  # left the area: re-arm
        return False

    def center(self) -> Vec2 | None:
        if not self.points:
            return None
        cx, cy = centroid([p for _, p in self.points])
        return Vec2(cx, cy)


class DegenerateLineError(ValueError):
    """Zero-arclength line has no comparable shape."""


RESAMPLE_POINTS = 32
SHAPE_DIST_SCALE = 0.5
SHAPE_WEIGHT = 0.7
LENGTH_WEIGHT = 0.3


def _normalized_shape(points: list[Vec2]) -> list[tuple[float, float]]:
    pts = resample(points, RESAMPLE_POINTS)
    cx, cy = centroid(pts)
    shifted = [(p.x - cx, p.y - cy) for p in pts]
    rms = math.sqrt(sum(x * x + y * y for x, y in shifted) / len(shifted))
    if rms <= 0.0:
        return [(0.0, 0.0)] * len(shifted)
    return [(x / rms, y / rms) for x, y in shifted]


def _mean_dist(a: list[tuple[float, float]], b: list[tuple[float, float]]) -> float:
    total = 0.0
    for (ax, ay), (bx, by) in zip(a, b):
        dx = ax - bx
        dy = ay - by
        total += math.sqrt(dx * dx + dy * dy)
    return total / len(a)


def line_similarity(a: PathLine, b: PathLine) -> float:
    """Score in [0,1]: 0.7 * shape match + 0.3 * length ratio.

    Shape compares arclength-resampled, centroid-centered, RMS-normalized
    point sets over both traversal directions, so translation, scale, and
    drawing direction do not matter.  Rotation does: a rotated copy reads
    as a different gesture.
    """
    pa = a.traversal_points()
    pb = b.traversal_points()
    la = polyline_length(pa)
    lb = polyline_length(pb)
    if la <= 0.0 or lb <= 0.0:
        raise DegenerateLineError("cannot compare a zero-length line")
    sa = _normalized_shape(pa)
    sb = _normalized_shape(pb)
    shape_dist = min(_mean_dist(sa, sb), _mean_dist(sa, sb[::-1]))
    shape_score = max(0.0, 1.0 - shape_dist / SHAPE_DIST_SCALE)
    length_score = min(la, lb) / max(la, lb)
    return SHAPE_WEIGHT * shape_score + LENGTH_WEIGHT * length_score


def detect_repetition(
    recent: list[PathLine], new_line: PathLine, threshold: float
) -> float | None:
    """Max similarity against recent lines, when it reaches the threshold."""
    best = None
    for old in recent:
        score = line_similarity(old, new_line)
        if best is None or score > best:
            best = score
    if best is not None and best >= threshold:
        return best
    return None


# --- hint shapes -------------------------------------------------------------

class InvalidShapeError(ValueError):
    pass


def _house() -> list[tuple[float, float]]:
    return [(-0.5, -0.5), (0.5, -0.5), (0.5, 0.1), (0.0, 0.5), (-0.5, 0.1)]


def _circle(segments: int = 24) -> list[tuple[float, float]]:
    return [
        (0.5 * math.cos(2.0 * math.pi * k / segments),
         0.5 * math.sin(2.0 * math.pi * k / segments))
        for k in range(segments)
    ]


def _star() -> list[tuple[float, float]]:
    pts = []
    for k in range(10):
        r = 0.5 if k % 2 == 0 else 0.2
        ang = math.pi / 2.0 + k * math.pi / 5.0
        pts.append((r * math.cos(ang), r * math.sin(ang)))
    return pts


def _wave(segments: int = 24) -> list[tuple[float, float]]:
    return [
        (-0.5 + k / segments,
         0.35 * math.sin(2.0 * math.pi * 2.0 * k / segments))
        for k in range(segments + 1)
    ]


_TEMPLATES: dict[str, tuple[list[tuple[float, float]], bool]] = {
    HintShape.HOUSE.value: (_house(), True),
    HintShape.CIRCLE.value: (_circle(), True),
    HintShape.STAR.value: (_star(), True),
    HintShape.WAVE.value: (_wave(), False),
}


def spawn_hint(
    shape: str,
    anchor: Vec2,
    target_player: Player,
    style: str,
    *,
    hint_id: int,
    expires_tick: int,
    color: ColorRGB,
    scale: float = 0.15,
    hand_pos: Vec2 | None = None,
) -> HintLine:
    """Instantiate a hint line.

    Dashed style stamps the shape template (scaled to `scale` canvas units)
    centered at the anchor.  Wavy style ignores the template and builds a
    sinusoidal guide from the player's hand to the anchor; its endpoints
    are exactly those two positions.
    """
    if style == HintStyle.WAVY.value:
        if hand_pos is None:
            raise InvalidShapeError("wavy hint needs the player's hand position")
        points = _wavy_guide(hand_pos, anchor)
        return HintLine(
            id=hint_id,
            shape=shape,
            style=HintStyle.WAVY.value,
            points=points,
            target_player=target_player,
            expires_tick=expires_tick,
            color=color,
        )
    if shape not in _TEMPLATES:
        raise InvalidShapeError(f"unknown hint shape {shape!r}")
    template, close_it = _TEMPLATES[shape]
    pts = [Vec2.of(anchor.x + x * scale, anchor.y + y * scale) for x, y in template]
    if close_it:
        pts.append(pts[0])
    return HintLine(
        id=hint_id,
        shape=shape,
        style=HintStyle.DASHED.value,
        points=pts,
        target_player=target_player,
        expires_tick=expires_tick,
        color=color,
    )


def _wavy_guide(start: Vec2, end: Vec2, periods: int = 3, amplitude: float = 0.02,
                segments: int = 32) -> list[Vec2]:
    dx = end.x - start.x
    dy = end.y - start.y
    length = math.sqrt(dx * dx + dy * dy)
    if length <= 0.0:
        return [start, end]
    nx = -dy / length
    ny = dx / length
    pts = []
    for k in range(segments + 1):
        t = k / segments
        off = amplitude * math.sin(math.pi * periods * t * 2.0) * math.sin(math.pi * t)
        pts.append(Vec2.of(start.x + dx * t + nx * off, start.y + dy * t + ny * off))
    # quantization can nudge interior points; endpoints must stay exact
    pts[0] = Vec2.of(start.x, start.y)
    pts[-1] = Vec2.of(end.x, end.y)
    return pts


# --- area usage --------------------------------------------------------------

NODE_AREA_WEIGHT = 0.05  # one spot counts like this much line arclength


def quadrant_of(pos: Vec2) -> int:
    """0=top-left, 1=top-right, 2=bottom-left, 3=bottom-right."""
    col = 0 if pos.x < 0.5 else 1
    row = 0 if pos.y >= 0.5 else 1
    return row * 2 + col


def area_usage(scene: SceneState) -> list[float]:
    """Fraction of permanent material (line arclength + spots) per quadrant."""
    weights = [0.0, 0.0, 0.0, 0.0]
    for obj in scene.objects.values():
        if isinstance(obj, Node):
            weights[quadrant_of(obj.pos)] += NODE_AREA_WEIGHT
        elif isinstance(obj, PathLine):
            pts = obj.traversal_points()
            for i in range(1, len(pts)):
                a, b = pts[i - 1], pts[i]
                mid = Vec2((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)
                weights[quadrant_of(mid)] += a.dist(b)
    total = sum(weights)
    if total <= 0.0:
        return [0.0, 0.0, 0.0, 0.0]
    return [w / total for w in weights]
