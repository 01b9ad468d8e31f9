"""Input-side types and mechanics: dwell, thickness, floor, devices.

The sensor client reports hand positions, brush buttons, the eraser, and
floor positions; the engine turns them into scene mutations.  This module
holds the event types and the pure pieces of that translation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .geometry import Vec2
from .rng import Rng
from .scene import ColorRGB, Player

_EPS = 1e-9


class UnknownPlayerError(ValueError):
    """Event references a player slot this session does not have."""


# --- input events ------------------------------------------------------------

@dataclass(frozen=True)
class HandMove:
    player: Player
    pos: Vec2
    screen_distance: float = 1.5  # meters from the front screen


@dataclass(frozen=True)
class BrushButton:
    player: Player
    pressed: bool


@dataclass(frozen=True)
class EraserHeld:
    player: Player
    held: bool


@dataclass(frozen=True)
class FloorMove:
    player: Player
    floor_pos: Vec2


@dataclass(frozen=True)
class TickEvent:
    pass


InputEvent = HandMove | BrushButton | EraserHeld | FloorMove | TickEvent


# --- dwell -------------------------------------------------------------------

@dataclass
class DwellTracker:
    """Creates a spot once the hand stays near one anchor for more than 1 s."""

    player: Player
    anchor: Vec2 | None = None
    elapsed: float = 0.0

    def update(self, pos: Vec2, dt: float, eps_dwell: float,
               threshold_s: float = 1.0) -> bool:
        """Accrue dwell time at pos; True exactly when the threshold is passed.

        Strictly more than threshold_s within eps_dwell of the anchor, so a
        nominal exactly-one-second stay never fires.  The anchoring
        observation starts the clock at zero; the tracker re-anchors after
        firing or after the hand moves away.
        """
        if self.anchor is None or pos.dist(self.anchor) > eps_dwell:
            self.anchor = pos
            self.elapsed = 0.0
            return False
        self.elapsed += dt
        if self.elapsed > threshold_s + _EPS:
            self.anchor = pos
            self.elapsed = 0.0
            return True
        return False

    def reset(self, pos: Vec2 | None = None) -> None:
        self.anchor = pos
        self.elapsed = 0.0


# --- line thickness ----------------------------------------------------------

THICKNESS_NEAR_M = 0.5
THICKNESS_FAR_M = 2.5
THICKNESS_MAX = 0.02
THICKNESS_MIN = 0.004


def stroke_thickness(screen_distance: float,
                     d_near: float = THICKNESS_NEAR_M,
                     d_far: float = THICKNESS_FAR_M,
                     t_max: float = THICKNESS_MAX,
                     t_min: float = THICKNESS_MIN) -> float:
    """Thicker strokes close to the screen, thinner far away; clamped."""
    if screen_distance <= d_near:
        return t_max
    if screen_distance >= d_far:
        return t_min
    frac = (screen_distance - d_near) / (d_far - d_near)
    return t_max + frac * (t_min - t_max)


# --- floor -------------------------------------------------------------------

class EvolutionMode(str, Enum):
    INTERACTABLE = "interactable"
    AUTOMATIC = "automatic"
    DISABLED = "disabled"


@dataclass
class FloorCircle:
    center: Vec2
    radius: float
    visible: bool = False

    def contains(self, pos: Vec2) -> bool:
        return pos.dist(self.center) <= self.radius


@dataclass
class Blob:
    pos: Vec2
    vel: tuple[float, float]
    radius: float


@dataclass
class FloorState:
    """Floor-plane mechanics: background area, evolution spots, blobs."""

    bg_rect: tuple[float, float, float, float]  # x0, y0, x1, y1
    circles: dict[Player, FloorCircle]
    evolution_mode: EvolutionMode = EvolutionMode.INTERACTABLE
    bg_active: bool = False
    blobs: list[Blob] = field(default_factory=list)
    blobs_active: bool = False
    positions: dict[Player, Vec2] = field(default_factory=dict)
    in_bg_area: dict[Player, bool] = field(default_factory=dict)
    in_circle: dict[Player, bool] = field(default_factory=dict)

    def bg_contains(self, pos: Vec2) -> bool:
        x0, y0, x1, y1 = self.bg_rect
        return x0 <= pos.x <= x1 and y0 <= pos.y <= y1


def step_blob(blob: Blob, dt: float) -> None:
    """Advance and reflect off the unit floor; mutates the blob in place."""
    x = blob.pos.x + blob.vel[0] * dt
    y = blob.pos.y + blob.vel[1] * dt
    vx, vy = blob.vel
    if x < 0.0:
        x = -x
        vx = -vx
    elif x > 1.0:
        x = 2.0 - x
        vx = -vx
    if y < 0.0:
        y = -y
        vy = -vy
    elif y > 1.0:
        y = 2.0 - y
        vy = -vy
    blob.pos = Vec2(min(max(x, 0.0), 1.0), min(max(y, 0.0), 1.0))
    blob.vel = (vx, vy)


def spawn_blob(rng: Rng, radius: float, speed: float,
               avoid: list[Vec2], clearance: float) -> Blob:
    """Seeded-random blob away from the given positions (best effort)."""
    pos = Vec2(0.5, 0.5)
    for _ in range(20):
        candidate = Vec2(rng.next_float(), rng.next_float())
        pos = candidate
        if all(candidate.dist(a) > clearance for a in avoid):
            break
    vx = rng.next_float() * 2.0 - 1.0
    vy = rng.next_float() * 2.0 - 1.0
    norm = (vx * vx + vy * vy) ** 0.5
    if norm <= 1e-9:
        vx, vy, norm = 1.0, 0.0, 1.0
    return Blob(pos=pos, vel=(vx / norm * speed, vy / norm * speed), radius=radius)


# --- devices -----------------------------------------------------------------

class DeviceTarget(str, Enum):
    BRUSH_P1 = "brush_P1"
    BRUSH_P2 = "brush_P2"
    AMBIENT = "ambient_lights"


@dataclass(frozen=True)
class DeviceCommand:
    tick: int
    target: DeviceTarget
    action: str  # vibrate | led | ambient
    on: bool | None = None
    color: ColorRGB | None = None
    brightness: float | None = None


def brush_target(player: Player) -> DeviceTarget:
    return DeviceTarget.BRUSH_P1 if player is Player.P1 else DeviceTarget.BRUSH_P2


AMBIENT_RED = ColorRGB(255, 0, 0)
AMBIENT_GREEN = ColorRGB(0, 255, 0)
BRUSH_YELLOW = ColorRGB(255, 210, 0)


def ambient_for(all_inside: bool, tick: int) -> DeviceCommand:
    """Red and bright outside the interaction space, green and dim within."""
    if all_inside:
        return DeviceCommand(tick, DeviceTarget.AMBIENT, "ambient",
                             color=AMBIENT_GREEN, brightness=0.3)
    return DeviceCommand(tick, DeviceTarget.AMBIENT, "ambient",
                         color=AMBIENT_RED, brightness=1.0)
