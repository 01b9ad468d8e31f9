"""The music layer: pitch grids, melody attachment, cursors, note events.

Three rules tie paint to sound.  Proximity: spots near a line join its
melody in arclength order.  Harmonization: the scene carries one chord and
every pitched event snaps to its tones.  Rendering: a spot's height picks
the tone, its horizontal position the stereo pan.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .chords import ChordSymbol
from .geometry import Vec2, nearest_on_polyline, polyline_length
from .scene import (
    DegenerateStrokeError,
    Cursor,
    Instrument,
    Node,
    PathLine,
    Player,
    SceneState,
    TemporaryStroke,
    blend_crossings,
)

DEFAULT_OCTAVE_SPAN = 3
DEFAULT_BASE_MIDI = 48


class NoteSource(str, Enum):
    NODE_TOUCH = "node_touch"
    CURSOR_PASS = "cursor_pass"
    EXPLORE = "explore"
    BLOB = "blob"
    BACKGROUND = "background"


@dataclass(frozen=True)
class NoteEvent:
    tick: int
    player: Player | None
    instrument: Instrument | None
    pitch: int
    velocity: int
    pan: float
    source: NoteSource


class SilentLineError(ValueError):
    """A cursor cannot play a line with an empty melody."""


@dataclass(frozen=True)
class PitchGrid:
    """Chord tones replicated across octaves, ascending."""

    chord: ChordSymbol
    octave_span: int
    base_midi: int
    tones: tuple[int, ...]


def build_pitch_grid(
    chord: ChordSymbol,
    octave_span: int = DEFAULT_OCTAVE_SPAN,
    base_midi: int = DEFAULT_BASE_MIDI,
) -> PitchGrid:
    if octave_span < 1:
        raise ValueError("octave_span must be >= 1")
    pcs = sorted(set(chord.pitch_classes()))
    tones = tuple(
        base_midi + 12 * octave + pc for octave in range(octave_span) for pc in pcs
    )
    return PitchGrid(chord, octave_span, base_midi, tones)


def quantize_pitch(y: float, grid: PitchGrid) -> int:
    """Map height in [0,1] to the nearest grid tone; monotone in y."""
    if y < 0.0:
        y = 0.0
    elif y > 1.0:
        y = 1.0
    n = len(grid.tones)
    idx = int(y * (n - 1) + 0.5)
    return grid.tones[idx]


def melody_pan(x: float) -> float:
    """Linear stereo placement: x=0 hard left, x=1 hard right."""
    if x < 0.0:
        x = 0.0
    elif x > 1.0:
        x = 1.0
    return 2.0 * x - 1.0


def attach_nodes(
    line: PathLine, nodes: list[Node], r_prox: float
) -> list[tuple[int, float]]:
    """(node id, attachment arclength) for nodes within r_prox of the line.

    Ordered by arclength of the nearest point, node id breaking ties, so
    melodies read left-to-right along the drawn timeline.
    """
    pts = line.traversal_points()
    attached: list[tuple[float, int]] = []
    for node in nodes:
        d, s = nearest_on_polyline(node.pos, pts)
        if d <= r_prox:
            attached.append((s, node.id))
    attached.sort()
    return [(nid, s) for s, nid in attached]


def refresh_melody(line: PathLine, nodes: list[Node], r_prox: float) -> list[tuple[int, float]]:
    """Recompute a line's melody after nodes appear or vanish nearby."""
    attachments = attach_nodes(line, nodes, r_prox)
    line.melody = [nid for nid, _ in attachments]
    line.silent = not line.melody
    return attachments


def finalize_stroke(
    scene: SceneState,
    owner: Player,
    stroke: TemporaryStroke,
    dwell_nodes: list[int] = (),
    *,
    line_id: int,
    color,
    thickness: float,
    eps_close: float = 0.03,
    len_min: float = 0.02,
    r_prox: float = 0.05,
    fill_opacity: float = 0.4,
) -> PathLine:
    """Turn a finished brush stroke into a permanent line.

    Closes the shape when the ends meet within eps_close, fills closed
    shapes with the owner's color over the background, attaches nearby
    spots as the melody, and records crossings with the other player's
    lines.  dwell_nodes lists spots made during this gesture; they are
    already in the scene, so the proximity rule picks them up like any
    other node.

    Raises DegenerateStrokeError (and leaves no line) below len_min.
    """
    pts = stroke.points
    if len(pts) < 2:
        raise DegenerateStrokeError("stroke needs at least 2 points")
    arclen = polyline_length(pts)
    if arclen < len_min:
        raise DegenerateStrokeError(f"stroke arclength {arclen:.4f} < {len_min}")
    closed = pts[0].dist(pts[-1]) <= eps_close
    fill = color.over(scene.background_color, fill_opacity) if closed else None
    line = PathLine(
        id=line_id,
        owner=owner,
        points=list(pts),
        closed=closed,
        silent=True,
        thickness=thickness,
        color=color,
        fill_color=fill,
        melody=[],
    )
    refresh_melody(line, scene.nodes(), r_prox)
    scene.objects[line.id] = line
    scene.crossings.extend(blend_crossings(scene, line))
    return line


def spawn_cursor(
    line: PathLine,
    hit_pos: Vec2,
    player: Player,
    cursor_id: int,
    speed: float = 0.25,
    loop_count: int = 3,
) -> Cursor:
    """Place a cursor at the line point nearest the touch.

    Open lines get one full traversal; closed lines loop loop_count times
    with the gain fading each wrap.
    """
    if not line.melody:
        raise SilentLineError(f"line {line.id} has no melody")
    length = line.length()
    _, s = nearest_on_polyline(hit_pos, line.traversal_points())
    if line.closed:
        loops = loop_count
        budget = length * loop_count
    else:
        loops = 0
        budget = length
    return Cursor(
        id=cursor_id,
        line_id=line.id,
        player=player,
        arclength_pos=s,
        speed=speed,
        loops_remaining=loops,
        gain=1.0,
        origin=s,
        traveled=0.0,
        budget=budget,
    )


def tick_cursor(
    scene: SceneState,
    cursor: Cursor,
    line: PathLine,
    attachments: list[tuple[int, float]],
    dt: float,
    instruments: dict[Player, Instrument],
    tick: int,
    base_velocity: int = 100,
) -> tuple[Cursor | None, list[NoteEvent]]:
    """Advance one cursor by speed*dt, emitting a note per melody node crossed.

    The crossing window is half-open [traveled, traveled+step), so a node is
    never sounded twice at a boundary.  Wrapping a closed line multiplies
    the gain by (1 - 1/loop_count); the cursor expires once it has traveled
    its whole budget.
    """
    length = line.length()
    if length <= 0.0 or not attachments:
        return None, []
    spawn_s = cursor.origin % length
    t0 = cursor.traveled
    t1 = min(t0 + cursor.speed * dt, cursor.budget)

    initial_loops = int(round(cursor.budget / length))
    decay = (1.0 - 1.0 / initial_loops) if (line.closed and initial_loops > 0) else 1.0

    # (travel time, order, payload): wraps sort before node crossings at ties
    marks: list[tuple[float, int, int | None]] = []
    if line.closed:
        first_wrap = (length - spawn_s) % length
        if first_wrap == 0.0:
            first_wrap = length
        w = first_wrap
        while w < t1:
            if w >= t0:
                marks.append((w, 0, None))
            w += length
    for nid, a in attachments:
        base = (a - spawn_s) % length
        t_cross = base
        while t_cross < t0:
            t_cross += length
        while t_cross < t1:
            marks.append((t_cross, 1, nid))
            t_cross += length
    marks.sort(key=lambda m: (m[0], m[1], m[2] if m[2] is not None else -1))

    events: list[NoteEvent] = []
    gain = cursor.gain
    loops = cursor.loops_remaining
    for _, kind, nid in marks:
        if kind == 0:
            gain *= decay
            if loops > 0:
                loops -= 1
        else:
            node = scene.objects.get(nid)
            if not isinstance(node, Node):
                continue
            vel = int(base_velocity * gain + 0.5)
            events.append(
                NoteEvent(
                    tick=tick,
                    player=node.owner,
                    instrument=instruments.get(node.owner),
                    pitch=node.pitch,
                    velocity=vel,
                    pan=melody_pan(node.pos.x),
                    source=NoteSource.CURSOR_PASS,
                )
            )
    cursor.gain = gain
    cursor.loops_remaining = loops
    cursor.traveled = t1
    cursor.arclength_pos = (spawn_s + t1) % length
    if t1 >= cursor.budget:
        return None, events
    return cursor, events


def rechord(
    scene: SceneState,
    new_chord: ChordSymbol,
    octave_span: int = DEFAULT_OCTAVE_SPAN,
    base_midi: int = DEFAULT_BASE_MIDI,
) -> PitchGrid:
    """Switch the scene chord and re-quantize every spot onto the new grid."""
    scene.current_chord = new_chord
    grid = build_pitch_grid(new_chord, octave_span, base_midi)
    for node in scene.nodes():
        node.pitch = quantize_pitch(node.pos.y, grid)
    return grid
