"""Music layer: quantization, melody attachment, cursor playback, rechord."""

import math
import random

import pytest

from melopaint.chords import parse_chord
from melopaint.composition import (
    NoteSource,
    SilentLineError,
    attach_nodes,
    build_pitch_grid,
    finalize_stroke,
    melody_pan,
    quantize_pitch,
    rechord,
    spawn_cursor,
    tick_cursor,
)
from melopaint.geometry import Vec2
from melopaint.scene import (
    ColorRGB,
    DegenerateStrokeError,
    Instrument,
    Node,
    PathLine,
    Player,
    SceneState,
    TemporaryStroke,
)

INSTRUMENTS = {Player.P1: Instrument.MARIMBA, Player.P2: Instrument.HANDPAN}


def empty_scene():
    return SceneState(
        tick=0,
        current_chord=parse_chord("C"),
        background_color=ColorRGB(10, 10, 10),
        rng_state=0,
    )


def make_node(oid, x, y, pitch=60, owner=Player.P1):
    return Node(id=oid, owner=owner, pos=Vec2.of(x, y),
                color=ColorRGB(200, 0, 0), pitch=pitch)


def make_line(oid, pts, closed=False, melody=None):
    return PathLine(
        id=oid, owner=Player.P1,
        points=[Vec2.of(x, y) for x, y in pts],
        closed=closed, silent=not melody, thickness=0.01,
        color=ColorRGB(200, 0, 0), fill_color=None, melody=list(melody or []),
    )


# --- pitch grid ------------------------------------------------------------------


def test_grid_tones_ascend_and_stay_in_chord():
    grid = build_pitch_grid(parse_chord("C"), octave_span=3, base_midi=48)
    assert grid.tones == (48, 52, 55, 60, 64, 67, 72, 76, 79)
    assert all(b > a for a, b in zip(grid.tones, grid.tones[1:]))
    assert {t % 12 for t in grid.tones} == {0, 4, 7}


def test_quantize_boundaries():
    grid = build_pitch_grid(parse_chord("C"))
    assert quantize_pitch(0.0, grid) == grid.tones[0]
    assert quantize_pitch(1.0, grid) == grid.tones[-1]


def test_quantize_monotone_and_membership():
    grid = build_pitch_grid(parse_chord("C"))
    rng = random.Random(5)
    ys = sorted(rng.random() for _ in range(1000))
    pitches = [quantize_pitch(y, grid) for y in ys]
    assert all(b >= a for a, b in zip(pitches, pitches[1:]))
    assert {p % 12 for p in pitches} <= {0, 4, 7}
    # surjective over a dense sweep
    assert {quantize_pitch(k / 200, grid) for k in range(201)} == set(grid.tones)


def test_pan_is_linear():
    assert melody_pan(0.5) == 0.0
    assert melody_pan(0.0) == -1.0
    assert melody_pan(1.0) == 1.0
    assert abs(melody_pan(0.75) - 0.5) < 1e-12


# --- attachment -------------------------------------------------------------------


def test_node_on_line_attaches_at_its_arclength():
    line = make_line(1, [(0.0, 0.5), (1.0, 0.5)])
    node = make_node(2, 0.25, 0.5)
    attached = attach_nodes(line, [node], r_prox=0.05)
    assert len(attached) == 1
    nid, s = attached[0]
    assert nid == 2
    assert abs(s - 0.25) < 1e-9


def test_node_outside_radius_not_attached():
    line = make_line(1, [(0.0, 0.5), (1.0, 0.5)])
    node = make_node(2, 0.5, 0.6)  # distance 0.1 = 2 * r_prox
    assert attach_nodes(line, [node], r_prox=0.05) == []


def test_attachment_matches_brute_force_oracle():
    rng = random.Random(21)
    for _ in range(30):
        pts = [(rng.random(), rng.random()) for _ in range(rng.randrange(2, 6))]
        line = make_line(1, pts, closed=rng.random() < 0.3)
        nodes = [make_node(i + 10, rng.random(), rng.random()) for i in range(10)]
        got = attach_nodes(line, nodes, r_prox=0.08)

        # oracle: dense arclength sampling for distance and nearest position
        tp = line.traversal_points()
        seg = []
        acc = 0.0
        for i in range(1, len(tp)):
            seg.append((acc, tp[i - 1], tp[i]))
            acc += tp[i - 1].dist(tp[i])
        expect = []
        for node in nodes:
            best_d, best_s = float("inf"), 0.0
            for s0, a, b in seg:
                length = a.dist(b)
                for k in range(201):
                    t = k / 200
                    px, py = a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t
                    d = math.dist((node.pos.x, node.pos.y), (px, py))
                    if d < best_d:
                        best_d, best_s = d, s0 + length * t
            if best_d <= 0.08:
                expect.append((best_s, node.id))
        expect.sort()
        assert [nid for nid, _ in got] == [nid for _, nid in expect]
        # arclength agreement is bounded by the oracle's sampling step
        for (nid_a, s_a), (s_b, nid_b) in zip(got, expect):
            assert nid_a == nid_b
            assert abs(s_a - s_b) < 5e-3


# --- cursors ---------------------------------------------------------------------


def run_cursor_to_exhaustion(scene, cursor, line, attachments, dt=1 / 30):
    events = []
    ticks = 0
    while cursor is not None:
        ticks += 1
        assert ticks < 100_000, "cursor never expired"
        cursor, notes = tick_cursor(scene, cursor, line, attachments, dt,
                                    INSTRUMENTS, tick=ticks)
        events.extend(notes)
    return events


def test_silent_line_refuses_cursor():
    line = make_line(1, [(0.1, 0.5), (0.9, 0.5)])
    with pytest.raises(SilentLineError):
        spawn_cursor(line, Vec2.of(0.1, 0.5), Player.P1, 7)


def test_spawn_at_endpoint_and_midpoint():
    line = make_line(1, [(0.1, 0.5), (0.9, 0.5)], melody=[5])
    c0 = spawn_cursor(line, Vec2.of(0.1, 0.5), Player.P1, 7)
    assert c0.arclength_pos == 0.0
    c1 = spawn_cursor(line, Vec2.of(0.9, 0.5), Player.P1, 8)
    assert abs(c1.arclength_pos - line.length()) < 1e-9

    square = make_line(2, [(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)],
                       closed=True, melody=[5])
    # nearest point to the far corner midpoint: half the perimeter away
    cm = spawn_cursor(square, Vec2.of(0.8, 0.8), Player.P1, 9)
    assert abs(cm.arclength_pos - square.length() / 2) < 1e-9


def test_open_line_plays_each_node_once_per_hit():
    scene = empty_scene()
    line = make_line(1, [(0.1, 0.5), (0.9, 0.5)])
    nodes = [make_node(10, 0.2, 0.5), make_node(11, 0.5, 0.5), make_node(12, 0.7, 0.5)]
    for n in nodes:
        scene.objects[n.id] = n
    attachments = attach_nodes(line, nodes, 0.05)
    line.melody = [nid for nid, _ in attachments]
    line.silent = False
    scene.objects[1] = line

    for hit in (Vec2.of(0.1, 0.5), Vec2.of(0.55, 0.5), Vec2.of(0.9, 0.5)):
        cursor = spawn_cursor(line, hit, Player.P1, 99)
        events = run_cursor_to_exhaustion(scene, cursor, line, attachments)
        assert len(events) == 3
        assert sorted(ev.pitch for ev in events) == sorted(n.pitch for n in nodes)
        assert all(ev.source is NoteSource.CURSOR_PASS for ev in events)


def test_closed_line_plays_loops_with_decreasing_velocity():
    scene = empty_scene()
    line = make_line(1, [(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)], closed=True)
    node = make_node(10, 0.5, 0.2)
    scene.objects[10] = node
    attachments = attach_nodes(line, [node], 0.05)
    line.melody = [10]
    line.silent = False
    scene.objects[1] = line

    cursor = spawn_cursor(line, Vec2.of(0.2, 0.2), Player.P1, 99, loop_count=3)
    events = run_cursor_to_exhaustion(scene, cursor, line, attachments)
    assert len(events) == 3
    vels = [ev.velocity for ev in events]
    assert vels[0] > vels[1] > vels[2]
    # gain halves by (1 - 1/3) per wrap: 100, 67, 44
    assert vels == [100, 67, 44]


def test_closed_line_counts_from_any_hit_point():
    scene = empty_scene()
    line = make_line(1, [(0.2, 0.2), (0.8, 0.2), (0.8, 0.8), (0.2, 0.8)], closed=True)
    nodes = [make_node(10, 0.5, 0.2), make_node(11, 0.8, 0.5)]
    for n in nodes:
        scene.objects[n.id] = n
    attachments = attach_nodes(line, nodes, 0.05)
    line.melody = [nid for nid, _ in attachments]
    line.silent = False
    scene.objects[1] = line

    rng = random.Random(6)
    for _ in range(5):
        hit = Vec2.of(rng.random(), rng.random())
        cursor = spawn_cursor(line, hit, Player.P1, 99, loop_count=3)
        events = run_cursor_to_exhaustion(scene, cursor, line, attachments)
        assert len(events) == 3 * 2
        vels = [ev.velocity for ev in events]
        assert all(b <= a for a, b in zip(vels, vels[1:]))


def test_tiny_dt_crosses_nothing():
    scene = empty_scene()
    line = make_line(1, [(0.1, 0.5), (0.9, 0.5)])
    node = make_node(10, 0.5, 0.5)
    scene.objects[10] = node
    attachments = attach_nodes(line, [node], 0.05)
    line.melody = [10]
    line.silent = False
    scene.objects[1] = line
    cursor = spawn_cursor(line, Vec2.of(0.1, 0.5), Player.P1, 99)
    cursor, events = tick_cursor(scene, cursor, line, attachments, 1e-4,
                                 INSTRUMENTS, tick=1)
    assert events == []
    assert cursor is not None


# --- rechord ---------------------------------------------------------------------


def test_rechord_moves_every_node_into_new_chord():
    scene = empty_scene()
    rng = random.Random(9)
    grid = build_pitch_grid(parse_chord("C"))
    for i in range(20):
        y = rng.random()
        scene.objects[i + 1] = make_node(i + 1, rng.random(), y,
                                         pitch=quantize_pitch(y, grid))
    rechord(scene, parse_chord("G"))
    assert scene.current_chord == parse_chord("G")
    for node in scene.nodes():
        assert node.pitch % 12 in {7, 11, 2}


def test_rechord_same_chord_is_identity():
    scene = empty_scene()
    grid = build_pitch_grid(parse_chord("C"))
    scene.objects[1] = make_node(1, 0.3, 0.42, pitch=quantize_pitch(0.42, grid))
    before = scene.objects[1].pitch
    rechord(scene, parse_chord("C"))
    assert scene.objects[1].pitch == before


def test_rechord_keeps_rank_at_extremes():
    scene = empty_scene()
    grid = build_pitch_grid(parse_chord("C"))
    scene.objects[1] = make_node(1, 0.5, 0.0, pitch=quantize_pitch(0.0, grid))
    for name in ("G", "Am", "F", "Dm7"):
        g = rechord(scene, parse_chord(name))
        assert scene.objects[1].pitch == g.tones[0]


# --- finalize_stroke --------------------------------------------------------------


def stroke_of(points, owner=Player.P1):
    return TemporaryStroke(id=50, owner=owner,
                           points=[Vec2.of(x, y) for x, y in points],
                           created_tick=0)


def test_square_stroke_closes_and_fills_with_nearby_node():
    scene = empty_scene()
    scene.objects[9] = make_node(9, 0.42, 0.42)
    stroke = stroke_of([(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6), (0.41, 0.4)])
    line = finalize_stroke(scene, Player.P1, stroke, [9], line_id=60,
                           color=ColorRGB(200, 0, 0), thickness=0.01)
    assert line.closed is True
    assert line.fill_color is not None
    assert line.silent is False
    assert line.melody == [9]


def test_open_stroke_with_no_nodes_is_silent():
    scene = empty_scene()
    stroke = stroke_of([(0.1, 0.1), (0.5, 0.5)])
    line = finalize_stroke(scene, Player.P1, stroke, [], line_id=60,
                           color=ColorRGB(200, 0, 0), thickness=0.01)
    assert line.closed is False
    assert line.fill_color is None
    assert line.silent is True
    assert line.melody == []


def test_short_stroke_is_degenerate():
    scene = empty_scene()
    stroke = stroke_of([(0.5, 0.5), (0.51, 0.5)])  # arclength 0.01 = len_min/2
    with pytest.raises(DegenerateStrokeError):
        finalize_stroke(scene, Player.P1, stroke, [], line_id=60,
                        color=ColorRGB(200, 0, 0), thickness=0.01)
    assert 60 not in scene.objects


def test_finalize_records_crossings_with_other_player():
    scene = empty_scene()
    other = make_line(1, [(0.5, 0.0), (0.5, 1.0)])
    other.owner = Player.P2
    other.color = ColorRGB(0, 0, 255)
    scene.objects[1] = other
    stroke = stroke_of([(0.2, 0.5), (0.8, 0.5)])
    line = finalize_stroke(scene, Player.P1, stroke, [], line_id=60,
                           color=ColorRGB(255, 0, 0), thickness=0.01)
    assert len(scene.crossings) == 1
    assert scene.crossings[0].blended == ColorRGB(128, 0, 128)
    assert scene.crossings[0].line_a == line.id
