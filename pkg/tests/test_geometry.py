"""Geometry oracles: quantization, distances, resampling, intersections."""

import math
import random

from melopaint.geometry import (
    QUANTUM_DENOM,
    Vec2,
    cumulative_lengths,
    nearest_on_polyline,
    point_at_arclength,
    point_segment_nearest,
    polyline_intersections,
    polyline_length,
    quantize,
    resample,
    segments_intersect,
    spread_radius,
)


def test_quantize_clamps_and_snaps():
    assert quantize(-0.5) == 0.0
    assert quantize(1.5) == 1.0
    assert quantize(0.5) == 0.5
    v = quantize(0.123456)
    assert v == round(v * QUANTUM_DENOM) / QUANTUM_DENOM
    # half-up at the grid midpoint
    assert quantize(1.5 / QUANTUM_DENOM) == 2.0 / QUANTUM_DENOM


def test_quantize_is_idempotent():
    rng = random.Random(11)
    for _ in range(500):
        v = quantize(rng.random())
        assert quantize(v) == v


def test_vec2_of_quantizes_both_components():
    p = Vec2.of(0.1000001, 2.5)
    assert p.y == 1.0
    assert p.x == quantize(0.1000001)


def test_point_segment_nearest_matches_dense_sampling_oracle():
    rng = random.Random(7)
    for _ in range(200):
        p = Vec2(rng.random(), rng.random())
        a = Vec2(rng.random(), rng.random())
        b = Vec2(rng.random(), rng.random())
        d, _ = point_segment_nearest(p, a, b)
        # oracle: dense sampling along the segment
        best = min(
            math.dist((p.x, p.y),
                      (a.x + (b.x - a.x) * t / 1000, a.y + (b.y - a.y) * t / 1000))
            for t in range(1001)
        )
        assert abs(d - best) < 2e-3


def test_nearest_on_polyline_arclength():
    pts = [Vec2(0.0, 0.0), Vec2(1.0, 0.0)]
    d, s = nearest_on_polyline(Vec2(0.25, 0.1), pts)
    assert abs(d - 0.1) < 1e-12
    assert abs(s - 0.25) < 1e-12


def test_polyline_length_and_cumulative():
    pts = [Vec2(0, 0), Vec2(0.3, 0), Vec2(0.3, 0.4)]
    assert abs(polyline_length(pts) - 0.7) < 1e-12
    assert cumulative_lengths(pts) == [0.0, 0.3, 0.7]


def test_point_at_arclength_endpoints_and_midpoint():
    pts = [Vec2(0, 0), Vec2(1, 0)]
    assert point_at_arclength(pts, 0.0) == pts[0]
    assert point_at_arclength(pts, 5.0) == pts[-1]
    mid = point_at_arclength(pts, 0.5)
    assert abs(mid.x - 0.5) < 1e-12


def test_segments_intersect_cross():
    p = segments_intersect(Vec2(0, 0), Vec2(1, 1), Vec2(0, 1), Vec2(1, 0))
    assert p is not None
    assert abs(p.x - 0.5) < 1e-12 and abs(p.y - 0.5) < 1e-12


def test_segments_parallel_no_intersection():
    assert segments_intersect(Vec2(0, 0), Vec2(1, 0), Vec2(0, 0.1), Vec2(1, 0.1)) is None


def test_polyline_intersections_counts():
    zig = [Vec2(0.0, 0.5), Vec2(1.0, 0.5)]
    wave = [Vec2(0.1, 0.0), Vec2(0.3, 1.0), Vec2(0.5, 0.0), Vec2(0.7, 1.0)]
    hits = polyline_intersections(wave, zig)
    assert len(hits) == 3


def test_resample_preserves_endpoints_and_spacing():
    pts = [Vec2(0, 0), Vec2(0.5, 0), Vec2(0.5, 0.5)]
    out = resample(pts, 11)
    assert len(out) == 11
    assert out[0] == pts[0]
    assert abs(out[-1].x - 0.5) < 1e-9 and abs(out[-1].y - 0.5) < 1e-9
    gaps = [out[i].dist(out[i + 1]) for i in range(10)]
    assert max(gaps) - min(gaps) < 1e-9


def test_spread_radius_simple():
    pts = [Vec2(0.4, 0.5), Vec2(0.6, 0.5)]
    assert abs(spread_radius(pts) - 0.1) < 1e-12
