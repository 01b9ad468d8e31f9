"""Canvas geometry: normalized coordinates, quantization, and polyline math.

All positions live on a [0,1] x [0,1] canvas (x left to right, y bottom to
top) and are quantized to a fixed grid on ingestion so that hashing a scene
is platform independent.  Everything here is plain float arithmetic on
purpose: no numpy, no libm beyond sqrt, so replays are bit-stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# 1/4096 canvas units: fine enough to be invisible, coarse enough to swallow
# last-bit float differences between platforms.
QUANTUM_DENOM = 4096


def quantize(v: float) -> float:
    """Clamp to [0,1] and snap to the 1/4096 grid (round half up)."""
    if v != v:  # NaN guard
        raise ValueError("coordinate is NaN")
    if v < 0.0:
        v = 0.0
    elif v > 1.0:
        v = 1.0
    return math.floor(v * QUANTUM_DENOM + 0.5) / QUANTUM_DENOM


@dataclass(frozen=True)
class Vec2:
    """A point on the normalized canvas. Construct via Vec2.of() to quantize."""

    x: float
    y: float

    @staticmethod
    def of(x: float, y: float) -> "Vec2":
        return Vec2(quantize(x), quantize(y))

    def dist(self, other: "Vec2") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return math.sqrt(dx * dx + dy * dy)


def dist(a: Vec2, b: Vec2) -> float:
    return a.dist(b)


def polyline_length(points: list[Vec2]) -> float:
    total = 0.0
    for i in range(1, len(points)):
        total += points[i - 1].dist(points[i])
    return total


def cumulative_lengths(points: list[Vec2]) -> list[float]:
    """Arclength at each vertex; starts at 0.0."""
    acc = [0.0]
    for i in range(1, len(points)):
        acc.append(acc[-1] + points[i - 1].dist(points[i]))
    return acc


def point_at_arclength(points: list[Vec2], s: float) -> Vec2:
    """Interpolated (unquantized) point at arclength s along the polyline."""
    cums = cumulative_lengths(points)
    total = cums[-1]
    if total <= 0.0:
        return points[0]
    if s <= 0.0:
        return points[0]
    if s >= total:
        return points[-1]
    for i in range(1, len(points)):
        if cums[i] >= s:
            seg = cums[i] - cums[i - 1]
            t = 0.0 if seg <= 0.0 else (s - cums[i - 1]) / seg
            a, b = points[i - 1], points[i]
            return Vec2(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
    return points[-1]


def point_segment_nearest(p: Vec2, a: Vec2, b: Vec2) -> tuple[float, float]:
    """(distance, t) of the nearest point on segment ab; t in [0,1] along ab."""
    abx = b.x - a.x
    aby = b.y - a.y
    seg_sq = abx * abx + aby * aby
    if seg_sq <= 0.0:
        return p.dist(a), 0.0
    t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / seg_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    nx = a.x + abx * t
    ny = a.y + aby * t
    dx = p.x - nx
    dy = p.y - ny
    return math.sqrt(dx * dx + dy * dy), t


def nearest_on_polyline(p: Vec2, points: list[Vec2]) -> tuple[float, float]:
    """(min distance, arclength of nearest point) over all segments.

    Ties pick the earliest arclength, which keeps results deterministic.
    """
    best_d = float("inf")
    best_s = 0.0
    acc = 0.0
    if len(points) == 1:
        return p.dist(points[0]), 0.0
    for i in range(1, len(points)):
        a, b = points[i - 1], points[i]
        seg_len = a.dist(b)
        d, t = point_segment_nearest(p, a, b)
        if d < best_d - 1e-15:
            best_d = d
            best_s = acc + seg_len * t
        acc += seg_len
    return best_d, best_s


def segments_intersect(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> Vec2 | None:
    """Proper intersection point of two segments, or None.

    Collinear overlaps return None: overlapping trails are not a crossing.
    """
    d1x = a2.x - a1.x
    d1y = a2.y - a1.y
    d2x = b2.x - b1.x
    d2y = b2.y - b1.y
    denom = d1x * d2y - d1y * d2x
    if denom == 0.0:
        return None
    ex = b1.x - a1.x
    ey = b1.y - a1.y
    t = (ex * d2y - ey * d2x) / denom
    u = (ex * d1y - ey * d1x) / denom
    if t < 0.0 or t > 1.0 or u < 0.0 or u > 1.0:
        return None
    return Vec2(a1.x + d1x * t, a1.y + d1y * t)


def polyline_intersections(pa: list[Vec2], pb: list[Vec2]) -> list[Vec2]:
    """All pairwise segment intersections of two polylines, in traversal order."""
    hits: list[Vec2] = []
    for i in range(1, len(pa)):
        for j in range(1, len(pb)):
            p = segments_intersect(pa[i - 1], pa[i], pb[j - 1], pb[j])
            if p is not None:
                hits.append(p)
    return hits


def resample(points: list[Vec2], count: int) -> list[Vec2]:
    """Resample to `count` points equally spaced by arclength (endpoints kept)."""
    if count < 2:
        raise ValueError("resample needs count >= 2")
    cums = cumulative_lengths(points)
    total = cums[-1]
    if total <= 0.0:
        raise ValueError("cannot resample a zero-length polyline")
    out: list[Vec2] = []
    seg = 1
    for k in range(count):
        target = total * k / (count - 1)
        while seg < len(points) - 1 and cums[seg] < target:
            seg += 1
        span = cums[seg] - cums[seg - 1]
        t = 0.0 if span <= 0.0 else (target - cums[seg - 1]) / span
        a, b = points[seg - 1], points[seg]
        out.append(Vec2(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t))
    return out


def centroid(points: list[Vec2]) -> tuple[float, float]:
    n = len(points)
    sx = 0.0
    sy = 0.0
    for p in points:
        sx += p.x
        sy += p.y
    return sx / n, sy / n


def spread_radius(points: list[Vec2]) -> float:
    """Radius of the centroid-centered circle covering all points."""
    cx, cy = centroid(points)
    worst = 0.0
    for p in points:
        dx = p.x - cx
        dy = p.y - cy
        d = math.sqrt(dx * dx + dy * dy)
        if d > worst:
            worst = d
    return worst
