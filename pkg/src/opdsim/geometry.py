"""Disk and polygon primitives.

Disks are open: a segment touching a disk only at its boundary does not
intersect it. Polygon membership is closed (boundary points count as inside).
"""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")


def min_distance_point_segment(p, a, b):
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - ax, py - ay)
    s = ((px - ax) * dx + (py - ay) * dy) / den
    s = min(1.0, max(0.0, s))
    return math.hypot(px - (ax + s * dx), py - (ay + s * dy))


def segment_intersects_disk(a, b, disk):
    return min_distance_point_segment(disk.center, a, b) < disk.radius


def segments_disk_distance(a, b, center):
    """Vectorised point-to-segment distance for arrays of segments ``a``-``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    d = b - a
    den = np.einsum("ij,ij->i", d, d)
    num = np.einsum("ij,ij->i", c - a, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    s = np.clip(s, 0.0, 1.0)
    foot = a + s[:, None] * d
    return np.hypot(c[0] - foot[:, 0], c[1] - foot[:, 1])


def _orientation(vertices):
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _segments_cross(p1, p2, p3, p4):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return (v > 0) - (v < 0)

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    return ((o1 == 0 and on_seg(p1, p2, p3)) or (o2 == 0 and on_seg(p1, p2, p4))
            or (o3 == 0 and on_seg(p3, p4, p1)) or (o4 == 0 and on_seg(p3, p4, p2)))


class Polygon:
    """Simple polygon; vertices are stored counter-clockwise."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("a polygon needs at least three 2D vertices")
        self._check_simple(v.tolist())
        area = _orientation(v)
        if area == 0:
            raise ValueError("degenerate polygon with zero area")
        self.clockwise_input = area < 0
        self.vertices = v[::-1].copy() if area < 0 else v
        self.vertices.setflags(write=False)

    @staticmethod
    def _check_simple(v):
        n = len(v)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                    raise ValueError(f"polygon edges {i} and {j} intersect")

    @property
    def area(self):
        return _orientation(self.vertices)

    @property
    def bbox(self):
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    def contains(self, p):
        return point_in_polygon(p, self)

    def __repr__(self):
        return f"Polygon({self.vertices.tolist()})"


def _on_boundary(px, py, verts):
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross == 0 and min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by):
            return True
    return False


def point_in_polygon(p, poly):
    """Ray casting to +x. Boundary points are inside.

    Vertices on the ray are handled by the half-open rule (an edge counts
    when exactly one endpoint lies strictly above the ray), which amounts to
    nudging the ray infinitesimally upward.
    """
    px, py = float(p[0]), float(p[1])
    verts = poly.vertices.tolist()
    if _on_boundary(px, py, verts):
        return True
    inside = False
    n = len(verts)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if x_cross > px:
                inside = not inside
    return inside


def points_in_polygon(points, poly):
    """Vectorised :func:`point_in_polygon` over an (n, 2) array."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    verts = poly.vertices
    a = verts
    b = np.roll(verts, -1, axis=0)
    inside = np.zeros(len(pts), dtype=bool)
    boundary = np.zeros(len(pts), dtype=bool)
    for (ax, ay), (bx, by) in zip(a.tolist(), b.tolist()):
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        boundary |= ((cross == 0) & (np.minimum(ax, bx) <= px) & (px <= np.maximum(ax, bx))
                     & (np.minimum(ay, by) <= py) & (py <= np.maximum(ay, by)))
        straddle = (ay > py) != (by > py)
        if by != ay:
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            inside ^= straddle & (x_cross > px)
    return inside | boundary

