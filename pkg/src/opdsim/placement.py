"""The 19 obstacle sampling windows and uniform obstacle placement."""

from dataclasses import dataclass

import numpy as np

from .geometry import Polygon, points_in_polygon
from .pointproc import PointPattern, Window, write_pattern

OBSTACLE_COUNTS = (20, 30, 40, 50, 60)

WINDOW_CODES = (
    ("P",)
    + tuple(f"L{y}" for y in range(90, 10, -10))
    + tuple(f"V{y}" for y in range(90, 40, -10))
    + tuple(f"W{y}" for y in range(90, 40, -10))
)


def _corners(code):
    form, top = code[0], code[1:]
    if form == "P" and top == "":
        return [(10, 90), (90, 90), (90, 10), (10, 10)]
    y = int(top)
    if form == "L":
        return [(10, y), (90, y), (90, y - 10), (10, y - 10)]
    if form == "V":
        return [(10, y), (50, y - 30), (90, y), (90, y - 10), (50, y - 40), (10, y - 10)]
    if form == "W":
        return [(10, y), (30, y - 30), (50, y), (70, y - 30), (90, y),
                (90, y - 10), (70, y - 40), (50, y - 10), (30, y - 40), (10, y - 10)]
    raise KeyError(code)


@dataclass(frozen=True)
class ObstacleWindow:
    code: str
    polygon: Polygon
    index: int

    @property
    def form(self):
        return self.code[0]

    @property
    def corners(self):
        """Corners as listed (clockwise from the top-left corner)."""
        return [tuple(c) for c in _corners(self.code)]


def make_window(code):
    if code not in WINDOW_CODES:
        raise ValueError(f"unknown obstacle window {code!r}; expected one of {', '.join(WINDOW_CODES)}")
    return ObstacleWindow(code, Polygon(_corners(code)), WINDOW_CODES.index(code) + 1)


def all_windows():
    return [make_window(c) for c in WINDOW_CODES]


@dataclass(frozen=True)
class PlacementSpec:
    window: ObstacleWindow
    n_obstacles: int

    def __post_init__(self):
        if self.n_obstacles < 1:
            raise ValueError("n_obstacles must be >= 1")

    @property
    def label(self):
        return f"{self.window.code}:{self.n_obstacles}"


def sample_in_polygon(polygon, n, rng, batch=None):
    """``n`` i.i.d. uniform points in ``polygon`` by rejection from its bounding box."""
    x_lo, x_hi, y_lo, y_hi = polygon.bbox
    box = Window(x_lo, x_hi, y_lo, y_hi)
    out = []
    need = n
    while need > 0:
        m = batch or max(16, 2 * need)
        cand = box.uniform(rng, m)
        cand = cand[points_in_polygon(cand, polygon)]
        out.append(cand[:need])
        need -= len(out[-1])
    return np.concatenate(out) if out else np.zeros((0, 2))


def sample_obstacles(spec, rng):
    pts = sample_in_polygon(spec.window.polygon, spec.n_obstacles, rng)
    x_lo, x_hi, y_lo, y_hi = spec.window.polygon.bbox
    return PointPattern(pts, Window(x_lo, x_hi, y_lo, y_hi))


def write_obstacles(pattern, spec, path):
    write_pattern(pattern, path, comments=[f"obstacle_window {spec.window.code}", f"n_obstacles {spec.n_obstacles}"])
