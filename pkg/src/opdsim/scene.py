"""Obstacle scenes: marked disks, hidden truths, disambiguation state, file I/O."""

from dataclasses import dataclass, field
from enum import Enum
import copy
import csv
import io
import math
from pathlib import Path

import numpy as np

from .lattice import LatticeSpec

DEFAULT_RADIUS = 4.5
DEFAULT_COST = 5.0
MARK_FLOOR = 1e-9
MARK_CEIL = 1.0 - 1e-9


class Truth(str, Enum):
    OBSTACLE = "obstacle"
    CLUTTER = "clutter"


class State(str, Enum):
    AMBIGUOUS = "ambiguous"
    KNOWN_CLUTTER = "known_clutter"
    KNOWN_OBSTACLE = "known_obstacle"


class SceneError(ValueError):
    """Malformed scene data; ``line`` is the 1-based file line when known."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class DisambiguationError(RuntimeError):
    pass


@dataclass
class SceneDisk:
    id: int
    center: tuple
    mark: float
    truth: Truth
    radius: float = DEFAULT_RADIUS
    state: State = State.AMBIGUOUS

    def __post_init__(self):
        self.truth = Truth(self.truth)
        self.state = State(self.state)
        self.center = (float(self.center[0]), float(self.center[1]))
        if not (0.0 < self.mark <= 1.0):
            raise SceneError(f"disk {self.id}: mark {self.mark} outside (0, 1]")
        if not self.radius > 0:
            raise SceneError(f"disk {self.id}: radius must be positive")
        if self.state is State.KNOWN_CLUTTER and self.truth is not Truth.CLUTTER:
            raise SceneError(f"disk {self.id}: state {self.state.value} contradicts truth")
        if self.state is State.KNOWN_OBSTACLE and self.truth is not Truth.OBSTACLE:
            raise SceneError(f"disk {self.id}: state {self.state.value} contradicts truth")

    @property
    def ambiguous(self):
        return self.state is State.AMBIGUOUS

    def contains(self, p):
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) < self.radius


@dataclass
class Scene:
    lattice: LatticeSpec
    s: tuple
    t: tuple
    disks: list = field(default_factory=list)
    disambiguation_cost: float = DEFAULT_COST

    def __post_init__(self):
        if not isinstance(self.lattice, LatticeSpec):
            self.lattice = LatticeSpec(*self.lattice)
        self.s = (int(self.s[0]), int(self.s[1]))
        self.t = (int(self.t[0]), int(self.t[1]))
        self.validate()

    def validate(self):
        spec = self.lattice
        for name, v in (("s", self.s), ("t", self.t)):
            if not (1 <= v[0] <= spec.i_max and 1 <= v[1] <= spec.j_max):
                raise SceneError(f"{name}={v} outside the {spec.i_max}x{spec.j_max} lattice")
        if self.s == self.t:
            raise SceneError("start and target coincide")
        if not self.disambiguation_cost > 0:
            raise SceneError("disambiguation cost must be positive")
        ids = set()
        for d in self.disks:
            if d.id in ids:
                raise SceneError(f"duplicate disk id {d.id}")
            ids.add(d.id)
            for name, v in (("start", self.s), ("target", self.t)):
                if d.contains(v):
                    raise SceneError(f"{name} {v} lies inside disk {d.id}")

    def disk(self, disk_id):
        for d in self.disks:
            if d.id == disk_id:
                return d
        raise KeyError(disk_id)

    def clone(self):
        return copy.deepcopy(self)

    def counts(self):
        """(n_clutter, n_obstacle) by hidden truth."""
        n_obs = sum(d.truth is Truth.OBSTACLE for d in self.disks)
        return len(self.disks) - n_obs, n_obs

    def reset(self):
        for d in self.disks:
            d.state = State.AMBIGUOUS


@dataclass(frozen=True)
class MarkModel:
    """Beta mark distributions for clutter and true obstacles.

    The default gives clutter mean 0.25 (Beta(2, 6)) and obstacle mean 0.75
    (Beta(6, 2)). ``MarkModel.literal()`` swaps them, for comparison runs.
    """

    clutter: tuple = (2.0, 6.0)
    obstacle: tuple = (6.0, 2.0)

    def __post_init__(self):
        for a, b in (self.clutter, self.obstacle):
            if not (a > 0 and b > 0):
                raise ValueError("Beta parameters must be positive")

    @classmethod
    def literal(cls):
        return cls(clutter=(6.0, 2.0), obstacle=(2.0, 6.0))

    @property
    def clutter_mean(self):
        a, b = self.clutter
        return a / (a + b)

    @property
    def obstacle_mean(self):
        a, b = self.obstacle
        return a / (a + b)


def assign_marks(clutter_points, obstacle_points, model, rng, radius=DEFAULT_RADIUS):
    """Disks for clutter (ids first) and obstacles, marks drawn from ``model``."""
    clutter_points = np.asarray(clutter_points, dtype=np.float64).reshape(-1, 2)
    obstacle_points = np.asarray(obstacle_points, dtype=np.float64).reshape(-1, 2)
    mc = rng.beta(*model.clutter, size=len(clutter_points))
    mo = rng.beta(*model.obstacle, size=len(obstacle_points))
    mc = np.clip(mc, MARK_FLOOR, MARK_CEIL)
    mo = np.clip(mo, MARK_FLOOR, MARK_CEIL)
    disks = []
    for p, m in zip(clutter_points, mc):
        disks.append(SceneDisk(len(disks), (p[0], p[1]), float(m), Truth.CLUTTER, radius))
    for p, m in zip(obstacle_points, mo):
        disks.append(SceneDisk(len(disks), (p[0], p[1]), float(m), Truth.OBSTACLE, radius))
    return disks


def disambiguate(scene, disk_id):
    """Reveal a disk's truth; returns the revealed :class:`Truth`."""
    d = scene.disk(disk_id)
    if not d.ambiguous:
        raise DisambiguationError(f"disk {disk_id} was already disambiguated ({d.state.value})")
    d.state = State.KNOWN_OBSTACLE if d.truth is Truth.OBSTACLE else State.KNOWN_CLUTTER
    return d.truth


# --- file format -----------------------------------------------------------

HEADER = ["id", "x", "y", "radius", "rho", "truth"]


def save_scene(scene, path):
    """Write ``scene`` as UTF-8 CSV; ``# key values`` lines carry scene metadata."""
    with_state = any(not d.ambiguous for d in scene.disks)
    buf = io.StringIO()
    buf.write(f"# lattice {scene.lattice.i_max} {scene.lattice.j_max}\n")
    buf.write(f"# start {scene.s[0]} {scene.s[1]}\n")
    buf.write(f"# target {scene.t[0]} {scene.t[1]}\n")
    buf.write(f"# cost {scene.disambiguation_cost!r}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER + (["state"] if with_state else []))
    for d in scene.disks:
        row = [d.id, repr(d.center[0]), repr(d.center[1]), repr(d.radius), repr(d.mark), d.truth.value]
        if with_state:
            row.append(d.state.value)
        writer.writerow(row)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


_META = {"lattice": 2, "start": 2, "target": 2, "cost": 1}


def _parse_meta(line, lineno, meta):
    parts = line[1:].split()
    if not parts or parts[0] not in _META:
        return
    key, vals = parts[0], parts[1:]
    if len(vals) != _META[key]:
        raise SceneError(f"'# {key}' expects {_META[key]} value(s)", lineno)
    try:
        meta[key] = [float(v) if key == "cost" else int(v) for v in vals]
    except ValueError as exc:
        raise SceneError(f"bad '# {key}' value: {exc}", lineno) from None


def load_scene(path):
    meta = {}
    disks = []
    header = None
    seen = set()
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            _parse_meta(line, lineno, meta)
            continue
        cells = [c.strip() for c in next(csv.reader([line]))]
        if header is None:
            if cells[:6] != HEADER or cells[6:] not in ([], ["state"]):
                raise SceneError(f"expected header {','.join(HEADER)}[,state], got {line!r}", lineno)
            header = cells
            continue
        if len(cells) != len(header):
            raise SceneError(f"expected {len(header)} fields, got {len(cells)}", lineno)
        try:
            disk_id = int(cells[0])
            x, y, radius, rho = (float(c) for c in cells[1:5])
        except ValueError as exc:
            raise SceneError(str(exc), lineno) from None
        if not all(math.isfinite(v) for v in (x, y, radius, rho)):
            raise SceneError("non-finite value", lineno)
        if disk_id in seen:
            raise SceneError(f"duplicate disk id {disk_id}", lineno)
        seen.add(disk_id)
        if cells[5] not in ("obstacle", "clutter"):
            raise SceneError(f"truth must be 'obstacle' or 'clutter', got {cells[5]!r}", lineno)
        state = cells[6] if len(cells) > 6 else "ambiguous"
        try:
            State(state)
            disks.append(SceneDisk(disk_id, (x, y), rho, cells[5], radius, state))
        except ValueError as exc:
            raise SceneError(str(exc), lineno) from None
    if header is None:
        raise SceneError("missing header line")
    lattice = meta.get("lattice", [100, 100])
    return Scene(
        lattice=LatticeSpec(*lattice),
        s=tuple(meta.get("start", [50, 100])),
        t=tuple(meta.get("target", [50, 1])),
        disks=disks,
        disambiguation_cost=meta.get("cost", [DEFAULT_COST])[0],
    )


def three_disk_scene():
    """The three-disk 22 x 14 illustration: two clutter disks flank one obstacle."""
    return Scene(
        lattice=LatticeSpec(22, 14),
        s=(11, 14),
        t=(11, 1),
        disks=[
            SceneDisk(1, (6.0, 9.0), 0.4, Truth.CLUTTER),
            SceneDisk(2, (17.0, 9.0), 0.5, Truth.CLUTTER),
            SceneDisk(3, (11.0, 6.0), 0.6, Truth.OBSTACLE),
        ],
        disambiguation_cost=5.0,
    )


def standard_scene(disks, cost=DEFAULT_COST):
    """Scene on the 100 x 100 field with s=(50,100), t=(50,1)."""
    return Scene(LatticeSpec(100, 100), (50, 100), (50, 1), list(disks), cost)
