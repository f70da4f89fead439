"""Adapted reset disambiguation (ARD) navigation on the lattice.

Each plan is a shortest walk under the risk-inflated edge weight

    w(e) = len(e) + 1/2 * sum over ambiguous disks D charged to e of c / (1 - rho_D)

with edges that touch a revealed obstacle removed. The navigator follows the
plan up to the first edge that touches an ambiguous disk, disambiguates that
disk from the near endpoint, and replans from there.

Which disks are charged to an edge is set by ``penalty_rule``:

``"boundary"`` (default)
    disks whose boundary circle the edge meets. A walk that enters and
    leaves a disk pays the half-penalty twice, i.e. c / (1 - rho) per
    crossing; edges lying wholly inside a disk are ambiguous but uncharged.
``"any"``
    every disk the edge meets, so a walk pays once per edge inside the disk.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np

from .lattice import Lattice, shortest_path_indices
from .scene import MARK_CEIL, State, Truth, disambiguate
from .geometry import segments_disk_distance


class Unreachable(RuntimeError):
    """The target cannot be reached from the current vertex."""


class InvariantViolation(AssertionError):
    pass


@lru_cache(maxsize=8)
def get_lattice(spec):
    return Lattice(spec)


PENALTY_RULES = ("boundary", "any")


@dataclass
class Incidence:
    """Edge/disk intersection pairs, grouped by edge (CSR over edges)."""

    edge_ptr: np.ndarray
    disk_index: np.ndarray
    pair_edge: np.ndarray
    crosses_boundary: np.ndarray

    def disks_on(self, e):
        return self.disk_index[self.edge_ptr[e]:self.edge_ptr[e + 1]]


def edge_disk_incidence(lattice, centers, radii):
    """Pairs (edge, disk) with the edge meeting the open disk."""
    centers = np.asarray(centers, dtype=np.float64).reshape(-1, 2)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (len(centers),))
    lo_ptr = np.searchsorted(lattice.edges[:, 0], np.arange(lattice.n_vertices + 1))
    jm = lattice.j_max
    edges_all = []
    disks_all = []
    cross_all = []
    for k, ((cx, cy), r) in enumerate(zip(centers.tolist(), radii.tolist())):
        # lower endpoints of candidate edges lie within r + 1 of the centre box
        i0 = max(1, math.floor(cx - r) - 1)
        i1 = min(lattice.i_max, math.ceil(cx + r) + 1)
        j0 = max(1, math.floor(cy - r) - 1)
        j1 = min(lattice.j_max, math.ceil(cy + r) + 1)
        if i0 > i1 or j0 > j1:
            continue
        ii = np.arange(i0, i1 + 1)
        base = (ii - 1) * jm
        first = base + (j0 - 1)
        last = base + (j1 - 1)
        starts = lo_ptr[first]
        stops = lo_ptr[last + 1]
        cand = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)])
        if len(cand) == 0:
            continue
        seg = lattice.coords[lattice.edges[cand]]
        dist = segments_disk_distance(seg[:, 0], seg[:, 1], (cx, cy))
        hit = dist < r
        far = np.maximum(np.hypot(seg[:, 0, 0] - cx, seg[:, 0, 1] - cy),
                         np.hypot(seg[:, 1, 0] - cx, seg[:, 1, 1] - cy))
        edges_all.append(cand[hit])
        disks_all.append(np.full(int(hit.sum()), k, dtype=np.int64))
        cross_all.append(far[hit] >= r)
    if edges_all:
        pe = np.concatenate(edges_all).astype(np.int64)
        pd = np.concatenate(disks_all)
        pc = np.concatenate(cross_all)
    else:
        pe = np.zeros(0, dtype=np.int64)
        pd = np.zeros(0, dtype=np.int64)
        pc = np.zeros(0, dtype=bool)
    order = np.lexsort((pd, pe))
    pe, pd, pc = pe[order], pd[order], pc[order]
    ptr = np.zeros(lattice.n_edges + 1, dtype=np.int64)
    np.cumsum(np.bincount(pe, minlength=lattice.n_edges), out=ptr[1:])
    return Incidence(edge_ptr=ptr, disk_index=pd, pair_edge=pe, crosses_boundary=pc)


def _scene_arrays(scene):
    centers = np.array([d.center for d in scene.disks], dtype=np.float64).reshape(-1, 2)
    radii = np.array([d.radius for d in scene.disks], dtype=np.float64)
    marks = np.minimum(np.array([d.mark for d in scene.disks], dtype=np.float64), MARK_CEIL)
    return centers, radii, marks


def _state_codes(scene):
    code = {State.AMBIGUOUS: 0, State.KNOWN_CLUTTER: 1, State.KNOWN_OBSTACLE: 2}
    return np.array([code[d.state] for d in scene.disks], dtype=np.int8)


def _check_rule(penalty_rule):
    if penalty_rule not in PENALTY_RULES:
        raise ValueError(f"penalty_rule must be one of {PENALTY_RULES}, got {penalty_rule!r}")


def _weights(lattice, inc, states, marks, cost, penalty_rule):
    pair_state = states[inc.disk_index]
    amb = pair_state == 0
    charged = amb & inc.crosses_boundary if penalty_rule == "boundary" else amb
    penalty = np.bincount(inc.pair_edge[charged], weights=cost / (1.0 - marks[inc.disk_index[charged]]),
                          minlength=lattice.n_edges)
    weights = lattice.lengths + 0.5 * penalty
    blocked = np.bincount(inc.pair_edge[pair_state == 2], minlength=lattice.n_edges) > 0
    ambiguous_edge = np.bincount(inc.pair_edge[amb], minlength=lattice.n_edges) > 0
    return weights, blocked, ambiguous_edge


def edge_weight(edge, scene, penalty_rule="boundary"):
    """Planning weight of one edge given as a vertex pair, or ``None`` if blocked."""
    _check_rule(penalty_rule)
    (a, b) = edge
    lattice = get_lattice(scene.lattice)
    e = lattice.edge_id(lattice.index(a), lattice.index(b))
    p, q = lattice.coords[lattice.edges[e]]
    total = 0.0
    for d in scene.disks:
        if d.state is State.KNOWN_CLUTTER:
            continue
        near = segments_disk_distance(p[None], q[None], d.center)[0]
        if near < d.radius:
            if d.state is State.KNOWN_OBSTACLE:
                return None
            far = max(math.hypot(*(p - d.center)), math.hypot(*(q - d.center)))
            if penalty_rule == "any" or far >= d.radius:
                total += scene.disambiguation_cost / (1.0 - min(d.mark, MARK_CEIL))
    return float(lattice.lengths[e]) + 0.5 * total


@dataclass
class Disambiguation:
    vertex: tuple
    disk_id: int
    revealed: Truth
    step: int = -1  # index into the walk where it happened


@dataclass
class TraversalResult:
    walk: list
    total_length: float
    movement_length: float
    disambiguations: list = field(default_factory=list)
    replans: int = 0

    @property
    def n_disambiguations(self):
        return len(self.disambiguations)

    def summary(self):
        return f"{self.total_length!r},{self.n_disambiguations},{self.replans}"

    def trace_lines(self):
        """One record per step, then the ``total_length,n_disambiguations,n_replans`` line."""
        events = {}
        for dis in self.disambiguations:
            events.setdefault(dis.step, []).append(dis)
        lines = ["event,i,j,disk_id,revealed"]
        lines.append(f"start,{self.walk[0][0]},{self.walk[0][1]},,")
        for k, v in enumerate(self.walk):
            for dis in events.get(k, []):
                lines.append(f"disambiguate,{v[0]},{v[1]},{dis.disk_id},{dis.revealed.value}")
            if k + 1 < len(self.walk):
                nxt = self.walk[k + 1]
                lines.append(f"move,{nxt[0]},{nxt[1]},,")
        lines.append("# total_length,n_disambiguations,n_replans")
        lines.append(self.summary())
        return lines


def navigate(scene, backend=None, penalty_rule="boundary"):
    """Run ARD on a private copy of ``scene``; the input is not modified."""
    _check_rule(penalty_rule)
    scene = scene.clone()
    lattice = get_lattice(scene.lattice)
    centers, radii, marks = _scene_arrays(scene)
    inc = edge_disk_incidence(lattice, centers, radii)
    ids = [d.id for d in scene.disks]
    cost = float(scene.disambiguation_cost)
    coords = lattice.coords

    v = lattice.index(scene.s)
    t = lattice.index(scene.t)
    walk = [v]
    movement = 0.0
    log = []
    replans = 0
    while True:
        states = _state_codes(scene)
        weights, blocked, ambiguous_edge = _weights(lattice, inc, states, marks, cost, penalty_rule)
        path = shortest_path_indices(lattice, weights, v, t, blocked, backend)
        if path is None:
            raise Unreachable(f"target {scene.t} unreachable from {lattice.vertex(v)}")
        stop_edge = None
        for a, b in zip(path, path[1:]):
            e = lattice.edge_id(a, b)
            if ambiguous_edge[e]:
                stop_edge = e
                break
            movement += float(lattice.lengths[e])
            walk.append(b)
            v = b
        if stop_edge is None:
            break
        cands = [k for k in inc.disks_on(stop_edge).tolist() if states[k] == 0]
        vx, vy = coords[v]
        k = min(cands, key=lambda k: (math.hypot(centers[k, 0] - vx, centers[k, 1] - vy), ids[k]))
        if math.hypot(centers[k, 0] - vx, centers[k, 1] - vy) < radii[k]:
            raise InvariantViolation(f"disambiguation vertex {lattice.vertex(v)} lies inside disk {ids[k]}")
        revealed = disambiguate(scene, ids[k])
        log.append(Disambiguation(lattice.vertex(v), ids[k], revealed, len(walk) - 1))
        replans += 1

    return TraversalResult(
        walk=[lattice.vertex(u) for u in walk],
        total_length=movement + cost * len(log),
        movement_length=movement,
        disambiguations=log,
        replans=replans,
    )


def zero_risk_length(scene, backend=None):
    """Shortest s-t length avoiding every disk not revealed as clutter; ``None`` if walled off."""
    lattice = get_lattice(scene.lattice)
    centers, radii, _ = _scene_arrays(scene)
    inc = edge_disk_incidence(lattice, centers, radii)
    states = _state_codes(scene)
    blocked = np.bincount(inc.pair_edge[states[inc.disk_index] != 1], minlength=lattice.n_edges) > 0
    s, t = lattice.index(scene.s), lattice.index(scene.t)
    path = shortest_path_indices(lattice, lattice.lengths, s, t, blocked, backend)
    if path is None:
        return None
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += float(lattice.lengths[lattice.edge_id(a, b)])
    return total
