"""Slow, independent reference computations used only by the tests."""

import heapq
import itertools
import math

import numpy as np

from opdsim.ard import navigate
from opdsim.lattice import Lattice
from opdsim.scene import Scene, SceneDisk


def enumerate_shortest(lattice, weights, s, t, blocked=None):
    """Exhaustive search over simple s-t paths in lexicographic vertex order.

    Returns (weight, path) for the minimum weight; ties go to the
    lexicographically smallest path because paths are generated in that
    order and only strict improvements replace the incumbent. Branches whose
    partial weight already reaches the incumbent are cut (weights > 0).
    """
    blocked = np.zeros(lattice.n_edges, bool) if blocked is None else blocked
    adj = {v: [] for v in range(lattice.n_vertices)}
    for e, (a, b) in enumerate(lattice.edges.tolist()):
        if not blocked[e]:
            adj[a].append((b, weights[e]))
            adj[b].append((a, weights[e]))
    for v in adj:
        adj[v].sort()
    best = [math.inf, None]
    path = [s]
    seen = {s}

    def dfs(v, acc):
        if v == t:
            if acc < best[0]:
                best[0], best[1] = acc, list(path)
            return
        for u, w in adj[v]:
            if u in seen or acc + w >= best[0]:
                continue
            seen.add(u)
            path.append(u)
            dfs(u, acc + w)
            path.pop()
            seen.discard(u)

    dfs(s, 0.0)
    return best[0], best[1]


def _point_segment(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    den = dx * dx + dy * dy
    s = 0.0 if den == 0 else max(0.0, min(1.0, ((px - ax) * dx + (py - ay) * dy) / den))
    return math.hypot(px - ax - s * dx, py - ay - s * dy)


def _meets(lattice, disks):
    """meets[e] = indices of disks whose open interior the edge touches."""
    out = []
    for a, b in lattice.edges.tolist():
        (ax, ay), (bx, by) = lattice.coords[a], lattice.coords[b]
        out.append([k for k, d in enumerate(disks)
                    if _point_segment(d.center[0], d.center[1], ax, ay, bx, by) < d.radius])
    return out


def optimal_expected_length(scene):
    """Minimum expected traversal length over all adaptive policies.

    State: (vertex, knowledge) with knowledge per disk in {ambiguous,
    clutter, obstacle}. The agent may move along an edge only when every
    disk it meets is known clutter, and may pay ``c`` to disambiguate an
    ambiguous disk while standing outside it at an endpoint of an edge
    meeting it. Truths are independent with P(obstacle) = mark.
    """
    lattice = Lattice(scene.lattice)
    disks = scene.disks
    k = len(disks)
    meets = _meets(lattice, disks)
    c = scene.disambiguation_cost
    s, t = lattice.index(scene.s), lattice.index(scene.t)
    n = lattice.n_vertices
    touch = [set() for _ in range(n)]
    for e, (a, b) in enumerate(lattice.edges.tolist()):
        for d in meets[e]:
            touch[a].add(d)
            touch[b].add(d)
    inside = [[math.hypot(lattice.coords[v][0] - d.center[0], lattice.coords[v][1] - d.center[1]) < d.radius
               for d in disks] for v in range(n)]

    value = {}
    states = sorted(itertools.product((0, 1, 2), repeat=k), key=lambda K: sum(x == 0 for x in K))
    for K in states:
        label = [math.inf] * n
        for v in range(n):
            for d in touch[v]:
                if K[d] != 0 or inside[v][d]:
                    continue
                rho = disks[d].mark
                ko = K[:d] + (2,) + K[d + 1:]
                kc = K[:d] + (1,) + K[d + 1:]
                cand = c + rho * value[ko][v] + (1 - rho) * value[kc][v]
                label[v] = min(label[v], cand)
        label[t] = 0.0
        heap = [(lv, v) for v, lv in enumerate(label) if lv < math.inf]
        heapq.heapify(heap)
        done = [False] * n
        while heap:
            dv, v = heapq.heappop(heap)
            if done[v]:
                continue
            done[v] = True
            lo, hi = lattice.indptr[v], lattice.indptr[v + 1]
            for u, e in zip(lattice.nbr[lo:hi].tolist(), lattice.eid[lo:hi].tolist()):
                if any(K[d] != 1 for d in meets[e]):
                    continue
                nd = dv + float(lattice.lengths[e])
                if nd < label[u]:
                    label[u] = nd
                    heapq.heappush(heap, (nd, u))
        value[K] = label
    return value[(0,) * k][s]


def with_truths(scene, truths):
    disks = [SceneDisk(d.id, d.center, d.mark, tr, d.radius) for d, tr in zip(scene.disks, truths)]
    return Scene(scene.lattice, scene.s, scene.t, disks, scene.disambiguation_cost)


def ard_expected_length(scene, **kw):
    """Exact expectation of ARD's traversal length over all truth assignments."""
    total = 0.0
    for truths in itertools.product(("obstacle", "clutter"), repeat=len(scene.disks)):
        prob = 1.0
        for d, tr in zip(scene.disks, truths):
            prob *= d.mark if tr == "obstacle" else 1.0 - d.mark
        if prob == 0.0:
            continue
        total += prob * navigate(with_truths(scene, truths), **kw).total_length
    return total


def random_small_scene(rng, max_side=10, max_disks=3):
    """Random instance whose target stays reachable even if every disk is an obstacle."""
    from opdsim.ard import zero_risk_length

    while True:
        i_max, j_max = (int(v) for v in rng.integers(3, max_side + 1, 2))
        k = int(rng.integers(1, max_disks + 1))
        disks = [SceneDisk(m + 1, (rng.uniform(1, i_max), rng.uniform(1, j_max)),
                           float(rng.uniform(0.05, 0.95)), "clutter", float(rng.uniform(0.6, 2.5)))
                 for m in range(k)]
        free = [(i, j) for i in range(1, i_max + 1) for j in range(1, j_max + 1)
                if not any(d.contains((i, j)) for d in disks)]
        if len(free) < 2:
            continue
        a, b = rng.choice(len(free), 2, replace=False)
        scene = Scene((i_max, j_max), free[a], free[b], disks, float(rng.uniform(0.5, 4.0)))
        if zero_risk_length(scene) is not None:
            return scene
