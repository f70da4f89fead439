"""8-adjacency integer lattice and deterministic shortest walks.

Vertices are the integer pairs (i, j) with 1 <= i <= i_max, 1 <= j <= j_max,
numbered in lexicographic (i, j) order: index = (i - 1) * j_max + (j - 1).
Edges are numbered in lexicographic order of their (lower, higher) endpoint
indices. Every tie-break in this package refers to these two orders.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from ._backend import get_kernels

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class LatticeSpec:
    i_max: int
    j_max: int

    def __post_init__(self):
        for name in ("i_max", "j_max"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ValueError(f"{name} must be an integer, got {value!r}")
            if value < 2:
                raise ValueError(f"{name} must be >= 2, got {value}")


@dataclass(frozen=True)
class WeightedPath:
    vertices: tuple
    total_weight: float

    def __len__(self):
        return len(self.vertices)


class Lattice:
    """Immutable lattice graph with CSR adjacency sorted by neighbour index."""

    def __init__(self, spec):
        if not isinstance(spec, LatticeSpec):
            spec = LatticeSpec(*spec)
        self.spec = spec
        self.i_max = spec.i_max
        self.j_max = spec.j_max
        self.n_vertices = spec.i_max * spec.j_max

        idx = np.arange(self.n_vertices, dtype=np.int64)
        ii = idx // spec.j_max + 1
        jj = idx % spec.j_max + 1
        self.coords = np.column_stack([ii, jj]).astype(np.float64)

        pairs = []
        lengths = []
        # (di, dj) offsets from the lower-index endpoint
        for di, dj, length in ((0, 1, 1.0), (1, 0, 1.0), (1, 1, SQRT2), (1, -1, SQRT2)):
            ok = (ii + di <= spec.i_max) & (jj + dj >= 1) & (jj + dj <= spec.j_max)
            a = idx[ok]
            b = a + di * spec.j_max + dj
            lo = np.minimum(a, b)
            hi = np.maximum(a, b)
            pairs.append(np.column_stack([lo, hi]))
            lengths.append(np.full(len(a), length))
        edges = np.concatenate(pairs)
        lengths = np.concatenate(lengths)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        self.edges = np.ascontiguousarray(edges[order])
        self.lengths = np.ascontiguousarray(lengths[order])
        self.n_edges = len(self.edges)

        # CSR adjacency, each row sorted by neighbour index
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        eids = np.concatenate([np.arange(self.n_edges), np.arange(self.n_edges)]).astype(np.int64)
        order = np.lexsort((dst, src))
        self.nbr = np.ascontiguousarray(dst[order], dtype=np.int64)
        self.eid = np.ascontiguousarray(eids[order], dtype=np.int64)
        counts = np.bincount(src, minlength=self.n_vertices)
        self.indptr = np.zeros(self.n_vertices + 1, dtype=np.int64)
        np.cumsum(counts, out=self.indptr[1:])

    def __repr__(self):
        return f"Lattice({self.i_max}x{self.j_max}, {self.n_edges} edges)"

    def index(self, vertex):
        i, j = vertex
        if not (1 <= i <= self.i_max and 1 <= j <= self.j_max):
            raise ValueError(f"vertex {vertex} outside {self.i_max}x{self.j_max} lattice")
        return (int(i) - 1) * self.j_max + (int(j) - 1)

    def vertex(self, index):
        return (int(index) // self.j_max + 1, int(index) % self.j_max + 1)

    @cached_property
    def _edge_lookup(self):
        return {(int(a), int(b)): k for k, (a, b) in enumerate(self.edges)}

    def edge_id(self, u, v):
        """Edge index between vertex indices ``u`` and ``v`` (KeyError if not adjacent)."""
        a, b = (u, v) if u < v else (v, u)
        return self._edge_lookup[(a, b)]

    def neighbors(self, v):
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return self.nbr[lo:hi], self.eid[lo:hi]

    def edge_segments(self):
        """Endpoint coordinates of every edge as an (m, 2, 2) array."""
        return self.coords[self.edges]


def build_lattice(spec):
    return Lattice(spec)


def _tight_path(lattice, dist, weights, allowed, s, t):
    # lexicographically smallest simple path along edges with dist[u] + w == dist[v]
    path = [s]
    on_path = {s}
    cursors = [0]
    indptr, nbr, eid = lattice.indptr, lattice.nbr, lattice.eid
    while path[-1] != t:
        v = path[-1]
        k = indptr[v] + cursors[-1]
        stop = indptr[v + 1]
        step = None
        while k < stop:
            u = int(nbr[k])
            e = eid[k]
            k += 1
            if allowed[e] and u not in on_path and dist[u] + weights[e] == dist[v]:
                step = u
                break
        if step is None:
            # dead end inside a zero-weight plateau; backtrack
            path.pop()
            on_path.discard(v)
            cursors.pop()
            if not path:
                raise RuntimeError("no tight path found; distance labels are inconsistent")
            continue
        cursors[-1] = k - indptr[v]
        path.append(step)
        on_path.add(step)
        cursors.append(0)
    return path


def shortest_path_indices(lattice, weights, s, t, blocked=None, backend=None):
    """Shortest s-t path as a list of vertex indices, or None if t is unreachable.

    ``weights`` is a float array over edges; ``blocked`` an optional boolean
    mask of edges to drop. Among equal-weight optima the lexicographically
    smallest vertex-index sequence is returned.
    """
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if weights.shape != (lattice.n_edges,):
        raise ValueError(f"expected {lattice.n_edges} edge weights, got shape {weights.shape}")
    if blocked is None:
        allowed = np.ones(lattice.n_edges, dtype=np.uint8)
    else:
        allowed = np.ascontiguousarray(~np.asarray(blocked, dtype=bool), dtype=np.uint8)
    if s == t:
        return [s]
    k = get_kernels(backend)
    dist = k.dijkstra(lattice.indptr, lattice.nbr, lattice.eid, weights, allowed, t, s)
    if not np.isfinite(dist[s]):
        return None
    return _tight_path(lattice, dist.tolist(), weights.tolist(), allowed.tolist(), s, t)


def path_weight(lattice, path, weights):
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += float(weights[lattice.edge_id(a, b)])
    return total


def shortest_walk(lattice, weights, s, t, blocked=None, backend=None):
    """Minimum-weight s-t walk between vertex tuples.

    Returns a :class:`WeightedPath`, or ``None`` when ``t`` cannot be reached
    over non-blocked edges. ``s == t`` gives the empty walk of weight 0.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0) or np.any(np.isnan(weights)):
        raise ValueError("edge weights must be nonnegative")
    si, ti = lattice.index(s), lattice.index(t)
    path = shortest_path_indices(lattice, weights, si, ti, blocked, backend)
    if path is None:
        return None
    return WeightedPath(
        vertices=tuple(lattice.vertex(v) for v in path),
        total_weight=path_weight(lattice, path, weights),
    )
