"""Finite lattice graphs with boundary sets.

The model lives on a finite, simple, connected graph ``G = (V, E)`` together
with a distinguished boundary vertex set ``B``; the interior is ``V \\ B``.
Supported constructions:

* ``Topology.open_cube(d, L)`` -- the cube ``{0, ..., L}^d`` with nearest
  neighbor edges and the usual boundary (some coordinate equal to 0 or L),
* ``Topology.free_cube(d, L)`` -- the same graph with an empty boundary,
* ``Topology.torus(d, L)`` -- ``{0, ..., L-1}^d`` with wraparound edges and
  an empty boundary (periodic case),
* arbitrary explicit graphs via :func:`build_explicit` or :func:`load_graph`.

Vertices of cubes are ordered row-major over coordinate tuples and edges are
indexed lexicographically by ``(min endpoint, max endpoint)``, so coupling
arrays pair with edges identically across runs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    Disconnected,
    EmptyInterior,
    InteriorDisconnected,
    InvalidTopology,
    NotSimple,
    TooFewEdges,
    TorusTooSmall,
)

__all__ = [
    "Topology",
    "LatticeGraph",
    "build_cube",
    "build_explicit",
    "graph_distance",
    "distance_to_boundary",
    "edge_boundary",
    "load_graph",
    "save_graph",
]


@dataclass(frozen=True)
class Topology:
    """Tag describing how a graph was constructed."""

    kind: str  # "open" | "free" | "torus" | "explicit"
    d: int = 0
    L: int = 0

    @staticmethod
    def open_cube(d: int, L: int) -> "Topology":
        return Topology("open", d, L)

    @staticmethod
    def free_cube(d: int, L: int) -> "Topology":
        return Topology("free", d, L)

    @staticmethod
    def torus(d: int, L: int) -> "Topology":
        return Topology("torus", d, L)

    @staticmethod
    def explicit() -> "Topology":
        return Topology("explicit")

    def __str__(self) -> str:
        if self.kind == "explicit":
            return "explicit"
        return f"{self.kind}(d={self.d}, L={self.L})"


class LatticeGraph:
    """Simple connected graph with a boundary set and stable edge indices.

    Instances are immutable after construction (arrays are write-protected)
    and safe for concurrent shared reads.  Use the module factories; the
    constructor assumes pre-validated input.
    """

    def __init__(self, n_vertices: int, edges: np.ndarray, boundary: np.ndarray,
                 topology: Topology):
        self.n_vertices = int(n_vertices)
        self.edges = np.ascontiguousarray(edges, dtype=np.int32)
        self.boundary = np.ascontiguousarray(np.sort(np.asarray(boundary, dtype=np.int32)))
        bmask = np.zeros(self.n_vertices, dtype=bool)
        bmask[self.boundary] = True
        self.boundary_mask = bmask
        self.interior = np.flatnonzero(~bmask).astype(np.int32)
        self.topology = topology
        self.n_edges = len(self.edges)

        # CSR adjacency carrying both the neighbor and the incident edge index.
        eu, ev = self.edges[:, 0], self.edges[:, 1]
        src = np.concatenate([eu, ev])
        dst = np.concatenate([ev, eu])
        eid = np.concatenate([np.arange(self.n_edges), np.arange(self.n_edges)])
        order = np.argsort(src, kind="stable")
        counts = np.bincount(src, minlength=self.n_vertices)
        self.adj_indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.adj_vertex = dst[order].astype(np.int64)
        self.adj_edge = eid[order].astype(np.int64)
        self.max_degree = int(counts.max()) if self.n_vertices else 0

        self._edge_lookup = {
            (int(u), int(v)): k for k, (u, v) in enumerate(self.edges)
        }
        self._dist_cache: dict[int, np.ndarray] = {}
        self._boundary_dist: np.ndarray | None = None

        for arr in (self.edges, self.boundary, self.interior, self.adj_indptr,
                    self.adj_vertex, self.adj_edge):
            arr.setflags(write=False)
        self.boundary_mask.setflags(write=False)

    # -- basic queries --------------------------------------------------------

    def degree(self, i: int) -> int:
        return int(self.adj_indptr[i + 1] - self.adj_indptr[i])

    def neighbors(self, i: int) -> np.ndarray:
        return self.adj_vertex[self.adj_indptr[i]:self.adj_indptr[i + 1]]

    def edge_index(self, u: int, v: int) -> int:
        """Stable index of the edge {u, v}; KeyError if absent."""
        u, v = (u, v) if u < v else (v, u)
        return self._edge_lookup[(int(u), int(v))]

    def has_edge(self, u: int, v: int) -> bool:
        u, v = (u, v) if u < v else (v, u)
        return (int(u), int(v)) in self._edge_lookup

    @property
    def shape(self) -> tuple[int, ...]:
        if self.topology.kind == "torus":
            return (self.topology.L,) * self.topology.d
        if self.topology.kind in ("open", "free"):
            return (self.topology.L + 1,) * self.topology.d
        raise InvalidTopology("explicit graphs carry no cube shape")

    def vertex_coords(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(i, self.shape))

    def vertex_at(self, coords) -> int:
        return int(np.ravel_multi_index(tuple(coords), self.shape))

    # -- distances --------------------------------------------------------------

    def distances_from(self, i: int) -> np.ndarray:
        """BFS distances from vertex ``i`` (cached per source)."""
        if i < 0 or i >= self.n_vertices:
            raise ValueError(f"vertex {i} out of range")
        cached = self._dist_cache.get(i)
        if cached is None:
            cached = self._bfs([i])
            if self.n_vertices <= 10_000:
                self._dist_cache[i] = cached
        return cached

    def boundary_distances(self) -> np.ndarray:
        """Distance of every vertex to the boundary set; +inf when B is empty."""
        if self._boundary_dist is None:
            if len(self.boundary) == 0:
                d = np.full(self.n_vertices, np.inf)
            else:
                d = self._bfs(list(self.boundary)).astype(np.float64)
            d.setflags(write=False)
            self._boundary_dist = d
        return self._boundary_dist

    def _bfs(self, sources: list[int]) -> np.ndarray:
        dist = np.full(self.n_vertices, -1, dtype=np.int32)
        queue = deque()
        for s in sources:
            dist[s] = 0
            queue.append(s)
        indptr, nbr = self.adj_indptr, self.adj_vertex
        while queue:
            v = queue.popleft()
            dv = dist[v]
            for t in range(indptr[v], indptr[v + 1]):
                u = nbr[t]
                if dist[u] < 0:
                    dist[u] = dv + 1
                    queue.append(u)
        dist.setflags(write=False)
        return dist


# -- construction ---------------------------------------------------------------


def _cube_edges(d: int, side: int, periodic: bool) -> tuple[int, np.ndarray]:
    shape = (side,) * d
    n = side ** d
    idx = np.arange(n).reshape(shape)
    us, vs = [], []
    for axis in range(d):
        if periodic:
            u = idx.ravel()
            v = np.roll(idx, -1, axis=axis).ravel()
        else:
            lo = [slice(None)] * d
            hi = [slice(None)] * d
            lo[axis] = slice(0, side - 1)
            hi[axis] = slice(1, side)
            u = idx[tuple(lo)].ravel()
            v = idx[tuple(hi)].ravel()
        us.append(u)
        vs.append(v)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    lo = np.minimum(u, v)
    hi = np.maximum(u, v)
    order = np.lexsort((hi, lo))
    return n, np.column_stack([lo[order], hi[order]])


def build_cube(topology: Topology) -> LatticeGraph:
    """Construct an open cube, free cube, or torus.

    Raises :class:`InvalidTopology` for out-of-range parameters and
    :class:`TorusTooSmall` for a torus with side below 3 (wraparound edges
    would stop being simple).
    """
    kind, d, L = topology.kind, topology.d, topology.L
    if kind not in ("open", "free", "torus"):
        raise InvalidTopology(f"cannot build kind {kind!r}")
    if d < 1 or L < 1:
        raise InvalidTopology(f"need d >= 1 and L >= 1, got d={d}, L={L}")
    if kind == "torus":
        if L < 3:
            raise TorusTooSmall(f"torus needs L >= 3, got L={L}")
        n, edges = _cube_edges(d, L, periodic=True)
        boundary = np.empty(0, dtype=np.int32)
    else:
        n, edges = _cube_edges(d, L + 1, periodic=False)
        if kind == "open":
            coords = np.stack(np.unravel_index(np.arange(n), (L + 1,) * d))
            bmask = ((coords == 0) | (coords == L)).any(axis=0)
            boundary = np.flatnonzero(bmask).astype(np.int32)
        else:
            boundary = np.empty(0, dtype=np.int32)
    return _validated(n, edges, boundary, topology)


def build_explicit(n: int, edges, boundary=()) -> LatticeGraph:
    """Validate and build an arbitrary graph.

    ``edges`` is a sequence of vertex pairs, ``boundary`` a set of vertex
    indices.  Validation order: simplicity, edge count, connectivity,
    nonempty interior, interior connectivity.
    """
    edges = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    boundary = np.asarray(sorted(set(int(b) for b in boundary)), dtype=np.int32)
    if n < 1:
        raise ValueError("need at least one vertex")
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge endpoint out of range")
    if boundary.size and (boundary.min() < 0 or boundary.max() >= n):
        raise ValueError("boundary vertex out of range")
    lo = np.minimum(edges[:, 0], edges[:, 1]) if len(edges) else np.empty(0, np.int64)
    hi = np.maximum(edges[:, 0], edges[:, 1]) if len(edges) else np.empty(0, np.int64)
    if len(edges) and (lo == hi).any():
        raise NotSimple("graph contains a loop")
    keys = lo * n + hi
    if len(np.unique(keys)) != len(keys):
        raise NotSimple("graph contains a duplicate edge")
    order = np.lexsort((hi, lo))
    canon = np.column_stack([lo[order], hi[order]])
    return _validated(n, canon, boundary, Topology.explicit())


def _validated(n: int, edges: np.ndarray, boundary: np.ndarray,
               topology: Topology) -> LatticeGraph:
    if len(edges) < 2:
        raise TooFewEdges(f"need at least 2 edges, got {len(edges)}")
    g = LatticeGraph(n, edges, boundary, topology)
    if (g.distances_from(0) < 0).any():
        raise Disconnected("graph is not connected")
    if len(g.interior) == 0:
        raise EmptyInterior("every vertex lies on the boundary")
    if not _subset_connected(g, g.interior):
        raise InteriorDisconnected("interior is not connected")
    return g


def _subset_connected(g: LatticeGraph, subset: np.ndarray) -> bool:
    allowed = np.zeros(g.n_vertices, dtype=bool)
    allowed[subset] = True
    seen = np.zeros(g.n_vertices, dtype=bool)
    start = int(subset[0])
    seen[start] = True
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for t in range(g.adj_indptr[v], g.adj_indptr[v + 1]):
            u = int(g.adj_vertex[t])
            if allowed[u] and not seen[u]:
                seen[u] = True
                queue.append(u)
    return bool(seen[subset].all())


# -- spec operations -------------------------------------------------------------


def graph_distance(g: LatticeGraph, i: int, j: int) -> int:
    """Length of the shortest path between ``i`` and ``j``."""
    return int(g.distances_from(i)[j])


def distance_to_boundary(g: LatticeGraph, i: int) -> float:
    """``min_k d(i, k)`` over boundary vertices ``k``; +inf when B is empty."""
    d = g.boundary_distances()[i]
    return float(d) if math.isinf(d) else int(d)


def edge_boundary(g: LatticeGraph, region) -> np.ndarray:
    """Indices of edges with exactly one endpoint in ``region`` (sorted)."""
    region = np.asarray(list(region), dtype=np.int64)
    mask = np.zeros(g.n_vertices, dtype=bool)
    if region.size:
        if region.min() < 0 or region.max() >= g.n_vertices:
            raise ValueError("region vertex out of range")
        mask[region] = True
    cross = mask[g.edges[:, 0]] != mask[g.edges[:, 1]]
    return np.flatnonzero(cross).astype(np.int64)


# -- text format ------------------------------------------------------------------
#
# First line "n m b", then m lines "u v", then b boundary vertex indices;
# whitespace-delimited, 0-based.


def load_graph(path) -> LatticeGraph:
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    if len(tokens) < 3:
        raise ValueError(f"{path}: expected header 'n m b'")
    n, m, b = (int(t) for t in tokens[:3])
    need = 3 + 2 * m + b
    if len(tokens) != need:
        raise ValueError(f"{path}: expected {need} tokens, found {len(tokens)}")
    flat = np.asarray([int(t) for t in tokens[3:3 + 2 * m]], dtype=np.int64)
    edges = flat.reshape(m, 2)
    boundary = [int(t) for t in tokens[3 + 2 * m:]]
    return build_explicit(n, edges, boundary)


def save_graph(g: LatticeGraph, path) -> None:
    lines = [f"{g.n_vertices} {g.n_edges} {len(g.boundary)}"]
    lines += [f"{int(u)} {int(v)}" for u, v in g.edges]
    lines += [str(int(b)) for b in g.boundary]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
