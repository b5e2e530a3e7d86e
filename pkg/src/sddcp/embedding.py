"""Embedded graphs in the standard simplex and their segment geometry.

An embedded graph is a list of vertices in the simplex (the rows of U) plus
an edge set; the union of its edge segments is the region whose rank-one
outer products span the restricted cone. Vertex indices are 1-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ROW_SUM_TOL = 1e-12
POINT_TOL = 1e-10
PARTITION_CAP = 100_000


def _normalize_edges(edges: Iterable[Sequence[int]], t: int):
    seen = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop at vertex {i}")
        if i > j:
            i, j = j, i
        if not (1 <= i and j <= t):
            raise ValueError(f"edge ({i}, {j}) out of range for t={t}")
        seen.add((i, j))
    return tuple(sorted(seen))


@dataclass(frozen=True)
class EmbeddedGraph:
    """Vertices in the simplex (rows of U) with an undirected edge set."""

    n: int
    vertices: np.ndarray
    edges: tuple

    def __post_init__(self):
        verts = np.array(self.vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != self.n:
            raise ValueError("vertices must be a (t, n) array")
        t = verts.shape[0]
        if t < 1:
            raise ValueError("need at least one vertex")
        if np.min(verts) < 0.0:
            raise ValueError("vertices must be entrywise nonnegative")
        sums = verts.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > ROW_SUM_TOL:
            raise ValueError("vertex rows must sum to 1")
        verts.flags.writeable = False
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", _normalize_edges(self.edges, t))

    @property
    def t(self) -> int:
        return self.vertices.shape[0]

    def vertex(self, i: int) -> np.ndarray:
        if not (1 <= i <= self.t):
            raise IndexError(f"vertex {i} out of range for t={self.t}")
        return self.vertices[i - 1]

    def has_edge(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in set(self.edges)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "vertices": [list(map(float, row)) for row in self.vertices],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EmbeddedGraph":
        return cls(
            n=int(data["n"]),
            vertices=np.array(data["vertices"], dtype=float),
            edges=tuple(tuple(e) for e in data["edges"]),
        )


@dataclass(frozen=True)
class SegmentPoint:
    """A point theta*u_i + (1-theta)*u_j on the segment of edge {i, j}."""

    edge: tuple
    point: np.ndarray
    theta: float

    def __post_init__(self):
        i, j = int(self.edge[0]), int(self.edge[1])
        if i == j:
            raise ValueError("segment edge must join distinct vertices")
        if i > j:
            i, j = j, i
        if not (-1e-12 <= self.theta <= 1.0 + 1e-12):
            raise ValueError("barycentric coordinate must lie in [0, 1]")
        pt = np.array(self.point, dtype=float).ravel()
        pt.flags.writeable = False
        object.__setattr__(self, "edge", (i, j))
        object.__setattr__(self, "point", pt)
        object.__setattr__(self, "theta", float(min(max(self.theta, 0.0), 1.0)))

    @property
    def barycentric(self) -> tuple:
        return (self.theta, 1.0 - self.theta)


def segment_point(g: EmbeddedGraph, edge, theta: float) -> SegmentPoint:
    """Construct the point at barycentric (theta, 1-theta) on a graph edge."""
    i, j = int(edge[0]), int(edge[1])
    if i > j:
        i, j = j, i
    point = theta * g.vertex(i) + (1.0 - theta) * g.vertex(j)
    return SegmentPoint(edge=(i, j), point=point, theta=theta)


def _check_segment_point(g: EmbeddedGraph, p: SegmentPoint) -> None:
    i, j = p.edge
    if (i, j) not in set(g.edges):
        raise ValueError(f"edge {p.edge} is not present in the graph")
    expected = p.theta * g.vertex(i) + (1.0 - p.theta) * g.vertex(j)
    if float(np.max(np.abs(p.point - expected))) > POINT_TOL:
        raise ValueError("segment point does not lie on its edge")


def identity_complete(n: int) -> EmbeddedGraph:
    """Unit vectors as vertices with all pairs joined; the base embedding."""
    if n < 2:
        raise ValueError("need dimension at least 2")
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    return EmbeddedGraph(n=n, vertices=np.eye(n), edges=tuple(edges))


def _compositions(total: int, parts: int):
    # first coordinate descending, so unit vectors come out in index order
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def delta_partition(n: int, k: int, cap: int = PARTITION_CAP) -> EmbeddedGraph:
    """Uniform simplex grid at resolution k with grid-adjacency edges.

    Vertices are the points with all coordinates integer multiples of 1/k;
    two vertices are adjacent when they differ by moving one unit of grid
    mass between two coordinates. Vertex count is C(n+k-1, k).
    """
    if n < 2:
        raise ValueError("need dimension at least 2")
    if k < 1:
        raise ValueError("granularity must be at least 1")
    count = math.comb(n + k - 1, k)
    if count > cap:
        raise ValueError(f"partition would have {count} vertices, cap is {cap}")
    lattice = list(_compositions(k, n))
    index = {pt: idx + 1 for idx, pt in enumerate(lattice)}
    edges = []
    for pt, idx in index.items():
        for a in range(n):
            if pt[a] == 0:
                continue
            for b in range(n):
                if a == b:
                    continue
                moved = list(pt)
                moved[a] -= 1
                moved[b] += 1
                other = index.get(tuple(moved))
                if other is not None and other > idx:
                    edges.append((idx, other))
    vertices = np.array(lattice, dtype=float) / float(k)
    return EmbeddedGraph(n=n, vertices=vertices, edges=tuple(edges))


def append_point(g: EmbeddedGraph, point) -> tuple:
    """Append an arbitrary simplex point as a new vertex (no new edges)."""
    pt = np.asarray(point, dtype=float).ravel()
    if pt.size != g.n:
        raise ValueError("point dimension mismatch")
    vertices = np.vstack([g.vertices, pt])
    g2 = EmbeddedGraph(n=g.n, vertices=vertices, edges=g.edges)
    return g2, g2.t


def add_vertex(g: EmbeddedGraph, p: SegmentPoint) -> tuple:
    """Append a segment point as a new vertex; returns (graph, new index)."""
    _check_segment_point(g, p)
    return append_point(g, p.point)


def complete_edges(g: EmbeddedGraph) -> EmbeddedGraph:
    """Join every pair of vertices."""
    edges = [(i, j) for i in range(1, g.t + 1) for j in range(i + 1, g.t + 1)]
    return EmbeddedGraph(n=g.n, vertices=g.vertices, edges=tuple(edges))


def star_to_base(g: EmbeddedGraph, base_count: int) -> EmbeddedGraph:
    """Complete edges within the base plus base edges for every later vertex."""
    if not (1 <= base_count <= g.t):
        raise ValueError(f"base_count {base_count} out of range for t={g.t}")
    edges = [
        (i, j) for i in range(1, base_count + 1) for j in range(i + 1, base_count + 1)
    ]
    for v in range(base_count + 1, g.t + 1):
        for b in range(1, base_count + 1):
            edges.append((b, v))
    return EmbeddedGraph(n=g.n, vertices=g.vertices, edges=tuple(edges))


def prune_duplicates(g: EmbeddedGraph, delta: float = 1e-6) -> EmbeddedGraph:
    """Merge vertices closer than delta in l1 distance; lower index wins.

    Edges incident to a removed vertex are re-pointed to its surviving near
    duplicate, then de-duplicated; self-loops created by a merge are dropped.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    kept = []
    target = {}
    for i in range(1, g.t + 1):
        row = g.vertex(i)
        merged = None
        for k in kept:
            if float(np.sum(np.abs(row - g.vertex(k)))) < delta:
                merged = k
                break
        if merged is None:
            kept.append(i)
            target[i] = i
        else:
            target[i] = merged
    if len(kept) == g.t:
        return g
    new_index = {old: pos + 1 for pos, old in enumerate(kept)}
    edges = []
    for i, j in g.edges:
        a = new_index[target[i]]
        b = new_index[target[j]]
        if a != b:
            edges.append((min(a, b), max(a, b)))
    vertices = g.vertices[[old - 1 for old in kept]]
    return EmbeddedGraph(n=g.n, vertices=vertices, edges=tuple(edges))


def _simplex_edges(simplices) -> tuple:
    edges = set()
    for simplex in simplices:
        verts = sorted(simplex)
        for a in range(len(verts)):
            for b in range(a + 1, len(verts)):
                edges.add((verts[a], verts[b]))
    return tuple(sorted(edges))


def subdivide_simplicial(g: EmbeddedGraph, partition, edge, point: SegmentPoint):
    """Split every partition simplex containing the given edge at a point.

    Each containing simplex is replaced by two copies with one endpoint of
    the edge swapped for the new vertex; the graph's edge set becomes the
    union of all simplex edges. Returns (graph, partition).
    """
    i, j = int(edge[0]), int(edge[1])
    if i > j:
        i, j = j, i
    if point.edge != (i, j):
        raise ValueError("point does not lie on the edge being split")
    containing = [s for s in partition if i in s and j in s]
    if not containing:
        raise ValueError(f"edge ({i}, {j}) belongs to no partition simplex")
    g2, new = add_vertex(g, point)
    new_partition = []
    for simplex in partition:
        if i in simplex and j in simplex:
            left = tuple(sorted(v for v in simplex if v != j) + [new])
            right = tuple(sorted(v for v in simplex if v != i) + [new])
            new_partition.append(left)
            new_partition.append(right)
        else:
            new_partition.append(tuple(simplex))
    g3 = EmbeddedGraph(
        n=g2.n, vertices=g2.vertices, edges=_simplex_edges(new_partition)
    )
    return g3, new_partition


def vertices_covered(g: EmbeddedGraph) -> bool:
    """True when every vertex is incident to at least one edge."""
    touched = set()
    for i, j in g.edges:
        touched.add(i)
        touched.add(j)
    return len(touched) == g.t


def sample_segment_point(g: EmbeddedGraph, rng: np.random.Generator) -> SegmentPoint:
    """Uniformly random edge, uniformly random barycentric coordinate."""
    if not g.edges:
        raise ValueError("graph has no edges to sample from")
    edge = g.edges[int(rng.integers(len(g.edges)))]
    return segment_point(g, edge, float(rng.random()))


def min_segment_distance(g: EmbeddedGraph, x) -> float:
    """Euclidean distance from a point to the nearest edge segment."""
    if not g.edges:
        raise ValueError("graph has no edges")
    pt = np.asarray(x, dtype=float).ravel()
    best = math.inf
    for i, j in g.edges:
        a = g.vertex(i)
        b = g.vertex(j)
        d = a - b
        denom = float(d @ d)
        if denom == 0.0:
            proj = b
        else:
            s = float(np.clip((pt - b) @ d / denom, 0.0, 1.0))
            proj = b + s * d
        best = min(best, float(np.linalg.norm(pt - proj)))
    return best
