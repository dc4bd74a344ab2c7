"""Finite graphs, their path metrics, girth, balls and coarse disjoint unions.

Distances are exact integers throughout.  A :class:`CoarseUnion` keeps one
all-pairs matrix per block and answers cross-block distances with the
box-space rule ``max(diam X_i, diam X_j) + 1``.
"""

from __future__ import annotations

import json
import math
import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .cages import NAMED
from .errors import Rejection

INFINITE = math.inf


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    adjacency: tuple[tuple[int, ...], ...]
    label: str = ""
    # Set by constructors that know the graph is vertex-transitive
    # (Cayley graphs, cycles, complete graphs); the profiler then tests one center.
    vertex_transitive: bool = False

    def __post_init__(self):
        if len(self.adjacency) != self.vertex_count:
            raise Rejection("adjacency length does not match vertex count")
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise Rejection(f"neighbors of {v} must be sorted and distinct")
            for u in nbrs:
                if u == v:
                    raise Rejection(f"self-loop at vertex {v}")
                if not 0 <= u < self.vertex_count or v not in self.adjacency[u]:
                    raise Rejection(f"edge ({v},{u}) is not symmetric")

    @classmethod
    def from_edges(cls, n, edges, label="", require_connected=True, vertex_transitive=False):
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise Rejection(f"edge ({u},{v}) out of range for {n} vertices")
            if u == v:
                raise Rejection(f"self-loop at vertex {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        g = cls(n, tuple(tuple(sorted(s)) for s in nbrs), label, vertex_transitive)
        if require_connected:
            comps = components(g)
            if len(comps) != 1:
                shown = "; ".join(str(c if len(c) <= 8 else c[:8] + ["..."]) for c in comps)
                raise Rejection(f"graph {label or ''} is disconnected: components {shown}")
        return g

    def edges(self):
        return [(u, v) for u in range(self.vertex_count) for v in self.adjacency[u] if u < v]

    @property
    def edge_count(self):
        return sum(len(a) for a in self.adjacency) // 2

    def degree(self, v):
        return len(self.adjacency[v])

    @property
    def min_degree(self):
        return min((len(a) for a in self.adjacency), default=0)

    def fingerprint(self):
        return (self.vertex_count, self.adjacency)


def components(g):
    seen = [False] * g.vertex_count
    out = []
    for s in range(g.vertex_count):
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [s], deque([s])
        while queue:
            v = queue.popleft()
            for u in g.adjacency[v]:
                if not seen[u]:
                    seen[u] = True
                    comp.append(u)
                    queue.append(u)
        out.append(sorted(comp))
    return out


_DESC = re.compile(r"^(cycle|path|complete)[:(](\d+)\)?$")


def build_graph(desc):
    """Build a graph from a descriptor.

    ``desc`` is ``"cycle:6"``, ``"path:4"``, ``"complete:4"`` (parenthesised
    forms like ``"cycle(6)"`` also work), a cage name (``petersen``,
    ``heawood``, ``mcgee``, ``tutte-coxeter``), or a mapping with
    ``vertices`` and ``edges`` keys and an optional ``name``.
    """
    if isinstance(desc, dict):
        return Graph.from_edges(
            int(desc["vertices"]),
            [tuple(e) for e in desc["edges"]],
            desc.get("name", ""),
            vertex_transitive=bool(desc.get("transitive", False)),
        )
    name = desc.strip().lower().replace("_", "-")
    if name in NAMED:
        n, edges = NAMED[name]
        return Graph.from_edges(n, edges, name)
    m = _DESC.match(name)
    if not m:
        raise Rejection(f"unknown graph descriptor {desc!r}")
    kind, n = m.group(1), int(m.group(2))
    if kind == "cycle":
        if n < 3:
            raise Rejection(f"cycle needs n >= 3, got {n}")
        return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)], f"C{n}", vertex_transitive=True)
    if kind == "path":
        if n < 1:
            raise Rejection(f"path needs n >= 1, got {n}")
        return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)], f"P{n}")
    if n < 1:
        raise Rejection(f"complete graph needs n >= 1, got {n}")
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    return Graph.from_edges(n, edges, f"K{n}", vertex_transitive=True)


def bfs_distances(g, source, skip_edge=None):
    """Distances from ``source``; -1 marks unreachable vertices."""
    dist = [-1] * g.vertex_count
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in g.adjacency[v]:
            if dist[u] >= 0:
                continue
            if skip_edge is not None and {u, v} == skip_edge:
                continue
            dist[u] = dist[v] + 1
            queue.append(u)
    return dist


@dataclass(frozen=True, eq=False)
class MetricSpace:
    """Finite integer metric on points ``0..n-1`` given by a distance matrix."""

    dist: np.ndarray

    @property
    def size(self):
        return self.dist.shape[0]

    def distance(self, x, y):
        return int(self.dist[x, y])

    def ball_members(self, center, radius):
        return [int(v) for v in np.flatnonzero(self.dist[center] <= radius)]

    def submatrix(self, rows, cols):
        return self.dist[np.ix_(rows, cols)]

    def check_axioms(self):
        d = self.dist
        if (np.diag(d) != 0).any() or (d != d.T).any():
            return False
        off = d + np.eye(len(d), dtype=d.dtype)
        if (off <= 0).any():
            return False
        # d[x,z] <= d[x,y] + d[y,z] for all y
        for y in range(len(d)):
            if (d > d[:, [y]] + d[[y], :]).any():
                return False
        return True


def bfs_metric(g):
    dist = np.empty((g.vertex_count, g.vertex_count), dtype=np.int64)
    for s in range(g.vertex_count):
        row = bfs_distances(g, s)
        if -1 in row:
            raise Rejection(f"graph {g.label} is disconnected; no finite metric")
        dist[s] = row
    return MetricSpace(dist)


def girth(g):
    """Length of the shortest cycle, or ``INFINITE`` for a forest.

    Each edge is removed in turn; the BFS distance between its endpoints
    plus one is the shortest cycle through that edge.
    """
    best = INFINITE
    for u, v in g.edges():
        d = bfs_distances(g, u, skip_edge={u, v})[v]
        if d >= 0:
            best = min(best, d + 1)
    return best


def diameter(g):
    return int(bfs_metric(g).dist.max()) if g.vertex_count else 0


class CoarseUnion:
    """Coarse disjoint union of connected finite graphs.

    Points are numbered globally, block by block, in block order.
    """

    def __init__(self, blocks, name=""):
        blocks = list(blocks)
        if not blocks:
            raise Rejection("a coarse disjoint union needs at least one block")
        for i, b in enumerate(blocks):
            if b.vertex_count == 0:
                raise Rejection(f"block {i} is empty")
        self.blocks = blocks
        self.name = name
        self.offsets = [0]
        for b in blocks:
            self.offsets.append(self.offsets[-1] + b.vertex_count)
        self._metrics = {}
        self._block_of = np.repeat(np.arange(len(blocks)), [b.vertex_count for b in blocks])

    @property
    def size(self):
        return self.offsets[-1]

    def __len__(self):
        return len(self.blocks)

    def block_metric(self, i):
        if i not in self._metrics:
            # identical graph objects (e.g. duplicated families) share one matrix
            for j, m in self._metrics.items():
                if self.blocks[j] is self.blocks[i]:
                    self._metrics[i] = m
                    break
            else:
                self._metrics[i] = bfs_metric(self.blocks[i])
        return self._metrics[i]

    @cached_property
    def block_diameters(self):
        return [int(self.block_metric(i).dist.max()) for i in range(len(self.blocks))]

    def cross_distance(self, i, j):
        return max(self.block_diameters[i], self.block_diameters[j]) + 1

    def block_of(self, x):
        i = int(self._block_of[x])
        return i, x - self.offsets[i]

    def point(self, i, local):
        return self.offsets[i] + local

    def block_points(self, i):
        return list(range(self.offsets[i], self.offsets[i + 1]))

    def distance(self, x, y):
        i, a = self.block_of(x)
        j, b = self.block_of(y)
        if i == j:
            return int(self.block_metric(i).dist[a, b])
        return self.cross_distance(i, j)

    def ball_members(self, center, radius):
        i, a = self.block_of(center)
        off = self.offsets[i]
        out = [off + int(v) for v in np.flatnonzero(self.block_metric(i).dist[a] <= radius)]
        for j in range(len(self.blocks)):
            if j != i and self.cross_distance(i, j) <= radius:
                out.extend(self.block_points(j))
        return sorted(out)

    def submatrix(self, rows, cols):
        rows, cols = list(rows), list(cols)
        out = np.empty((len(rows), len(cols)), dtype=np.int64)
        rb = [self.block_of(x) for x in rows]
        cb = [self.block_of(y) for y in cols]
        for i in {b for b, _ in rb}:
            ri = [k for k, (b, _) in enumerate(rb) if b == i]
            for j in {b for b, _ in cb}:
                cj = [k for k, (b, _) in enumerate(cb) if b == j]
                if i == j:
                    d = self.block_metric(i).dist
                    out[np.ix_(ri, cj)] = d[np.ix_([rb[k][1] for k in ri], [cb[k][1] for k in cj])]
                else:
                    out[np.ix_(ri, cj)] = self.cross_distance(i, j)
        return out

    def to_json(self):
        return {
            "blocks": [
                {
                    "name": b.label or f"X{i}",
                    "vertices": b.vertex_count,
                    "edges": [list(e) for e in b.edges()],
                    **({"transitive": True} if b.vertex_transitive else {}),
                }
                for i, b in enumerate(self.blocks)
            ]
        }

    @classmethod
    def from_json(cls, data, name=""):
        if "space" in data and "blocks" not in data:
            data = data["space"]
        return cls([build_graph(b) for b in data["blocks"]], name=name)

    def to_dot(self):
        lines = ["graph coarse_union {"]
        for i, b in enumerate(self.blocks):
            lines.append(f'  subgraph cluster_{i} {{\n    label="{b.label or f"X{i}"}";')
            off = self.offsets[i]
            for v in range(b.vertex_count):
                lines.append(f"    {off + v};")
            for u, v in b.edges():
                lines.append(f"    {off + u} -- {off + v};")
            lines.append("  }")
        lines.append("}")
        return "\n".join(lines) + "\n"


def coarse_disjoint_union(blocks, name=""):
    return CoarseUnion(blocks, name=name)


def load_space(path):
    data = json.loads(Path(path).read_text())
    return CoarseUnion.from_json(data, name=Path(path).stem)


@dataclass(frozen=True, eq=False)
class SubsetView:
    ambient: object
    members: tuple
    diameter: int = field(default=0)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def subset(space, members):
    if isinstance(space, Graph):
        space = bfs_metric(space)
    members = tuple(sorted(set(int(m) for m in members)))
    if not members:
        return SubsetView(space, (), 0)
    d = space.submatrix(members, members)
    return SubsetView(space, members, int(d.max()))


def ball(space, center, radius):
    if isinstance(space, Graph):
        space = bfs_metric(space)
    if radius < 0:
        raise Rejection("ball radius must be nonnegative")
    return subset(space, space.ball_members(center, radius))
