"""Explicit witness constructions.

* Følner boxes in Z^d projected to finite quotients.
* l-infinity valued measures and the uniform norm.
* Truncated universal covers of graphs as trees of non-backtracking paths,
  witnesses that march toward a fixed end of the tree, and deck elements.
* Fibred witness data for a large-girth family together with a checker for
  its five conditions and the extraction of ordinary witnesses from it.

Cover vertices are tuples ``(base, v1, ..., vk)`` describing a
non-backtracking walk from the base vertex; ``len(w) - 1`` is the depth.
Deck elements are reduced closed walks at the base, acting on the left by
concatenation followed by free reduction.  Nothing is enumerated unless a
caller asks for it, so the truncation radius only limits what may be asked.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import Rejection, SizeBoundExceeded
from .space import SubsetView, bfs_distances, girth, subset
from .witness import WitnessFamily, constrained_pairs

DEFAULT_ENUM_BOUND = 2_000_000


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(str(x))
    return Fraction(x)


# --------------------------------------------------------------------------
# Følner sets


@dataclass(frozen=True)
class FolnerSet:
    """The box ``prod [lower_k, lower_k + sides_k)`` in Z^d."""

    lower: tuple
    sides: tuple

    def __post_init__(self):
        if len(self.lower) != len(self.sides) or not self.sides:
            raise Rejection("Følner box needs matching, nonempty corner and side tuples")
        if any(s < 1 for s in self.sides):
            raise Rejection(f"Følner box sides must be positive, got {self.sides}")

    @property
    def d(self):
        return len(self.sides)

    @property
    def size(self):
        return math.prod(self.sides)

    def points(self):
        return itertools.product(*(range(a, a + s) for a, s in zip(self.lower, self.sides)))

    @property
    def radius(self):
        """Largest l1 norm of a point of F, i.e. the support radius of its projection."""
        return sum(max(abs(a), abs(a + s - 1)) for a, s in zip(self.lower, self.sides))


def folner_box(d, k):
    return FolnerSet((0,) * d, (k,) * d)


def folner_deficiency(F, g):
    """``|F symdiff (g + F)| / |F|`` exactly."""
    g = (g,) if isinstance(g, int) else tuple(g)
    if len(g) != F.d:
        raise Rejection(f"translation {g} has the wrong dimension for a {F.d}-box")
    overlap = math.prod(max(0, s - abs(c)) for s, c in zip(F.sides, g))
    return Fraction(2 * (F.size - overlap), F.size)


def _zd_check(q):
    if q.source[0] != "zd" or q.modulus is None:
        raise Rejection("Følner projection needs a quotient map of Z^d")


def folner_project(F, q, x):
    """Projection of ``g_x + F`` to the block of ``q``, as ``{element: Fraction}``.

    ``g_x`` is the representative of ``x`` with coordinates in ``[0, m)``.
    """
    _zd_check(q)
    if F.d != q.rank:
        raise Rejection(f"Følner box is {F.d}-dimensional, quotient source is Z^{q.rank}")
    m = q.modulus
    gx = q.target.elements[x]
    counts = {}
    for p in F.points():
        y = q.target.index[tuple((a + b) % m for a, b in zip(gx, p))]
        counts[y] = counts.get(y, 0) + 1
    return {y: Fraction(c, F.size) for y, c in sorted(counts.items())}


def folner_family(F, q):
    """Projected measures for every point of the block, with ``S`` = ``F.radius``."""
    _zd_check(q)
    C = subset(q.metric, range(q.target.order))
    measures = {x: folner_project(F, q, x) for x in C.members}
    return WitnessFamily(C, None, F.radius, measures)


def l1_distance(f, g):
    return sum(abs(f.get(z, 0) - g.get(z, 0)) for z in f.keys() | g.keys())


# --------------------------------------------------------------------------
# l-infinity valued measures


@dataclass
class EllInftyMeasure:
    """Map from points to nonnegative vectors over a finite index set."""

    index: tuple
    vectors: dict  # point -> {index: value}

    @classmethod
    def from_sequences(cls, data):
        """Build from ``{point: [v_0, v_1, ...]}`` with indices ``0..k-1``."""
        k = max((len(v) for v in data.values()), default=0)
        return cls(tuple(range(k)), {y: dict(enumerate(v)) for y, v in data.items()})

    def coordinate_sums(self):
        return {i: sum(v.get(i, 0) for v in self.vectors.values()) for i in self.index}

    def is_probability(self, tol=None):
        for i, s in self.coordinate_sums().items():
            if tol is None and s != 1:
                return False
            if tol is not None and abs(s - 1) > tol:
                return False
        return all(c >= 0 for v in self.vectors.values() for c in v.values())

    def __sub__(self, other):
        index = tuple(sorted(set(self.index) | set(other.index), key=repr))
        pts = self.vectors.keys() | other.vectors.keys()
        out = {}
        for y in pts:
            a, b = self.vectors.get(y, {}), other.vectors.get(y, {})
            out[y] = {i: a.get(i, 0) - b.get(i, 0) for i in a.keys() | b.keys()}
        return EllInftyMeasure(index, out)


def uniform_norm(a, b=None):
    """``max_i sum_y |a(y)(i) - b(y)(i)|``; ``a`` may be a measure or a point-to-vector map."""
    if not isinstance(a, EllInftyMeasure):
        a = EllInftyMeasure.from_sequences(a) if _is_seq_map(a) else EllInftyMeasure(_keys(a), a)
    if b is not None:
        if not isinstance(b, EllInftyMeasure):
            b = EllInftyMeasure.from_sequences(b) if _is_seq_map(b) else EllInftyMeasure(_keys(b), b)
        a = a - b
    sums = {}
    for v in a.vectors.values():
        for i, c in v.items():
            sums[i] = sums.get(i, 0) + abs(c)
    return max(sums.values(), default=0)


def _is_seq_map(data):
    return all(isinstance(v, (list, tuple)) for v in data.values())


def _keys(data):
    return tuple(sorted({i for v in data.values() for i in v}, key=repr))


# --------------------------------------------------------------------------
# truncated universal covers


def reduce_walk(walk):
    """Free reduction of a walk: remove every immediate backtrack ``a, b, a``."""
    out = []
    for v in walk:
        if len(out) >= 2 and out[-2] == v:
            out.pop()
        else:
            out.append(v)
    return tuple(out)


def tree_distance(a, b):
    k = 0
    n = min(len(a), len(b))
    while k < n and a[k] == b[k]:
        k += 1
    return len(a) + len(b) - 2 * k


class TreeLift:
    """Universal cover of ``graph`` truncated at depth ``rho`` around a lift of ``base``."""

    def __init__(self, graph, base, rho):
        if graph.min_degree < 2:
            bad = next(v for v in range(graph.vertex_count) if graph.degree(v) < 2)
            raise Rejection(
                f"vertex {bad} of {graph.label or 'the graph'} has degree {graph.degree(bad)}; "
                "the cover is a leafless tree only when every vertex has degree at least 2"
            )
        if rho < 1:
            raise Rejection("truncation radius must be at least 1")
        self.graph = graph
        self.base = base
        self.rho = rho
        self._ray = [base]

    @property
    def root(self):
        return (self.base,)

    def contains(self, w):
        if not w or w[0] != self.base or len(w) - 1 > self.rho:
            return False
        adj = self.graph.adjacency
        for k in range(1, len(w)):
            if w[k] not in adj[w[k - 1]] or (k >= 2 and w[k] == w[k - 2]):
                return False
        return True

    @staticmethod
    def project(w):
        return w[-1]

    def neighbors(self, w):
        out = [w[:-1]] if len(w) > 1 else []
        if len(w) - 1 < self.rho:
            prev = w[-2] if len(w) > 1 else None
            out += [w + (u,) for u in self.graph.adjacency[w[-1]] if u != prev]
        return out

    distance = staticmethod(tree_distance)

    # ambient-metric interface so witness checks can run on cover vertices
    def submatrix(self, rows, cols):
        return np.array([[tree_distance(a, b) for b in cols] for a in rows], dtype=np.int64)

    def ball_members(self, w, r):
        seen = {w}
        frontier = [w]
        for _ in range(r):
            nxt = []
            for v in frontier:
                for u in self.neighbors(v):
                    if u not in seen:
                        seen.add(u)
                        nxt.append(u)
            frontier = nxt
        return sorted(seen, key=lambda v: (len(v), v))

    def vertices(self, depth=None, bound=DEFAULT_ENUM_BOUND):
        depth = self.rho if depth is None else min(depth, self.rho)
        out = [self.root]
        frontier = [self.root]
        for _ in range(depth):
            frontier = [u for w in frontier for u in self.neighbors(w) if len(u) > len(w)]
            out += frontier
            if len(out) > bound:
                raise SizeBoundExceeded("truncated cover", len(out), bound)
        return out

    def edges(self, depth=None):
        return [(w[:-1], w) for w in self.vertices(depth) if len(w) > 1]

    def base_ray(self, length):
        """First ``length`` graph vertices of the ray toward the distinguished end."""
        adj = self.graph.adjacency
        while len(self._ray) < length:
            prev = self._ray[-2] if len(self._ray) > 1 else None
            self._ray.append(next(u for u in adj[self._ray[-1]] if u != prev))
        return self._ray[:length]

    def ray(self, w, n):
        """First ``n`` cover vertices from ``w`` toward the distinguished end."""
        ray = self.base_ray(len(w) + n)
        c = 0
        while c < len(w) and w[c] == ray[c]:
            c += 1
        out = []
        k = len(w)
        while k > c and len(out) < n:
            out.append(w[:k])
            k -= 1
        # w[:c] is on the base ray; continue along it
        k = max(c, 1)
        while len(out) < n:
            out.append(tuple(ray[:k]))
            k += 1
        return out

    def check_tree(self, depth=None):
        """Acyclicity of the enumerated truncation: connected with |E| = |V| - 1."""
        verts = self.vertices(depth)
        vs = set(verts)
        edges = {frozenset((w, u)) for w in verts for u in self.neighbors(w) if u in vs}
        return len(edges) == len(verts) - 1 and all(self.contains(w) for w in verts)


def tree_lift(g, base, rho):
    return TreeLift(g, base, rho)


def local_isometry_holds(t, w, r, level="induced"):
    """Whether the projection maps ``B_w(r)`` onto ``B_{pi(w)}(r)`` faithfully.

    ``radial``: a bijection preserving distances from the center (holds for
    ``2r < girth``).  ``induced``: additionally an isomorphism of induced
    subgraphs (``2r + 1 < girth``).  ``pairwise``: every pair keeps its
    graph distance (``4r < girth``).
    """
    if level not in ("radial", "induced", "pairwise"):
        raise ValueError(f"unknown level {level!r}")
    ball = t.ball_members(w, r)
    images = [t.project(v) for v in ball]
    if len(set(images)) != len(images):
        return False
    center = bfs_distances(t.graph, t.project(w))
    if set(images) != {v for v, d in enumerate(center) if 0 <= d <= r}:
        return False
    if any(center[t.project(v)] != tree_distance(v, w) for v in ball):
        return False
    if level == "radial":
        return True
    lifted = {t.project(v): v for v in ball}
    adj = t.graph.adjacency
    for a in images:
        for b in adj[a]:
            if b in lifted and tree_distance(lifted[a], lifted[b]) != 1:
                return False
    if level == "pairwise":
        dist = {v: bfs_distances(t.graph, v) for v in images}
        return all(tree_distance(a, b) == dist[t.project(a)][t.project(b)]
                   for a, b in itertools.combinations(ball, 2))
    return True


@dataclass
class TreeRayWitness:
    """``f_w`` is uniform with mass ``1/n`` on the first ``n`` vertices of ``ray(w)``."""

    lift: TreeLift
    n: int

    @property
    def S(self):
        return self.n - 1

    def segment(self, w):
        seg = self.lift.ray(w, self.n)
        if not self.lift.contains(w) or any(len(v) - 1 > self.lift.rho for v in seg):
            raise Rejection(
                f"segment of length {self.n} from a depth-{len(w) - 1} vertex leaves the cover "
                f"truncated at radius {self.lift.rho}; rebuild the cover with a larger radius"
            )
        return seg

    def measure(self, w):
        mass = Fraction(1, self.n)
        return {v: mass for v in self.segment(w)}

    def l1(self, a, b):
        return l1_distance(self.measure(a), self.measure(b))

    def family(self, vertices, R):
        pts = list(vertices)
        return WitnessFamily(SubsetView(self.lift, tuple(pts)), R, self.S,
                             {w: self.measure(w) for w in pts})


def tree_ray_witness(t, n):
    if n < 1:
        raise Rejection("segment length n must be at least 1")
    if n - 1 > t.rho:
        raise Rejection(f"segments of length {n} do not fit in a cover truncated at radius {t.rho}")
    return TreeRayWitness(t, n)


# --------------------------------------------------------------------------
# deck transformations


@dataclass(frozen=True)
class DeckElement:
    """Deck transformation given by a reduced closed walk at the base vertex."""

    lift: TreeLift = field(compare=False, repr=False)
    loop: tuple

    @property
    def is_identity(self):
        return len(self.loop) == 1

    def act(self, w):
        return reduce_walk(self.loop + w[1:])

    def apply(self, w):
        """Image of ``w`` or ``None`` when it falls outside the truncation."""
        v = self.act(w)
        return v if self.lift.contains(v) else None

    def inverse(self):
        return DeckElement(self.lift, self.loop[::-1])

    def compose(self, other):
        """``self`` after ``other``."""
        return DeckElement(self.lift, reduce_walk(self.loop + other.loop[1:]))

    @property
    def translation_length(self):
        """Length of the cyclically reduced core of the loop."""
        w = self.loop
        k = 0
        while len(w) - 2 * k > 2 and w[k + 1] == w[len(w) - 2 - k]:
            k += 1
        return len(w) - 1 - 2 * k

    def domain(self, depth=None):
        return [w for w in self.lift.vertices(depth) if self.apply(w) is not None]

    def check(self, depth=None):
        """Commutes with the projection, preserves adjacency and is injective on its domain."""
        dom = self.domain(depth)
        image = {w: self.act(w) for w in dom}
        if len(set(image.values())) != len(image):
            return False
        for w, v in image.items():
            if self.lift.project(v) != self.lift.project(w):
                return False
            if len(w) > 1 and w[:-1] in image and tree_distance(image[w[:-1]], v) != 1:
                return False
        return True


def deck_identity(t):
    return DeckElement(t, t.root)


def deck_align(t, lift1, lift2):
    """The unique deck element taking ``lift1`` to ``lift2``."""
    for w in (lift1, lift2):
        if not t.contains(w):
            raise Rejection(
                f"lift {w[:6]}{'...' if len(w) > 6 else ''} is not a vertex of the cover truncated "
                f"at radius {t.rho}; rebuild the cover with a larger radius"
            )
    if t.project(lift1) != t.project(lift2):
        raise Rejection("the two lifts project to different vertices")
    g = DeckElement(t, reduce_walk(lift2 + lift1[::-1][1:]))
    assert g.act(lift1) == lift2
    return g


def closed_loops(g, base, length, bound=DEFAULT_ENUM_BOUND):
    """All reduced closed walks at ``base`` with at most ``length`` edges, shortest first."""
    adj = g.adjacency
    out = [(base,)]
    stack = [(base,)]
    visited = 0
    while stack:
        w = stack.pop()
        if len(w) - 1 >= length:
            continue
        prev = w[-2] if len(w) > 1 else None
        for u in adj[w[-1]]:
            if u == prev:
                continue
            v = w + (u,)
            visited += 1
            if visited > bound:
                raise SizeBoundExceeded("non-backtracking walk enumeration", visited, bound)
            if u == base:
                out.append(v)
            stack.append(v)
    return sorted(out, key=lambda w: (len(w), w))


# --------------------------------------------------------------------------
# fibred witness data


@dataclass
class _Block:
    index: int
    graph: object
    girth: float
    diameter: int
    dist: np.ndarray
    parent: list  # BFS tree from vertex 0, lowest-index parent
    lift: TreeLift
    canonical: list  # vertex -> cover path from the base


def _bfs_parents(g, root, dist_row):
    parent = [None] * g.vertex_count
    for v in range(g.vertex_count):
        if v != root:
            parent[v] = min(u for u in g.adjacency[v] if dist_row[u] == dist_row[v] - 1)
    return parent


def _path_to(parent, v):
    out = [v]
    while parent[out[-1]] is not None:
        out.append(parent[out[-1]])
    return tuple(reversed(out))


@dataclass
class Chart:
    """A lift of a subset C into the cover and the resulting deck elements ``g_{x,C}``."""

    block: int
    members: tuple  # local vertices
    anchor: int
    lifts: dict  # local vertex -> cover path
    deck: dict  # local vertex -> loop


class FibredWitnessData:
    """Fibres, vectors ``xi^x``, charts and cocycles built from tree-ray witnesses.

    ``xi^x_z(h)`` is the number of vertices over ``z`` among the first ``n``
    vertices of ``ray(h . xhat)``, divided by ``n``; ``xhat`` is the lift of
    ``x`` along the BFS tree from vertex 0.  A chart over ``C`` acts on fibre
    indices by ``(t_C(x) xi)(k) = xi(k g_{x,C})`` where ``g_{x,C}`` carries
    ``xhat`` to the lift of ``x`` in the chart.
    """

    def __init__(self, family, R, eps, n, S, blocks, fiber_bound=DEFAULT_ENUM_BOUND):
        self.family = family
        self.R = R
        self.eps = eps
        self.n = n
        self.S = S
        self.blocks = blocks
        self.fiber_bound = fiber_bound
        # point cache; entries may be overwritten to build tampered datasets
        self.xi_cache = {}
        self.chart_override = {}

    # -- exclusion sets ----------------------------------------------------

    def excluded_blocks(self, L):
        """K_L: blocks whose girth is at most ``2 (L + S)``."""
        return [b.index for b in self.blocks if b.girth <= 2 * (L + self.S)]

    def index_window_length(self, L, i):
        return 2 * (L + self.S) + int(self.blocks[i].girth)

    def index_window(self, L, i):
        b = self.blocks[i]
        return closed_loops(b.graph, 0, self.index_window_length(L, i), self.fiber_bound)

    def fiber(self, L, i, extra=0):
        """Truncated fibre: loops of length at most the index window plus ``extra``.

        ``extra`` is the longest chart element in use, so every transported
        window ``k g_{x,C}`` lands inside the fibre.
        """
        return closed_loops(self.blocks[i].graph, 0, self.index_window_length(L, i) + extra,
                            self.fiber_bound)

    # -- vectors -----------------------------------------------------------

    def xi(self, x, h):
        """``xi^x(h)`` as ``{global point: Fraction}``; ``h`` is a loop at vertex 0."""
        key = (x, h)
        if key not in self.xi_cache:
            i, a = self.family.block_of(x)
            b = self.blocks[i]
            w = reduce_walk(h + b.canonical[a][1:])
            counts = {}
            for v in b.lift.ray(w, self.n):
                z = v[-1]
                counts[z] = counts.get(z, 0) + 1
            off = self.family.offsets[i]
            self.xi_cache[key] = {off + z: Fraction(c, self.n) for z, c in sorted(counts.items())}
        return self.xi_cache[key]

    # -- charts ------------------------------------------------------------

    def chart(self, C):
        """Lift ``C`` (a subset of one block) isometrically and record ``g_{x,C}``."""
        members = tuple(C.members if isinstance(C, SubsetView) else C)
        key = members
        if key in self.chart_override:
            return self.chart_override[key]
        blocks = {self.family.block_of(x)[0] for x in members}
        if len(blocks) != 1:
            raise Rejection("a chart needs a subset of a single block")
        i = blocks.pop()
        b = self.blocks[i]
        off = self.family.offsets[i]
        local = [x - off for x in members]
        sub = b.dist[np.ix_(local, local)]
        ecc = sub.max(axis=1)
        anchor = local[int(np.argmin(ecc))]
        r = int(ecc.min())
        if b.girth <= 2 * r + 1:
            raise Rejection(
                f"subset of radius {r} in block {i} (girth {b.girth}) does not lift isometrically"
            )
        drow = b.dist[anchor]
        lifts = {}
        for y in local:
            path = [y]
            while path[-1] != anchor:
                v = path[-1]
                path.append(min(u for u in b.graph.adjacency[v] if drow[u] == drow[v] - 1))
            lifts[y] = reduce_walk(b.canonical[anchor] + tuple(reversed(path))[1:])
        deck = {y: reduce_walk(lifts[y] + b.canonical[y][::-1][1:]) for y in local}
        chart = Chart(i, tuple(local), anchor, lifts, deck)
        return chart

    def transport(self, chart, x, k):
        """Source index of target index ``k`` under ``t_C(x)``: ``k g_{x,C}``."""
        return reduce_walk(k + chart.deck[x - self.family.offsets[chart.block]][1:])

    def trivialized(self, chart, x, k):
        """``(t_C(x) xi^x)(k)``."""
        return self.xi(x, self.transport(chart, x, k))

    def cocycle(self, chart1, chart2, x):
        """Loop ``c`` with ``t_{C1}(x) t_{C2}(x)^{-1}`` equal to right multiplication by ``c``."""
        a = x - self.family.offsets[chart1.block]
        g1, g2 = chart1.deck[a], chart2.deck[a]
        return reduce_walk(g1 + g2[::-1][1:])

    # -- admissible subsets ------------------------------------------------

    def admissible_balls(self, L):
        """Distinct balls ``B_x(L)`` in blocks outside ``K_L``, as sorted member tuples."""
        excluded = set(self.excluded_blocks(L))
        out = []
        for b in self.blocks:
            if b.index in excluded:
                continue
            off = self.family.offsets[b.index]
            seen = set()
            for x in range(b.graph.vertex_count):
                members = tuple(off + int(v) for v in np.flatnonzero(b.dist[x] <= L))
                if members not in seen:
                    seen.add(members)
                    out.append(members)
        return out

    def summary(self):
        return {
            "R": self.R,
            "eps": str(self.eps),
            "n": self.n,
            "S": self.S,
            "blocks": [
                {"index": b.index, "name": b.graph.label, "girth": _json_girth(b.girth),
                 "diameter": b.diameter}
                for b in self.blocks
            ],
        }


def _json_girth(g):
    return None if math.isinf(g) else int(g)


def segment_length(R, eps):
    """Smallest ``n`` with ``2R/n <= eps``."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise Rejection(f"eps must be positive, got {eps}")
    if R < 0:
        raise Rejection("R must be nonnegative")
    return max(1, math.ceil(Fraction(2 * R) / eps))


def assemble_fibred(family, R, eps, fiber_bound=DEFAULT_ENUM_BOUND):
    """Fibred data for a coarse union of graphs with min degree >= 2 and growing girth."""
    eps = as_fraction(eps)
    n = segment_length(R, eps)
    S = n - 1
    blocks = []
    prev = 0
    for i, g in enumerate(family.blocks):
        if g.min_degree < 2:
            raise Rejection(f"block {i} ({g.label}) has a vertex of degree below 2")
        gi = girth(g)
        if gi < prev:
            raise Rejection(f"block girths must be non-decreasing; block {i} has girth {gi} < {prev}")
        prev = gi
        dist = family.block_metric(i).dist
        parent = _bfs_parents(g, 0, dist[0])
        diam = int(dist.max())
        # deepest cover vertex ever touched: fibre loop, then a canonical lift, then a segment
        rho = 2 * (diam + S) + int(gi if math.isfinite(gi) else 0) + 4 * diam + n + 2 * R + 8
        lift = TreeLift(g, 0, rho)
        canonical = [_path_to(parent, v) for v in range(g.vertex_count)]
        blocks.append(_Block(i, g, gi, diam, dist, parent, lift, canonical))
    return FibredWitnessData(family, R, eps, n, S, blocks, fiber_bound)


@dataclass
class FibredReport:
    L: int
    violations: list = field(default_factory=list)
    subsets_checked: int = 0
    pairs_checked: int = 0
    overlap_pairs_checked: int = 0
    max_variation: Fraction = Fraction(0)
    excluded: list = field(default_factory=list)
    fiber_sizes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def kinds(self):
        return sorted({v["condition"] for v in self.violations})

    def to_json(self):
        by = {c: [v for v in self.violations if v["condition"] == c] for c in (1, 2, 3, 4, 5)}
        return {
            "L": self.L,
            "passed": self.passed,
            "excluded_blocks": self.excluded,
            "subsets_checked": self.subsets_checked,
            "pairs_checked": self.pairs_checked,
            "overlap_pairs_checked": self.overlap_pairs_checked,
            "max_variation": str(self.max_variation),
            "fiber_sizes": {str(k): v for k, v in self.fiber_sizes.items()},
            "conditions": {
                str(c): {"passed": not vs, "violations": [_jsonable(v) for v in vs[:20]]}
                for c, vs in by.items()
            },
        }


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    return v


def check_fibred(data, L):
    """Verify the five fibred conditions on every admissible ball of radius ``L``."""
    rep = FibredReport(L, excluded=data.excluded_blocks(L))
    fam = data.family
    balls = data.admissible_balls(L)
    charts = {}
    for C in balls:
        try:
            charts[C] = data.chart(C)
        except Rejection as exc:
            rep.violations.append({"condition": 3, "subset": list(C), "reason": str(exc)})
    windows, fibers, extra = {}, {}, {}
    for ch in charts.values():
        longest = max(len(g) - 1 for g in ch.deck.values())
        extra[ch.block] = max(extra.get(ch.block, 0), longest)
    for i, e in extra.items():
        windows[i] = data.index_window(L, i)
        fibers[i] = set(data.fiber(L, i, e))
    rep.fiber_sizes = {i: len(f) for i, f in fibers.items()}
    checked_points = set()
    for C, ch in charts.items():
        rep.subsets_checked += 1
        window, fiber = windows[ch.block], fibers[ch.block]
        # conditions (1) and (2) on the whole truncated fibre of each point
        for x in C:
            if x in checked_points:
                continue
            checked_points.add(x)
            for h in sorted(fiber, key=lambda w: (len(w), w)):
                vec = data.xi(x, h)
                total = sum(vec.values())
                if total != 1 or any(c < 0 for c in vec.values()):
                    rep.violations.append(
                        {"condition": 2, "point": x, "index": list(h), "measured": total})
                for z, c in vec.items():
                    if c != 0 and fam.distance(x, z) > data.S:
                        rep.violations.append({
                            "condition": 1, "point": x, "index": list(h), "at": z,
                            "measured": fam.distance(x, z), "bound": data.S})
        # condition (3): t_C(x) is injective from the window into the fibre
        for x in C:
            images = [data.transport(ch, x, k) for k in window]
            if len(set(images)) != len(images) or not all(im in fiber for im in images):
                rep.violations.append({"condition": 3, "subset": list(C), "point": x})
        # condition (4): uniform-norm variation on R-close pairs
        for x, y in constrained_pairs(_Sub(fam, C), data.R):
            rep.pairs_checked += 1
            v = max(l1_distance(data.trivialized(ch, x, k), data.trivialized(ch, y, k))
                    for k in window)
            rep.max_variation = max(rep.max_variation, v)
            if v > data.eps:
                rep.violations.append(
                    {"condition": 4, "subset": list(C), "pair": [x, y], "measured": v,
                     "bound": data.eps})
    # condition (5): cocycle constancy on overlaps
    by_block = {}
    for C, ch in charts.items():
        by_block.setdefault(ch.block, []).append((C, ch))
    for items in by_block.values():
        for (C1, ch1), (C2, ch2) in itertools.combinations(items, 2):
            common = sorted(set(C1) & set(C2))
            if not common:
                continue
            rep.overlap_pairs_checked += 1
            values = {data.cocycle(ch1, ch2, x) for x in common}
            if len(values) != 1:
                rep.violations.append({
                    "condition": 5, "subsets": [list(C1), list(C2)],
                    "cocycles": sorted(list(v) for v in values)})
                continue
            # the cocycle is the deck element carrying the second chart's lift to the first
            b = data.blocks[ch1.block]
            a = common[0] - fam.offsets[ch1.block]
            c = deck_align(b.lift, ch2.lifts[a], ch1.lifts[a]).loop
            if values.pop() != c:
                rep.violations.append({
                    "condition": 5, "subsets": [list(C1), list(C2)], "reason": "deck mismatch"})
    return rep


@dataclass
class _Sub:
    ambient: object
    members: tuple


def fibred_to_local(data, C):
    """Ordinary witnesses on ``C``: ``f_x(z) = (t_C(x) xi^x)_z(e)``."""
    members = tuple(C.members if isinstance(C, SubsetView) else sorted(C))
    if not members:
        raise Rejection("empty subset")
    fam = data.family
    L = int(fam.submatrix(members, members).max())
    K = data.excluded_blocks(L + data.S)
    hit = sorted({fam.block_of(x)[0] for x in members} & set(K))
    if hit:
        raise Rejection(
            f"subset of diameter {L} meets K_{{L+S}} = blocks {K} (blocks {hit}); "
            "it is not admissible"
        )
    ch = data.chart(members)
    e = (0,)
    measures = {x: dict(data.trivialized(ch, x, e)) for x in members}
    view = C if isinstance(C, SubsetView) else subset(fam, members)
    return WitnessFamily(view, data.R, data.S, measures)


def extraction_dominance(data, C, window_L=None):
    """Pairs ``(l1 of extracted measures, uniform-norm distance)`` on R-close pairs of C."""
    members = tuple(C.members if isinstance(C, SubsetView) else sorted(C))
    ch = data.chart(members)
    L = int(data.family.submatrix(members, members).max()) if window_L is None else window_L
    window = data.index_window(L, ch.block)
    w = fibred_to_local(data, C)
    out = []
    for x, y in constrained_pairs(_Sub(data.family, members), data.R):
        u = max(l1_distance(data.trivialized(ch, x, k), data.trivialized(ch, y, k)) for k in window)
        out.append((w.l1(x, y), u))
    return out
