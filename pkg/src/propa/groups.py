"""Finite groups, Cayley graphs, quotient maps of Z^d and free groups, box spaces.

Group elements are indices into ``FiniteGroup.elements``; the concrete
representatives (ints, tuples, matrices as 4-tuples, permutations) stay
behind the multiplication function.
"""

from __future__ import annotations

import itertools
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import Rejection, SizeBoundExceeded
from .space import CoarseUnion, Graph, bfs_metric

log = logging.getLogger(__name__)

DEFAULT_CLOSURE_BOUND = 100_000
DEFAULT_BALL_BOUND = 5_000
EXHAUSTIVE_AXIOM_ORDER = 512


@dataclass(eq=False)
class FiniteGroup:
    name: str
    elements: list
    op: object  # (rep, rep) -> rep
    identity: int
    generators: list
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {e: i for i, e in enumerate(self.elements)}

    @property
    def order(self):
        return len(self.elements)

    def mul(self, i, j):
        return self.index[self.op(self.elements[i], self.elements[j])]

    @cached_property
    def _inverses(self):
        inv = [None] * self.order
        # the right-multiplication orbit of each element by itself closes at the identity
        for i in range(self.order):
            if inv[i] is not None:
                continue
            k, prev = i, self.identity
            while k != self.identity:
                prev, k = k, self.mul(k, i)
            inv[i] = prev
            inv[prev] = i
        return inv

    def inv(self, i):
        return self._inverses[i]

    @cached_property
    def right_tables(self):
        """Right multiplication by each generator, as index arrays."""
        return [np.array([self.mul(x, s) for x in range(self.order)]) for s in self.generators]

    def check_axioms(self, samples=2000, seed=0):
        """Group laws and generator properties.

        Up to order 512 associativity is checked on all pairs against every
        generator (Light's test, which suffices because the generators
        generate); larger groups are sampled.
        """
        n = self.order
        e = self.identity
        rng = random.Random(seed)
        if n <= EXHAUSTIVE_AXIOM_ORDER:
            triples = ((a, b, s) for a in range(n) for b in range(n) for s in self.generators)
            singles = range(n)
        else:
            triples = ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(samples))
            singles = (rng.randrange(n) for _ in range(samples))
        for a, b, c in triples:
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                return False
        for a in singles:
            if self.mul(a, e) != a or self.mul(e, a) != a or self.mul(a, self.inv(a)) != e:
                return False
        gens = set(self.generators)
        if any(self.inv(s) not in gens for s in gens):
            return False
        return len(_closure_indices(self)) == n


def _closure_indices(g):
    seen = {g.identity}
    queue = deque([g.identity])
    while queue:
        x = queue.popleft()
        for s in g.generators:
            y = g.mul(x, s)
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


def _closure(identity, gens, op, bound, what):
    """Elements generated by ``gens``, in BFS order from the identity."""
    elements = [identity]
    seen = {identity}
    queue = deque([identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = op(x, s)
            if y not in seen:
                seen.add(y)
                elements.append(y)
                if len(elements) > bound:
                    raise SizeBoundExceeded(f"closure of {what}", len(elements), bound)
                queue.append(y)
    return elements


def is_prime(p):
    return p >= 2 and all(p % q for q in range(2, int(p**0.5) + 1))


def cyclic(m):
    if m < 1:
        raise Rejection(f"cyclic group needs m >= 1, got {m}")
    gens = [] if m == 1 else ([1] if m == 2 else [1, m - 1])
    return FiniteGroup(f"Z/{m}", list(range(m)), lambda a, b: (a + b) % m, 0, gens)


def torus(m, d):
    """(Z/m)^d with generators +e_1, -e_1, ..., +e_d, -e_d (duplicates kept)."""
    if m < 1 or d < 1:
        raise Rejection("torus needs m >= 1 and d >= 1")
    elements = list(itertools.product(range(m), repeat=d))
    index = {e: i for i, e in enumerate(elements)}
    gens = []
    for k in range(d):
        for s in (1, -1):
            v = [0] * d
            v[k] = s % m
            gens.append(index[tuple(v)])
    op = lambda a, b: tuple((x + y) % m for x, y in zip(a, b))  # noqa: E731
    name = f"Z/{m}" if d == 1 else f"(Z/{m})^{d}"
    return FiniteGroup(name, elements, op, 0, gens, index)


def product(g, h):
    elements = [(a, b) for a in g.elements for b in h.elements]
    ea, eb = g.elements[g.identity], h.elements[h.identity]
    index = {e: i for i, e in enumerate(elements)}
    gens = [index[(g.elements[s], eb)] for s in g.generators]
    gens += [index[(ea, h.elements[s])] for s in h.generators]
    op = lambda x, y: (g.op(x[0], y[0]), h.op(x[1], y[1]))  # noqa: E731
    return FiniteGroup(f"{g.name}x{h.name}", elements, op, index[(ea, eb)], gens, index)


def sl2(p):
    if not is_prime(p):
        raise Rejection(f"sl2 needs a prime modulus, got {p}")
    if p > 31:
        raise Rejection(f"sl2 is limited to primes p <= 31, got {p}")

    def op(x, y):
        a, b, c, d = x
        e, f, g, h = y
        return ((a * e + b * g) % p, (a * f + b * h) % p, (c * e + d * g) % p, (c * f + d * h) % p)

    A, Ainv = (1, 1, 0, 1), (1, p - 1, 0, 1)
    B, Binv = (1, 0, 1, 1), (1, 0, p - 1, 1)
    gens = [A, Ainv, B, Binv]
    elements = _closure((1, 0, 0, 1), gens, op, DEFAULT_CLOSURE_BOUND, f"SL2({p})")
    index = {e: i for i, e in enumerate(elements)}
    return FiniteGroup(f"SL2({p})", elements, op, 0, [index[s] for s in gens], index)


def perm_group(perms, bound=DEFAULT_CLOSURE_BOUND):
    perms = [tuple(p) for p in perms]
    if not perms:
        raise Rejection("perm-gens needs at least one permutation")
    n = len(perms[0])
    for p in perms:
        if sorted(p) != list(range(n)):
            raise Rejection(f"{p} is not a permutation of 0..{n - 1}")
    op = lambda a, b: tuple(a[i] for i in b)  # noqa: E731
    gens = []
    for p in perms:
        inv = [0] * n
        for i, v in enumerate(p):
            inv[v] = i
        for q in (p, tuple(inv)):
            if q not in gens:
                gens.append(q)
    ident = tuple(range(n))
    gens = [q for q in gens if q != ident]
    elements = _closure(ident, gens, op, bound, "permutation generators")
    index = {e: i for i, e in enumerate(elements)}
    return FiniteGroup(f"Perm{n}", elements, op, 0, [index[q] for q in gens], index)


def make_group(desc, closure_bound=DEFAULT_CLOSURE_BOUND):
    """Build a group from ``cyclic:m``, ``sl2:p``, ``A*B`` (direct product),
    or ``{"perm": [[...], ...]}``."""
    if isinstance(desc, dict):
        if "perm" in desc:
            return perm_group(desc["perm"], closure_bound)
        raise Rejection(f"unknown group descriptor {desc!r}")
    if isinstance(desc, (list, tuple)):
        kind = desc[0]
        if kind == "product":
            return product(make_group(desc[1], closure_bound), make_group(desc[2], closure_bound))
        if kind == "perm":
            return perm_group(desc[1], closure_bound)
        desc = f"{desc[0]}:{desc[1]}"
    text = desc.replace(" ", "").lower()
    if "*" in text:
        left, right = text.split("*", 1)
        return product(make_group(left, closure_bound), make_group(right, closure_bound))
    kind, _, arg = text.replace("(", ":").rstrip(")").partition(":")
    try:
        n = int(arg)
    except ValueError:
        raise Rejection(f"bad group descriptor {desc!r}") from None
    if kind == "cyclic":
        return cyclic(n)
    if kind == "sl2":
        return sl2(n)
    raise Rejection(f"unknown group kind {kind!r}")


def cayley_graph(g):
    if g.identity in g.generators:
        raise Rejection("the identity cannot be a generator")
    gens = set(g.generators)
    if any(g.inv(s) not in gens for s in gens):
        raise Rejection("generating set must be symmetric")
    edges = set()
    for t in g.right_tables:
        for x, y in enumerate(t.tolist()):
            edges.add((min(x, y), max(x, y)))
    try:
        return Graph.from_edges(g.order, sorted(edges), g.name, vertex_transitive=True)
    except Rejection as exc:
        raise Rejection(f"generators do not generate {g.name}: {exc}") from None


# --------------------------------------------------------------------------
# quotient maps


@dataclass(eq=False)
class QuotientMap:
    """Homomorphism from ``zd(d)`` or ``free(k)`` onto a finite group.

    Source generators are ordered ``+e1, -e1, +e2, -e2, ...`` for Z^d and
    ``a1, a1^-1, a2, a2^-1, ...`` for the free group; ``images[k]`` is the
    target element assigned to source generator ``k``.
    """

    source: tuple  # ("zd", d) or ("free", k)
    target: FiniteGroup
    images: list
    modulus: int | None = None

    @property
    def rank(self):
        return self.source[1]

    @cached_property
    def graph(self):
        return cayley_graph(self.target)

    @cached_property
    def metric(self):
        return bfs_metric(self.graph)

    def apply(self, word):
        x = self.target.identity
        for k in word:
            x = self.target.mul(x, self.images[k])
        return x

    def apply_vector(self, v):
        """Image of a Z^d vector (zd sources only)."""
        if self.source[0] != "zd":
            raise Rejection("vector normal form only exists for zd sources")
        return self.apply(vector_word(v))

    def source_ball(self, L, bound=DEFAULT_BALL_BOUND):
        """Words spanning ``B_e(L)`` and their pairwise source distances."""
        kind, r = self.source
        if kind == "zd":
            vecs = [v for v in itertools.product(range(-L, L + 1), repeat=r) if sum(map(abs, v)) <= L]
            if len(vecs) > bound:
                raise SizeBoundExceeded("source ball", len(vecs), bound)
            arr = np.array(vecs, dtype=np.int64).reshape(len(vecs), r)
            dist = np.abs(arr[:, None, :] - arr[None, :, :]).sum(axis=2)
            return [vector_word(v) for v in vecs], dist
        words = free_ball(r, L, bound)
        n = len(words)
        dist = np.zeros((n, n), dtype=np.int64)
        for a in range(n):
            for b in range(a + 1, n):
                u, v = words[a], words[b]
                k = 0
                while k < min(len(u), len(v)) and u[k] == v[k]:
                    k += 1
                dist[a, b] = dist[b, a] = len(u) + len(v) - 2 * k
        return words, dist


def vector_word(v):
    word = []
    for k, c in enumerate(v):
        word += [2 * k if c > 0 else 2 * k + 1] * abs(c)
    return word


def free_ball(k, L, bound=DEFAULT_BALL_BOUND):
    """Reduced words of length <= L in the free group on k generators."""
    words = [()]
    frontier = [()]
    for _ in range(L):
        nxt = []
        for w in frontier:
            for g in range(2 * k):
                if w and w[-1] == g ^ 1:
                    continue
                nxt.append(w + (g,))
        words += nxt
        frontier = nxt
        if len(words) > bound:
            raise SizeBoundExceeded("source ball", len(words), bound)
    return words


def quotient_apply(q, word):
    return q.apply(word)


def is_L_isometric(q, L, bound=DEFAULT_BALL_BOUND):
    """Whether ``q`` restricted to the source ball of radius L is an isometry onto its image."""
    if L < 0:
        raise Rejection("L must be nonnegative")
    if L == 0:
        return True
    words, dsrc = q.source_ball(L, bound)
    img = [q.apply(w) for w in words]
    dtgt = q.metric.dist[np.ix_(img, img)]
    return bool((dsrc == dtgt).all())


# --------------------------------------------------------------------------
# box spaces


@dataclass(eq=False)
class BoxSpaceFamily:
    source: dict
    maps: list
    union: CoarseUnion
    nested: bool
    levels: list
    warnings: list = field(default_factory=list)

    def to_json(self):
        return {"source": self.source, "levels": self.levels, "space": self.union.to_json()}


def _zd_map(d, m):
    target = torus(m, d)
    return QuotientMap(("zd", d), target, list(target.generators), modulus=m)


def _free_map(k, target_desc, images=None):
    target = make_group(target_desc)
    if images is None:
        if len(target.generators) < 2 * k:
            raise Rejection(f"{target.name} has fewer than {2 * k} generators")
        images = list(target.generators[: 2 * k])
    if len(images) != 2 * k:
        raise Rejection(f"free({k}) needs {2 * k} generator images")
    for i in range(k):
        if target.mul(images[2 * i], images[2 * i + 1]) != target.identity:
            raise Rejection(f"images of a{i + 1} and its inverse are not inverse in {target.name}")
    if target.generators[: 2 * k] != images:
        target = FiniteGroup(target.name, target.elements, target.op, target.identity,
                             sorted(set(images), key=images.index), target.index)
    return QuotientMap(("free", k), target, images)


def box_space(source, d=1, moduli=None, k=2, targets=None, images=None):
    """Family of quotients of ``zd(d)`` (by moduli) or ``free(k)`` (onto targets)."""
    warnings = []
    if source == "zd":
        moduli = list(moduli or [])
        if not moduli:
            raise Rejection("zd box space needs at least one modulus")
        if any(b <= a for a, b in zip(moduli, moduli[1:])):
            raise Rejection(f"moduli must be strictly increasing, got {moduli}")
        maps = [_zd_map(d, m) for m in moduli]
        divides = [b % a == 0 for a, b in zip(moduli, moduli[1:])]
        nested = all(divides)
        if not nested:
            bad = [(a, b) for (a, b), ok in zip(zip(moduli, moduli[1:]), divides) if not ok]
            msg = f"moduli {bad} are not divisible: family of quotients, not a filtration"
            warnings.append(msg)
            log.warning(msg)
        src = {"type": "zd", "d": d}
        levels = [{"modulus": m, "nested": nested} for m in moduli]
    elif source == "free":
        targets = list(targets or [])
        if not targets:
            raise Rejection("free box space needs at least one target group")
        maps = [_free_map(k, t, images) for t in targets]
        nested = False
        src = {"type": "free", "k": k}
        levels = [{"target": t, "nested": False} for t in targets]
    else:
        raise Rejection(f"unknown source group {source!r}")
    union = CoarseUnion([q.graph for q in maps], name=f"box-{source}")
    for i, q in enumerate(maps):
        union._metrics[i] = q.metric
    return BoxSpaceFamily(src, maps, union, nested, levels, warnings)


def family_from_json(data):
    src = data["source"]
    if src["type"] == "zd":
        return box_space("zd", d=src["d"], moduli=[lv["modulus"] for lv in data["levels"]])
    return box_space("free", k=src["k"], targets=[lv["target"] for lv in data["levels"]])
