"""Brute-force reference computations kept apart from the package code."""

import itertools


def shortest_simple_cycle(g):
    """Exhaustive DFS over simple paths; each cycle is rooted at its smallest vertex."""
    best = None
    adj = g.adjacency
    for root in range(g.vertex_count):
        stack = [(root, (root,))]
        while stack:
            v, path = stack.pop()
            if best is not None and len(path) >= best:
                continue
            for u in adj[v]:
                if u == root and len(path) >= 3:
                    best = len(path) if best is None else min(best, len(path))
                elif u > root and u not in path:
                    stack.append((u, path + (u,)))
    return best


def floyd_warshall(g):
    n = g.vertex_count
    inf = float("inf")
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for u, v in g.edges():
        d[u][v] = d[v][u] = 1
    for k, i, j in itertools.product(range(n), repeat=3):
        if d[i][k] + d[k][j] < d[i][j]:
            d[i][j] = d[i][k] + d[k][j]
    return d


def cycle_l_isometric(m, L):
    """Z -> Z/m is an isometry on [-L, L] iff all pairwise distances survive reduction."""
    pts = range(-L, L + 1)
    return all(min(abs(a - b) % m, m - abs(a - b) % m) == abs(a - b) for a in pts for b in pts)


def sl2_commutator(p):
    def mul(x, y):
        (a, b), (c, d) = x
        (e, f), (g, h) = y
        return (((a * e + b * g) % p, (a * f + b * h) % p), ((c * e + d * g) % p, (c * f + d * h) % p))

    A = ((1, 1), (0, 1))
    B = ((1, 0), (1, 1))
    Ai = ((1, p - 1), (0, 1))
    Bi = ((1, 0), (p - 1, 1))
    return mul(mul(mul(A, B), Ai), Bi)
