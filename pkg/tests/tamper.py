"""Tampered fibred datasets that break exactly one condition.

Both helpers assume cycle blocks, where ``xi^x(h)`` does not depend on ``h``:
changing a chart element or a vector outside every transported window leaves
the other conditions untouched.
"""

from dataclasses import replace
from fractions import Fraction

from propa.constructions import reduce_walk


def _block_charts(data, L, i):
    off = data.family.offsets[i]
    n = data.blocks[i].graph.vertex_count
    return {C: data.chart(C) for C in data.admissible_balls(L) if off <= C[0] < off + n}


def _fiber_extra(charts):
    return max(len(g) - 1 for ch in charts.values() for g in ch.deck.values())


def tamper_cocycle(data, L, i):
    """Multiply ``g_{x,C}`` by a full winding for one point of one chart."""
    charts = _block_charts(data, L, i)
    C = sorted(charts)[0]
    ch = charts[C]
    m = data.blocks[i].graph.vertex_count
    winding = tuple(range(m)) + (0,)
    a = ch.members[0]
    deck = dict(ch.deck)
    deck[a] = reduce_walk(winding + deck[a][1:])
    data.chart_override[C] = replace(ch, deck=deck)
    return C


def tamper_normalization(data, L, i):
    """Perturb ``xi^x(h)`` at a fibre index no chart's window reaches."""
    charts = _block_charts(data, L, i)
    off = data.family.offsets[i]
    x = off
    window = data.index_window(L, i)
    reached = {data.transport(ch, x, k) for C, ch in charts.items() if x in C for k in window}
    fiber = data.fiber(L, i, _fiber_extra(charts))
    h = next(h for h in sorted(fiber, key=lambda w: (len(w), w)) if h not in reached)
    vec = dict(data.xi(x, h))
    z = next(iter(vec))
    vec[z] += Fraction(1, 16)
    data.xi_cache[(x, h)] = vec
    return x, h
