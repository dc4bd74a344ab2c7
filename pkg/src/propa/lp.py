"""Two-phase primal simplex with Bland's rule over a sparse tableau.

Both numeric modes share one pivoting code path: ``exact`` runs on GMP
rationals (``gmpy2.mpq``) and reports :class:`fractions.Fraction` values,
``float`` runs on doubles with a 1e-9 zero tolerance.  A HiGHS backend is
available for float instances too large for a pure-Python tableau.

All variables are nonnegative; optional upper bounds become extra rows.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import Rejection

FLOAT_TOL = 1e-9
SENSES = ("<=", ">=", "==")


@dataclass
class LPInstance:
    """minimize ``objective . x`` subject to ``constraints``, ``0 <= x <= upper``.

    ``constraints`` holds ``(coeffs, sense, rhs)`` triples where ``coeffs``
    maps variable index to coefficient and ``sense`` is one of ``<=``,
    ``>=``, ``==``.
    """

    num_vars: int
    objective: dict
    constraints: list = field(default_factory=list)
    upper: dict = field(default_factory=dict)
    mode: str = "exact"
    names: list | None = None

    def add(self, coeffs, sense, rhs):
        if sense not in SENSES:
            raise ValueError(f"bad constraint sense {sense!r}")
        self.constraints.append((dict(coeffs), sense, rhs))

    def check(self):
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown numeric mode {self.mode!r}")
        for coeffs, sense, _ in self.constraints:
            if sense not in SENSES:
                raise ValueError(f"bad constraint sense {sense!r}")
            for j in coeffs:
                if not 0 <= j < self.num_vars:
                    raise ValueError(f"variable index {j} out of range")
        for j in list(self.objective) + list(self.upper):
            if not 0 <= j < self.num_vars:
                raise ValueError(f"variable index {j} out of range")


@dataclass
class LPSolution:
    status: str  # optimal | infeasible | unbounded
    value: object = None
    x: list | None = None
    pivots: int = 0
    runtime: float = 0.0

    @property
    def optimal(self):
        return self.status == "optimal"


def _to_fraction(q):
    return Fraction(int(q.numerator), int(q.denominator))


class _Tableau:
    def __init__(self, exact):
        self.exact = exact
        self.zero = gmpy2.mpq(0) if exact else 0.0
        self.rows = []
        self.rhs = []
        self.basis = []
        self.pivots = 0

    def num(self, v):
        if self.exact:
            if isinstance(v, Fraction):
                return gmpy2.mpq(v.numerator, v.denominator)
            return gmpy2.mpq(v)
        return float(v)

    def is_zero(self, v):
        return v == 0 if self.exact else abs(v) <= FLOAT_TOL

    def is_neg(self, v):
        return v < 0 if self.exact else v < -FLOAT_TOL

    def is_pos(self, v):
        return v > 0 if self.exact else v > FLOAT_TOL

    def pivot(self, r, e, cost):
        prow = self.rows[r]
        inv = 1 / prow[e]
        for j in prow:
            prow[j] *= inv
        prow[e] = self.num(1)
        self.rhs[r] *= inv
        b = self.rhs[r]
        items = list(prow.items())
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row.get(e)
            if f is None:
                continue
            for j, v in items:
                nv = row.get(j, self.zero) - f * v
                if self.is_zero(nv):
                    row.pop(j, None)
                else:
                    row[j] = nv
            row.pop(e, None)
            self.rhs[i] -= f * b
            if not self.exact and abs(self.rhs[i]) <= FLOAT_TOL:
                self.rhs[i] = 0.0
        f = cost[0].get(e)
        if f is not None:
            for j, v in items:
                nv = cost[0].get(j, self.zero) - f * v
                if self.is_zero(nv):
                    cost[0].pop(j, None)
                else:
                    cost[0][j] = nv
            cost[0].pop(e, None)
            cost[1] -= f * b
        self.basis[r] = e
        self.pivots += 1

    def run(self, cost, allowed, max_pivots):
        """Bland's rule until optimal; returns False on unboundedness."""
        while True:
            entering = None
            for j, v in cost[0].items():
                if j in allowed and self.is_neg(v) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return True
            best, leave = None, None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is None or not self.is_pos(a):
                    continue
                ratio = self.rhs[i] / a
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and self.basis[i] < self.basis[leave])
                ):
                    best, leave = ratio, i
            if leave is None:
                return False
            if max_pivots is not None and self.pivots >= max_pivots:
                raise Rejection(f"simplex exceeded {max_pivots} pivots")
            self.pivot(leave, entering, cost)


def solve_lp(lp, method="simplex", max_pivots=None):
    """Solve ``lp``; ``method`` is ``simplex`` (both modes) or ``highs`` (float)."""
    lp.check()
    if method == "highs":
        if lp.mode != "float":
            raise Rejection("the HiGHS backend only supports float mode")
        return _solve_highs(lp)
    if method != "simplex":
        raise ValueError(f"unknown LP method {method!r}")
    start = time.perf_counter()
    exact = lp.mode == "exact"
    tab = _Tableau(exact)
    n = lp.num_vars
    rows = list(lp.constraints) + [({j: 1}, "<=", u) for j, u in sorted(lp.upper.items())]

    next_col = n
    artificials = set()
    for coeffs, sense, rhs in rows:
        row = {j: tab.num(v) for j, v in coeffs.items() if not tab.is_zero(tab.num(v))}
        b = tab.num(rhs)
        if b < 0:
            row = {j: -v for j, v in row.items()}
            b = -b
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        if sense == "<=":
            row[next_col] = tab.num(1)
            basic = next_col
            next_col += 1
        else:
            if sense == ">=":
                row[next_col] = tab.num(-1)
                next_col += 1
            row[next_col] = tab.num(1)
            basic = next_col
            artificials.add(next_col)
            next_col += 1
        tab.rows.append(row)
        tab.rhs.append(b)
        tab.basis.append(basic)

    all_cols = set(range(next_col))
    if artificials:
        # phase one: minimize the sum of artificials
        cost = [{}, tab.zero]
        for i, row in enumerate(tab.rows):
            if tab.basis[i] in artificials:
                for j, v in row.items():
                    if j not in artificials:
                        cost[0][j] = cost[0].get(j, tab.zero) - v
                cost[1] -= tab.rhs[i]
        cost[0] = {j: v for j, v in cost[0].items() if not tab.is_zero(v)}
        tab.run(cost, all_cols - artificials, max_pivots)
        if tab.is_neg(cost[1]):
            return LPSolution("infeasible", pivots=tab.pivots, runtime=time.perf_counter() - start)
        # drive remaining artificials out of the basis
        for i in range(len(tab.rows) - 1, -1, -1):
            if tab.basis[i] not in artificials:
                continue
            cand = sorted(j for j in tab.rows[i] if j not in artificials)
            if cand:
                tab.pivot(i, cand[0], [{}, tab.zero])
            else:
                del tab.rows[i], tab.rhs[i], tab.basis[i]
        for row in tab.rows:
            for a in artificials & row.keys():
                del row[a]

    cost = [{}, tab.zero]
    for j, v in lp.objective.items():
        v = tab.num(v)
        if not tab.is_zero(v):
            cost[0][j] = v
    for i, row in enumerate(tab.rows):
        cb = cost[0].get(tab.basis[i])
        if cb is None:
            continue
        for j, v in row.items():
            nv = cost[0].get(j, tab.zero) - cb * v
            if tab.is_zero(nv):
                cost[0].pop(j, None)
            else:
                cost[0][j] = nv
        cost[0].pop(tab.basis[i], None)
        cost[1] -= cb * tab.rhs[i]
    if not tab.run(cost, all_cols - artificials, max_pivots):
        return LPSolution("unbounded", pivots=tab.pivots, runtime=time.perf_counter() - start)

    x = [tab.zero] * n
    for i, j in enumerate(tab.basis):
        if j < n:
            x[j] = tab.rhs[i]
    value = -cost[1]
    if exact:
        x = [_to_fraction(v) for v in x]
        value = _to_fraction(value)
    else:
        x = [float(v) for v in x]
        value = float(value)
    return LPSolution("optimal", value, x, tab.pivots, time.perf_counter() - start)


def _solve_highs(lp):
    from scipy.optimize import linprog
    from scipy.sparse import coo_matrix

    start = time.perf_counter()
    n = lp.num_vars
    ub_r, ub_c, ub_v, b_ub = [], [], [], []
    eq_r, eq_c, eq_v, b_eq = [], [], [], []
    for coeffs, sense, rhs in lp.constraints:
        if sense == "==":
            k = len(b_eq)
            for j, v in coeffs.items():
                eq_r.append(k), eq_c.append(j), eq_v.append(float(v))
            b_eq.append(float(rhs))
        else:
            s = 1.0 if sense == "<=" else -1.0
            k = len(b_ub)
            for j, v in coeffs.items():
                ub_r.append(k), ub_c.append(j), ub_v.append(s * float(v))
            b_ub.append(s * float(rhs))
    c = np.zeros(n)
    for j, v in lp.objective.items():
        c[j] = float(v)
    bounds = [(0, float(lp.upper[j]) if j in lp.upper else None) for j in range(n)]
    kw = {}
    if b_ub:
        kw["A_ub"] = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(b_ub), n)).tocsr()
        kw["b_ub"] = b_ub
    if b_eq:
        kw["A_eq"] = coo_matrix((eq_v, (eq_r, eq_c)), shape=(len(b_eq), n)).tocsr()
        kw["b_eq"] = b_eq
    res = linprog(c, bounds=bounds, method="highs-ds", **kw)
    elapsed = time.perf_counter() - start
    if res.status == 2:
        return LPSolution("infeasible", runtime=elapsed)
    if res.status == 3:
        return LPSolution("unbounded", runtime=elapsed)
    if res.status != 0:
        raise RuntimeError(f"HiGHS failed: {res.message}")
    return LPSolution("optimal", float(res.fun), [float(v) for v in res.x], int(res.nit), elapsed)
