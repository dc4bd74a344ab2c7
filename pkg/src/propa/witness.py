"""Optimal witness parameters for finite subsets.

``eps_star`` computes the smallest worst-pair l1 variation achievable by a
family of probability measures ``f_x`` supported in ``B_x(S)``, over pairs of
the subset at distance at most ``R``.  ``oracle_eps_star`` recomputes the same
optimum on a different encoding by a different route, for cross-checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import Rejection, SizeBoundExceeded
from .lp import LPInstance, solve_lp

DEFAULT_MAX_VARIABLES = 250_000
FLOAT_TOL = 1e-9


@dataclass
class WitnessFamily:
    subset: object  # SubsetView
    R: int
    S: int
    measures: dict  # point -> {point: weight}

    def l1(self, x, y):
        fx, fy = self.measures[x], self.measures[y]
        return sum(abs(fx.get(z, 0) - fy.get(z, 0)) for z in fx.keys() | fy.keys())


@dataclass
class WitnessReport:
    violations: list = field(default_factory=list)
    max_variation: object = 0
    pairs_checked: int = 0

    @property
    def passed(self):
        return not self.violations

    def kinds(self):
        return sorted({v["condition"] for v in self.violations})


@dataclass
class EpsStarResult:
    value: object
    witness: WitnessFamily | None
    stats: dict


def _supports(C, S, support):
    amb = C.ambient
    members = set(C.members)
    out = {}
    for x in C.members:
        s = amb.ball_members(x, S)
        if support == "intrinsic":
            s = [z for z in s if z in members]
        elif support != "ambient":
            raise ValueError(f"unknown support mode {support!r}")
        out[x] = sorted(s)
    return out


def constrained_pairs(C, R):
    pts = list(C.members)
    if len(pts) < 2:
        return []
    d = C.ambient.submatrix(pts, pts)
    ii, jj = np.nonzero(np.triu(d <= R, k=1))
    return [(pts[a], pts[b]) for a, b in zip(ii.tolist(), jj.tolist())]


def uniform_family(C, R, S, support="ambient"):
    supp = _supports(C, S, support)
    return WitnessFamily(
        C, R, S, {x: {z: Fraction(1, len(s)) for z in s} for x, s in supp.items()}
    )


def build_eps_lp(C, R, S, support="ambient", mode="exact", max_variables=DEFAULT_MAX_VARIABLES):
    """The min-max l1 program.  Returns ``(lp, fvars, t_index, pairs)``.

    A coordinate z outside one of the two supports contributes ``f(z)``
    directly, so absolute-value variables exist only on support overlaps.
    """
    supp = _supports(C, S, support)
    pairs = constrained_pairs(C, R)
    fvars = {}
    for x in C.members:
        for z in supp[x]:
            fvars[x, z] = len(fvars)
    n_u = sum(len(set(supp[x]) & set(supp[y])) for x, y in pairs)
    total = len(fvars) + n_u + 1
    if total > max_variables:
        raise SizeBoundExceeded(
            f"eps_star LP (|C|={len(C.members)}, pairs={len(pairs)}, S={S})", total, max_variables
        )
    lp = LPInstance(total, {}, mode=mode)
    t = total - 1
    lp.objective[t] = 1
    for x in C.members:
        lp.add({fvars[x, z]: 1 for z in supp[x]}, "==", 1)
    nxt = len(fvars)
    for x, y in pairs:
        sx, sy = set(supp[x]), set(supp[y])
        row = {t: -1}
        for z in sorted(sx | sy):
            if z in sx and z in sy:
                u = nxt
                nxt += 1
                lp.add({fvars[x, z]: 1, fvars[y, z]: -1, u: -1}, "<=", 0)
                lp.add({fvars[x, z]: -1, fvars[y, z]: 1, u: -1}, "<=", 0)
                row[u] = 1
            elif z in sx:
                row[fvars[x, z]] = 1
            else:
                row[fvars[y, z]] = 1
        lp.add(row, "<=", 0)
    return lp, fvars, t, pairs


def eps_star(C, R, S, mode="exact", support="ambient", method=None,
             max_variables=DEFAULT_MAX_VARIABLES):
    """Optimal variation over witness families on ``C`` with parameters (R, S).

    ``method`` picks the LP backend: ``simplex`` (default) or ``highs``
    (float mode only).
    """
    if not C.members:
        raise Rejection("eps_star needs a nonempty subset")
    if R < 0 or S < 0:
        raise Rejection("R and S must be nonnegative")
    method = method or "simplex"
    lp, fvars, t, pairs = build_eps_lp(C, R, S, support, mode, max_variables)
    stats = {
        "mode": mode,
        "support": support,
        "method": method,
        "variables": lp.num_vars,
        "constraints": len(lp.constraints),
        "pairs": len(pairs),
    }
    if not pairs:
        stats.update(pivots=0, runtime=0.0)
        w = uniform_family(C, R, S, support)
        zero = Fraction(0) if mode == "exact" else 0.0
        if mode == "float":
            w.measures = {x: {z: float(v) for z, v in m.items()} for x, m in w.measures.items()}
        return EpsStarResult(zero, w, stats)
    sol = solve_lp(lp, method=method)
    stats.update(pivots=sol.pivots, runtime=sol.runtime)
    if not sol.optimal:
        raise RuntimeError(f"eps_star LP unexpectedly {sol.status}")
    measures = {x: {} for x in C.members}
    for (x, z), j in fvars.items():
        v = sol.x[j]
        if v != 0:
            measures[x][z] = v
    value = sol.value
    if mode == "float":
        value = min(max(value, 0.0), 2.0)
    return EpsStarResult(value, WitnessFamily(C, R, S, measures), stats)


def check_witness(w, R, eps, S):
    """List every violated witness condition.

    Checks normalization, nonnegativity, ``Supp f_x`` inside ``B_x(S)`` and
    the variation bound on R-close pairs.  Fractions are compared exactly,
    floats with a 1e-9 tolerance.
    """
    report = WitnessReport()
    amb = w.subset.ambient
    pts = list(w.measures)

    def exact(*vals):
        return all(isinstance(v, (int, Fraction)) for v in vals)

    for x in pts:
        m = w.measures[x]
        total = sum(m.values())
        ok = total == 1 if exact(total) else abs(total - 1) <= FLOAT_TOL
        if not ok:
            report.violations.append({"condition": "normalization", "point": x, "measured": total})
        for z, v in m.items():
            if v < 0 and (exact(v) or v < -FLOAT_TOL):
                report.violations.append({"condition": "nonnegative", "point": x, "at": z, "measured": v})
            if v != 0:
                d = amb.distance(x, z)
                if d > S:
                    report.violations.append(
                        {"condition": "support", "point": x, "at": z, "measured": d, "bound": S}
                    )
    for x, y in constrained_pairs(_Members(amb, pts), R):
        report.pairs_checked += 1
        v = w.l1(x, y)
        if v > report.max_variation:
            report.max_variation = v
        over = v > eps if exact(v, eps) else v > eps + FLOAT_TOL
        if over:
            report.violations.append(
                {"condition": "variation", "pair": (x, y), "measured": v, "bound": eps}
            )
    return report


@dataclass
class _Members:
    ambient: object
    members: list


# --------------------------------------------------------------------------
# independent oracle


ORACLE_MAX_VARIABLES = 40
ORACLE_MAX_SUBSETS = 200_000
ORACLE_MAX_UNION = 12


def _sign_system(C, R, S, support):
    """Sign-vector encoding of the program with the equalities eliminated.

    Each measure keeps all but its last support weight as free coordinates
    (the last one is 1 minus the rest), and ``|a| + |b| + ... <= t`` is
    expanded into one row per sign vector.  Returns ``(A, b, coords, t)``
    for the system ``A y <= b`` with objective ``min y[t]``.
    """
    supp = _supports(C, S, support)
    coords = []
    index = {}
    for x in C.members:
        for z in supp[x][:-1]:
            index[x, z] = len(coords)
            coords.append((x, z))
    t = len(coords)
    dim = t + 1

    def weight(x, z):
        # affine form (coeff dict, constant) for f_x(z)
        if z not in supp[x]:
            return {}, Fraction(0)
        if z != supp[x][-1]:
            return {index[x, z]: Fraction(1)}, Fraction(0)
        return {index[x, w]: Fraction(-1) for w in supp[x][:-1]}, Fraction(1)

    A, b = [], []

    def add(form, const):
        # form . y + const <= 0
        row = [Fraction(0)] * dim
        for j, v in form.items():
            row[j] += v
        A.append(row)
        b.append(-const)

    for x in C.members:
        for z in supp[x]:
            form, const = weight(x, z)
            add({j: -v for j, v in form.items()}, -const)
    for x, y in constrained_pairs(C, R):
        union = sorted(set(supp[x]) | set(supp[y]))
        if len(union) > ORACLE_MAX_UNION:
            raise SizeBoundExceeded("oracle support union", len(union), ORACLE_MAX_UNION)
        diffs = []
        for z in union:
            fx, cx = weight(x, z)
            fy, cy = weight(y, z)
            form = dict(fx)
            for j, v in fy.items():
                form[j] = form.get(j, 0) - v
            diffs.append((form, cx - cy))
        for signs in itertools.product((1, -1), repeat=len(union)):
            form, const = {t: Fraction(-1)}, Fraction(0)
            for s, (fd, cd) in zip(signs, diffs):
                for j, v in fd.items():
                    form[j] = form.get(j, 0) + s * v
                const += s * cd
            add(form, const)
    return A, b, coords, t


def _solve_exact(rows, rhs):
    """Gaussian elimination over Fractions; None if singular."""
    n = len(rows)
    M = [list(r) + [v] for r, v in zip(rows, rhs)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return [M[r][n] for r in range(n)]


def _independent_subset(rows, order, dim):
    """Greedy maximal linearly independent subset of ``rows`` following ``order``."""
    basis = []  # echelon rows with pivot columns
    chosen = []
    for k in order:
        v = list(rows[k])
        for piv, e in basis:
            if v[piv] != 0:
                f = v[piv]
                v = [a - f * bb for a, bb in zip(v, e)]
        piv = next((j for j, a in enumerate(v) if a != 0), None)
        if piv is None:
            continue
        inv = 1 / v[piv]
        basis.append((piv, [a * inv for a in v]))
        chosen.append(k)
        if len(chosen) == dim:
            break
    return chosen


def oracle_eps_star(C, R, S, support="ambient", method="auto"):
    """Recompute the optimum of ``eps_star`` without the simplex tableau.

    The program is re-encoded with sign-vector rows instead of absolute-value
    variables.  ``method="enumerate"`` checks every candidate vertex (every
    nonsingular choice of ``dim`` tight rows) and keeps the feasible minimum.
    ``method="certify"`` takes a candidate point from HiGHS, rebuilds the
    vertex exactly from its tight rows and proves optimality with an exact,
    nonnegative dual multiplier.  ``auto`` enumerates when the number of row
    subsets is at most ``ORACLE_MAX_SUBSETS``.
    """
    if not C.members:
        raise Rejection("oracle needs a nonempty subset")
    supp = _supports(C, S, support)
    n_vars = sum(len(s) for s in supp.values()) + 1
    if n_vars > ORACLE_MAX_VARIABLES:
        raise SizeBoundExceeded("oracle LP variables", n_vars, ORACLE_MAX_VARIABLES)
    if not constrained_pairs(C, R):
        return Fraction(0)
    A, b, coords, t = _sign_system(C, R, S, support)
    dim = t + 1
    if method == "auto":
        method = "enumerate" if math.comb(len(A), dim) <= ORACLE_MAX_SUBSETS else "certify"
    if method == "enumerate":
        return _enumerate_vertices(A, b, t)
    if method == "certify":
        return _certified_vertex(A, b, t)
    raise ValueError(f"unknown oracle method {method!r}")


def _feasible(A, b, y):
    return all(sum(a * v for a, v in zip(row, y) if a) <= rhs for row, rhs in zip(A, b))


def _enumerate_vertices(A, b, t):
    dim = t + 1
    best = None
    for rows in itertools.combinations(range(len(A)), dim):
        y = _solve_exact([A[k] for k in rows], [b[k] for k in rows])
        if y is None or (best is not None and y[t] >= best):
            continue
        if _feasible(A, b, y):
            best = y[t]
    if best is None:
        raise RuntimeError("no vertex found; the polyhedron should be pointed and nonempty")
    return best


def _certified_vertex(A, b, t):
    from scipy.optimize import linprog

    dim = t + 1
    Af = np.array([[float(v) for v in row] for row in A])
    bf = np.array([float(v) for v in b])
    c = np.zeros(dim)
    c[t] = 1.0
    res = linprog(c, A_ub=Af, b_ub=bf, bounds=[(None, None)] * dim, method="highs-ds")
    if res.status != 0:
        raise RuntimeError(f"oracle candidate solve failed: {res.message}")
    slack = bf - Af @ res.x
    active = [k for k in range(len(A)) if slack[k] <= 1e-7]
    marg = -res.ineqlin.marginals
    order = sorted(active, key=lambda k: (-marg[k], k))
    basis = _independent_subset(A, order, dim)
    if len(basis) < dim:
        raise RuntimeError("candidate point is not a vertex")
    y = _solve_exact([A[k] for k in basis], [b[k] for k in basis])
    if not _feasible(A, b, y):
        raise RuntimeError("reconstructed vertex is infeasible")
    # KKT: e_t = -sum lambda_k a_k with lambda >= 0 on tight rows
    target = [Fraction(0)] * dim
    target[t] = Fraction(-1)
    cols = [[A[k][j] for k in basis] for j in range(dim)]
    lam = _solve_exact(cols, target)
    if lam is not None and all(v >= 0 for v in lam):
        return y[t]
    tight = [k for k in range(len(A)) if sum(a * v for a, v in zip(A[k], y) if a) == b[k]]
    lp = LPInstance(len(tight), {}, mode="exact")
    for j in range(dim):
        lp.add({i: A[k][j] for i, k in enumerate(tight) if A[k][j] != 0}, "==", target[j])
    sol = solve_lp(lp)
    if not sol.optimal:
        raise RuntimeError("reconstructed vertex admits no optimality certificate")
    lam = sol.x
    for j in range(dim):
        if sum(lam[i] * A[k][j] for i, k in enumerate(tight)) != target[j]:
            raise RuntimeError("optimality certificate failed exact verification")
    return y[t]
