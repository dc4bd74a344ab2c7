"""S_min profiles over block families, duplication, and report emission."""

from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from .constructions import as_fraction
from .errors import Rejection
from .space import CoarseUnion, subset
from .witness import FLOAT_TOL, build_eps_lp, eps_star

CSV_HEADER = ["family", "block", "L", "R", "eps", "S_min", "subsets_checked", "max_residual", "runtime_ms"]
# ``auto`` mode solves exactly up to this many LP variables, then switches to HiGHS
AUTO_EXACT_MAX_VARIABLES = 600


@dataclass(frozen=True)
class ProfileRow:
    family: str
    block: int
    L: int
    R: int
    eps: str
    S_min: int
    subsets_checked: int
    max_residual: str
    runtime_ms: int = 0

    def key(self):
        """Everything except the block position and the timing."""
        d = asdict(self)
        d.pop("block")
        d.pop("runtime_ms")
        return tuple(d.values())

    def csv_fields(self):
        return [str(getattr(self, f.name)) for f in fields(self)]

    @classmethod
    def from_strings(cls, rec):
        return cls(rec["family"], int(rec["block"]), int(rec["L"]), int(rec["R"]), rec["eps"],
                   int(rec["S_min"]), int(rec["subsets_checked"]), rec["max_residual"],
                   int(rec["runtime_ms"]))


@dataclass
class ReportConfig:
    csv: str | None = None
    json: str | None = None
    svg: str | None = None
    x_axis: str = "block"
    y_axis: str = "S_min"

    @property
    def formats(self):
        return [k for k in ("csv", "json", "svg") if getattr(self, k)]

    def check(self):
        if not self.formats:
            raise Rejection("report needs at least one output format")
        if self.x_axis not in ("block", "L") or self.y_axis not in ("S_min", "max_residual"):
            raise Rejection(f"unsupported chart axes {self.x_axis}/{self.y_axis}")


@dataclass
class ProfileConfig:
    R: int = 1
    eps: object = Fraction(1, 2)
    Ls: list = field(default_factory=lambda: [2])
    mode: str = "auto"  # exact | float | auto
    jobs: int = 1
    timing: bool = True
    support: str = "ambient"
    family: str = ""


# --------------------------------------------------------------------------
# profiling


def ball_subsets(union, i, L):
    """Distinct balls of radius L centred in block i (one center for transitive blocks)."""
    g = union.blocks[i]
    centers = [union.point(i, 0)] if g.vertex_transitive else union.block_points(i)
    seen, out = set(), []
    for c in centers:
        members = tuple(union.ball_members(c, L))
        if members not in seen:
            seen.add(members)
            out.append(members)
    return out


def _solve(C, R, S, mode, support):
    if mode == "auto":
        lp = build_eps_lp(C, R, S, support, "float")[0]
        mode = "exact" if lp.num_vars <= AUTO_EXACT_MAX_VARIABLES else "float"
    method = "highs" if mode == "float" else "simplex"
    return eps_star(C, R, S, mode=mode, support=support, method=method).value


def _within(v, eps):
    if isinstance(v, Fraction):
        return v <= eps
    return v <= float(eps) + FLOAT_TOL


def _fmt(v):
    return str(v) if isinstance(v, Fraction) else f"{v:.9f}"


def profile_item(union, i, L, cfg):
    """One ProfileRow: ascend S from 0 until every ball of radius L passes."""
    start = time.perf_counter()
    eps = as_fraction(cfg.eps)
    balls = [subset(union, m) for m in ball_subsets(union, i, L)]
    cap = union.block_diameters[i]
    for S in range(cap + 1):
        worst = Fraction(0)
        ok = True
        for C in balls:
            v = _solve(C, cfg.R, S, cfg.mode, cfg.support)
            if v > worst:
                worst = v
            if not _within(v, eps):
                ok = False
                break
        if ok:
            break
    else:  # unreachable in ambient mode: S = diameter makes every ball vanish
        raise RuntimeError(f"no S <= {cap} reached eps on block {i}")
    ms = int(round((time.perf_counter() - start) * 1000)) if cfg.timing else 0
    return ProfileRow(cfg.family or union.name or "family", i, L, cfg.R, str(eps), S,
                      len(balls), _fmt(worst), ms)


_WORKER_UNION = None


def _init_worker(union):
    global _WORKER_UNION
    _WORKER_UNION = union


def _run_item(args):
    i, L, cfg = args
    return profile_item(_WORKER_UNION, i, L, cfg)


def smin_profile(union, R, eps, Ls, mode="auto", jobs=1, timing=True, support="ambient",
                 family=""):
    """Rows for every (block, L), sorted by block then L whatever the schedule."""
    eps = as_fraction(eps)
    if eps <= 0:
        raise Rejection(f"eps must be positive, got {eps}")
    Ls = sorted(set(int(L) for L in Ls))
    if not Ls:
        raise Rejection("need at least one scale L")
    if any(L < 0 for L in Ls) or R < 0:
        raise Rejection("L and R must be nonnegative")
    if mode not in ("exact", "float", "auto"):
        raise Rejection(f"unknown mode {mode!r}")
    cfg = ProfileConfig(R, eps, Ls, mode, jobs, timing, support, family)
    items = [(i, L, cfg) for i in range(len(union.blocks)) for L in Ls]
    union.block_diameters  # fill the cache before forking
    if jobs <= 1:
        rows = [profile_item(union, i, L, cfg) for i, L, _ in items]
    else:
        # large items first keeps the pool busy; ordering is restored below
        order = sorted(items, key=lambda it: -union.blocks[it[0]].vertex_count)
        with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(union,)) as ex:
            rows = list(ex.map(_run_item, order))
    return sorted(rows, key=lambda r: (r.block, r.L))


def tail_signature(rows, L):
    """Constant tail of S_min over the blocks at scale L, as seen in this finite family.

    Returns ``(value, first_block, exceptional_blocks)``: every block from
    ``first_block`` on has ``S_min == value`` and the exceptional blocks are
    the earlier ones that differ from it (an empirical K_L).
    """
    seq = [(r.block, r.S_min) for r in sorted(rows, key=lambda r: r.block) if r.L == L]
    if not seq:
        return None, None, []
    value = seq[-1][1]
    k = len(seq) - 1
    while k > 0 and seq[k - 1][1] == value:
        k -= 1
    return value, seq[k][0], [b for b, s in seq[:k] if s != value]


def comparison_table(named_rows, L):
    """Rows of ``(family, block, vertices, S_min, max_residual)`` for a side-by-side table."""
    out = []
    for name, (union, rows) in named_rows.items():
        for r in rows:
            if r.L == L:
                out.append((name, r.block, union.blocks[r.block].vertex_count, r.S_min, r.max_residual))
    return out


# --------------------------------------------------------------------------
# duplication


def diagonal_order(blocks, copies):
    """Pairs (i, j), 0-based, ordered by i + j and then by i."""
    if copies < 1:
        raise Rejection("copies must be at least 1")
    out = []
    for s in range(blocks + copies - 1):
        for i in range(blocks):
            j = s - i
            if 0 <= j < copies:
                out.append((i, j))
    return out


def duplicate_family(union, copies):
    """Coarse union of ``copies`` copies of each block, enumerated diagonally."""
    order = diagonal_order(len(union.blocks), copies)
    dup = CoarseUnion([union.blocks[i] for i, _ in order], name=f"{union.name or 'family'}-x{copies}")
    for k, (i, _) in enumerate(order):
        if i in union._metrics:
            dup._metrics[k] = union._metrics[i]
    dup.origin = order
    return dup


# --------------------------------------------------------------------------
# reports


def rows_to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def rows_from_csv(text):
    return [ProfileRow.from_strings(rec) for rec in csv.DictReader(io.StringIO(text))]


def rows_to_json(rows):
    return json.dumps({"rows": [asdict(r) for r in rows]}, indent=2) + "\n"


def rows_from_json(text):
    return [ProfileRow(**rec) for rec in json.loads(text)["rows"]]


def _residual(r):
    return float(Fraction(r.max_residual)) if "/" in r.max_residual else float(r.max_residual)


def render_svg(rows, x_axis="block", y_axis="S_min", width=800, height=600):
    """Line chart, one polyline per series, in a fixed 800x600 box."""
    series_key = "L" if x_axis == "block" else "block"
    series = {}
    for r in rows:
        y = r.S_min if y_axis == "S_min" else _residual(r)
        series.setdefault(getattr(r, series_key), []).append((getattr(r, x_axis), y))
    xs = [x for pts in series.values() for x, _ in pts] or [0]
    ys = [y for pts in series.values() for _, y in pts] or [0]
    x0, x1 = min(xs), max(max(xs), min(xs) + 1)
    y1 = max(max(ys), 1)
    left, right, top, bottom = 70, 30, 40, 60
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + ph - y / y1 * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{x_axis}</text>',
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 18 {top + ph / 2:.1f})">{y_axis}</text>',
    ]
    for x in sorted(set(xs)):
        out.append(f'<text x="{px(x):.1f}" y="{top + ph + 20}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{x}</text>')
    for t in np.linspace(0, y1, 5):
        out.append(f'<text x="{left - 8}" y="{py(t) + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{t:g}</text>')
    for k, (name, pts) in enumerate(sorted(series.items())):
        pts = sorted(pts)
        color = colors[k % len(colors)]
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for x, y in pts:
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{left + pw - 60}" y="{top + 16 * (k + 1)}" fill="{color}" '
                   f'font-family="sans-serif" font-size="12">{series_key}={name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _write(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_report(rows, cfg):
    """Write the configured formats; returns the list of written paths."""
    if not rows:
        raise Rejection("no rows to report")
    cfg.check()
    written = []
    if cfg.csv:
        _write(cfg.csv, rows_to_csv(rows))
        written.append(cfg.csv)
    if cfg.json:
        _write(cfg.json, rows_to_json(rows))
        written.append(cfg.json)
    if cfg.svg:
        _write(cfg.svg, render_svg(rows, cfg.x_axis, cfg.y_axis))
        written.append(cfg.svg)
    return written
