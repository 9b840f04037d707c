"""Parameter sweeps, CSV persistence and hand-written SVG plots."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError, EmptySweepError, MotilityError
from .expansion import run_pipeline
from .model import DiffusionModel, PhysParams
from .oned import OneDConfig, oned_pipeline

AXES = ("e_A", "P", "Z", "gamma", "K")
PALETTE = ("#1f4fd6", "#1a9a3a", "#d62728", "#9467bd", "#8c564b", "#e377c2")


@dataclass(frozen=True)
class SweepSpec:
    """Sweep one axis over [lo, hi] with ``count`` equispaced points.

    ``fixed`` holds P, Z, gamma, m_inf, e_A (and const_d for constant
    diffusion).  Axis K keeps the model fixed and tabulates the small-amplitude
    branch V^2 = (K - K0)/K2 against K.
    """

    axis: str
    lo: float
    hi: float
    count: int
    fixed: dict = field(default_factory=dict)
    dimension: int = 2
    intervals: int = 2048
    tol_root: float = 1e-12
    tol_quad: float = 1e-10

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"unknown sweep axis {self.axis!r}; expected one of {AXES}")
        if int(self.count) != self.count or self.count < 2:
            raise DomainError("count must be an integer >= 2")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo > self.hi:
            raise DomainError(f"need lo <= hi, got [{self.lo}, {self.hi}]")
        if self.dimension not in (1, 2):
            raise DomainError("dimension must be 1 or 2")
        if self.axis == "e_A" and "const_d" in self.fixed:
            raise DomainError("e_A sweep needs van der Waals diffusion")
        # fixed parameters and both axis endpoints must be valid
        for v in ((None,) if self.axis == "K" else (self.lo, self.hi)):
            _model_at(self, v)

    def values(self):
        return [float(v) for v in np.linspace(self.lo, self.hi, int(self.count))]


@dataclass
class SweepRow:
    axis: str
    value: float
    r0: float = math.nan
    k0: float = math.nan
    alpha: float = math.nan
    transversality: float = math.nan
    k2: float = math.nan
    a1: float = math.nan
    a2: float = math.nan
    a3: float = math.nan
    a4: float = math.nan
    branch_v2: float = math.nan
    verdict: str = ""
    error: str = ""
    wall_time: float = math.nan

    @property
    def ok(self):
        return not self.error


CSV_FIELDS = [f.name for f in fields(SweepRow)]


def _model_at(spec: SweepSpec, value):
    fx = dict(spec.fixed)
    if value is not None and spec.axis != "K":
        fx[spec.axis] = value
    params = PhysParams(float(fx.get("P", 0.1)), float(fx.get("Z", 1.25)), float(fx.get("gamma", 0.0)))
    if "const_d" in fx:
        diff = DiffusionModel.constant(fx["const_d"])
    else:
        diff = DiffusionModel.van_der_waals(float(fx.get("m_inf", 10.0)), float(fx.get("e_A", 0.0)))
    return params, diff


def _evaluate(spec: SweepSpec, value):
    """Run the pipeline at one axis value (a K-axis point reuses the fixed model)."""
    params, diff = _model_at(spec, value)
    if spec.dimension == 1:
        pl = oned_pipeline(OneDConfig(params, diff, intervals=max(spec.intervals, 1024),
                                      tol_root=spec.tol_root, tol_quad=spec.tol_quad))
    else:
        pl = run_pipeline(params, diff, intervals=spec.intervals, tol_root=spec.tol_root, tol_quad=spec.tol_quad)
    return pl.ss.r0, pl.report


def _point(args):
    spec, value = args
    t0 = time.perf_counter()
    row = SweepRow(axis=spec.axis, value=value)
    try:
        r0, rep = _evaluate(spec, None if spec.axis == "K" else value)
        row.r0, row.k0, row.alpha, row.transversality = r0, rep.k0, rep.alpha, rep.transversality
        row.k2, row.a1, row.a2, row.a3, row.a4 = rep.k2, rep.a1, rep.a2, rep.a3, rep.a4
        row.verdict = rep.verdict
        if spec.axis == "K" and rep.k2 != 0:
            v2 = (value - rep.k0) / rep.k2
            row.branch_v2 = v2 if v2 >= 0 else math.nan
    except MotilityError as exc:
        row.error = type(exc).__name__
    row.wall_time = time.perf_counter() - t0
    return row


def run_sweep(spec: SweepSpec, workers: int = 1):
    """Evaluate every axis point; failures become tagged rows.  Raises EmptySweepError if none succeed."""
    jobs = [(spec, v) for v in spec.values()]
    if spec.axis == "K":
        # one pipeline run serves every K value
        base = _point((spec, spec.lo))
        rows = []
        for _, v in jobs:
            r = replace(base, value=v, branch_v2=math.nan)
            if r.ok and r.k2 != 0:
                v2 = (v - r.k0) / r.k2
                r.branch_v2 = v2 if v2 >= 0 else math.nan
            rows.append(r)
    elif workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_point, jobs))
    else:
        rows = [_point(j) for j in jobs]
    if not any(r.ok for r in rows):
        raise EmptySweepError(f"all {len(rows)} sweep points failed ({rows[0].error})")
    return rows


# ------------------------------------------------------------------ CSV


def _fmt(v):
    if isinstance(v, str):
        return v
    v = float(v)
    if not math.isfinite(v):
        return "NaN"
    return format(v, ".17g")


def emit_csv(rows, path, timing: bool = False):
    """Write rows at 17 significant digits.  Wall time is omitted unless ``timing`` (keeps output deterministic)."""
    if not rows:
        raise DomainError("no rows to write")
    cols = CSV_FIELDS if timing else [c for c in CSV_FIELDS if c != "wall_time"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in cols])


def read_csv(path):
    """Inverse of emit_csv."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for f in fields(SweepRow):
                if f.name not in rec:
                    continue
                kw[f.name] = rec[f.name] if f.type in ("str", str) else float(rec[f.name])
            out.append(SweepRow(**kw))
    return out


def row_text(row, timing=False):
    cols = CSV_FIELDS if timing else [c for c in CSV_FIELDS if c != "wall_time"]
    return ",".join(_fmt(getattr(row, c)) for c in cols)


# ------------------------------------------------------------------ D(m) curves


@dataclass(frozen=True)
class DiffusionCurve:
    label: str
    m: tuple
    d: tuple


def diffusion_curves(e_values=(0.0, 0.35, 0.63), m_inf=10.0, m_max=None, count=201):
    """D(m) on (0, m_max] for each cooperative-binding ratio."""
    m_max = 0.9 * m_inf if m_max is None else m_max
    ms = np.linspace(m_max / count, m_max, count)
    out = []
    for e in e_values:
        model = DiffusionModel.van_der_waals(m_inf, e)
        out.append(DiffusionCurve(f"e_A = {e:g}", tuple(float(x) for x in ms),
                                  tuple(float(model(x)) for x in ms)))
    return out


# ------------------------------------------------------------------ SVG

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=70)


def _ticks(lo, hi, n=5):
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _series(rows, kind):
    if kind == "diffusion":
        return [(c.label, list(c.m), list(c.d)) for c in rows], "m", "D(m)"
    if kind == "k2":
        ok = [r for r in rows if r.ok]
        pos = [(r.value, r.k2) for r in ok]
        return [("K2", [p[0] for p in pos], [p[1] for p in pos])], rows[0].axis, "K2"
    if kind == "bifurcation":
        # one branch per sweep; V = +-sqrt(V^2)
        pts = [(r.value, math.sqrt(r.branch_v2)) for r in rows if r.ok and math.isfinite(r.branch_v2)]
        xs = [p[0] for p in pts]
        label = rows[0].verdict or "branch"
        return [(f"{label} (+V)", xs, [p[1] for p in pts]), (f"{label} (-V)", xs, [-p[1] for p in pts])], "K", "V"
    raise DomainError(f"unknown plot kind {kind!r}")


def emit_svg(rows, kind, path, title=None):
    """Standalone SVG 1.1 line plot.  kind: 'k2', 'diffusion' or 'bifurcation'.

    For 'bifurcation', ``rows`` may also be a list of row lists (one per model).
    """
    if not rows:
        raise DomainError("no rows to plot")
    if kind == "bifurcation" and isinstance(rows[0], list):
        series = []
        for group in rows:
            series += _series(group, kind)[0]
        xlab, ylab = "K", "V"
    else:
        series, xlab, ylab = _series(rows, kind)
    xs = [x for s in series for x in s[1]]
    ys = [y for s in series for y in s[2]]
    if not xs:
        raise DomainError("nothing finite to plot")
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if kind in ("k2", "bifurcation"):
        y0, y1 = min(y0, 0.0), max(y1, 0.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(x):
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def py(y):
        return MARGIN["top"] + (y1 - y) / (y1 - y0) * ph

    out = ['<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {WIDTH} {HEIGHT}" '
           f'width="{WIDTH}" height="{HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="28" text-anchor="middle" font-size="18">{escape(title)}</text>')
    bottom, left = MARGIN["top"] + ph, MARGIN["left"]
    out.append(f'<g id="axes" stroke="black" fill="none">'
               f'<line x1="{left}" y1="{bottom}" x2="{left + pw}" y2="{bottom}"/>'
               f'<line x1="{left}" y1="{MARGIN["top"]}" x2="{left}" y2="{bottom}"/></g>')
    out.append('<g id="ticks" font-size="12">')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{bottom}" x2="{px(t):.2f}" y2="{bottom + 6}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{bottom + 22}" text-anchor="middle">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 6}" y1="{py(t):.2f}" x2="{left}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 10}" y="{py(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    out.append("</g>")
    out.append(f'<text id="xlabel" x="{left + pw / 2:.2f}" y="{HEIGHT - 20}" text-anchor="middle" '
               f'font-size="15">{escape(xlab)}</text>')
    out.append(f'<text id="ylabel" x="22" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" font-size="15" '
               f'transform="rotate(-90 22 {MARGIN["top"] + ph / 2:.2f})">{escape(ylab)}</text>')
    if kind in ("k2", "bifurcation"):
        out.append(f'<line id="zero-line" x1="{left}" y1="{py(0):.2f}" x2="{left + pw}" y2="{py(0):.2f}" '
                   f'stroke="gray" stroke-dasharray="6,4"/>')
    for i, (label, sx, sy) in enumerate(series):
        color = PALETTE[i % len(PALETTE)] if kind != "bifurcation" else PALETTE[(i // 2) % len(PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(sx, sy))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{pts}">'
                   f'<title>{escape(label)}</title></polyline>')
        out.append(f'<text x="{left + pw - 10}" y="{MARGIN["top"] + 18 * (i + 1)}" text-anchor="end" '
                   f'font-size="13" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def emit_figures(outdir, dimension=1, count=21, intervals=2048, fixed=None):
    """D(m) curves, K2(e_A) sweep and the branch schematic; returns written paths."""
    import os

    os.makedirs(outdir, exist_ok=True)
    fixed = dict(fixed or {"P": 0.1, "Z": 1.25, "m_inf": 10.0})
    paths = {}
    curves = diffusion_curves(m_inf=float(fixed.get("m_inf", 10.0)))
    paths["diffusion_svg"] = os.path.join(outdir, "diffusion.svg")
    emit_svg(curves, "diffusion", paths["diffusion_svg"], title="D(m), van der Waals law")
    spec = SweepSpec("e_A", 0.0, 1.0, count, fixed=fixed, dimension=dimension, intervals=intervals)
    rows = run_sweep(spec)
    paths["k2_csv"] = os.path.join(outdir, "k2_vs_ea.csv")
    paths["k2_svg"] = os.path.join(outdir, "k2_vs_ea.svg")
    emit_csv(rows, paths["k2_csv"])
    emit_svg(rows, "k2", paths["k2_svg"], title="K2 against e_A")
    groups = []
    for ea in (0.3, 0.63):
        fx = dict(fixed, e_A=ea)
        _, rep = _evaluate(SweepSpec("K", 0.0, 1.0, 2, fixed=fx, dimension=dimension, intervals=intervals), None)
        span = 0.02 * rep.k0
        groups.append(run_sweep(SweepSpec("K", rep.k0 - span, rep.k0 + span, 41, fixed=fx, dimension=dimension,
                                          intervals=intervals)))
    paths["bifurcation_svg"] = os.path.join(outdir, "branches.svg")
    emit_svg(groups, "bifurcation", paths["bifurcation_svg"], title="Small-amplitude branches")
    return paths
