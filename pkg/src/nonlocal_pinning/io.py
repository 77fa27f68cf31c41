"""Flat-file output: CSV and JSON with round-trip floats, and small SVG plots."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))    # shortest string that parses back exactly
    return str(v)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def _parse(s: str):
    if s == "":
        return None
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path):
    """Rows as dicts; numeric cells come back as floats."""
    with open(path, newline="") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --------------------------------------------------------------------------
# Typed exports
# --------------------------------------------------------------------------

def profile_csv(path, profile) -> Path:
    return write_csv(path, ["x", "U", "V", "branch"],
                     zip(profile.x, profile.U, profile.V, profile.branch))


def family_csv(path, v0, x0, v_star) -> Path:
    return write_csv(path, ["v0", "x0", "v_star"], zip(v0, x0, v_star))


def trajectory_csv(path, traj) -> Path:
    return write_csv(path, ["t", "mass", "max", "min", "energy"], traj.rows())


def field_csv(path, state) -> Path:
    return write_csv(path, ["x", "u"], zip(state.grid.x, state.u))


SWEEP_HEADER = ["a", "d", "ell", "verdict", "t_decided", "final_mass", "final_max"]
THRESHOLD_HEADER = ["a", "d", "ell0_lo", "ell0_hi", "ell1_lo", "ell1_hi", "region"]


def sweep_csv(path, rows) -> Path:
    return write_csv(path, SWEEP_HEADER,
                     ([r.a, r.d, r.ell, r.verdict, r.t_decided, r.final_mass, r.final_max]
                      for r in rows))


# --------------------------------------------------------------------------
# SVG
# --------------------------------------------------------------------------

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]


class _Frame:
    def __init__(self, xlim, ylim, width=640, height=400, margin=55):
        self.w, self.h, self.m = width, height, margin
        self.x0, self.x1 = xlim
        self.y0, self.y1 = ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return self.m + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * (self.w - 2 * self.m)

    def py(self, y):
        return self.h - self.m - (np.asarray(y) - self.y0) / (self.y1 - self.y0) * (self.h - 2 * self.m)


def _finite_bounds(arrays, pad=0.05):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays] or [np.zeros(1)])
    vals = vals[np.isfinite(vals)]
    if len(vals) == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    span = hi - lo or 1.0
    return lo - pad * span, hi + pad * span


def _axes(fr: _Frame, title, xlabel, ylabel):
    out = [f'<rect x="{fr.m}" y="{fr.m}" width="{fr.w - 2 * fr.m}" height="{fr.h - 2 * fr.m}" '
           'fill="none" stroke="#444"/>']
    for k in range(5):
        xv = fr.x0 + k * (fr.x1 - fr.x0) / 4
        yv = fr.y0 + k * (fr.y1 - fr.y0) / 4
        out.append(f'<text x="{fr.px(xv):.1f}" y="{fr.h - fr.m + 16}" font-size="11" '
                   f'text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{fr.m - 6}" y="{fr.py(yv) + 4:.1f}" font-size="11" '
                   f'text-anchor="end">{yv:.3g}</text>')
    out.append(f'<text x="{fr.w / 2}" y="{fr.m - 18}" font-size="14" text-anchor="middle">'
               f'{escape(title)}</text>')
    out.append(f'<text x="{fr.w / 2}" y="{fr.h - 12}" font-size="12" text-anchor="middle">'
               f'{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{fr.h / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 14 {fr.h / 2})">{escape(ylabel)}</text>')
    return out


def _polyline(fr, x, y, color, dash=None):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ok = np.isfinite(x) & np.isfinite(y)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(fr.px(x[ok]), fr.py(y[ok])))
    style = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{style}/>'


def _write_svg(path, fr, body):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{fr.w}" height="{fr.h}" '
            f'viewBox="0 0 {fr.w} {fr.h}">\n<rect width="100%" height="100%" fill="white"/>\n')
    path.write_text(head + "\n".join(body) + "\n</svg>\n")
    return path


def svg_lines(path, series, title="", xlabel="", ylabel="", vlines=(), markers=()):
    """Line plot.

    ``series``: list of ``(label, x, y)``; ``vlines``: ``(label, x)``;
    ``markers``: ``(label, x, y)`` drawn as points.
    """
    xs = [s[1] for s in series] + [[v[1]] for v in vlines] + [m[1] for m in markers]
    ys = [s[2] for s in series] + [m[2] for m in markers]
    fr = _Frame(_finite_bounds(xs, 0.0), _finite_bounds(ys))
    body = _axes(fr, title, xlabel, ylabel)
    legend = []
    for k, (label, x, y) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        body.append(_polyline(fr, x, y, color))
        legend.append((label, color))
    for k, (label, xv) in enumerate(vlines):
        color = PALETTE[(len(series) + k) % len(PALETTE)]
        body.append(_polyline(fr, [xv, xv], [fr.y0, fr.y1], color, dash="4,3"))
        legend.append((label, color))
    for k, (label, x, y) in enumerate(markers):
        color = PALETTE[(len(series) + len(vlines) + k) % len(PALETTE)]
        for a, b in zip(np.asarray(x, float), np.asarray(y, float)):
            if math.isfinite(a) and math.isfinite(b):
                body.append(f'<circle cx="{fr.px(a):.2f}" cy="{fr.py(b):.2f}" r="3.5" '
                            f'fill="none" stroke="{color}"/>')
        legend.append((label, color))
    for k, (label, color) in enumerate(legend):
        y = fr.m + 14 + 15 * k
        body.append(f'<line x1="{fr.w - fr.m - 120}" y1="{y - 4}" x2="{fr.w - fr.m - 100}" '
                    f'y2="{y - 4}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{fr.w - fr.m - 95}" y="{y}" font-size="11">{escape(label)}</text>')
    return _write_svg(path, fr, body)


def svg_scatter(path, x, y, labels, title="", xlabel="", ylabel=""):
    """Categorical scatter, one color per distinct label."""
    fr = _Frame(_finite_bounds([x]), _finite_bounds([y]))
    body = _axes(fr, title, xlabel, ylabel)
    kinds = sorted(set(labels))
    colors = {k: PALETTE[i % len(PALETTE)] for i, k in enumerate(kinds)}
    for a, b, lab in zip(x, y, labels):
        body.append(f'<circle cx="{fr.px(a):.2f}" cy="{fr.py(b):.2f}" r="3" fill="{colors[lab]}"/>')
    for k, lab in enumerate(kinds):
        yy = fr.m + 14 + 15 * k
        body.append(f'<circle cx="{fr.w - fr.m - 60}" cy="{yy - 4}" r="4" fill="{colors[lab]}"/>')
        body.append(f'<text x="{fr.w - fr.m - 50}" y="{yy}" font-size="11">{escape(lab)}</text>')
    return _write_svg(path, fr, body)


__all__ = [
    "write_csv", "read_csv", "write_json", "profile_csv", "family_csv", "trajectory_csv",
    "field_csv", "sweep_csv", "svg_lines", "svg_scatter", "SWEEP_HEADER", "THRESHOLD_HEADER",
]
