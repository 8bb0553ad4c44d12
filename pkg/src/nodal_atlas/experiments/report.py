"""Reports: named CSV tables, pass/fail items, SVG figures, error budget."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def _fmt(v):
    """Deterministic text for CSV cells."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return v
    return v


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values, **named):
        if named:
            values = tuple(named[c] for c in self.columns)
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(tuple(values))
        return len(self.rows) - 1

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


@dataclass
class Item:
    """A pass/fail entry citing the table rows it was computed from."""

    id: str
    passed: bool
    value: object
    threshold: object
    table: str
    rows: list
    note: str = ""
    status: str = ""

    def to_dict(self):
        return {"id": self.id, "passed": bool(self.passed), "status": self.status or ("pass" if self.passed else "fail"),
                "value": _jsonable(self.value), "threshold": _jsonable(self.threshold),
                "table": self.table, "rows": [int(r) for r in self.rows], "note": self.note}


@dataclass
class Report:
    config: dict
    tables: dict = field(default_factory=dict)
    items: list = field(default_factory=list)
    figures: list = field(default_factory=list)
    error_budget: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)
    svgs: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)   # extra text outputs, e.g. scaling.json

    def table(self, name, columns):
        if name not in self.tables:
            self.tables[name] = Table(list(columns))
        return self.tables[name]

    def check(self, id, passed, value, threshold, table, rows, note="", status=""):
        item = Item(id, bool(passed), value, threshold, table, list(rows), note, status)
        self.items.append(item)
        return item

    @property
    def passed(self):
        return all(i.passed for i in self.items)

    def item(self, id):
        for i in self.items:
            if i.id == id:
                return i
        raise KeyError(id)

    def summary(self):
        return {
            "experiment": self.config.get("name"),
            "passed": self.passed,
            "items": [i.to_dict() for i in self.items],
            "info": _jsonable(self.info),
        }

    def to_dict(self):
        return {
            "config": _jsonable(self.config),
            "tables": {k: f"{k}.csv" for k in sorted(self.tables)},
            "summary": self.summary(),
            "figures": sorted(set(self.figures) | set(self.svgs)),
            "files": sorted(self.files),
            "error_budget": _jsonable(self.error_budget),
        }

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.tables):
            (out / f"{name}.csv").write_text(self.tables[name].to_csv())
        for name in sorted(self.svgs):
            (out / name).write_text(self.svgs[name])
            if name not in self.figures:
                self.figures.append(name)
        for name in sorted(self.files):
            (out / name).write_text(self.files[name])
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        (out / "report.json").write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return out

    def csv_hashes(self):
        return {k: hashlib.sha256(t.to_csv().encode()).hexdigest() for k, t in sorted(self.tables.items())}


def svg_overlay(domain, segments=None, cuboids=(), size=480, margin=10, stroke=1.0):
    """Domain outline, nodal segments and optional cuboid outlines as SVG."""
    poly = np.asarray(domain.boundary, dtype=float)
    pts = [poly]
    if segments is not None and len(segments):
        pts.append(np.asarray(segments).reshape(-1, 2))
    for q in cuboids:
        pts.append(q.corners())
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-12)
    scale = (size - 2 * margin) / span

    def tr(p):
        p = np.atleast_2d(p)
        x = margin + (p[:, 0] - lo[0]) * scale
        y = size - margin - (p[:, 1] - lo[1]) * scale
        return np.column_stack([x, y])

    def path(p, closed=True):
        q = tr(p)
        d = "M " + " L ".join(f"{x:.3f} {y:.3f}" for x, y in q)
        return d + (" Z" if closed else "")

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<path d="{path(poly)}" fill="none" stroke="black" stroke-width="{stroke:g}"/>']
    for q in cuboids:
        parts.append(f'<path d="{path(q.corners())}" fill="none" stroke="#888" stroke-width="0.5"/>')
    if segments is not None and len(segments):
        segs = np.asarray(segments)
        a, b = tr(segs[:, 0]), tr(segs[:, 1])
        d = " ".join(f"M {x1:.3f} {y1:.3f} L {x2:.3f} {y2:.3f}" for (x1, y1), (x2, y2) in zip(a, b))
        parts.append(f'<path d="{d}" fill="none" stroke="#c00" stroke-width="{stroke:g}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
