"""Output plumbing: run records, CSV/JSON/text tables and static SVG charts."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

SWEEP_FIELDS = ("boundary", "a", "c0", "N", "iterations", "Q", "residual", "w0_over_h", "p_phys")


@dataclass
class RunRecord:
    """Everything needed to reproduce and read back one command invocation."""

    command: str
    config: dict
    results: dict
    backend: str
    version: str
    timings: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def _encode(obj) -> str:
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        text = format(obj, ".17g")
        # keep a float marker so the value reads back as float
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj) + "\n"


def fmt_residual(e) -> str:
    e = float(e)
    return f"{e:.1e}" if math.isfinite(e) else str(e)


def fmt_load(q) -> str:
    q = float(q)
    return f"{q:.1f}" if math.isfinite(q) else str(q)


def fmt_plain(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else str(v)


def csv_text(rows: list, fields) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([fmt_plain(row.get(f)) for f in fields])
    return buf.getvalue()


def table_text(rows: list, fields, formatters: dict | None = None) -> str:
    """Fixed-width text table; ``formatters`` maps a column to a str function."""
    formatters = formatters or {}
    cells = [[formatters.get(f, fmt_plain)(row.get(f)) for f in fields] for row in rows]
    widths = [max([len(f)] + [len(r[i]) for r in cells]) for i, f in enumerate(fields)]
    lines = ["  ".join(f.rjust(w) for f, w in zip(fields, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def svg_line_chart(series: list, title: str = "", xlabel: str = "", ylabel: str = "",
                   log_y: bool = False, width: int = 640, height: int = 420) -> str:
    """A minimal static line chart.

    ``series`` is a list of ``(label, xs, ys)``.  With ``log_y`` non-positive
    values are dropped.
    """
    pts = []
    for label, xs, ys in series:
        pairs = [(float(x), float(y)) for x, y in zip(xs, ys) if math.isfinite(float(y))]
        if log_y:
            pairs = [(x, math.log10(y)) for x, y in pairs if y > 0]
        pts.append((label, pairs))
    allx = [x for _, p in pts for x, _ in p] or [0.0, 1.0]
    ally = [y for _, p in pts for _, y in p] or [0.0, 1.0]
    x0, x1 = min(allx), max(allx)
    y0, y1 = min(ally), max(ally)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    ml, mr, mt, mb = 70, 20, 40, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + (y1 - y) / (y1 - y0) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>']
    for i in range(5):
        xv = x0 + (x1 - x0) * i / 4
        yv = y0 + (y1 - y0) * i / 4
        ylab = f"1e{yv:.1f}" if log_y else f"{yv:.3g}"
        out.append(f'<text x="{sx(xv):.1f}" y="{mt + ph + 16}" text-anchor="middle">{xv:.3g}</text>')
        out.append(f'<text x="{ml - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end">{ylab}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 12}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="22" text-anchor="middle" font-size="14">{title}</text>')
    for k, (label, pairs) in enumerate(pts):
        color = colors[k % len(colors)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pairs)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
        out.append(f'<text x="{ml + pw - 4}" y="{mt + 14 + 14 * k}" text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
