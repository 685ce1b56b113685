"""Experiment reports: pass/fail checks, tables, and JSON/CSV/SVG output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass
class Check:
    """One computed value compared against a reference.

    ``mode`` is ``"abs"``, ``"rel"`` or ``"upper"`` (value must not exceed
    ``reference + tolerance``), or ``"bool"`` (value must be truthy).
    """

    name: str
    value: float
    reference: float
    tolerance: float
    mode: str = "abs"
    kind: str = "analytic"  # analytic | computed | identity

    @property
    def error(self) -> float:
        if self.mode == "bool":
            return 0.0 if self.value else 1.0
        if self.mode == "upper":
            return max(0.0, self.value - self.reference)
        diff = abs(self.value - self.reference)
        return diff / abs(self.reference) if self.mode == "rel" and self.reference != 0 else diff

    @property
    def passed(self) -> bool:
        if self.mode == "bool":
            return bool(self.value)
        return bool(math.isfinite(self.value) and self.error <= self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = bool(self.value) if self.mode == "bool" else float(self.value)
        d["error"] = self.error
        d["passed"] = self.passed
        return d


@dataclass
class Report:
    experiment: str
    inputs: dict
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, *args, **kwargs) -> Check:
        c = Check(*args, **kwargs)
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "inputs": self.inputs,
            "checks": [c.as_dict() for c in self.checks],
            "tables": self.tables,
            "passed": self.passed,
            "wall_time": self.wall_time,
        }

    def write_json(self, path: Path) -> None:
        path.write_text(json.dumps(self.as_dict(), indent=2, default=_jsonable) + "\n")

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "value", "reference", "tolerance", "mode", "error", "passed"])
            for c in self.checks:
                d = c.as_dict()
                w.writerow([d["name"], repr(d["value"]), repr(float(c.reference)), repr(float(c.tolerance)), c.mode,
                            repr(d["error"]), d["passed"]])

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            value = bool(c.value) if c.mode == "bool" else float(c.value)
            lines.append(f"{status}  {c.name}: value={value!r} reference={c.reference!r} error={c.error:.3e} tol={c.tolerance:g}")
        return lines


def _jsonable(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return str(x)


def write_svg_plot(path: Path, series: dict, title: str = "", xlabel: str = "", width: int = 640, height: int = 400) -> None:
    """Line plot of ``{label: (x, y)}`` with simple axes, written as standalone SVG."""
    pad_l, pad_r, pad_t, pad_b = 70, 150, 30, 40
    xs = [float(v) for x, _ in series.values() for v in x]
    ys = [float(v) for _, y in series.values() for v in y if math.isfinite(float(v))]
    if not xs or not ys:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = width - pad_l - pad_r, height - pad_t - pad_b

    def sx(v):
        return pad_l + (float(v) - x0) / (x1 - x0) * pw

    def sy(v):
        return pad_t + ph - (float(v) - y0) / (y1 - y0) * ph

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{pad_l}" y="18">{_esc(title)}</text>',
           f'<line x1="{pad_l}" y1="{pad_t + ph}" x2="{pad_l + pw}" y2="{pad_t + ph}" stroke="black"/>',
           f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + ph}" stroke="black"/>']
    for i in range(5):
        fx = x0 + (x1 - x0) * i / 4
        fy = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{sx(fx):.1f}" y="{pad_t + ph + 16}" text-anchor="middle">{fx:.3g}</text>')
        out.append(f'<text x="{pad_l - 6}" y="{sy(fy) + 4:.1f}" text-anchor="end">{fy:.6g}</text>')
    out.append(f'<text x="{pad_l + pw / 2}" y="{height - 6}" text-anchor="middle">{_esc(xlabel)}</text>')
    for i, (label, (x, y)) in enumerate(series.items()):
        color = colors[i % len(colors)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y) if math.isfinite(float(b)))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{pad_l + pw + 10}" y="{pad_t + 16 * (i + 1)}" fill="{color}">{_esc(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
