"""Dependency-free SVG chart emitters.

Three chart types: ROC curves, training curves, and per-classifier AUC
box plots. Emission is fully deterministic (no timestamps, no generated
ids), so identical inputs yield byte-identical files and the charts can
be golden-tested.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParseError
from .evaluation import RocCurve
from .ppo import TrainingCurve

CANVAS_W = 640
CANVAS_H = 480
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 20, 42, 48

# one fixed color per series index
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd",
          "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")


@dataclass(frozen=True)
class PlotSpec:
    inputs: tuple[str, ...]
    out: str
    title: str = ""
    x_label: str = ""
    y_label: str = ""


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _f(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Shared axes scaffolding mapping data space onto the fixed canvas."""

    def __init__(self, x_range, y_range, title, x_label, y_label,
                 y2_range=None, y2_label=""):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.y2 = y2_range
        self.plot_x = MARGIN_L
        self.plot_y = MARGIN_T
        self.plot_w = CANVAS_W - MARGIN_L - MARGIN_R
        self.plot_h = CANVAS_H - MARGIN_T - MARGIN_B
        self.parts: list[str] = [
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" '
            f'height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}">\n',
            f'<rect x="0" y="0" width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>\n',
        ]
        if title:
            self.parts.append(
                f'<text x="{CANVAS_W // 2}" y="24" text-anchor="middle" '
                f'font-family="sans-serif" font-size="15">{_esc(title)}</text>\n')
        self.parts.append(
            f'<rect x="{self.plot_x}" y="{self.plot_y}" width="{self.plot_w}" '
            f'height="{self.plot_h}" fill="none" stroke="black" stroke-width="1"/>\n')
        if x_label:
            self.parts.append(
                f'<text x="{self.plot_x + self.plot_w / 2:.1f}" y="{CANVAS_H - 10}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                f'{_esc(x_label)}</text>\n')
        if y_label:
            cy = self.plot_y + self.plot_h / 2
            self.parts.append(
                f'<text x="16" y="{cy:.1f}" text-anchor="middle" font-family="sans-serif" '
                f'font-size="12" transform="rotate(-90 16 {cy:.1f})">{_esc(y_label)}</text>\n')
        if y2_range is not None and y2_label:
            cy = self.plot_y + self.plot_h / 2
            rx = CANVAS_W - 6
            self.parts.append(
                f'<text x="{rx}" y="{cy:.1f}" text-anchor="middle" font-family="sans-serif" '
                f'font-size="12" transform="rotate(90 {rx} {cy:.1f})">{_esc(y2_label)}</text>\n')

    def sx(self, x: float) -> float:
        span = self.x1 - self.x0
        frac = 0.0 if span == 0 else (x - self.x0) / span
        return self.plot_x + frac * self.plot_w

    def sy(self, y: float) -> float:
        span = self.y1 - self.y0
        frac = 0.0 if span == 0 else (y - self.y0) / span
        return self.plot_y + self.plot_h - frac * self.plot_h

    def sy2(self, y: float) -> float:
        lo, hi = self.y2
        frac = 0.0 if hi == lo else (y - lo) / (hi - lo)
        return self.plot_y + self.plot_h - frac * self.plot_h

    def x_ticks(self, values, fmt="{:g}"):
        for v in values:
            px = self.sx(v)
            py = self.plot_y + self.plot_h
            self.parts.append(f'<line x1="{_f(px)}" y1="{py}" x2="{_f(px)}" y2="{py + 5}" '
                              f'stroke="black" stroke-width="1"/>\n')
            self.parts.append(f'<text x="{_f(px)}" y="{py + 18}" text-anchor="middle" '
                              f'font-family="sans-serif" font-size="11">{fmt.format(v)}</text>\n')

    def y_ticks(self, values, fmt="{:g}", second_axis=False):
        for v in values:
            py = self.sy2(v) if second_axis else self.sy(v)
            if second_axis:
                px = self.plot_x + self.plot_w
                self.parts.append(f'<line x1="{px}" y1="{_f(py)}" x2="{px + 5}" y2="{_f(py)}" '
                                  f'stroke="black" stroke-width="1"/>\n')
                self.parts.append(f'<text x="{px + 8}" y="{_f(py + 4)}" text-anchor="start" '
                                  f'font-family="sans-serif" font-size="11">{fmt.format(v)}</text>\n')
            else:
                self.parts.append(f'<line x1="{self.plot_x - 5}" y1="{_f(py)}" '
                                  f'x2="{self.plot_x}" y2="{_f(py)}" '
                                  f'stroke="black" stroke-width="1"/>\n')
                self.parts.append(f'<text x="{self.plot_x - 8}" y="{_f(py + 4)}" '
                                  f'text-anchor="end" font-family="sans-serif" '
                                  f'font-size="11">{fmt.format(v)}</text>\n')

    def polyline(self, xs, ys, color, dashed=False, width=1.5, y2=False, extra=""):
        sy = self.sy2 if y2 else self.sy
        pts = " ".join(f"{_f(self.sx(x))},{_f(sy(y))}" for x, y in zip(xs, ys)
                       if np.isfinite(x) and np.isfinite(y))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        self.parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                          f'stroke-width="{width}"{dash}{extra}/>\n')

    def legend(self, entries, anchor="tl"):
        """entries: list of (label, color, dashed). anchor: tl or br."""
        if not entries:
            return
        line_h = 16
        box_w = 14
        width = 10 + box_w + 6 + max(len(lbl) for lbl, _, _ in entries) * 6.6 + 8
        height = len(entries) * line_h + 8
        if anchor == "br":
            x = self.plot_x + self.plot_w - width - 8
            y = self.plot_y + self.plot_h - height - 8
        else:
            x = self.plot_x + 8
            y = self.plot_y + 8
        self.parts.append(f'<rect x="{_f(x)}" y="{_f(y)}" width="{_f(width)}" '
                          f'height="{height}" fill="white" stroke="#999" stroke-width="0.5"/>\n')
        for i, (label, color, dashed) in enumerate(entries):
            ly = y + 8 + i * line_h + line_h / 2
            dash = ' stroke-dasharray="6,4"' if dashed else ""
            self.parts.append(f'<line x1="{_f(x + 6)}" y1="{_f(ly)}" x2="{_f(x + 6 + box_w)}" '
                              f'y2="{_f(ly)}" stroke="{color}" stroke-width="2"{dash}/>\n')
            self.parts.append(f'<text x="{_f(x + 6 + box_w + 6)}" y="{_f(ly + 4)}" '
                              f'font-family="sans-serif" font-size="11">{_esc(label)}</text>\n')

    def render(self) -> str:
        return "".join(self.parts) + "</svg>\n"


def _series_label(path: str) -> str:
    stem = Path(path).stem
    head, _, tail = stem.partition("_")
    return tail if tail and head.isdigit() else stem


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def emit_roc_svg(spec: PlotSpec) -> str:
    """One polyline per input ROC CSV on unit-square axes, plus the
    random-classifier diagonal and a legend carrying AUC values."""
    curves: list[tuple[str, RocCurve]] = []
    for path in spec.inputs:
        try:
            curves.append((_series_label(path), RocCurve.from_csv(_read_text(path))))
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not curves:
        raise ParseError("emit_roc_svg needs at least one ROC CSV")

    frame = _Frame((0.0, 1.0), (0.0, 1.0), spec.title,
                   spec.x_label or "false positive rate",
                   spec.y_label or "true positive rate")
    ticks = [0.0, 0.25, 0.5, 0.75, 1.0]
    frame.x_ticks(ticks, fmt="{:.2f}")
    frame.y_ticks(ticks, fmt="{:.2f}")
    frame.polyline([0.0, 1.0], [0.0, 1.0], "#aaaaaa", dashed=True, width=1.0)

    entries = []
    for i, (label, curve) in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        frame.polyline(curve.fpr, curve.tpr, color)
        entries.append((f"{label} (AUC={curve.auc:.4f})", color, False))
    frame.legend(entries, anchor="br")

    svg = frame.render()
    Path(spec.out).write_text(svg, encoding="utf-8")
    return svg


def emit_training_svg(spec: PlotSpec) -> str:
    """Mean return (solid, left axis) and mean policy entropy (dashed,
    right axis) against the update index, one color per input curve."""
    curves: list[tuple[str, TrainingCurve]] = []
    for path in spec.inputs:
        try:
            curves.append((_series_label(path), TrainingCurve.from_csv(_read_text(path))))
        except Exception as exc:
            raise ParseError(f"{path}: {exc}") from exc
    if not curves or all(len(c) == 0 for _, c in curves):
        raise ParseError("emit_training_svg needs at least one nonempty training CSV")

    max_update = max(int(c.update.max()) for _, c in curves if len(c))
    ent_top = 1.4  # just above ln(4)
    frame = _Frame((1.0, float(max(max_update, 2))), (0.0, 10.0), spec.title,
                   spec.x_label or "update", spec.y_label or "mean episode return",
                   y2_range=(0.0, ent_top), y2_label="mean policy entropy (nats)")
    xticks = np.unique(np.linspace(1, max(max_update, 2), num=6).round().astype(int))
    frame.x_ticks(list(map(float, xticks)), fmt="{:.0f}")
    frame.y_ticks([0.0, 2.5, 5.0, 7.5, 10.0], fmt="{:.1f}")
    frame.y_ticks([0.0, 0.35, 0.7, 1.05, 1.4], fmt="{:.2f}", second_axis=True)

    entries = []
    for i, (label, curve) in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        xs = curve.update.astype(np.float64)
        frame.polyline(xs, curve.mean_return, color)
        frame.polyline(xs, curve.mean_entropy, color, dashed=True, y2=True)
        entries.append((f"{label} return", color, False))
        entries.append((f"{label} entropy", color, True))
    frame.legend(entries, anchor="tl")

    svg = frame.render()
    Path(spec.out).write_text(svg, encoding="utf-8")
    return svg


def _read_auc_table(path: str) -> dict[str, list[float]]:
    rows = list(csv.reader(io.StringIO(_read_text(path))))
    if not rows or rows[0] != ["repeat", "classifier", "auc"]:
        raise ParseError(f"{path}: expected header repeat,classifier,auc")
    table: dict[str, list[float]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 columns")
        try:
            table.setdefault(row[1], []).append(float(row[2]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad auc value {row[2]!r}") from exc
    if not table:
        raise ParseError(f"{path}: no AUC rows")
    return table


def emit_box_svg(spec: PlotSpec) -> str:
    """Box-and-whisker summary of per-repeat AUC values per classifier.

    Boxes span the quartiles with a median line; whiskers reach the most
    extreme values within 1.5 IQR of the box; points beyond are drawn as
    outlier circles. Classifiers keep their first-appearance order.
    """
    if len(spec.inputs) != 1:
        raise ParseError("emit_box_svg takes exactly one per-repeat AUC CSV")
    table = _read_auc_table(spec.inputs[0])

    frame = _Frame((0.0, float(len(table))), (0.0, 1.0), spec.title,
                   spec.x_label, spec.y_label or "ROC AUC")
    frame.y_ticks([0.0, 0.25, 0.5, 0.75, 1.0], fmt="{:.2f}")
    frame.polyline([0.0, float(len(table))], [0.5, 0.5], "#bbbbbb", dashed=True, width=1.0)

    slot = frame.plot_w / len(table)
    half_box = min(slot * 0.25, 40.0)
    for i, (name, values) in enumerate(table.items()):
        v = np.asarray(values, dtype=np.float64)
        q1, med, q3 = np.percentile(v, [25.0, 50.0, 75.0])
        iqr = q3 - q1
        lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
        inside = v[(v >= lo_fence) & (v <= hi_fence)]
        whisk_lo = float(inside.min()) if inside.size else float(med)
        whisk_hi = float(inside.max()) if inside.size else float(med)
        outliers = v[(v < lo_fence) | (v > hi_fence)]

        cx = frame.plot_x + (i + 0.5) * slot
        color = COLORS[i % len(COLORS)]
        g = [f'<g id="box-{_esc(name)}">\n']
        # whiskers and caps
        for w_end, box_edge in ((whisk_lo, q1), (whisk_hi, q3)):
            g.append(f'<line x1="{_f(cx)}" y1="{_f(frame.sy(box_edge))}" x2="{_f(cx)}" '
                     f'y2="{_f(frame.sy(w_end))}" stroke="black" stroke-width="1"/>\n')
            g.append(f'<line x1="{_f(cx - half_box / 2)}" y1="{_f(frame.sy(w_end))}" '
                     f'x2="{_f(cx + half_box / 2)}" y2="{_f(frame.sy(w_end))}" '
                     f'stroke="black" stroke-width="1"/>\n')
        g.append(f'<rect x="{_f(cx - half_box)}" y="{_f(frame.sy(q3))}" '
                 f'width="{_f(2 * half_box)}" height="{_f(frame.sy(q1) - frame.sy(q3))}" '
                 f'fill="{color}" fill-opacity="0.35" stroke="black" stroke-width="1"/>\n')
        g.append(f'<line class="median" x1="{_f(cx - half_box)}" y1="{_f(frame.sy(med))}" '
                 f'x2="{_f(cx + half_box)}" y2="{_f(frame.sy(med))}" '
                 f'stroke="black" stroke-width="2"/>\n')
        for ov in sorted(map(float, outliers)):
            g.append(f'<circle cx="{_f(cx)}" cy="{_f(frame.sy(ov))}" r="2.5" fill="none" '
                     f'stroke="black" stroke-width="1"/>\n')
        g.append("</g>\n")
        frame.parts.extend(g)
        frame.parts.append(f'<text x="{_f(cx)}" y="{frame.plot_y + frame.plot_h + 18}" '
                           f'text-anchor="middle" font-family="sans-serif" '
                           f'font-size="11">{_esc(name)}</text>\n')

    svg = frame.render()
    Path(spec.out).write_text(svg, encoding="utf-8")
    return svg
