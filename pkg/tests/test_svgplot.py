"""SVG emitter tests: XML well-formedness, determinism, and geometry."""
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from peoc_bench.errors import ParseError
from peoc_bench.evaluation import roc_curve
from peoc_bench.svgplot import (PlotSpec, emit_box_svg, emit_roc_svg,
                                emit_training_svg)

SVG_NS = "{http://www.w3.org/2000/svg}"


def write_roc_csv(path, scores, labels):
    path.write_text(roc_curve(np.asarray(scores), np.asarray(labels)).to_csv())


def write_auc_csv(path, rows):
    lines = ["repeat,classifier,auc"]
    lines += [f"{r},{c},{a}" for r, c, a in rows]
    path.write_text("\n".join(lines) + "\n")


def median_line_y(svg_text, name):
    root = ET.fromstring(svg_text)
    group = root.find(f".//{SVG_NS}g[@id='box-{name}']")
    line = group.find(f"{SVG_NS}line[@class='median']")
    return float(line.get("y1"))


class TestRocSvg:
    def test_well_formed_and_deterministic(self, tmp_path):
        csv_a = tmp_path / "0_PEOC-1.csv"
        write_roc_csv(csv_a, [0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
        spec = PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "roc.svg"),
                        title="roc")
        svg1 = emit_roc_svg(spec)
        svg2 = emit_roc_svg(spec)
        assert svg1 == svg2
        ET.fromstring(svg1)  # raises on malformed XML
        assert (tmp_path / "roc.svg").read_text() == svg1

    def test_perfect_curve_passes_through_corner(self, tmp_path):
        csv_a = tmp_path / "perfect.csv"
        write_roc_csv(csv_a, [0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
        svg = emit_roc_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "p.svg")))
        root = ET.fromstring(svg)
        polys = root.findall(f".//{SVG_NS}polyline")
        # corner (fpr=0, tpr=1) maps to the plot's upper-left: x=62, y=42
        curve_pts = polys[-1].get("points").split()
        assert "62.00,42.00" in curve_pts

    def test_diagonal_input_coincides_with_reference(self, tmp_path):
        csv_a = tmp_path / "flat.csv"
        write_roc_csv(csv_a, [0.5, 0.5, 0.5, 0.5], [1, 1, 0, 0])
        svg = emit_roc_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "d.svg")))
        root = ET.fromstring(svg)
        polys = root.findall(f".//{SVG_NS}polyline")
        reference, curve = polys[0], polys[-1]
        assert reference.get("points") == curve.get("points")

    def test_legend_carries_auc(self, tmp_path):
        csv_a = tmp_path / "3_kNN.csv"
        write_roc_csv(csv_a, [0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])
        svg = emit_roc_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "l.svg")))
        assert "kNN (AUC=1.0000)" in svg

    def test_malformed_csv_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n1,2\n")
        with pytest.raises(ParseError):
            emit_roc_svg(PlotSpec(inputs=(str(bad),), out=str(tmp_path / "x.svg")))


class TestBoxSvg:
    def test_reported_medians_order(self, tmp_path):
        # constant per-repeat AUC injections; the first-snapshot entropy
        # classifier's median line must sit highest (smallest y)
        medians = {"PEOC-1": 0.74, "PEOC-150": 0.63, "AE": 0.65,
                   "SO-GAAL": 0.69, "MO-GAAL": 0.65}
        rows = [(r, name, v) for name, v in medians.items() for r in range(8)]
        csv_a = tmp_path / "report.csv"
        write_auc_csv(csv_a, rows)
        svg = emit_box_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "b.svg")))
        ET.fromstring(svg)
        ys = {name: median_line_y(svg, name) for name in medians}
        assert ys["PEOC-1"] == min(ys.values())
        assert ys["PEOC-150"] == max(ys.values())

    def test_single_repeat_degenerate_box(self, tmp_path):
        csv_a = tmp_path / "one.csv"
        write_auc_csv(csv_a, [(0, "AE", 0.7)])
        svg = emit_box_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "s.svg")))
        root = ET.fromstring(svg)
        group = root.find(f".//{SVG_NS}g[@id='box-AE']")
        rect = group.find(f"{SVG_NS}rect")
        assert float(rect.get("height")) == 0.0  # q1 == q3

    def test_byte_identical(self, tmp_path):
        csv_a = tmp_path / "r.csv"
        write_auc_csv(csv_a, [(0, "AE", 0.6), (1, "AE", 0.8), (0, "kNN", 0.7)])
        spec = PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "b.svg"))
        assert emit_box_svg(spec) == emit_box_svg(spec)

    def test_outliers_drawn(self, tmp_path):
        csv_a = tmp_path / "o.csv"
        values = [0.50, 0.51, 0.52, 0.53, 0.99]  # 0.99 is beyond the 1.5 IQR fence
        write_auc_csv(csv_a, [(i, "AE", v) for i, v in enumerate(values)])
        svg = emit_box_svg(PlotSpec(inputs=(str(csv_a),), out=str(tmp_path / "ob.svg")))
        root = ET.fromstring(svg)
        group = root.find(f".//{SVG_NS}g[@id='box-AE']")
        assert group.findall(f"{SVG_NS}circle")

    def test_bad_header_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("who,what,where\n")
        with pytest.raises(ParseError):
            emit_box_svg(PlotSpec(inputs=(str(bad),), out=str(tmp_path / "x.svg")))


class TestTrainingSvg:
    def _curve_csv(self, tmp_path):
        from peoc_bench.ppo import TrainingCurve
        curve = TrainingCurve(update=np.arange(1, 6, dtype=np.int64),
                              mean_return=np.array([0.0, 2.0, 5.0, 9.0, 10.0]),
                              mean_entropy=np.array([1.38, 1.2, 0.9, 0.5, 0.3]),
                              policy_loss=np.zeros(5), value_loss=np.zeros(5))
        path = tmp_path / "0_training.csv"
        path.write_text(curve.to_csv())
        return path

    def test_well_formed_and_deterministic(self, tmp_path):
        path = self._curve_csv(tmp_path)
        spec = PlotSpec(inputs=(str(path),), out=str(tmp_path / "t.svg"), title="train")
        svg1 = emit_training_svg(spec)
        svg2 = emit_training_svg(spec)
        assert svg1 == svg2
        ET.fromstring(svg1)

    def test_two_series_per_input(self, tmp_path):
        path = self._curve_csv(tmp_path)
        svg = emit_training_svg(PlotSpec(inputs=(str(path),),
                                         out=str(tmp_path / "t2.svg")))
        assert "training return" in svg and "training entropy" in svg

    def test_malformed_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        with pytest.raises(ParseError):
            emit_training_svg(PlotSpec(inputs=(str(bad),), out=str(tmp_path / "x.svg")))
