"""Benchmark output directory writer.

Layout under the chosen output directory:

    report.csv                     per-repeat AUC table (repeat,classifier,auc)
    aggregate.csv                  cross-repeat statistics per classifier
    report.txt                     human-readable summary
    effective_config.txt           the full configuration actually used
    roc/<repeat>_<classifier>.csv  ROC points per accepted repeat/classifier
    curves/<repeat>_training.csv   training curve per repeat
    snapshots/<repeat>_{first,last}.bin   policy snapshots (binary container)
    plots/auc_box.svg              AUC box plot over accepted repeats
    plots/roc_<repeat>.svg         ROC chart per accepted repeat
    plots/training_<repeat>.svg    training curve chart per repeat

Everything written here is deterministic: identical reports produce
byte-identical files.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from . import net
from .bench import (CLASSIFIER_PEOC_1, CLASSIFIER_PEOC_LAST, BenchmarkReport,
                    format_config)
from .evaluation import aggregate
from .svgplot import PlotSpec, emit_box_svg, emit_roc_svg, emit_training_svg

# Directional-reproduction targets for the report summary: the entropy
# classifier built from the first snapshot should beat chance by a clear
# margin and not trail its late-snapshot variant.
PEOC1_MEDIAN_TARGET = 0.6


def report_csv_text(report: BenchmarkReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["repeat", "classifier", "auc"])
    for rep in report.repeats:
        if not rep.accepted:
            continue
        for name, res in rep.results.items():
            writer.writerow([rep.index, name, repr(float(res.auc))])
    return buf.getvalue()


def aggregate_csv_text(table: dict[str, list[float]]) -> str:
    stats = aggregate(table)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["classifier", "n_repeats", "median", "mean", "std",
                     "std_degenerate", "min", "q1", "q3", "max"])
    for name, s in stats.per_classifier.items():
        writer.writerow([name, s.n_repeats, repr(s.median), repr(s.mean), repr(s.std),
                         int(s.std_degenerate), repr(s.min), repr(s.q1), repr(s.q3),
                         repr(s.max)])
    return buf.getvalue()


def directional_flags(report: BenchmarkReport) -> dict[str, bool]:
    """The two qualitative reproduction checks surfaced in report.txt."""
    table = report.auc_table()
    flags = {"peoc1_median_above_target": False, "peoc1_not_below_peoc_last": False}
    if CLASSIFIER_PEOC_1 in table:
        med1 = float(np.median(table[CLASSIFIER_PEOC_1]))
        flags["peoc1_median_above_target"] = med1 >= PEOC1_MEDIAN_TARGET
        if CLASSIFIER_PEOC_LAST in table:
            med_last = float(np.median(table[CLASSIFIER_PEOC_LAST]))
            flags["peoc1_not_below_peoc_last"] = med1 >= med_last
    return flags


def report_txt_text(report: BenchmarkReport) -> str:
    lines = ["policy-entropy OOD benchmark report",
             "===================================", ""]
    cfg = report.config
    lines.append(f"repeats: {len(report.repeats)} "
                 f"(accepted {report.n_accepted}, discarded {report.n_discarded})")
    lines.append(f"master seed: {cfg.master_seed}")
    lines.append(f"levels per repeat: {cfg.m_levels}; training steps: {cfg.train_steps} "
                 f"({cfg.n_updates} updates of {cfg.rollout_len} steps)")
    lines.append(f"collection steps: {cfg.ind_run_steps} IND / {cfg.ood_run_steps} OOD; "
                 f"split {cfg.split_train}/{cfg.split_test}")
    lines.append(f"performance gate: mean return over final {cfg.gate_window} updates "
                 f">= {cfg.gate.threshold:g}")
    lines.append("")

    lines.append("per-repeat outcomes")
    lines.append("-------------------")
    for rep in report.repeats:
        if rep.accepted:
            aucs = ", ".join(f"{name}={res.auc:.4f}" for name, res in rep.results.items())
            lines.append(f"repeat {rep.index}: ACCEPTED  "
                         f"|I_train|={rep.n_ind_train} |I_test|={rep.n_ind_test} "
                         f"|O|={rep.n_ood}  {aucs}")
        else:
            lines.append(f"repeat {rep.index}: DISCARDED  ({rep.diagnostic})")
    lines.append("")

    table = report.auc_table()
    if table:
        stats = aggregate(table)
        lines.append("aggregate ROC AUC over accepted repeats")
        lines.append("---------------------------------------")
        header = f"{'classifier':<12} {'n':>3} {'median':>8} {'mean':>8} {'std':>8} " \
                 f"{'min':>8} {'max':>8}"
        lines.append(header)
        for name, s in stats.per_classifier.items():
            std_txt = f"{s.std:.4f}" + ("*" if s.std_degenerate else "")
            lines.append(f"{name:<12} {s.n_repeats:>3} {s.median:>8.4f} {s.mean:>8.4f} "
                         f"{std_txt:>8} {s.min:>8.4f} {s.max:>8.4f}")
        if any(s.std_degenerate for s in stats.per_classifier.values()):
            lines.append("(* std reported as 0: only one accepted repeat)")
        lines.append("")

        flags = directional_flags(report)
        lines.append("directional reproduction")
        lines.append("------------------------")
        med1 = float(np.median(table.get(CLASSIFIER_PEOC_1, [float('nan')])))
        lines.append(f"PEOC-1 median AUC >= {PEOC1_MEDIAN_TARGET}: "
                     f"{'yes' if flags['peoc1_median_above_target'] else 'NO'} "
                     f"(median {med1:.4f})")
        lines.append(f"PEOC-1 median AUC >= PEOC-last median AUC: "
                     f"{'yes' if flags['peoc1_not_below_peoc_last'] else 'NO'}")
    else:
        lines.append("no accepted repeats; no classifier evaluation was possible")
    lines.append("")
    return "\n".join(lines)


def write_outputs(report: BenchmarkReport, outdir, plots: bool = True) -> Path:
    """Write the full output layout; returns the output directory path."""
    out = Path(outdir)
    for sub in ("roc", "curves", "snapshots") + (("plots",) if plots else ()):
        (out / sub).mkdir(parents=True, exist_ok=True)

    (out / "report.csv").write_text(report_csv_text(report), encoding="utf-8")
    table = report.auc_table()
    if table:
        (out / "aggregate.csv").write_text(aggregate_csv_text(table), encoding="utf-8")
    (out / "report.txt").write_text(report_txt_text(report), encoding="utf-8")
    (out / "effective_config.txt").write_text(format_config(report.config), encoding="utf-8")

    for rep in report.repeats:
        if len(rep.curve):
            (out / "curves" / f"{rep.index}_training.csv").write_text(
                rep.curve.to_csv(), encoding="utf-8")
        if "after_update_1" in rep.snapshots:
            net.save_policy_params(out / "snapshots" / f"{rep.index}_first.bin",
                                   rep.snapshots["after_update_1"])
        if "after_last_update" in rep.snapshots:
            net.save_policy_params(out / "snapshots" / f"{rep.index}_last.bin",
                                   rep.snapshots["after_last_update"])
        for name, res in rep.results.items():
            (out / "roc" / f"{rep.index}_{name}.csv").write_text(
                res.curve.to_csv(), encoding="utf-8")

    if plots:
        _write_plots(report, out)
    return out


def _write_plots(report: BenchmarkReport, out: Path) -> None:
    if report.auc_table():
        emit_box_svg(PlotSpec(inputs=(str(out / "report.csv"),),
                              out=str(out / "plots" / "auc_box.svg"),
                              title="classifier AUC over accepted repeats"))
    for rep in report.repeats:
        if rep.accepted:
            roc_inputs = tuple(str(out / "roc" / f"{rep.index}_{name}.csv")
                               for name in rep.results)
            emit_roc_svg(PlotSpec(inputs=roc_inputs,
                                  out=str(out / "plots" / f"roc_{rep.index}.svg"),
                                  title=f"ROC, repeat {rep.index}"))
        if len(rep.curve):
            emit_training_svg(PlotSpec(
                inputs=(str(out / "curves" / f"{rep.index}_training.csv"),),
                out=str(out / "plots" / f"training_{rep.index}.svg"),
                title=f"training, repeat {rep.index}"))
