"""Command-line front end.

Subcommands:
    bench run        run the full benchmark and write the output directory
    bench aggregate  recompute aggregate statistics from a report.csv
    level dump       print a generated level in its text format
    policy train     run one training and write curve + snapshots
    policy eval      roll out a stored snapshot and report return/entropy
    plot roc|training|box   render SVG charts from result CSVs

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
The PEOC_BENCH_OUT environment variable supplies the default output
directory where --out is not given.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import gridworld, net, ppo, reporting
from .errors import PeocBenchError, NoAcceptedRepeats
from .evaluation import aggregate
from .svgplot import PlotSpec, emit_box_svg, emit_roc_svg, emit_training_svg

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="peoc-bench",
                     description="policy-entropy OOD classification benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="benchmark orchestration")
    bench_sub = p_bench.add_subparsers(dest="subcommand", required=True)
    p_run = bench_sub.add_parser("run", help="run all process-repeats")
    p_run.add_argument("--config", help="config file (key = value lines)")
    p_run.add_argument("--out", help="output directory (default: $PEOC_BENCH_OUT)")
    p_run.add_argument("--seed", type=int, help="override master seed")
    p_run.add_argument("--repeats", type=int, help="override number of repeats")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel repeats")
    p_run.add_argument("--quiet", action="store_true")
    p_agg = bench_sub.add_parser("aggregate", help="aggregate a report.csv")
    p_agg.add_argument("report_csv")
    p_agg.add_argument("--out", help="write aggregate CSV here")
    p_agg.add_argument("--quiet", action="store_true")

    p_level = sub.add_parser("level", help="level inspection")
    level_sub = p_level.add_subparsers(dest="subcommand", required=True)
    p_dump = level_sub.add_parser("dump", help="print a level as text")
    p_dump.add_argument("--seed", type=int, required=True)
    p_dump.add_argument("--out", help="write to file instead of stdout")

    p_policy = sub.add_parser("policy", help="single policy operations")
    policy_sub = p_policy.add_subparsers(dest="subcommand", required=True)
    p_train = policy_sub.add_parser("train", help="train one policy")
    p_train.add_argument("--config", help="config file (key = value lines)")
    p_train.add_argument("--out", help="output directory (default: $PEOC_BENCH_OUT)")
    p_train.add_argument("--seed", type=int, help="override master seed")
    p_train.add_argument("--quiet", action="store_true")
    p_eval = policy_sub.add_parser("eval", help="evaluate a stored snapshot")
    p_eval.add_argument("--snapshot", required=True)
    p_eval.add_argument("--level-seeds", default="0,1,2,3",
                        help="comma-separated level seeds")
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--rng-seed", type=int, default=0)

    p_plot = sub.add_parser("plot", help="SVG chart emitters")
    plot_sub = p_plot.add_subparsers(dest="subcommand", required=True)
    for kind, help_txt, many in (("roc", "ROC curves from roc CSVs", True),
                                 ("training", "training curves from curve CSVs", True),
                                 ("box", "AUC box plot from a report.csv", False)):
        p = plot_sub.add_parser(kind, help=help_txt)
        p.add_argument("inputs", nargs="+" if many else 1)
        p.add_argument("--out", required=True, help="output SVG path")
        p.add_argument("--title", default="")
        p.add_argument("--x-label", default="")
        p.add_argument("--y-label", default="")
    return parser


def _resolve_out(arg_out) -> Path:
    out = arg_out or os.environ.get("PEOC_BENCH_OUT")
    if not out:
        raise _UsageError("no output directory: pass --out or set PEOC_BENCH_OUT")
    return Path(out)


def _load_bench_config(args) -> bench_mod.BenchConfig:
    config = bench_mod.load_config(args.config) if args.config else bench_mod.BenchConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "repeats", None) is not None:
        overrides["n_repeats"] = args.repeats
    if overrides:
        config = dataclasses.replace(config, **overrides)
    config.validate()
    return config


def _cmd_bench_run(args) -> int:
    config = _load_bench_config(args)
    out = _resolve_out(args.out)

    def progress(rep):
        if not args.quiet:
            print(f"repeat {rep.index}: {rep.status}"
                  + (f" ({rep.diagnostic})" if rep.diagnostic else ""))

    try:
        report = bench_mod.run_benchmark(config, jobs=max(1, args.jobs), progress=progress)
    except NoAcceptedRepeats as exc:
        if exc.report is not None:
            reporting.write_outputs(exc.report, out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    reporting.write_outputs(report, out)
    if not args.quiet:
        print(f"accepted {report.n_accepted}/{len(report.repeats)} repeats; "
              f"outputs in {out}")
    return EXIT_OK


def _cmd_bench_aggregate(args) -> int:
    from .svgplot import _read_auc_table  # same strict CSV reader the plots use
    table = _read_auc_table(args.report_csv)
    text = reporting.aggregate_csv_text(table)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    if not args.quiet:
        stats = aggregate(table)
        for name, s in stats.per_classifier.items():
            print(f"{name}: median={s.median:.4f} mean={s.mean:.4f} std={s.std:.4f} "
                  f"n={s.n_repeats}")
    return EXIT_OK


def _cmd_level_dump(args) -> int:
    text = gridworld.level_to_text(gridworld.generate_level(args.seed))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_policy_train(args) -> int:
    config = _load_bench_config(args)
    out = _resolve_out(args.out)
    bundle = bench_mod.derive_seeds(config.master_seed, 0, config.m_levels)
    snapshots, curve = ppo.train(config.ppo_config(bundle))
    out.mkdir(parents=True, exist_ok=True)
    (out / "training.csv").write_text(curve.to_csv(), encoding="utf-8")
    net.save_policy_params(out / "snapshot_first.bin", snapshots["after_update_1"])
    net.save_policy_params(out / "snapshot_last.bin", snapshots["after_last_update"])
    if not args.quiet:
        final = float(curve.mean_return[-1]) if len(curve) else float("nan")
        print(f"trained {config.n_updates} updates on {config.m_levels} levels; "
              f"final mean return {final:.3f}; outputs in {out}")
    return EXIT_OK


def _cmd_policy_eval(args) -> int:
    try:
        seeds = [int(s) for s in args.level_seeds.split(",") if s.strip()]
    except ValueError:
        raise _UsageError(f"bad --level-seeds value {args.level_seeds!r}")
    if not seeds or args.episodes < 1:
        raise _UsageError("need at least one level seed and one episode")
    params = net.load_policy_params(args.snapshot)
    levels = [gridworld.generate_level(s) for s in seeds]
    rng = np.random.default_rng(args.rng_seed)

    returns, entropies = [], []
    for ep in range(args.episodes):
        state, obs = gridworld.reset(levels[ep % len(levels)])
        total = 0.0
        while not state.terminal:
            logits, _ = net.forward(params, obs)
            probs = net.softmax(logits)
            entropies.append(net.entropy(probs))
            action = ppo.sample_action(probs, rng)
            state, obs, reward, _ = gridworld.step(state, gridworld.Action(action))
            total += reward
        returns.append(total)
    print(f"episodes: {args.episodes}")
    print(f"mean return: {np.mean(returns):.4f}")
    print(f"mean policy entropy: {np.mean(entropies):.4f} nats")
    return EXIT_OK


def _cmd_plot(args) -> int:
    spec = PlotSpec(inputs=tuple(args.inputs), out=args.out, title=args.title,
                    x_label=args.x_label, y_label=args.y_label)
    emitter = {"roc": emit_roc_svg, "training": emit_training_svg,
               "box": emit_box_svg}[args.subcommand]
    emitter(spec)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "bench":
            return _cmd_bench_run(args) if args.subcommand == "run" \
                else _cmd_bench_aggregate(args)
        if args.command == "level":
            return _cmd_level_dump(args)
        if args.command == "policy":
            return _cmd_policy_train(args) if args.subcommand == "train" \
                else _cmd_policy_eval(args)
        if args.command == "plot":
            return _cmd_plot(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PeocBenchError, FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
