"""The full benchmark pipeline at toy scale.

Two process-repeats with tiny budgets and a disabled performance gate,
so it finishes in seconds. Each repeat trains a policy, collects IND and
OOD states with the final policy, fits the autoencoder and k-NN
baselines on the IND train split, and evaluates all four classifiers on
the shared test set. Outputs land in demos/benchmark_out/.
"""
from pathlib import Path

from peoc_bench import BenchConfig, run_benchmark
from peoc_bench.reporting import write_outputs

config = BenchConfig(
    n_repeats=2,
    m_levels=2,
    train_steps=2048,      # 8 updates of 256 steps
    rollout_len=256,
    minibatch_size=128,
    ppo_epochs=2,
    ind_run_steps=600,
    ood_run_steps=300,
    ae_epochs=5,
    ae_minibatch=64,
    gate_fraction=0.0,     # toy budgets cannot converge; accept everything
    master_seed=11,
)

report = run_benchmark(config, progress=lambda rep: print(
    f"repeat {rep.index}: {rep.status}"))

print()
for name, s in report.stats.per_classifier.items():
    print(f"{name:>10}: median AUC {s.median:.4f} over {s.n_repeats} repeats")

outdir = Path(__file__).resolve().parent / "benchmark_out"
write_outputs(report, outdir)
print(f"\nfull output layout written to {outdir}")
for path in sorted(p.relative_to(outdir).as_posix() for p in outdir.rglob("*") if p.is_file()):
    print(f"  {path}")
