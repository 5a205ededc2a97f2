"""Scoring states by policy entropy.

Train briefly, then score states visited on the training levels (the
in-distribution set) against states from freshly generated levels (the
out-of-distribution set) with both stored snapshots. Higher score =
more out-of-distribution.
"""
from peoc_bench import PPOConfig, train, separation_check
from peoc_bench.bench import collect_states, derive_seeds
from peoc_bench.peoc import (TAG_AFTER_LAST_UPDATE, TAG_AFTER_UPDATE_1,
                             PolicySnapshot, peoc_scores)

bundle = derive_seeds(master=3, repeat=0, m_levels=4)
config = PPOConfig(updates=60, level_seeds=bundle.level_seeds,
                   init_seed=bundle.init_seed, rollout_seed=bundle.rollout_seed)
snapshots, curve = train(config)
print(f"trained 60 updates; final mean return {curve.mean_return[-1]:.2f}")

final = snapshots["after_last_update"]
ind = collect_states(final, "ind", 2000, bundle.ind_run_seed, bundle.level_seeds)
ood = collect_states(final, "ood", 1000, bundle.ood_run_seed, bundle.level_seeds)
print(f"collected {len(ind)} IND and {len(ood)} OOD observations")

for tag, index in ((TAG_AFTER_UPDATE_1, 1), (TAG_AFTER_LAST_UPDATE, 60)):
    snap = PolicySnapshot(params=snapshots[tag], tag=tag,
                          train_seed=bundle.init_seed, update_index=index)
    s_ind = peoc_scores(snap, ind.observations)
    s_ood = peoc_scores(snap, ood.observations)
    sep = separation_check(s_ind, s_ood)
    print(f"\nsnapshot {tag}:")
    print(f"  mean entropy IND {s_ind.mean():.4f}  OOD {s_ood.mean():.4f}")
    print(f"  perfectly separable: {sep.perfectly_separable} "
          f"(margin {sep.margin:+.4f})")
