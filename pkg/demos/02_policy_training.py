"""A small PPO training run on four fixed levels.

Thirty updates is nowhere near convergence, but the mechanics show:
rollouts cycle the levels, advantages come from GAE, and the curve logs
mean return and mean policy entropy per update.
"""
import numpy as np

from peoc_bench import PPOConfig, train
from peoc_bench.bench import derive_seeds

bundle = derive_seeds(master=1, repeat=0, m_levels=4)
config = PPOConfig(updates=30, level_seeds=bundle.level_seeds,
                   init_seed=bundle.init_seed, rollout_seed=bundle.rollout_seed)

snapshots, curve = train(config)

print("update  mean_return  mean_entropy")
for i in range(0, len(curve), 5):
    print(f"{curve.update[i]:>6}  {curve.mean_return[i]:>11.3f}  "
          f"{curve.mean_entropy[i]:>12.4f}")

print()
print(f"snapshots taken: {sorted(snapshots)}")
first = snapshots["after_update_1"]
last = snapshots["after_last_update"]
drift = np.abs(first.flat() - last.flat()).mean()
print(f"mean |weight drift| between the two snapshots: {drift:.5f}")
print(f"entropy moved {curve.mean_entropy[0]:.4f} -> {curve.mean_entropy[-1]:.4f} "
      f"(ln 4 = {np.log(4):.4f})")
