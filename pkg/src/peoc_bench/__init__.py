"""Benchmark kit for policy-entropy out-of-distribution classification.

Train PPO policies on a restricted set of procedurally generated grid
levels, score states by the entropy of stored policy snapshots, and
compare that entropy classifier against autoencoder and k-NN one-class
baselines with ROC/AUC statistics over repeated, fully seeded runs.
"""

from .bench import (BenchConfig, BenchmarkReport, RepeatReport, SeedBundle,
                    collect_states, derive_seeds, load_config, parse_config,
                    performance_check, run_benchmark, run_process_repeat)
from .baselines import (AEConfig, AEModel, KnnIndex, ae_fit, ae_score, ae_scores,
                        knn_fit, knn_score, knn_scores)
from .evaluation import (AggregateStats, RocCurve, ScoredSample, aggregate, auc,
                         pairwise_auc, roc_curve, train_test_split)
from .gridworld import (Action, EnvState, Level, Outcome, Tile, generate_level,
                        level_from_text, level_to_text, observe, reset, step)
from .net import (AdamState, PolicyParams, adam_step, entropy, forward,
                  init_adam, init_policy_params, softmax)
from .peoc import (EntropyClassifier, PolicySnapshot, SeparationResult,
                   peoc_score, peoc_scores, separation_check)
from .ppo import (PPOConfig, Trajectory, TrainingCurve, Transition,
                  collect_rollout, compute_gae, ppo_update, train)

__version__ = "0.1.0"
