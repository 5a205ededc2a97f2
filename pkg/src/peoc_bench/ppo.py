"""PPO-clip trainer over a fixed set of levels.

Rollouts cycle the training levels round-robin, advantages come from
generalized advantage estimation, and each update runs several epochs of
clipped-surrogate minibatch Adam steps. Policy snapshots are taken after
the first and after the last update; the training curve records mean
episode return, mean policy entropy, and loss components per update.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import gridworld, net
from .errors import EmptyTrajectory, NonFiniteLoss, ParseError, RangeError
from .gridworld import Level
from .net import AdamState, PolicyParams
from .rng import SplitMix64


@dataclass(frozen=True)
class PPOConfig:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    learning_rate: float = 3e-4
    rollout_len: int = 1024
    minibatch_size: int = 256
    epochs: int = 4
    updates: int = 150
    level_seeds: tuple[int, ...] = (0, 1, 2, 3)
    init_seed: int = 0
    rollout_seed: int = 0

    def validate(self) -> None:
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise RangeError("gamma and gae_lambda must lie in [0, 1]")
        if self.clip_eps <= 0.0:
            raise RangeError("clip_eps must be positive")
        if self.updates < 1:
            raise RangeError("updates must be >= 1")
        if self.rollout_len < 1 or self.minibatch_size < 1 or self.epochs < 1:
            raise RangeError("rollout_len, minibatch_size and epochs must be >= 1")
        if not self.level_seeds:
            raise RangeError("at least one training level is required")


@dataclass(frozen=True)
class Transition:
    """One step of experience, as recorded during a rollout."""

    obs: np.ndarray
    action: int
    log_prob_old: float
    reward: float
    value_est: float
    done: bool


@dataclass
class Trajectory:
    """A rollout stored column-wise, plus per-step GAE results once filled.

    `advantages` holds the raw GAE values (what the recursion defines);
    `norm_advantages` is the per-update zero-mean/unit-variance rescaling
    actually consumed by the surrogate loss. `returns` = advantages + values.
    """

    obs: np.ndarray          # (T, obs_dim)
    actions: np.ndarray      # (T,) int64
    log_probs: np.ndarray    # (T,)
    rewards: np.ndarray      # (T,)
    values: np.ndarray       # (T,)
    dones: np.ndarray        # (T,) bool
    bootstrap_value: float = 0.0
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None
    norm_advantages: np.ndarray | None = None
    episode_returns: list[float] = field(default_factory=list)
    mean_entropy: float = float("nan")

    def __len__(self) -> int:
        return self.obs.shape[0]

    def transition(self, i: int) -> Transition:
        return Transition(self.obs[i], int(self.actions[i]), float(self.log_probs[i]),
                          float(self.rewards[i]), float(self.values[i]), bool(self.dones[i]))


def sample_action(probs: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    acc = 0.0
    for a, p in enumerate(probs):
        acc += p
        if u < acc:
            return a
    return len(probs) - 1


def collect_rollout(params: PolicyParams, levels: list[Level], length: int,
                    rng_seed: int) -> Trajectory:
    """Sample `length` steps, cycling through the levels round-robin.

    Starts a fresh episode on levels[0]; whenever an episode ends, the
    next one begins on the following level. Deterministic given
    (params, levels, rng_seed). A trailing unfinished episode is
    truncated and its last value estimate kept for bootstrapping.
    """
    obs_dim = params.w1.shape[1]
    obs_buf = np.empty((length, obs_dim))
    actions = np.empty(length, dtype=np.int64)
    log_probs = np.empty(length)
    rewards = np.empty(length)
    values = np.empty(length)
    dones = np.zeros(length, dtype=bool)
    episode_returns: list[float] = []
    entropy_sum = 0.0

    rng = np.random.default_rng(rng_seed)
    level_idx = 0
    state, obs = gridworld.reset(levels[0])
    episode_return = 0.0
    bootstrap = 0.0

    for t in range(length):
        logits, value = net.forward(params, obs)
        logp = net.log_softmax(logits)
        probs = np.exp(logp)
        entropy_sum += net.entropy(probs)
        action = sample_action(probs, rng)

        next_state, next_obs, reward, done = gridworld.step(state, gridworld.Action(action))
        obs_buf[t] = obs
        actions[t] = action
        log_probs[t] = logp[action]
        rewards[t] = reward
        values[t] = value
        dones[t] = done
        episode_return += reward

        if done:
            episode_returns.append(episode_return)
            episode_return = 0.0
            level_idx = (level_idx + 1) % len(levels)
            state, obs = gridworld.reset(levels[level_idx])
        else:
            state, obs = next_state, next_obs

    if length > 0 and not dones[-1]:
        _, bootstrap = net.forward(params, obs)

    return Trajectory(obs=obs_buf, actions=actions, log_probs=log_probs, rewards=rewards,
                      values=values, dones=dones, bootstrap_value=float(bootstrap),
                      episode_returns=episode_returns,
                      mean_entropy=entropy_sum / length if length else float("nan"))


def compute_gae(traj: Trajectory, gamma: float, lam: float) -> Trajectory:
    """Fill advantages, return targets and normalized advantages in place.

    delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
    A_t     = delta_t + gamma * lam * (1 - done_t) * A_{t+1}
    with V after the final step taken from the stored bootstrap value.
    """
    n = len(traj)
    if n == 0:
        raise EmptyTrajectory("cannot compute advantages of an empty trajectory")

    next_values = np.append(traj.values[1:], traj.bootstrap_value)
    not_done = 1.0 - traj.dones.astype(np.float64)
    # V(s_{t+1}) is meaningless across an episode boundary; the mask removes it.
    deltas = traj.rewards + gamma * next_values * not_done - traj.values

    adv = np.empty(n)
    acc = 0.0
    for t in range(n - 1, -1, -1):
        acc = deltas[t] + gamma * lam * not_done[t] * acc
        adv[t] = acc

    traj.advantages = adv
    traj.returns = adv + traj.values
    centered = adv - adv.mean()
    if np.any(traj.rewards != 0.0):
        traj.norm_advantages = centered / (adv.std() + 1e-8)
    else:
        # A reward-free rollout carries no usable advantage signal, only
        # value-estimate noise; rescaling that noise to unit variance lets
        # it overpower the entropy bonus and collapse the policy. Center
        # but keep the (tiny) natural scale instead.
        traj.norm_advantages = centered
    return traj


@dataclass(frozen=True)
class UpdateStats:
    policy_loss: float
    value_loss: float
    entropy: float
    total_loss: float


def ppo_loss_and_grads(params: PolicyParams, obs: np.ndarray, actions: np.ndarray,
                       log_probs_old: np.ndarray, advantages: np.ndarray,
                       returns: np.ndarray, config: PPOConfig):
    """Mean clipped-surrogate loss over a batch and its parameter gradients.

    Per sample: -min(r*A, clip(r, 1-eps, 1+eps)*A)
                + value_coef * (V - return)^2 - entropy_coef * H(pi(s)).
    """
    batch = obs.shape[0]
    logits, values, cache = net.forward_with_cache(params, obs)
    logp = net.log_softmax(logits)
    probs = np.exp(logp)
    idx = np.arange(batch)
    lp_new = logp[idx, actions]

    ratio = np.exp(lp_new - log_probs_old)
    u1 = ratio * advantages
    u2 = np.clip(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps) * advantages
    policy_term = -np.minimum(u1, u2)

    value_err = values - returns
    value_term = config.value_coef * value_err ** 2
    entropies = net.entropy_batch(probs)
    loss = float(np.mean(policy_term + value_term - config.entropy_coef * entropies))

    # d(policy term)/d lp_new: active only where the unclipped branch is the minimum.
    g_lp = np.where(u1 <= u2, -advantages * ratio, 0.0)
    one_hot = np.zeros_like(probs)
    one_hot[idx, actions] = 1.0
    dlogits = g_lp[:, None] * (one_hot - probs)
    dlogits += config.entropy_coef * probs * (logp + entropies[:, None])
    dlogits /= batch
    dvalues = 2.0 * config.value_coef * value_err / batch

    grads = net.backward_from_heads(params, cache, dlogits, dvalues)
    stats = UpdateStats(policy_loss=float(policy_term.mean()),
                        value_loss=float((value_err ** 2).mean()),
                        entropy=float(entropies.mean()), total_loss=loss)
    return loss, grads, stats


def ratios_under(params: PolicyParams, traj: Trajectory) -> np.ndarray:
    """Probability ratios new/old for every trajectory step under `params`."""
    logits, _ = net.forward_batch(params, traj.obs)
    lp = net.log_softmax(logits)[np.arange(len(traj)), traj.actions]
    return np.exp(lp - traj.log_probs)


def ppo_update(params: PolicyParams, traj: Trajectory, config: PPOConfig, rng_seed: int,
               opt: AdamState | None = None) -> tuple[PolicyParams, AdamState, UpdateStats]:
    """Run epochs x minibatches Adam steps on one rollout.

    The optimizer state is threaded through so its moments persist across
    updates; pass None to start fresh.
    """
    if traj.norm_advantages is None:
        raise EmptyTrajectory("trajectory has no advantages; run compute_gae first")
    if opt is None:
        opt = net.init_adam(params.as_list(), lr=config.learning_rate)

    rng = np.random.default_rng(rng_seed)
    n = len(traj)
    stats_acc: list[UpdateStats] = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for lo in range(0, n, config.minibatch_size):
            sel = order[lo:lo + config.minibatch_size]
            loss, grads, stats = ppo_loss_and_grads(
                params, traj.obs[sel], traj.actions[sel], traj.log_probs[sel],
                traj.norm_advantages[sel], traj.returns[sel], config)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} at optimizer step {opt.step + 1}")
            grad_list = grads.as_list()
            if not all(np.all(np.isfinite(g)) for g in grad_list):
                raise NonFiniteLoss(f"non-finite gradient at optimizer step {opt.step + 1}")
            new_arrays, opt = net.adam_step(params.as_list(), grad_list, opt)
            params = PolicyParams.from_list(new_arrays)
            stats_acc.append(stats)

    def mean_of(key: str) -> float:
        return float(np.mean([getattr(s, key) for s in stats_acc]))

    agg = UpdateStats(policy_loss=mean_of("policy_loss"), value_loss=mean_of("value_loss"),
                      entropy=mean_of("entropy"), total_loss=mean_of("total_loss"))
    return params, opt, agg


@dataclass
class TrainingCurve:
    """Per-update training statistics, one row per completed update."""

    update: np.ndarray        # 1-based update index
    mean_return: np.ndarray   # mean return of episodes completed in the rollout (nan if none)
    mean_entropy: np.ndarray  # mean policy entropy over rollout states
    policy_loss: np.ndarray
    value_loss: np.ndarray

    def __len__(self) -> int:
        return len(self.update)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["update", "mean_return", "mean_entropy", "policy_loss", "value_loss"])
        for i in range(len(self)):
            writer.writerow([int(self.update[i]), repr(float(self.mean_return[i])),
                             repr(float(self.mean_entropy[i])), repr(float(self.policy_loss[i])),
                             repr(float(self.value_loss[i]))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TrainingCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["update", "mean_return", "mean_entropy",
                                   "policy_loss", "value_loss"]:
            raise ParseError("not a training-curve CSV")
        data = np.array([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
        if data.size == 0:
            data = data.reshape(0, 5)
        return cls(update=data[:, 0].astype(np.int64), mean_return=data[:, 1],
                   mean_entropy=data[:, 2], policy_loss=data[:, 3], value_loss=data[:, 4])


def train(config: PPOConfig) -> tuple[dict[str, PolicyParams], TrainingCurve]:
    """Full training run. Returns snapshots after update 1 and after the
    last update, plus the training curve. Bit-reproducible given the
    config's seeds."""
    config.validate()
    levels = [gridworld.generate_level(s) for s in config.level_seeds]
    params = net.init_policy_params(config.init_seed)
    opt = net.init_adam(params.as_list(), lr=config.learning_rate)
    seed_stream = SplitMix64(config.rollout_seed)

    snapshots: dict[str, PolicyParams] = {}
    rows = {"update": [], "mean_return": [], "mean_entropy": [],
            "policy_loss": [], "value_loss": []}

    for u in range(1, config.updates + 1):
        rollout_seed = seed_stream.next_u64()
        shuffle_seed = seed_stream.next_u64()
        traj = collect_rollout(params, levels, config.rollout_len, rollout_seed)
        compute_gae(traj, config.gamma, config.gae_lambda)
        params, opt, stats = ppo_update(params, traj, config, shuffle_seed, opt)

        rows["update"].append(u)
        rows["mean_return"].append(float(np.mean(traj.episode_returns))
                                   if traj.episode_returns else float("nan"))
        rows["mean_entropy"].append(traj.mean_entropy)
        rows["policy_loss"].append(stats.policy_loss)
        rows["value_loss"].append(stats.value_loss)

        if u == 1:
            snapshots["after_update_1"] = params.copy()

    snapshots["after_last_update"] = params.copy()
    curve = TrainingCurve(update=np.array(rows["update"], dtype=np.int64),
                          mean_return=np.array(rows["mean_return"]),
                          mean_entropy=np.array(rows["mean_entropy"]),
                          policy_loss=np.array(rows["policy_loss"]),
                          value_loss=np.array(rows["value_loss"]))
    return snapshots, curve
