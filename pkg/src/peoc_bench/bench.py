"""Benchmark orchestration: n seeded process-repeats of the full pipeline.

One process-repeat = train a policy on m levels, gate on converged
return, collect in-distribution states on the training levels and
out-of-distribution states on freshly generated levels, split, fit the
baselines on the in-distribution train part, then evaluate all four
classifiers on the shared test set. Repeats are pure functions of
(config, repeat index), so they can run in any order or in parallel and
still produce the identical report.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gridworld, net, ppo
from .baselines import AEClassifier, AEConfig, KnnClassifier, ae_fit, knn_fit
from .errors import (NoAcceptedRepeats, NonFiniteLoss, ParseError, RangeError,
                     UnknownKey)
from .evaluation import (AggregateStats, RocCurve, aggregate, roc_curve,
                         train_test_split)
from .gridworld import MAX_RETURN
from .peoc import (TAG_AFTER_LAST_UPDATE, TAG_AFTER_UPDATE_1, EntropyClassifier,
                   PolicySnapshot)
from .ppo import PPOConfig, TrainingCurve
from .rng import SplitMix64, stream_at

STATUS_ACCEPTED = "ACCEPTED"
STATUS_DISCARDED = "DISCARDED"

MODE_IND = "ind"
MODE_OOD = "ood"

CLASSIFIER_PEOC_1 = "PEOC-1"
CLASSIFIER_PEOC_LAST = "PEOC-last"
CLASSIFIER_AE = "AE"
CLASSIFIER_KNN = "kNN"

# Seed-slot layout: each repeat owns a block of 64 positions in one
# splitmix64 stream, so every derived seed in a run is distinct.
_SLOTS_PER_REPEAT = 64
_MAX_LEVELS = 56
_SLOT_INIT = 56
_SLOT_ROLLOUT = 57
_SLOT_SPLIT = 58
_SLOT_AE = 59
_SLOT_IND_RUN = 60
_SLOT_OOD_RUN = 61


@dataclass(frozen=True)
class GateConfig:
    """Policy performance check: mean return over the final window must
    reach fraction * max achievable return (inclusive)."""

    window: int = 10
    fraction: float = 0.95
    max_return: float = MAX_RETURN

    @property
    def threshold(self) -> float:
        return self.fraction * self.max_return


@dataclass(frozen=True)
class BenchConfig:
    n_repeats: int = 40
    m_levels: int = 4
    train_steps: int = 200_000
    ind_run_steps: int = 30_000
    ood_run_steps: int = 10_000
    split_train: int = 2
    split_test: int = 1
    gate_window: int = 10
    gate_fraction: float = 0.95
    master_seed: int = 0
    # PPO hyperparameters
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_eps: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    learning_rate: float = 3e-4
    rollout_len: int = 1024
    minibatch_size: int = 256
    ppo_epochs: int = 4
    # baselines
    ae_epochs: int = 50
    ae_minibatch: int = 128
    ae_learning_rate: float = 1e-3
    ae_bottleneck: int = 16
    knn_k: int = 5

    def validate(self) -> None:
        positive = ["n_repeats", "m_levels", "train_steps", "ind_run_steps",
                    "ood_run_steps", "split_train", "split_test", "gate_window",
                    "rollout_len", "minibatch_size", "ppo_epochs", "ae_minibatch",
                    "ae_bottleneck", "knn_k"]
        for name in positive:
            if getattr(self, name) < 1:
                raise RangeError(f"{name} must be >= 1")
        if self.ae_epochs < 0:
            raise RangeError("ae_epochs must be >= 0")
        if self.m_levels > _MAX_LEVELS:
            raise RangeError(f"m_levels is capped at {_MAX_LEVELS}")
        if not (0.0 <= self.gate_fraction <= 1.0):
            raise RangeError("gate_fraction must lie in [0, 1]")
        if not (0.0 <= self.gamma <= 1.0 and 0.0 <= self.gae_lambda <= 1.0):
            raise RangeError("gamma and gae_lambda must lie in [0, 1]")
        if self.clip_eps <= 0.0 or self.learning_rate <= 0.0 or self.ae_learning_rate <= 0.0:
            raise RangeError("clip_eps and learning rates must be positive")
        if self.entropy_coef < 0.0 or self.value_coef < 0.0:
            raise RangeError("loss coefficients must be >= 0")
        if self.train_steps < self.rollout_len:
            raise RangeError("train_steps must cover at least one rollout")

    @property
    def n_updates(self) -> int:
        return max(1, self.train_steps // self.rollout_len)

    @property
    def gate(self) -> GateConfig:
        return GateConfig(window=self.gate_window, fraction=self.gate_fraction)

    def ppo_config(self, bundle: "SeedBundle") -> PPOConfig:
        return PPOConfig(gamma=self.gamma, gae_lambda=self.gae_lambda,
                         clip_eps=self.clip_eps, entropy_coef=self.entropy_coef,
                         value_coef=self.value_coef, learning_rate=self.learning_rate,
                         rollout_len=self.rollout_len, minibatch_size=self.minibatch_size,
                         epochs=self.ppo_epochs, updates=self.n_updates,
                         level_seeds=bundle.level_seeds, init_seed=bundle.init_seed,
                         rollout_seed=bundle.rollout_seed)

    def ae_config(self, seed: int) -> AEConfig:
        return AEConfig(epochs=self.ae_epochs, minibatch_size=self.ae_minibatch,
                        learning_rate=self.ae_learning_rate,
                        bottleneck=self.ae_bottleneck, seed=seed)


@dataclass(frozen=True)
class SeedBundle:
    """All randomness a repeat needs, derived collision-free from the master seed."""

    repeat: int
    level_seeds: tuple[int, ...]
    init_seed: int
    rollout_seed: int
    split_seed: int
    ae_seed: int
    ind_run_seed: int
    ood_run_seed: int

    def components(self) -> tuple[int, ...]:
        return self.level_seeds + (self.init_seed, self.rollout_seed, self.split_seed,
                                   self.ae_seed, self.ind_run_seed, self.ood_run_seed)


def derive_seeds(master: int, repeat: int, m_levels: int) -> SeedBundle:
    """Seed bundle for one repeat; bundles never share any component."""
    if not (1 <= m_levels <= _MAX_LEVELS):
        raise RangeError(f"m_levels must be in [1, {_MAX_LEVELS}]")
    base = repeat * _SLOTS_PER_REPEAT

    def slot(k: int) -> int:
        return stream_at(master, base + k)

    return SeedBundle(
        repeat=repeat,
        level_seeds=tuple(slot(j) for j in range(m_levels)),
        init_seed=slot(_SLOT_INIT),
        rollout_seed=slot(_SLOT_ROLLOUT),
        split_seed=slot(_SLOT_SPLIT),
        ae_seed=slot(_SLOT_AE),
        ind_run_seed=slot(_SLOT_IND_RUN),
        ood_run_seed=slot(_SLOT_OOD_RUN),
    )


def performance_check(curve: TrainingCurve, gate: GateConfig) -> bool:
    """Mean episode return over the final gate window meets the threshold.

    A window containing nan (an update in which no episode finished)
    fails the check.
    """
    if len(curve) == 0:
        return False
    window = min(gate.window, len(curve))
    mean = float(np.mean(curve.mean_return[-window:]))
    return bool(np.isfinite(mean) and mean >= gate.threshold)


@dataclass(frozen=True)
class SampleSet:
    """Observations collected during policy runs, tagged with their level seed."""

    role: str  # MODE_IND or MODE_OOD
    observations: np.ndarray  # (N, obs_dim)
    level_seeds: np.ndarray   # (N,) uint64, the level each row was seen on

    def __len__(self) -> int:
        return self.observations.shape[0]


def collect_states(params: net.PolicyParams, mode: str, steps: int, seed: int,
                   training_seeds: tuple[int, ...]) -> SampleSet:
    """Run the policy and record the observation of every state acted in.

    IND runs cycle the m training levels round-robin; OOD runs draw a
    fresh generator seed per episode from a splitmix64 stream, skipping
    the training seeds. Actions are sampled from the policy. Exactly
    `steps` observations are returned.
    """
    if mode not in (MODE_IND, MODE_OOD):
        raise ValueError(f"unknown collection mode {mode!r}")
    rng = np.random.default_rng(seed)
    ood_stream = SplitMix64(seed)
    training_set = set(training_seeds)
    ind_levels = [gridworld.generate_level(s) for s in training_seeds] if mode == MODE_IND else []

    obs_buf = np.empty((steps, gridworld.OBS_DIM))
    seed_buf = np.empty(steps, dtype=np.uint64)

    def next_level(index: int) -> gridworld.Level:
        if mode == MODE_IND:
            return ind_levels[index % len(ind_levels)]
        while True:
            candidate = ood_stream.next_u64()
            if candidate not in training_set:
                return gridworld.generate_level(candidate)

    episode = 0
    level = next_level(episode)
    state, obs = gridworld.reset(level)
    for t in range(steps):
        logits, _ = net.forward(params, obs)
        probs = net.softmax(logits)
        action = ppo.sample_action(probs, rng)
        obs_buf[t] = obs
        seed_buf[t] = level.seed
        state, obs, _, done = gridworld.step(state, gridworld.Action(action))
        if done:
            episode += 1
            level = next_level(episode)
            state, obs = gridworld.reset(level)
    return SampleSet(role=mode, observations=obs_buf, level_seeds=seed_buf)


@dataclass(frozen=True)
class ClassifierResult:
    name: str
    curve: RocCurve
    auc: float


@dataclass
class RepeatReport:
    """Everything a single process-repeat produced."""

    index: int
    level_seeds: tuple[int, ...]
    status: str
    curve: TrainingCurve
    snapshots: dict[str, net.PolicyParams] = field(default_factory=dict)
    n_ind_train: int = 0
    n_ind_test: int = 0
    n_ood: int = 0
    results: dict[str, ClassifierResult] = field(default_factory=dict)
    diagnostic: str = ""

    @property
    def accepted(self) -> bool:
        return self.status == STATUS_ACCEPTED


@dataclass
class BenchmarkReport:
    config: BenchConfig
    repeats: list[RepeatReport]
    stats: AggregateStats | None

    @property
    def n_accepted(self) -> int:
        return sum(r.accepted for r in self.repeats)

    @property
    def n_discarded(self) -> int:
        return len(self.repeats) - self.n_accepted

    def auc_table(self) -> dict[str, list[float]]:
        """Per-classifier AUC lists over accepted repeats, in repeat order."""
        table: dict[str, list[float]] = {}
        for rep in self.repeats:
            if not rep.accepted:
                continue
            for name, res in rep.results.items():
                table.setdefault(name, []).append(res.auc)
        return table


def _empty_curve() -> TrainingCurve:
    z = np.empty(0)
    return TrainingCurve(update=np.empty(0, dtype=np.int64), mean_return=z.copy(),
                         mean_entropy=z.copy(), policy_loss=z.copy(), value_loss=z.copy())


def run_process_repeat(config: BenchConfig, index: int) -> RepeatReport:
    """One full pipeline pass under the repeat's own seed bundle."""
    bundle = derive_seeds(config.master_seed, index, config.m_levels)
    report = RepeatReport(index=index, level_seeds=bundle.level_seeds,
                          status=STATUS_DISCARDED, curve=_empty_curve())
    try:
        snapshots, curve = ppo.train(config.ppo_config(bundle))
    except NonFiniteLoss as exc:
        report.diagnostic = f"training aborted: {exc}"
        return report

    report.curve = curve
    report.snapshots = snapshots
    if not performance_check(curve, config.gate):
        window = min(config.gate_window, len(curve))
        tail = float(np.mean(curve.mean_return[-window:])) if len(curve) else float("nan")
        report.diagnostic = (f"performance gate failed: final-window mean return "
                             f"{tail:.3f} < {config.gate.threshold:.3f}")
        return report

    final = snapshots["after_last_update"]
    ind = collect_states(final, MODE_IND, config.ind_run_steps,
                         bundle.ind_run_seed, bundle.level_seeds)
    ood = collect_states(final, MODE_OOD, config.ood_run_steps,
                         bundle.ood_run_seed, bundle.level_seeds)

    ind_train, ind_test = train_test_split(ind.observations,
                                           (config.split_train, config.split_test),
                                           bundle.split_seed)
    report.n_ind_train = ind_train.shape[0]
    report.n_ind_test = ind_test.shape[0]
    report.n_ood = len(ood)

    test_x = np.vstack([ind_test, ood.observations])
    labels = np.concatenate([np.zeros(ind_test.shape[0], dtype=np.int64),
                             np.ones(len(ood), dtype=np.int64)])

    snap_1 = PolicySnapshot(params=snapshots["after_update_1"], tag=TAG_AFTER_UPDATE_1,
                            train_seed=bundle.init_seed, update_index=1)
    snap_last = PolicySnapshot(params=final, tag=TAG_AFTER_LAST_UPDATE,
                               train_seed=bundle.init_seed, update_index=config.n_updates)
    classifiers = [
        EntropyClassifier(snapshot=snap_1, name=CLASSIFIER_PEOC_1),
        EntropyClassifier(snapshot=snap_last, name=CLASSIFIER_PEOC_LAST),
        AEClassifier(model=ae_fit(ind_train, config.ae_config(bundle.ae_seed))),
        KnnClassifier(index=knn_fit(ind_train, k=config.knn_k)),
    ]
    for clf in classifiers:
        curve_c = roc_curve(clf.scores(test_x), labels)
        report.results[clf.name] = ClassifierResult(name=clf.name, curve=curve_c,
                                                    auc=curve_c.auc)
    report.status = STATUS_ACCEPTED
    return report


def _repeat_worker(args: tuple[BenchConfig, int]) -> RepeatReport:
    return run_process_repeat(*args)


def run_benchmark(config: BenchConfig, jobs: int = 1,
                  progress=None) -> BenchmarkReport:
    """Run all repeats (optionally in parallel) and aggregate accepted AUCs.

    Raises NoAcceptedRepeats when every repeat is discarded; the partial
    report rides along on the exception so callers can persist it.
    """
    config.validate()
    indices = list(range(config.n_repeats))
    if jobs > 1 and config.n_repeats > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            repeats = list(pool.map(_repeat_worker, [(config, i) for i in indices]))
    else:
        repeats = []
        for i in indices:
            rep = run_process_repeat(config, i)
            if progress is not None:
                progress(rep)
            repeats.append(rep)
    if jobs > 1 and progress is not None:
        for rep in repeats:
            progress(rep)

    report = BenchmarkReport(config=config, repeats=repeats, stats=None)
    table = report.auc_table()
    if not table:
        raise NoAcceptedRepeats(
            f"all {config.n_repeats} repeats were discarded by the performance gate",
            report=report)
    report.stats = aggregate(table)
    return report


def config_to_dict(config: BenchConfig) -> dict[str, object]:
    return dataclasses.asdict(config)


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(BenchConfig)}
_INT_FIELDS = {name for name, tp in _CONFIG_FIELDS.items() if tp in ("int", int)}


def parse_config(text: str, path: str = "<config>") -> BenchConfig:
    """Parse the flat `key = value` config format into a BenchConfig.

    Lines are `key = value` with `#` starting a comment; omitted keys take
    their defaults, unknown keys are errors, and the assembled config is
    range-validated before being returned.
    """
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_FIELDS:
            raise UnknownKey(f"{path}:{lineno}: unknown config key {key!r}")
        if key in values:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = int(value) if key in _INT_FIELDS else float(value)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad value {value!r} for {key!r}") from exc
    config = BenchConfig(**values)
    config.validate()
    return config


def load_config(path) -> BenchConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path=str(path))


def format_config(config: BenchConfig) -> str:
    """Render the effective configuration; parse_config inverts this exactly."""
    lines = []
    for f in dataclasses.fields(BenchConfig):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {value!r}" if isinstance(value, float)
                     else f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
