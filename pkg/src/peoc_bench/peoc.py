"""Policy-entropy one-class classifier.

The score of an observation is simply the entropy of the action
distribution a stored policy snapshot assigns to it. Higher entropy means
the policy is less decided, which is the out-of-distribution signal: all
classifiers in this package use the convention that a HIGHER score marks
a sample as MORE out-of-distribution.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import net
from .errors import EmptyInput
from .net import PolicyParams

TAG_AFTER_UPDATE_1 = "after_update_1"
TAG_AFTER_LAST_UPDATE = "after_last_update"


class Classifier(Protocol):
    """Scoring interface shared by the entropy classifier and the baselines."""

    name: str

    def scores(self, observations: np.ndarray) -> np.ndarray:
        """Per-row OOD scores for a (N, obs_dim) batch; higher = more OOD."""
        ...


@dataclass(frozen=True)
class PolicySnapshot:
    """Policy weights frozen at a named point of training."""

    params: PolicyParams
    tag: str
    train_seed: int
    update_index: int

    def __post_init__(self):
        if self.tag not in (TAG_AFTER_UPDATE_1, TAG_AFTER_LAST_UPDATE):
            raise ValueError(f"unknown snapshot tag {self.tag!r}")
        if self.tag == TAG_AFTER_UPDATE_1 and self.update_index != 1:
            raise ValueError("after_update_1 snapshot must carry update index 1")
        if self.update_index < 1:
            raise ValueError("update index must be >= 1")

    def save(self, path) -> None:
        net.save_policy_params(path, self.params)

    @classmethod
    def load(cls, path, tag: str, train_seed: int, update_index: int) -> "PolicySnapshot":
        return cls(params=net.load_policy_params(path), tag=tag,
                   train_seed=train_seed, update_index=update_index)


def peoc_score(snapshot: PolicySnapshot, obs: np.ndarray) -> float:
    """Entropy (nats) of the snapshot policy's action distribution at obs."""
    logits, _ = net.forward(snapshot.params, obs)
    return net.entropy(net.softmax(logits))


def peoc_scores(snapshot: PolicySnapshot, observations: np.ndarray) -> np.ndarray:
    """Batched peoc_score over the rows of a (N, obs_dim) matrix."""
    logits, _ = net.forward_batch(snapshot.params, observations)
    return net.entropy_batch(net.softmax(logits))


@dataclass(frozen=True)
class EntropyClassifier:
    """Classifier wrapper around a policy snapshot; needs no fitting."""

    snapshot: PolicySnapshot
    name: str

    def scores(self, observations: np.ndarray) -> np.ndarray:
        return peoc_scores(self.snapshot, observations)


@dataclass(frozen=True)
class SeparationResult:
    perfectly_separable: bool
    margin: float


def separation_check(scores_ind, scores_ood) -> SeparationResult:
    """Can a single threshold split the two score sets perfectly?

    Separable iff max(in-distribution) < min(out-of-distribution), strictly;
    margin is min(ood) - max(ind) and may be negative when the sets overlap.
    """
    ind = np.asarray(scores_ind, dtype=np.float64)
    ood = np.asarray(scores_ood, dtype=np.float64)
    if ind.size == 0 or ood.size == 0:
        raise EmptyInput("separation_check needs scores on both sides")
    margin = float(ood.min() - ind.max())
    return SeparationResult(perfectly_separable=margin > 0.0, margin=margin)
