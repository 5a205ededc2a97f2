"""Non-policy one-class baselines fitted on in-distribution data only.

Two scorers: a dense autoencoder whose reconstruction error is the OOD
score, and an exact k-nearest-neighbor scorer whose score is the distance
to the k-th nearest stored training observation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import net
from .errors import EmptyTrainSet, NonFiniteLoss, RangeError, ShapeMismatch, TooFewPoints

AE_MAGIC = b"PAEB"


@dataclass(frozen=True)
class AEConfig:
    epochs: int = 50
    minibatch_size: int = 128
    learning_rate: float = 1e-3
    bottleneck: int = 16
    hidden: int = 64
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 0:
            raise RangeError("ae epochs must be >= 0")
        if self.minibatch_size < 1 or self.bottleneck < 1 or self.hidden < 1:
            raise RangeError("ae sizes must be >= 1")


@dataclass
class AEModel:
    """Autoencoder weights: 288 -> 64 -> 16 -> 64 -> 288, ReLU hidden, linear out.

    `weights` and `biases` are stored encoder-to-decoder; `loss_history`
    keeps the mean train reconstruction error per epoch.
    """

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: AEConfig
    loss_history: list[float] = field(default_factory=list)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    def as_list(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def save(self, path) -> None:
        net.save_params(path, self.as_list(), magic=AE_MAGIC)

    @classmethod
    def load(cls, path, input_dim: int = 288, config: AEConfig = AEConfig()) -> "AEModel":
        sizes = _layer_sizes(input_dim, config)
        shapes: list[tuple[int, ...]] = []
        for d_in, d_out in zip(sizes[:-1], sizes[1:]):
            shapes.extend([(d_out, d_in), (d_out,)])
        arrays = net.load_params(path, shapes, magic=AE_MAGIC)
        return cls(weights=arrays[0::2], biases=arrays[1::2], config=config)


def _layer_sizes(input_dim: int, config: AEConfig) -> list[int]:
    return [input_dim, config.hidden, config.bottleneck, config.hidden, input_dim]


def _init_ae(input_dim: int, config: AEConfig) -> AEModel:
    rng = np.random.default_rng(config.seed)
    sizes = _layer_sizes(input_dim, config)
    weights, biases = [], []
    for d_in, d_out in zip(sizes[:-1], sizes[1:]):
        s = np.sqrt(2.0 / d_in)
        weights.append(rng.uniform(-s, s, size=(d_out, d_in)))
        biases.append(np.zeros(d_out))
    return AEModel(weights=weights, biases=biases, config=config)


def _ae_forward(model: AEModel, x: np.ndarray):
    """Forward through the chain, keeping pre-activations for backprop."""
    acts = [x]
    zs = []
    h = x
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w.T + b
        zs.append(z)
        h = z if i == last else np.maximum(z, 0.0)
        acts.append(h)
    return h, acts, zs


def ae_reconstruct(model: AEModel, x: np.ndarray) -> np.ndarray:
    out, _, _ = _ae_forward(model, np.atleast_2d(np.asarray(x, dtype=np.float64)))
    return out


def ae_loss_and_grads(model: AEModel, x: np.ndarray):
    """Mean squared reconstruction error over the batch and its gradients."""
    batch, dim = x.shape
    recon, acts, zs = _ae_forward(model, x)
    err = recon - x
    loss = float((err ** 2).mean())

    d = 2.0 * err / (batch * dim)  # upstream of the linear output layer
    grad_w = [None] * len(model.weights)
    grad_b = [None] * len(model.biases)
    for i in range(len(model.weights) - 1, -1, -1):
        if i != len(model.weights) - 1:
            d = d * (zs[i] > 0.0)
        grad_w[i] = d.T @ acts[i]
        grad_b[i] = d.sum(axis=0)
        if i > 0:
            d = d @ model.weights[i]
    grads = []
    for gw, gb in zip(grad_w, grad_b):
        grads.extend([gw, gb])
    return loss, grads


def ae_fit(train: np.ndarray, config: AEConfig = AEConfig()) -> AEModel:
    """Fit the autoencoder on in-distribution observations with minibatch Adam.

    Deterministic given (train, config); epochs=0 returns the seeded
    initialization untouched.
    """
    config.validate()
    x = np.asarray(train, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyTrainSet("ae_fit needs a nonempty (N, dim) training matrix")

    model = _init_ae(x.shape[1], config)
    opt = net.init_adam(model.as_list(), lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)

    for _ in range(config.epochs):
        order = rng.permutation(x.shape[0])
        epoch_losses = []
        for lo in range(0, x.shape[0], config.minibatch_size):
            xb = x[order[lo:lo + config.minibatch_size]]
            loss, grads = ae_loss_and_grads(model, xb)
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"autoencoder loss became {loss}")
            arrays, opt = net.adam_step(model.as_list(), grads, opt)
            model.weights = arrays[0::2]
            model.biases = arrays[1::2]
            epoch_losses.append(loss)
        model.loss_history.append(float(np.mean(epoch_losses)))
    return model


def ae_score(model: AEModel, obs: np.ndarray) -> float:
    """Mean squared reconstruction error of one observation."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (model.input_dim,):
        raise ShapeMismatch(f"expected observation of length {model.input_dim}")
    recon = ae_reconstruct(model, obs)[0]
    return float(((recon - obs) ** 2).mean())


def ae_scores(model: AEModel, observations: np.ndarray) -> np.ndarray:
    x = np.asarray(observations, dtype=np.float64)
    recon, _, _ = _ae_forward(model, x)
    return ((recon - x) ** 2).mean(axis=1)


@dataclass(frozen=True)
class AEClassifier:
    model: AEModel
    name: str = "AE"

    def scores(self, observations: np.ndarray) -> np.ndarray:
        return ae_scores(self.model, observations)


@dataclass(frozen=True)
class KnnIndex:
    """Exact nearest-neighbor store over raw observation vectors."""

    points: np.ndarray  # (M, dim)
    k: int
    _sq_norms: np.ndarray  # cached |p|^2 per stored point

    @property
    def size(self) -> int:
        return self.points.shape[0]


def knn_fit(train: np.ndarray, k: int = 5) -> KnnIndex:
    x = np.asarray(train, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatch("knn_fit needs a (N, dim) training matrix")
    if k < 1:
        raise RangeError("k must be >= 1")
    if x.shape[0] < k:
        raise TooFewPoints(f"need at least k={k} points, got {x.shape[0]}")
    return KnnIndex(points=x.copy(), k=k, _sq_norms=(x ** 2).sum(axis=1))


def knn_scores(index: KnnIndex, observations: np.ndarray, block: int = 512) -> np.ndarray:
    """Distance to the k-th nearest stored point, for each query row.

    Squared distances come from the |a|^2 + |b|^2 - 2ab expansion, which
    is exact for the 0/1 observation vectors this pipeline produces;
    queries are processed in blocks to bound memory.
    """
    q = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    out = np.empty(q.shape[0])
    for lo in range(0, q.shape[0], block):
        qb = q[lo:lo + block]
        d2 = (qb ** 2).sum(axis=1)[:, None] + index._sq_norms[None, :] - 2.0 * (qb @ index.points.T)
        np.maximum(d2, 0.0, out=d2)
        kth = np.partition(d2, index.k - 1, axis=1)[:, index.k - 1]
        out[lo:lo + qb.shape[0]] = np.sqrt(kth)
    return out


def knn_score(index: KnnIndex, obs: np.ndarray) -> float:
    return float(knn_scores(index, np.asarray(obs, dtype=np.float64)[None, :])[0])


@dataclass(frozen=True)
class KnnClassifier:
    index: KnnIndex
    name: str = "kNN"

    def scores(self, observations: np.ndarray) -> np.ndarray:
        return knn_scores(self.index, observations)
