"""Dense policy-value network with hand-written reverse-mode gradients.

The policy network is a two-layer ReLU trunk (288 -> 64 -> 64) with a
4-way logit head and a scalar value head, all float64. No autodiff
framework: the backward pass is written out explicitly, which keeps the
finite-difference checks tight and the whole thing dependency-free.

Also here: numerically stable softmax / entropy, a generic Adam step over
lists of arrays, and the little-endian binary container used to persist
parameter snapshots.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParseError, ShapeMismatch

OBS_DIM = 288
HIDDEN = 64
N_ACTIONS = 4

SNAPSHOT_MAGIC = b"PEOC"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class PolicyParams:
    """All weights of the policy-value network, in fixed layer order.

    The same container doubles as the gradient bundle: a gradient is just
    a shape-congruent PolicyParams whose entries are partial derivatives.
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w_pi: np.ndarray
    b_pi: np.ndarray
    w_v: np.ndarray
    b_v: np.ndarray

    def as_list(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2, self.w_pi, self.b_pi, self.w_v, self.b_v]

    @classmethod
    def from_list(cls, arrays: list[np.ndarray]) -> "PolicyParams":
        return cls(*arrays)

    def copy(self) -> "PolicyParams":
        return PolicyParams.from_list([a.copy() for a in self.as_list()])

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.as_list())

    def flat(self) -> np.ndarray:
        return np.concatenate([a.reshape(-1) for a in self.as_list()])

    def from_flat(self, vec: np.ndarray) -> "PolicyParams":
        """Rebuild a congruent PolicyParams from a flat vector (shapes from self)."""
        if vec.size != self.n_params:
            raise ShapeMismatch(f"expected {self.n_params} values, got {vec.size}")
        out, i = [], 0
        for a in self.as_list():
            out.append(np.asarray(vec[i:i + a.size], dtype=np.float64).reshape(a.shape).copy())
            i += a.size
        return PolicyParams.from_list(out)


GradientBundle = PolicyParams


def init_policy_params(seed: int, obs_dim: int = OBS_DIM, hidden: int = HIDDEN,
                       n_actions: int = N_ACTIONS) -> PolicyParams:
    """He-style scaled-uniform init, a pure function of the seed.

    Weights are U(-s, s) with s = sqrt(2 / fan_in); biases start at zero.
    """
    rng = np.random.default_rng(seed)

    def w(rows, cols):
        s = np.sqrt(2.0 / cols)
        return rng.uniform(-s, s, size=(rows, cols))

    return PolicyParams(
        w1=w(hidden, obs_dim), b1=np.zeros(hidden),
        w2=w(hidden, hidden), b2=np.zeros(hidden),
        w_pi=w(n_actions, hidden), b_pi=np.zeros(n_actions),
        w_v=w(1, hidden), b_v=np.zeros(1),
    )


def forward(params: PolicyParams, obs: np.ndarray) -> tuple[np.ndarray, float]:
    """Single-observation forward pass. Returns (logits, value)."""
    obs = np.asarray(obs, dtype=np.float64)
    if obs.shape != (params.w1.shape[1],):
        raise ShapeMismatch(f"expected observation of length {params.w1.shape[1]}, "
                            f"got shape {obs.shape}")
    a1 = np.maximum(params.w1 @ obs + params.b1, 0.0)
    a2 = np.maximum(params.w2 @ a1 + params.b2, 0.0)
    logits = params.w_pi @ a2 + params.b_pi
    value = float((params.w_v @ a2)[0] + params.b_v[0])
    return logits, value


def forward_batch(params: PolicyParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched forward pass over rows of x. Returns (logits (B,n), values (B,))."""
    logits, values, _ = forward_with_cache(params, x)
    return logits, values


def forward_with_cache(params: PolicyParams, x: np.ndarray):
    """Forward pass that keeps the activations needed by backward_from_heads."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w1.shape[1]:
        raise ShapeMismatch(f"expected (B, {params.w1.shape[1]}) batch, got shape {x.shape}")
    z1 = x @ params.w1.T + params.b1
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ params.w2.T + params.b2
    a2 = np.maximum(z2, 0.0)
    logits = a2 @ params.w_pi.T + params.b_pi
    values = a2 @ params.w_v.T + params.b_v
    return logits, values[:, 0], (x, z1, a1, z2, a2)


def backward_from_heads(params: PolicyParams, cache, dlogits: np.ndarray,
                        dvalues: np.ndarray) -> GradientBundle:
    """Backprop given upstream gradients on the logits and value outputs."""
    x, z1, a1, z2, a2 = cache
    dvalues = dvalues[:, None]

    dw_pi = dlogits.T @ a2
    db_pi = dlogits.sum(axis=0)
    dw_v = dvalues.T @ a2
    db_v = dvalues.sum(axis=0)

    da2 = dlogits @ params.w_pi + dvalues @ params.w_v
    dz2 = da2 * (z2 > 0.0)
    dw2 = dz2.T @ a1
    db2 = dz2.sum(axis=0)

    da1 = dz2 @ params.w2
    dz1 = da1 * (z1 > 0.0)
    dw1 = dz1.T @ x
    db1 = dz1.sum(axis=0)
    return PolicyParams(dw1, db1, dw2, db2, dw_pi, db_pi, dw_v, db_v)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax; works on the last axis."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def entropy(dist: np.ndarray) -> float:
    """Shannon entropy in nats, with the 0*ln(0) = 0 convention."""
    p = np.asarray(dist, dtype=np.float64)
    nz = p > 0.0
    return float(-(p[nz] * np.log(p[nz])).sum())


def entropy_batch(probs: np.ndarray) -> np.ndarray:
    """Row-wise entropy of a (B, n) matrix of distributions."""
    p = np.asarray(probs, dtype=np.float64)
    logp = np.where(p > 0.0, np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return -(p * logp).sum(axis=-1)


@dataclass(frozen=True)
class AdamState:
    """Adam moment accumulators for a list of parameter arrays."""

    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    step: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: list[np.ndarray], lr: float = 3e-4, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = tuple(np.zeros_like(a) for a in params)
    return AdamState(m=zeros, v=tuple(np.zeros_like(a) for a in params),
                     step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: list[np.ndarray], grads: list[np.ndarray],
              state: AdamState) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update. Pure: returns new params and state."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatch("params, grads and optimizer state must have the same arity")
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeMismatch(f"gradient shape {g.shape} does not match param {p.shape}")

    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_params, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        new_params.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, replace(state, m=tuple(new_m), v=tuple(new_v), step=t)


def save_params(path, arrays: list[np.ndarray], magic: bytes = SNAPSHOT_MAGIC) -> None:
    """Write arrays as flat little-endian float64 after a 16-byte header.

    Header: 4-byte magic, u32 version, u64 total parameter count.
    """
    flat = np.concatenate([np.asarray(a, dtype=np.float64).reshape(-1) for a in arrays])
    header = magic + struct.pack("<IQ", SNAPSHOT_VERSION, flat.size)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def load_params(path, shapes: list[tuple[int, ...]], magic: bytes = SNAPSHOT_MAGIC) -> list[np.ndarray]:
    """Read a parameter container written by save_params; validates the header."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:4] != magic:
        raise ParseError(f"{path}: bad magic, expected {magic!r}")
    version, count = struct.unpack("<IQ", blob[4:16])
    if version != SNAPSHOT_VERSION:
        raise ParseError(f"{path}: unsupported version {version}")
    expected = sum(int(np.prod(s)) for s in shapes)
    if count != expected:
        raise ParseError(f"{path}: contains {count} values, layout needs {expected}")
    payload = blob[16:]
    if len(payload) % 8:
        raise ParseError(f"{path}: truncated payload")
    flat = np.frombuffer(payload, dtype="<f8")
    if flat.size != count:
        raise ParseError(f"{path}: truncated payload ({flat.size} of {count} values)")
    out, i = [], 0
    for s in shapes:
        n = int(np.prod(s))
        out.append(flat[i:i + n].reshape(s).astype(np.float64))
        i += n
    return out


def policy_param_shapes(obs_dim: int = OBS_DIM, hidden: int = HIDDEN,
                        n_actions: int = N_ACTIONS) -> list[tuple[int, ...]]:
    return [(hidden, obs_dim), (hidden,), (hidden, hidden), (hidden,),
            (n_actions, hidden), (n_actions,), (1, hidden), (1,)]


def save_policy_params(path, params: PolicyParams) -> None:
    save_params(path, params.as_list(), magic=SNAPSHOT_MAGIC)


def load_policy_params(path, obs_dim: int = OBS_DIM, hidden: int = HIDDEN,
                       n_actions: int = N_ACTIONS) -> PolicyParams:
    arrays = load_params(path, policy_param_shapes(obs_dim, hidden, n_actions),
                         magic=SNAPSHOT_MAGIC)
    return PolicyParams.from_list(arrays)
