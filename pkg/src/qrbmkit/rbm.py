"""Classical RBM: energy, conditionals, Gibbs sampling, CD training,
and brute-force oracles (partition function, exact distribution, KL).

Binary vectors and matrices are plain numpy arrays with entries in {0, 1}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CapacityError, ConfigError, DimensionMismatchError

EXACT_LIMIT = 20  # max n_visible + n_hidden for enumeration oracles
KL_SMOOTHING = 1e-9


@dataclass(frozen=True)
class RbmParams:
    """Weights W (n_v x n_h), visible biases b, hidden biases c."""

    W: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=np.float64))
        b = np.asarray(self.b, dtype=np.float64).ravel()
        c = np.asarray(self.c, dtype=np.float64).ravel()
        if W.shape != (b.size, c.size):
            raise DimensionMismatchError(
                f"W is {W.shape}, expected ({b.size}, {c.size})"
            )
        if not (np.isfinite(W).all() and np.isfinite(b).all() and np.isfinite(c).all()):
            raise ConfigError("RBM parameters must be finite")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @property
    def n_visible(self) -> int:
        return self.b.size

    @property
    def n_hidden(self) -> int:
        return self.c.size


def init_params(n_visible: int, n_hidden: int, seed: int) -> RbmParams:
    """W ~ uniform(-0.1, 0.1) seeded, zero biases."""
    rng = np.random.default_rng(seed)
    return RbmParams(
        W=rng.uniform(-0.1, 0.1, size=(n_visible, n_hidden)),
        b=np.zeros(n_visible),
        c=np.zeros(n_hidden),
    )


def check_binary(arr: np.ndarray, name: str = "array") -> np.ndarray:
    a = np.asarray(arr)
    if not np.isin(a, (0, 1)).all():
        raise ConfigError(f"{name} must contain only 0/1 entries")
    return a.astype(np.float64)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def rbm_energy(p: RbmParams, v, h) -> float:
    """E(v, h) = -b.v - c.h - v W h."""
    v = check_binary(v, "v").ravel()
    h = check_binary(h, "h").ravel()
    if v.size != p.n_visible or h.size != p.n_hidden:
        raise DimensionMismatchError(
            f"got ({v.size}, {h.size}), expected ({p.n_visible}, {p.n_hidden})"
        )
    return float(-p.b @ v - p.c @ h - v @ p.W @ h)


def prob_h_given_v(p: RbmParams, v) -> np.ndarray:
    """P(h_j = 1 | v) = sigmoid(c_j + sum_i W_ij v_i); accepts a batch."""
    v = check_binary(v, "v")
    if v.shape[-1] != p.n_visible:
        raise DimensionMismatchError(f"v has width {v.shape[-1]}, expected {p.n_visible}")
    return _sigmoid(p.c + v @ p.W)


def prob_v_given_h(p: RbmParams, h) -> np.ndarray:
    """P(v_i = 1 | h) = sigmoid(b_i + sum_j W_ij h_j); accepts a batch."""
    h = check_binary(h, "h")
    if h.shape[-1] != p.n_hidden:
        raise DimensionMismatchError(f"h has width {h.shape[-1]}, expected {p.n_hidden}")
    return _sigmoid(p.b + h @ p.W.T)


def gibbs_chain(p: RbmParams, v0, k: int, rng: np.random.Generator):
    """Alternate h ~ P(h|v), v ~ P(v|h) for k rounds; returns (v_k, h_k)."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    v = check_binary(v0, "v0")
    for _ in range(k):
        h = (rng.random(size=(*v.shape[:-1], p.n_hidden)) < prob_h_given_v(p, v)).astype(
            np.float64
        )
        v = (rng.random(size=(*h.shape[:-1], p.n_visible)) < prob_v_given_h(p, h)).astype(
            np.float64
        )
    return v.astype(np.int8), h.astype(np.int8)


def cd_update(
    p: RbmParams, batch: np.ndarray, k: int, learning_rate: float, rng: np.random.Generator
) -> RbmParams:
    """One CD-k step. Positive and negative hidden terms use probabilities;
    the negative visible term uses the k-step Gibbs reconstructions."""
    v = check_binary(batch, "batch")
    v = np.atleast_2d(v)
    if v.shape[0] == 0:
        raise ConfigError("batch must be nonempty")
    if v.shape[1] != p.n_visible:
        raise DimensionMismatchError(f"batch width {v.shape[1]} != {p.n_visible}")
    if learning_rate < 0:
        raise ConfigError("learning rate must be >= 0")

    n = v.shape[0]
    h_pos = prob_h_given_v(p, v)
    v_neg, _ = gibbs_chain(p, v, k, rng)
    v_neg = v_neg.astype(np.float64)
    h_neg = prob_h_given_v(p, v_neg)

    eps = learning_rate
    return RbmParams(
        W=p.W + eps * (v.T @ h_pos - v_neg.T @ h_neg) / n,
        b=p.b + eps * (v.mean(axis=0) - v_neg.mean(axis=0)),
        c=p.c + eps * (h_pos.mean(axis=0) - h_neg.mean(axis=0)),
    )


# --- enumeration oracles ---------------------------------------------------

def _check_capacity(p: RbmParams):
    if p.n_visible + p.n_hidden > EXACT_LIMIT:
        raise CapacityError(
            f"enumeration limited to {EXACT_LIMIT} total units, "
            f"got {p.n_visible + p.n_hidden}"
        )


def enumerate_states(n: int) -> np.ndarray:
    """All binary vectors of width n, row r = binary digits of r (MSB first)."""
    r = np.arange(2**n, dtype=np.int64)
    return ((r[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.float64)


def partition_function(p: RbmParams) -> float:
    """Z = sum over all (v, h) of exp(-E)."""
    _check_capacity(p)
    return float(np.exp(_all_neg_energies(p)).sum())


def _all_neg_energies(p: RbmParams) -> np.ndarray:
    """-E for every state, as a (2^n_v, 2^n_h) grid."""
    V = enumerate_states(p.n_visible)
    H = enumerate_states(p.n_hidden)
    return (V @ p.b)[:, None] + (H @ p.c)[None, :] + (V @ p.W) @ H.T


def exact_distribution(p: RbmParams) -> np.ndarray:
    """Joint P(v, h) as a (2^n_v, 2^n_h) table summing to 1."""
    _check_capacity(p)
    g = _all_neg_energies(p)
    g -= g.max()
    w = np.exp(g)
    return w / w.sum()


def exact_visible_marginal(p: RbmParams) -> np.ndarray:
    """P(v) for every visible state, length 2^n_v."""
    return exact_distribution(p).sum(axis=1)


def empirical_visible_distribution(data: np.ndarray, n_visible: int) -> np.ndarray:
    """Histogram of visible rows over all 2^n_v states."""
    v = check_binary(data, "data").astype(np.int64)
    idx = v @ (1 << np.arange(n_visible - 1, -1, -1))
    counts = np.bincount(idx, minlength=2**n_visible).astype(np.float64)
    return counts / counts.sum()


def kl_to_data(p: RbmParams, data_dist: np.ndarray) -> float:
    """KL(data || model visible marginal), with additive smoothing of the
    model to keep unsupported states finite."""
    model = exact_visible_marginal(p)
    if data_dist.shape != model.shape:
        raise DimensionMismatchError(
            f"data distribution has {data_dist.shape[0]} states, model has {model.shape[0]}"
        )
    model = model + KL_SMOOTHING
    model /= model.sum()
    mask = data_dist > 0
    return float((data_dist[mask] * np.log(data_dist[mask] / model[mask])).sum())


# --- checkpoints -----------------------------------------------------------

def save_checkpoint(p: RbmParams, path, metadata: dict | None = None) -> None:
    doc = {
        "n_visible": p.n_visible,
        "n_hidden": p.n_hidden,
        "W": [float(x) for x in p.W.ravel()],  # row-major
        "b": [float(x) for x in p.b],
        "c": [float(x) for x in p.c],
        "metadata": metadata or {},
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=1)


def load_checkpoint(path) -> tuple[RbmParams, dict]:
    with open(path, encoding="ascii") as fh:
        doc = json.load(fh)
    n_v, n_h = doc["n_visible"], doc["n_hidden"]
    params = RbmParams(
        W=np.array(doc["W"], dtype=np.float64).reshape(n_v, n_h),
        b=np.array(doc["b"], dtype=np.float64),
        c=np.array(doc["c"], dtype=np.float64),
    )
    return params, doc.get("metadata", {})
