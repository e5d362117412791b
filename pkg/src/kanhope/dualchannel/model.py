"""Dual-channel fusion classifier at desk scale.

Two trainable bag-of-embeddings channel encoders (code-mixed text and
its English translation) each produce a pooled vector

    h = tanh(P @ mean(embeddings) + b)

which a learnable weighted sum w1*h_cm + w2*h_en fuses before a one
hidden layer feed-forward head with dropout and a sigmoid output. All
parameters are float64 numpy arrays, updated by the decoupled-weight-
decay optimizer in :mod:`.optim`; training is bit-reproducible from the
run seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..features import tokenize
from ..util import fnv1a64, rng_for

MODEL_BINARY_MAGIC = b"KHDC1\n"

PARAM_NAMES = (
    "emb_cm",
    "proj_cm",
    "bias_cm",
    "emb_en",
    "proj_en",
    "bias_en",
    "w1",
    "w2",
    "ffn_w1",
    "ffn_b1",
    "ffn_w2",
    "ffn_b2",
)


def sigmoid(x: float | np.ndarray):
    """Numerically stable logistic function, branching on sign."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return float(out) if out.ndim == 0 else out


def bce_loss(p: float, y: int) -> float:
    """Binary cross-entropy with probability clamped to [1e-7, 1 - 1e-7]."""
    p = min(max(float(p), 1e-7), 1.0 - 1e-7)
    return -(y * math.log(p) + (1 - y) * math.log(1.0 - p))


@dataclass(frozen=True)
class HashTokenizer:
    """Deterministic token-to-id mapping: FNV-1a 64-bit, low bits kept."""

    vocab_size: int = 2**15
    max_length: int = 128

    def __post_init__(self):
        if self.vocab_size < 2 or self.vocab_size & (self.vocab_size - 1):
            raise ValueError(f"vocab_size must be a power of two, got {self.vocab_size}")
        if self.max_length < 1:
            raise ValueError("max_length must be >= 1")

    def encode(self, text: str) -> np.ndarray:
        tokens = tokenize(text)[: self.max_length]
        ids = [fnv1a64(tok) & (self.vocab_size - 1) for tok in tokens]
        return np.asarray(ids, dtype=np.int64)


@dataclass
class ChannelEncoder:
    embedding: np.ndarray  # V x d
    projection: np.ndarray  # d x d
    bias: np.ndarray  # d

    @property
    def vocab_size(self) -> int:
        return int(self.embedding.shape[0])

    @property
    def dim(self) -> int:
        return int(self.embedding.shape[1])


def _check_ids(enc: ChannelEncoder, ids: np.ndarray) -> np.ndarray:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= enc.vocab_size):
        raise ValueError(f"token id out of range [0, {enc.vocab_size})")
    return ids


def mean_embedding(enc: ChannelEncoder, ids: np.ndarray) -> np.ndarray:
    ids = _check_ids(enc, ids)
    if ids.size == 0:
        return np.zeros(enc.dim, dtype=np.float64)
    # sorting fixes the summation order, making the bag property exact
    return enc.embedding[np.sort(ids)].mean(axis=0)


def encode(enc: ChannelEncoder, ids: Sequence[int] | np.ndarray) -> np.ndarray:
    """Pooled output of one channel: tanh(P @ mean + b), in (-1, 1)^d."""
    m = mean_embedding(enc, np.asarray(ids, dtype=np.int64))
    return np.tanh(enc.projection @ m + enc.bias)


@dataclass
class DualChannelModel:
    encoder_cm: ChannelEncoder
    encoder_en: ChannelEncoder
    w1: np.ndarray  # learnable scalar, shape ()
    w2: np.ndarray
    ffn_w1: np.ndarray  # d x d
    ffn_b1: np.ndarray  # d
    ffn_w2: np.ndarray  # d
    ffn_b2: np.ndarray  # shape ()
    dropout_rate: float = 0.1

    @property
    def dim(self) -> int:
        return self.encoder_cm.dim

    @property
    def vocab_size(self) -> int:
        return self.encoder_cm.vocab_size

    def params(self) -> dict[str, np.ndarray]:
        return {
            "emb_cm": self.encoder_cm.embedding,
            "proj_cm": self.encoder_cm.projection,
            "bias_cm": self.encoder_cm.bias,
            "emb_en": self.encoder_en.embedding,
            "proj_en": self.encoder_en.projection,
            "bias_en": self.encoder_en.bias,
            "w1": self.w1,
            "w2": self.w2,
            "ffn_w1": self.ffn_w1,
            "ffn_b1": self.ffn_b1,
            "ffn_w2": self.ffn_w2,
            "ffn_b2": self.ffn_b2,
        }

    def copy_params(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.params().items()}

    def load_params(self, snapshot: dict[str, np.ndarray]) -> None:
        for name, arr in self.params().items():
            arr[...] = snapshot[name]


def init_model(
    vocab_size: int = 2**15,
    dim: int = 64,
    dropout_rate: float = 0.1,
    seed: int = 0,
    fusion_init: tuple[float, float] = (0.5, 0.5),
    zero: bool = False,
) -> DualChannelModel:
    """Seeded random initialization; each component draws from its own stream
    so adding or removing a channel never shifts the other draws."""

    def draws(name, shape, scale):
        if zero:
            return np.zeros(shape, dtype=np.float64)
        return rng_for(seed, f"dc.init.{name}").normal(0.0, scale, shape)

    proj_scale = 1.0 / math.sqrt(dim)
    model = DualChannelModel(
        encoder_cm=ChannelEncoder(
            embedding=draws("emb_cm", (vocab_size, dim), 0.1),
            projection=draws("proj_cm", (dim, dim), proj_scale),
            bias=np.zeros(dim, dtype=np.float64),
        ),
        encoder_en=ChannelEncoder(
            embedding=draws("emb_en", (vocab_size, dim), 0.1),
            projection=draws("proj_en", (dim, dim), proj_scale),
            bias=np.zeros(dim, dtype=np.float64),
        ),
        w1=np.array(0.0 if zero else fusion_init[0], dtype=np.float64),
        w2=np.array(0.0 if zero else fusion_init[1], dtype=np.float64),
        ffn_w1=draws("ffn_w1", (dim, dim), proj_scale),
        ffn_b1=np.zeros(dim, dtype=np.float64),
        ffn_w2=draws("ffn_w2", (dim,), proj_scale),
        ffn_b2=np.array(0.0, dtype=np.float64),
        dropout_rate=dropout_rate,
    )
    return model


def _pool_batch(enc: ChannelEncoder, id_lists: Sequence[np.ndarray]):
    means = np.zeros((len(id_lists), enc.dim), dtype=np.float64)
    for i, ids in enumerate(id_lists):
        means[i] = mean_embedding(enc, ids)
    pooled = np.tanh(means @ enc.projection.T + enc.bias)
    return means, pooled


def forward_batch(
    model: DualChannelModel,
    ids_cm: Sequence[np.ndarray],
    ids_en: Sequence[np.ndarray],
    training: bool = False,
    dropout_mask: np.ndarray | None = None,
    single_channel: bool = False,
):
    """Batch forward pass; returns (probabilities, cache for backward)."""
    means_cm, h_cm = _pool_batch(model.encoder_cm, ids_cm)
    if single_channel:
        means_en = h_en = np.zeros_like(h_cm)
        fused = float(model.w1) * h_cm
    else:
        means_en, h_en = _pool_batch(model.encoder_en, ids_en)
        fused = float(model.w1) * h_cm + float(model.w2) * h_en
    a_pre = fused @ model.ffn_w1.T + model.ffn_b1
    a = np.maximum(a_pre, 0.0)
    if training and model.dropout_rate > 0.0:
        if dropout_mask is None:
            raise ValueError("training forward requires a dropout mask")
        a_dropped = a * dropout_mask / (1.0 - model.dropout_rate)
    else:
        dropout_mask = None
        a_dropped = a
    z = a_dropped @ model.ffn_w2 + float(model.ffn_b2)
    p = sigmoid(z)
    if not np.all(np.isfinite(p)):
        raise FloatingPointError("non-finite value in forward pass (divergence)")
    cache = {
        "ids_cm": ids_cm,
        "ids_en": ids_en,
        "means_cm": means_cm,
        "means_en": means_en,
        "h_cm": h_cm,
        "h_en": h_en,
        "fused": fused,
        "a_pre": a_pre,
        "a_dropped": a_dropped,
        "mask": dropout_mask,
        "p": p,
        "single_channel": single_channel,
    }
    return p, cache


def forward(
    model: DualChannelModel,
    ids_cm: Sequence[int] | np.ndarray,
    ids_en: Sequence[int] | np.ndarray,
    training: bool = False,
    dropout_mask: np.ndarray | None = None,
) -> float:
    """Probability that one example is the positive (hope) class."""
    mask = dropout_mask[None, :] if dropout_mask is not None else None
    p, _ = forward_batch(
        model,
        [np.asarray(ids_cm, dtype=np.int64)],
        [np.asarray(ids_en, dtype=np.int64)],
        training=training,
        dropout_mask=mask,
    )
    return float(p[0])


def single_channel_forward(model: DualChannelModel, ids_cm) -> float:
    """Forward of the channel-1 submodel: the en encoder is never touched."""
    p, _ = forward_batch(
        model, [np.asarray(ids_cm, dtype=np.int64)], [np.zeros(0, np.int64)], single_channel=True
    )
    return float(p[0])


def batch_loss(p: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean([bce_loss(pi, yi) for pi, yi in zip(p, y)]))


def backward_batch(model: DualChannelModel, cache: dict, y: np.ndarray) -> dict[str, np.ndarray]:
    """Gradients of the mean BCE over the batch for every parameter."""
    p = cache["p"]
    batch = p.shape[0]
    dz = (p - np.asarray(y, dtype=np.float64)) / batch

    grads: dict[str, np.ndarray] = {}
    grads["ffn_b2"] = np.array(dz.sum())
    grads["ffn_w2"] = cache["a_dropped"].T @ dz
    d_ad = dz[:, None] * model.ffn_w2[None, :]
    if cache["mask"] is not None:
        d_a = d_ad * cache["mask"] / (1.0 - model.dropout_rate)
    else:
        d_a = d_ad
    d_apre = d_a * (cache["a_pre"] > 0.0)
    grads["ffn_w1"] = d_apre.T @ cache["fused"]
    grads["ffn_b1"] = d_apre.sum(axis=0)
    d_u = d_apre @ model.ffn_w1

    grads["w1"] = np.array(np.sum(d_u * cache["h_cm"]))
    d_h_cm = float(model.w1) * d_u
    if cache["single_channel"]:
        grads["w2"] = np.array(0.0)
        d_h_en = None
    else:
        grads["w2"] = np.array(np.sum(d_u * cache["h_en"]))
        d_h_en = float(model.w2) * d_u

    for suffix, enc, d_h, means, id_lists in (
        ("cm", model.encoder_cm, d_h_cm, cache["means_cm"], cache["ids_cm"]),
        ("en", model.encoder_en, d_h_en, cache["means_en"], cache["ids_en"]),
    ):
        if d_h is None:
            grads[f"proj_{suffix}"] = np.zeros_like(enc.projection)
            grads[f"bias_{suffix}"] = np.zeros_like(enc.bias)
            grads[f"emb_{suffix}"] = np.zeros_like(enc.embedding)
            continue
        h = cache[f"h_{suffix}"]
        d_pre = d_h * (1.0 - h**2)
        grads[f"proj_{suffix}"] = d_pre.T @ means
        grads[f"bias_{suffix}"] = d_pre.sum(axis=0)
        d_mean = d_pre @ enc.projection
        g_emb = np.zeros_like(enc.embedding)
        for i, ids in enumerate(id_lists):
            if len(ids):
                np.add.at(g_emb, np.asarray(ids, dtype=np.int64), d_mean[i] / len(ids))
        grads[f"emb_{suffix}"] = g_emb
    return grads
