"""Training loop for the dual-channel classifier.

Minibatches are reshuffled every epoch from a seeded stream; dropout
masks derive from (run seed, step index), so a run replays exactly.
History records train loss and dev weighted F1 per epoch, and the
returned parameters come from the best dev epoch (final epoch when no
dev set is supplied).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from ..metrics import evaluate
from ..util import rng_for
from . import model as dc
from .optim import adamw_step, init_state

ALLOWED_BATCH_SIZES = (32, 64, 128)


class TrainingDivergedError(Exception):
    def __init__(self, epoch: int, step: int):
        super().__init__(f"non-finite loss at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    dropout: float = 0.1
    learning_rate: float = 2e-3  # 2e-5 preset suits fine-tuning, not fresh encoders
    epochs: int = 10
    weight_decay: float = 0.01
    seed: int = 0
    vocab_size: int = 2**15
    dim: int = 64
    max_length: int = 128
    freeze_w2: bool = False
    single_channel: bool = False
    fusion_init: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        if self.batch_size not in ALLOWED_BATCH_SIZES:
            raise ValueError(f"batch_size must be one of {ALLOWED_BATCH_SIZES}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive and weight_decay nonnegative")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Example:
    ids_cm: np.ndarray
    ids_en: np.ndarray
    label: int
    translation_missing: bool = False


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    dev_weighted_f1: float  # nan when no dev set


def make_examples(
    rows: Sequence[tuple[str, str | None, int]],
    tokenizer: dc.HashTokenizer,
) -> list[Example]:
    """Tokenize (text, translation, label) rows; identity-fill missing translations."""
    examples = []
    for text, translation, label in rows:
        missing = translation is None
        examples.append(
            Example(
                ids_cm=tokenizer.encode(text),
                ids_en=tokenizer.encode(text if missing else translation),
                label=int(label),
                translation_missing=missing,
            )
        )
    return examples


def predict_proba_dc(model: dc.DualChannelModel, examples: Sequence[Example]) -> np.ndarray:
    if not examples:
        return np.zeros(0)
    p, _ = forward_examples(model, examples, training=False)
    return p


def forward_examples(model, examples, training=False, dropout_mask=None, single_channel=False):
    return dc.forward_batch(
        model,
        [e.ids_cm for e in examples],
        [e.ids_en for e in examples],
        training=training,
        dropout_mask=dropout_mask,
        single_channel=single_channel,
    )


def _dev_weighted_f1(model: dc.DualChannelModel, dev: Sequence[Example], single_channel: bool) -> float:
    p, _ = forward_examples(model, dev, single_channel=single_channel)
    y_true = [e.label for e in dev]
    y_pred = [int(pi >= 0.5) for pi in p]
    report = evaluate(y_true, y_pred, class_names=(0, 1), model_id="dev")
    return report.weighted.f1


def train(
    model: dc.DualChannelModel,
    train_examples: Sequence[Example],
    cfg: TrainConfig,
    dev_examples: Sequence[Example] | None = None,
) -> tuple[dc.DualChannelModel, list[EpochStats]]:
    if not train_examples:
        raise ValueError("no training examples")
    params = model.params()
    trainable = dict(params)
    if cfg.freeze_w2:
        trainable.pop("w2")
    if cfg.single_channel:
        # channel 2 never contributes forward or backward
        for name in ("emb_en", "proj_en", "bias_en", "w2"):
            trainable.pop(name, None)
    state = init_state(trainable)

    history: list[EpochStats] = []
    best_f1 = -math.inf
    best_snapshot = None
    step = 0
    n = len(train_examples)
    for epoch in range(cfg.epochs):
        order = rng_for(cfg.seed, f"dc.shuffle.{epoch}").permutation(n)
        total_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = [train_examples[i] for i in order[start : start + cfg.batch_size]]
            y = np.array([e.label for e in batch], dtype=np.float64)
            mask = None
            if cfg.dropout > 0.0:
                mask_rng = rng_for(cfg.seed, f"dc.dropout.{step}")
                mask = (mask_rng.random((len(batch), model.dim)) >= cfg.dropout).astype(np.float64)
            try:
                p, cache = forward_examples(
                    model, batch, training=True, dropout_mask=mask, single_channel=cfg.single_channel
                )
            except FloatingPointError as exc:
                raise TrainingDivergedError(epoch, step) from exc
            loss = dc.batch_loss(p, y)
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch, step)
            grads = dc.backward_batch(model, cache, y)
            adamw_step(
                trainable,
                {name: grads[name] for name in trainable},
                state,
                lr=cfg.learning_rate,
                weight_decay=cfg.weight_decay,
            )
            total_loss += loss * len(batch)
            step += 1
        train_loss = total_loss / n
        dev_f1 = float("nan")
        if dev_examples:
            dev_f1 = _dev_weighted_f1(model, dev_examples, cfg.single_channel)
            if dev_f1 > best_f1:
                best_f1 = dev_f1
                best_snapshot = model.copy_params()
        history.append(EpochStats(epoch, train_loss, dev_f1))
    if best_snapshot is not None:
        model.load_params(best_snapshot)
    return model, history


def training_accuracy(model: dc.DualChannelModel, examples: Sequence[Example], single_channel=False) -> float:
    p, _ = forward_examples(model, examples, single_channel=single_channel)
    correct = sum(int(pi >= 0.5) == e.label for pi, e in zip(p, examples))
    return correct / len(examples)


def history_csv(history: Sequence[EpochStats]) -> str:
    lines = ["epoch,train_loss,dev_weighted_f1"]
    for h in history:
        lines.append(f"{h.epoch},{h.train_loss!r},{h.dev_weighted_f1!r}")
    return "\n".join(lines) + "\n"
