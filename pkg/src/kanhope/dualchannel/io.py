"""Deterministic binary persistence for dual-channel models.

Layout: magic line, one JSON header line with shape metadata, then the
raw little-endian float64 bytes of every parameter in declared order.
A zip-based container would embed timestamps and break byte-identical
replay, so the format is written by hand.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .model import (
    MODEL_BINARY_MAGIC,
    PARAM_NAMES,
    ChannelEncoder,
    DualChannelModel,
)

FORMAT_VERSION = 1


def save_dc_model(model: DualChannelModel, path: str | Path) -> None:
    params = model.params()
    header = {
        "version": FORMAT_VERSION,
        "model_kind": "dual_channel",
        "vocab_size": model.vocab_size,
        "dim": model.dim,
        "dropout_rate": model.dropout_rate,
        "shapes": {name: list(params[name].shape) for name in PARAM_NAMES},
    }
    with open(path, "wb") as fh:
        fh.write(MODEL_BINARY_MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for name in PARAM_NAMES:
            fh.write(np.ascontiguousarray(params[name], dtype="<f8").tobytes())


def load_dc_model(path: str | Path) -> DualChannelModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(MODEL_BINARY_MAGIC))
        if magic != MODEL_BINARY_MAGIC:
            raise ValueError(f"{path}: not a dual-channel model file")
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported dual-channel model version {header.get('version')!r}")
        arrays = {}
        for name in PARAM_NAMES:
            shape = tuple(header["shapes"][name])
            count = int(np.prod(shape)) if shape else 1
            buffer = fh.read(count * 8)
            arrays[name] = np.frombuffer(buffer, dtype="<f8").reshape(shape).copy()
    return DualChannelModel(
        encoder_cm=ChannelEncoder(arrays["emb_cm"], arrays["proj_cm"], arrays["bias_cm"]),
        encoder_en=ChannelEncoder(arrays["emb_en"], arrays["proj_en"], arrays["bias_en"]),
        w1=arrays["w1"],
        w2=arrays["w2"],
        ffn_w1=arrays["ffn_w1"],
        ffn_b1=arrays["ffn_b1"],
        ffn_w2=arrays["ffn_w2"],
        ffn_b2=arrays["ffn_b2"],
        dropout_rate=float(header["dropout_rate"]),
    )
