"""Dual-channel fusion classifier: model, optimizer, training, verification."""

from .gradcheck import grad_check
from .io import load_dc_model, save_dc_model
from .model import (
    ChannelEncoder,
    DualChannelModel,
    HashTokenizer,
    bce_loss,
    encode,
    forward,
    forward_batch,
    init_model,
    sigmoid,
    single_channel_forward,
)
from .optim import AdamWState, adamw_step, init_state
from .train import (
    Example,
    EpochStats,
    TrainConfig,
    TrainingDivergedError,
    history_csv,
    make_examples,
    predict_proba_dc,
    train,
    training_accuracy,
)
from .translate import TranslationProvider, load_cache, save_cache, translate

__all__ = [
    "ChannelEncoder",
    "DualChannelModel",
    "HashTokenizer",
    "AdamWState",
    "Example",
    "EpochStats",
    "TrainConfig",
    "TrainingDivergedError",
    "TranslationProvider",
    "adamw_step",
    "bce_loss",
    "encode",
    "forward",
    "forward_batch",
    "grad_check",
    "history_csv",
    "init_model",
    "init_state",
    "load_cache",
    "load_dc_model",
    "make_examples",
    "predict_proba_dc",
    "save_cache",
    "save_dc_model",
    "sigmoid",
    "single_channel_forward",
    "train",
    "training_accuracy",
    "translate",
]
