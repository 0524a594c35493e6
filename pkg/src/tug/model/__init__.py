"""Siamese compatibility network: encoding, training, estimator surface."""

from .estimator import (
    CompatibilityRegressor,
    PairPrediction,
    check_labels,
    check_pair_inputs,
    pairs_to_inputs,
)
from .io import load_params, save_params
from .network import (
    EncoderParams,
    aux_estimate,
    backward,
    batch_loss,
    encode,
    forward,
    init_params,
    loss_terms,
    pool_player,
    predict_pair,
)
from .training import Adam, TrainConfig, TrainReport, gradient_check, train

__all__ = [
    "Adam",
    "CompatibilityRegressor",
    "EncoderParams",
    "PairPrediction",
    "TrainConfig",
    "TrainReport",
    "aux_estimate",
    "backward",
    "batch_loss",
    "check_labels",
    "check_pair_inputs",
    "encode",
    "forward",
    "gradient_check",
    "init_params",
    "load_params",
    "loss_terms",
    "pairs_to_inputs",
    "pool_player",
    "predict_pair",
    "save_params",
    "train",
]
