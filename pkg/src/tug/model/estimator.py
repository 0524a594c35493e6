"""Scikit-learn-style estimator wrapping the Siamese compatibility model.

Follows the usual conventions so the model composes with pipeline tooling:
constructor arguments are stored verbatim, learned state lives in
underscore-suffixed attributes, get_params/set_params round-trip.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass

import numpy as np

from ..embeddings import EmbeddingTable, embed_round
from .network import IN_DIM, aux_estimate, encode, pool_player, predict_pair
from .training import TrainConfig, train

ROUNDS_PER_PAIR = 10


@dataclass(frozen=True)
class PairPrediction:
    y_hat: float
    y1_hat: float
    y2_hat: float


def pairs_to_inputs(pairs, table: EmbeddingTable) -> tuple[np.ndarray, np.ndarray]:
    """Embed and pool labeled pairs into model inputs (N, 2, dim), (N,)."""
    x = np.zeros((len(pairs), 2, table.dimension))
    y = np.zeros(len(pairs))
    for i, pair in enumerate(pairs):
        for side, picker in enumerate((lambda r: r.sel_a, lambda r: r.sel_b)):
            trace = np.stack([
                embed_round(r.theme, r.keyword, picker(r), table) for r in pair.rounds
            ])
            x[i, side] = pool_player(trace, rounds=len(pair.rounds))
        y[i] = pair.label
    return x, y


def check_pair_inputs(X) -> np.ndarray:
    """Accept (n, 2, dim) pooled inputs or (n, 2, rounds, dim) traces; pool
    the latter. Rejects non-finite values."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 4 and X.shape[1] == 2:
        X = X.mean(axis=2)
    if X.ndim != 3 or X.shape[1] != 2:
        raise ValueError(
            f"expected (n, 2, dim) pooled pairs or (n, 2, rounds, dim) traces, got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs contain non-finite values")
    return X


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(y) != n:
        raise ValueError(f"got {n} pairs but {len(y)} labels")
    if not np.all(np.isfinite(y)):
        raise ValueError("labels contain non-finite values")
    if np.any(y < 0.0) or np.any(y > 1.0):
        raise ValueError("labels must lie in [0, 1]")
    return y


class CompatibilityRegressor:
    """Predicts pair compatibility in [0,1]-labeled space from paired
    gameplay traces via a shared encoder and latent cosine."""

    def __init__(self, alpha=0.1, lr=1e-3, batch_size=32, patience=10,
                 max_epochs=200, val_fraction=0.2, seed=0):
        self.alpha = alpha
        self.lr = lr
        self.batch_size = batch_size
        self.patience = patience
        self.max_epochs = max_epochs
        self.val_fraction = val_fraction
        self.seed = seed

    @classmethod
    def _param_names(cls):
        return [p for p in inspect.signature(cls.__init__).parameters if p != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = self._param_names()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def _config(self) -> TrainConfig:
        return TrainConfig(alpha=self.alpha, lr=self.lr, batch_size=self.batch_size,
                           patience=self.patience, max_epochs=self.max_epochs,
                           val_fraction=self.val_fraction, seed=self.seed)

    def fit(self, X, y):
        X = check_pair_inputs(X)
        y = check_labels(y, len(X))
        self.params_, self.report_ = train(X, y, self._config())
        self.n_features_in_ = X.shape[2]
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise ValueError("this estimator is not fitted yet; call fit first")

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_pair_inputs(X)
        z1 = encode(X[:, 0], self.params_)
        z2 = encode(X[:, 1], self.params_)
        return predict_pair(z1, z2)

    def predict_detailed(self, X) -> list[PairPrediction]:
        self._check_fitted()
        X = check_pair_inputs(X)
        z1 = encode(X[:, 0], self.params_)
        z2 = encode(X[:, 1], self.params_)
        y_hat = predict_pair(z1, z2)
        y1 = aux_estimate(z1, self.params_)
        y2 = aux_estimate(z2, self.params_)
        return [PairPrediction(float(a), float(b), float(c))
                for a, b, c in zip(y_hat, y1, y2)]
