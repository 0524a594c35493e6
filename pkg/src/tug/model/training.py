"""Training loop (Adam, early stopping, deterministic split) and the
finite-difference gradient check."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .network import DEFAULT_ALPHA, EncoderParams, backward, batch_loss, init_params

log = logging.getLogger(__name__)

MIN_PAIRS = 2  # documented requirement is 10+; below 2 the split degenerates


@dataclass
class TrainConfig:
    alpha: float = DEFAULT_ALPHA
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    patience: int = 10
    max_epochs: int = 200
    val_fraction: float = 0.2
    seed: int = 0


@dataclass
class TrainReport:
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)
    train_mse: list[float] = field(default_factory=list)  # main-term MSE only
    best_epoch: int = 0
    epochs_run: int = 0
    train_indices: list[int] = field(default_factory=list)
    val_indices: list[int] = field(default_factory=list)


class Adam:
    """Adaptive-moment step over an EncoderParams instance."""

    def __init__(self, params: EncoderParams, lr: float, beta1: float,
                 beta2: float, eps: float):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = params.zeros_like()
        self.v = params.zeros_like()

    def step(self, params: EncoderParams, grads: dict) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name in params.names():
            g = grads[name]
            m = getattr(self.m, name)
            v = getattr(self.v, name)
            m[...] = self.beta1 * m + (1.0 - self.beta1) * g
            v[...] = self.beta2 * v + (1.0 - self.beta2) * g * g
            p = getattr(params, name)
            p[...] = p - self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)


def split_indices(n: int, val_fraction: float, rng: np.random.Generator):
    perm = rng.permutation(n)
    n_val = int(np.floor(n * val_fraction))
    if n_val == 0 or n - n_val == 0:
        raise TrainingError(
            f"cannot split {n} pairs {1 - val_fraction:.0%}/{val_fraction:.0%}: "
            "one side would be empty"
        )
    return perm[n_val:], perm[:n_val]


def train(x_pairs: np.ndarray, y: np.ndarray, config: TrainConfig | None = None,
          params: EncoderParams | None = None) -> tuple[EncoderParams, TrainReport]:
    """Fit the encoder on pooled pair inputs (N, 2, in_dim) with labels (N,).

    Deterministic given (config.seed, inputs): seeded init, seeded split,
    seeded epoch shuffles, fixed reduction order. Early-stops when the
    validation loss has not improved for `patience` epochs and returns the
    best-validation snapshot.
    """
    config = config or TrainConfig()
    x_pairs = np.asarray(x_pairs, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x_pairs.ndim != 3 or x_pairs.shape[1] != 2:
        raise TrainingError(f"expected inputs (N, 2, dim), got {x_pairs.shape}")
    n = len(y)
    if n == 0:
        raise TrainingError("empty dataset")
    if n < MIN_PAIRS:
        raise TrainingError(f"need at least {MIN_PAIRS} pairs, got {n}")

    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = split_indices(n, config.val_fraction, rng)
    params = params.copy() if params is not None else init_params(config.seed,
                                                                  in_dim=x_pairs.shape[2])
    optimizer = Adam(params, config.lr, config.beta1, config.beta2, config.eps)
    report = TrainReport(train_indices=[int(i) for i in train_idx],
                         val_indices=[int(i) for i in val_idx])
    best_val = np.inf
    best_params = params.copy()
    stale = 0

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), config.batch_size):
            idx = train_idx[order[start:start + config.batch_size]]
            loss, _, grads = backward(params, x_pairs[idx, 0], x_pairs[idx, 1],
                                      y[idx], config.alpha)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch + 1}")
            optimizer.step(params, grads)
        train_loss, train_mse = batch_loss(params, x_pairs[train_idx, 0],
                                           x_pairs[train_idx, 1], y[train_idx], config.alpha)
        val_loss, _ = batch_loss(params, x_pairs[val_idx, 0],
                                 x_pairs[val_idx, 1], y[val_idx], config.alpha)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise TrainingError(f"non-finite loss at epoch {epoch + 1}")
        report.train_losses.append(train_loss)
        report.val_losses.append(val_loss)
        report.train_mse.append(train_mse)
        report.epochs_run = epoch + 1
        if val_loss < best_val:
            best_val = val_loss
            best_params = params.copy()
            report.best_epoch = epoch + 1
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                log.info("early stop at epoch %d (best %d)", epoch + 1, report.best_epoch)
                break
    best_params.check_finite()
    return best_params, report


def gradient_check(params: EncoderParams, x1, x2, y, alpha: float = DEFAULT_ALPHA,
                   n_samples: int = 200, h: float = 1e-5, seed: int = 0) -> float:
    """Max relative error between analytic and central finite-difference
    gradients over n_samples randomly chosen parameters."""
    params = params.copy()
    _, _, grads = backward(params, x1, x2, y, alpha)
    rng = np.random.default_rng(seed)
    names = params.names()
    worst = 0.0
    for _ in range(n_samples):
        name = names[rng.integers(len(names))]
        tensor = getattr(params, name)
        idx = tuple(int(rng.integers(s)) for s in tensor.shape)
        original = tensor[idx]
        tensor[idx] = original + h
        up, _ = batch_loss(params, x1, x2, y, alpha)
        tensor[idx] = original - h
        down, _ = batch_loss(params, x1, x2, y, alpha)
        tensor[idx] = original
        numeric = (up - down) / (2.0 * h)
        analytic = grads[name][idx]
        rel = abs(numeric - analytic) / max(abs(numeric), abs(analytic), 1e-8)
        worst = max(worst, rel)
    return worst
