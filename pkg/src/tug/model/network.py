"""Siamese encoder: forward pass, analytic gradients, loss.

Both players share one MLP (384 -> 256 -> 128, each layer affine ->
layer-normalize -> rectify, final latent L2-normalized). The pair score is
the cosine of the two latents; a single shared affine+sigmoid head gives
per-player auxiliary estimates that only regularize training.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..errors import TrainingError

IN_DIM = 384
HIDDEN_DIM = 256
LATENT_DIM = 128
LN_EPS = 1e-5
NORM_EPS = 1e-12
DEFAULT_ALPHA = 0.1


@dataclass
class EncoderParams:
    w1: np.ndarray  # (hidden, in)
    b1: np.ndarray  # (hidden,)
    g1: np.ndarray  # (hidden,) layer-norm gain
    s1: np.ndarray  # (hidden,) layer-norm shift
    w2: np.ndarray  # (latent, hidden)
    b2: np.ndarray
    g2: np.ndarray
    s2: np.ndarray
    wa: np.ndarray  # (latent,) auxiliary head weights
    ba: np.ndarray  # () auxiliary head bias

    def names(self) -> list[str]:
        return [f.name for f in fields(self)]

    def copy(self) -> "EncoderParams":
        return EncoderParams(**{n: getattr(self, n).copy() for n in self.names()})

    def zeros_like(self) -> "EncoderParams":
        return EncoderParams(**{n: np.zeros_like(getattr(self, n)) for n in self.names()})

    def check_finite(self) -> None:
        for n in self.names():
            if not np.all(np.isfinite(getattr(self, n))):
                raise TrainingError(f"parameter {n} has non-finite values")

    def allclose(self, other: "EncoderParams") -> bool:
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in self.names())


def init_params(seed: int, in_dim: int = IN_DIM, hidden: int = HIDDEN_DIM,
                latent: int = LATENT_DIM) -> EncoderParams:
    """Seeded uniform init scaled by 1/sqrt(fan_in); unit gains, zero shifts."""
    rng = np.random.default_rng(seed)

    def uniform(fan_in, *shape):
        return rng.uniform(-1.0, 1.0, size=shape) / np.sqrt(fan_in)

    return EncoderParams(
        w1=uniform(in_dim, hidden, in_dim), b1=np.zeros(hidden),
        g1=np.ones(hidden), s1=np.zeros(hidden),
        w2=uniform(hidden, latent, hidden), b2=np.zeros(latent),
        g2=np.ones(latent), s2=np.zeros(latent),
        wa=uniform(latent, latent), ba=np.zeros(()),
    )


def pool_player(trace: np.ndarray, rounds: int = 10) -> np.ndarray:
    """Mean-pool a (rounds, dim) trace of round embeddings into one vector."""
    trace = np.asarray(trace, dtype=np.float64)
    if trace.ndim != 2 or trace.shape[0] != rounds:
        raise ValueError(f"expected a ({rounds}, dim) trace, got {trace.shape}")
    return trace.mean(axis=0)


def _layer_forward(x, w, b, g, s, cache, tag):
    h = x @ w.T + b
    mu = h.mean(axis=1, keepdims=True)
    var = h.var(axis=1, keepdims=True)
    xhat = (h - mu) / np.sqrt(var + LN_EPS)
    normed = g * xhat + s
    act = np.maximum(normed, 0.0)
    cache[tag] = {"x": x, "var": var, "xhat": xhat, "normed": normed, "act": act}
    return act


def encode(x: np.ndarray, params: EncoderParams, cache: dict | None = None) -> np.ndarray:
    """Encode pooled player vectors (B, in_dim) into unit latents (B, latent)."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    store = cache if cache is not None else {}
    a1 = _layer_forward(x, params.w1, params.b1, params.g1, params.s1, store, "l1")
    a2 = _layer_forward(a1, params.w2, params.b2, params.g2, params.s2, store, "l2")
    norm = np.maximum(np.linalg.norm(a2, axis=1, keepdims=True), NORM_EPS)
    z = a2 / norm
    store["norm"] = norm
    store["z"] = z
    return z


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def predict_pair(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Cosine of latent vectors; latents from encode() are already unit
    length, the epsilon guard covers degenerate inputs."""
    z1 = np.atleast_2d(z1)
    z2 = np.atleast_2d(z2)
    n1 = np.maximum(np.linalg.norm(z1, axis=1), NORM_EPS)
    n2 = np.maximum(np.linalg.norm(z2, axis=1), NORM_EPS)
    return np.clip(np.sum(z1 * z2, axis=1) / (n1 * n2), -1.0, 1.0)


def aux_estimate(z: np.ndarray, params: EncoderParams) -> np.ndarray:
    return _sigmoid(np.atleast_2d(z) @ params.wa + params.ba)


def loss_terms(y_hat, y1_hat, y2_hat, y, alpha: float = DEFAULT_ALPHA):
    """Composite squared error: MSE(y_hat, y) + alpha * (MSE(y1) + MSE(y2))."""
    y_hat, y1_hat, y2_hat, y = (np.asarray(a, dtype=np.float64)
                                for a in (y_hat, y1_hat, y2_hat, y))
    mse_main = float(np.mean((y_hat - y) ** 2))
    mse_aux1 = float(np.mean((y1_hat - y) ** 2))
    mse_aux2 = float(np.mean((y2_hat - y) ** 2))
    return mse_main + alpha * (mse_aux1 + mse_aux2), mse_main


def forward(params: EncoderParams, x1: np.ndarray, x2: np.ndarray):
    """Full pair forward: returns (y_hat, y1_hat, y2_hat, caches)."""
    c1: dict = {}
    c2: dict = {}
    z1 = encode(x1, params, c1)
    z2 = encode(x2, params, c2)
    y_hat = np.sum(z1 * z2, axis=1)  # unit latents: dot product is the cosine
    return y_hat, aux_estimate(z1, params), aux_estimate(z2, params), (c1, c2)


def batch_loss(params: EncoderParams, x1, x2, y, alpha: float = DEFAULT_ALPHA):
    y_hat, y1_hat, y2_hat, _ = forward(params, x1, x2)
    return loss_terms(y_hat, y1_hat, y2_hat, y, alpha)


def _layer_backward(d_act, w, g, cache, grads, w_name, b_name, g_name, s_name):
    c = cache
    d_norm = d_act * (c["normed"] > 0)
    grads[g_name] += (d_norm * c["xhat"]).sum(axis=0)
    grads[s_name] += d_norm.sum(axis=0)
    d_xhat = d_norm * g
    inv_std = 1.0 / np.sqrt(c["var"] + LN_EPS)
    d_h = inv_std * (
        d_xhat
        - d_xhat.mean(axis=1, keepdims=True)
        - c["xhat"] * np.mean(d_xhat * c["xhat"], axis=1, keepdims=True)
    )
    grads[w_name] += d_h.T @ c["x"]
    grads[b_name] += d_h.sum(axis=0)
    return d_h @ w


def backward(params: EncoderParams, x1, x2, y, alpha: float = DEFAULT_ALPHA):
    """Loss and analytic gradients for one batch (mean-reduced)."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_2d(np.asarray(x2, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    batch = len(y)
    y_hat, y1_hat, y2_hat, (c1, c2) = forward(params, x1, x2)
    loss, mse_main = loss_terms(y_hat, y1_hat, y2_hat, y, alpha)

    grads = {n: np.zeros_like(getattr(params, n)) for n in params.names()}
    d_yhat = 2.0 * (y_hat - y) / batch
    d_aux1 = 2.0 * alpha * (y1_hat - y) / batch * y1_hat * (1.0 - y1_hat)
    d_aux2 = 2.0 * alpha * (y2_hat - y) / batch * y2_hat * (1.0 - y2_hat)

    z1, z2 = c1["z"], c2["z"]
    d_z1 = d_yhat[:, None] * z2 + d_aux1[:, None] * params.wa
    d_z2 = d_yhat[:, None] * z1 + d_aux2[:, None] * params.wa
    grads["wa"] = z1.T @ d_aux1 + z2.T @ d_aux2
    grads["ba"] = np.asarray(d_aux1.sum() + d_aux2.sum())

    for cache, d_z in ((c1, d_z1), (c2, d_z2)):
        z, norm = cache["z"], cache["norm"]
        # d(a / max(||a||, eps)): project out the radial component
        d_a2 = (d_z - z * np.sum(d_z * z, axis=1, keepdims=True)) / norm
        d_a1 = _layer_backward(d_a2, params.w2, params.g2, cache["l2"], grads,
                               "w2", "b2", "g2", "s2")
        _layer_backward(d_a1, params.w1, params.g1, cache["l1"], grads,
                        "w1", "b1", "g1", "s1")
    return loss, mse_main, grads
