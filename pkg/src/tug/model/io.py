"""Exact round-tripping parameter files (versioned npz container)."""

from __future__ import annotations

import numpy as np

from .network import EncoderParams

FORMAT_VERSION = 1


def save_params(params: EncoderParams, path) -> None:
    arrays = {name: getattr(params, name) for name in params.names()}
    np.savez(path, __version__=np.array(FORMAT_VERSION), **arrays)


def load_params(path) -> EncoderParams:
    with np.load(path) as data:
        version = int(data["__version__"])
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported parameter file version {version}")
        kwargs = {k: data[k] for k in data.files if k != "__version__"}
    return EncoderParams(**kwargs)
