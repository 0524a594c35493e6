"""Small shared helpers: stable seed derivation."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 128-bit integer from the given parts (platform-independent)."""
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:16], "big")


def seeded_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
