"""Word-vector tables and the vector math built on them.

Any table of the declared dimension works; the synthetic provider gives the
simulator and the test suite a deterministic geometry (theme-clustered unit
vectors) without shipping a sentence encoder.
"""

from __future__ import annotations

import json
import logging
import time
import urllib.error
import urllib.request

import numpy as np

from .errors import MissingEmbeddingError, TransportError, ZeroVectorError
from .util import seeded_rng

log = logging.getLogger(__name__)

DIMENSION = 384
SYNTH_NOISE_SCALE = 0.35


class EmbeddingTable:
    """Immutable word -> vector map with one fixed dimension."""

    def __init__(self, vectors: dict, dimension: int = DIMENSION):
        self.dimension = dimension
        store = {}
        for word, vec in vectors.items():
            arr = np.array(vec, dtype=np.float64)
            if arr.shape != (dimension,):
                raise ValueError(
                    f"vector for {word!r} has shape {arr.shape}, expected ({dimension},)"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"vector for {word!r} has non-finite components")
            arr.flags.writeable = False
            store[word] = arr
        self._vectors = store

    def __contains__(self, word: str) -> bool:
        return word in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __getitem__(self, word: str) -> np.ndarray:
        try:
            return self._vectors[word]
        except KeyError:
            raise MissingEmbeddingError([word]) from None

    def words(self):
        return self._vectors.keys()

    def require(self, words) -> None:
        """Raise MissingEmbeddingError listing every absent word."""
        missing = [w for w in words if w not in self._vectors]
        if missing:
            raise MissingEmbeddingError(missing)


def cosine(u, v) -> float:
    """Cosine similarity, clamped to [-1, 1] against floating drift."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine is undefined for a zero vector")
    # identical or exactly antipodal inputs hit +/-1 exactly, sqrt rounding
    # would otherwise undershoot by an ulp
    if np.array_equal(u, v):
        return 1.0
    if np.array_equal(u, -v):
        return -1.0
    return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))


def centroid_keyword(words, table: EmbeddingTable) -> tuple[str, list[str]]:
    """Split a word sample into (keyword, matrix).

    The keyword is the word whose vector is most cosine-similar to the
    componentwise mean of all the sampled words' vectors; ties go to the
    lexicographically smaller word.
    """
    words = list(words)
    table.require(words)
    vectors = np.stack([table[w] for w in words])
    centroid = vectors.mean(axis=0)
    sims = {w: cosine(table[w], centroid) for w in words}
    best = max(sims.values())
    keyword = min(w for w, s in sims.items() if s == best)
    remaining = [w for w in words if w != keyword]
    return keyword, remaining


def embed_round(theme: str, keyword: str, selections, table: EmbeddingTable) -> np.ndarray:
    """Round-level embedding: mean of the theme token (when the table knows
    it), the keyword, and each selected word."""
    words = [keyword] + sorted(selections)
    table.require(words)
    parts = [table[w] for w in words]
    if theme in table:
        parts.insert(0, table[theme])
    return np.stack(parts).mean(axis=0)


def _unit(vec: np.ndarray) -> np.ndarray:
    return vec / np.linalg.norm(vec)


def synthetic_table(
    themes,
    seed: int,
    dimension: int = DIMENSION,
    noise_scale: float = SYNTH_NOISE_SCALE,
) -> EmbeddingTable:
    """Deterministic stand-in for an external embedding model.

    One unit anchor direction per theme; each word is the unit-normalized mix
    anchor + noise_scale * noise, where noise is a unit-norm random direction
    seeded by the word itself. Unit-norm noise keeps the mixing ratio
    independent of the dimension, so words cluster tightly around their
    theme's anchor while distinct themes stay near-orthogonal. Words shared
    across themes keep the vector from their first theme. Theme names embed
    as their own anchors.
    """
    vectors: dict[str, np.ndarray] = {}
    for theme in themes:
        anchor = _unit(seeded_rng(seed, "anchor", theme.name).standard_normal(dimension))
        vectors.setdefault(theme.name, anchor)
        for word in theme.words:
            if word in vectors:
                continue
            noise = _unit(seeded_rng(seed, "word", word).standard_normal(dimension))
            vectors[word] = _unit(anchor + noise_scale * noise)
    return EmbeddingTable(vectors, dimension)


def save_table(table: EmbeddingTable, path) -> None:
    """Write the text table format: `dim N`, then `word<TAB>c1 c2 ...`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"dim {table.dimension}\n")
        for word in sorted(table.words()):
            comps = " ".join(f"{x:.17g}" for x in table[word])
            fh.write(f"{word}\t{comps}\n")


def load_table(path) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "dim":
            raise ValueError(f"{path}: expected 'dim N' header, got {header!r}")
        dimension = int(header[1])
        vectors = {}
        for line_no, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            word, sep, rest = line.rstrip("\n").partition("\t")
            if not sep:
                raise ValueError(f"{path}: line {line_no}: missing tab separator")
            vectors[word] = np.array([float(x) for x in rest.split()], dtype=np.float64)
    return EmbeddingTable(vectors, dimension)


class RemoteEmbeddingClient:
    """Optional HTTP provider: POST {"texts": [...]} -> {"vectors": [[...]]}.

    Never required by the offline pipeline; retried with exponential backoff.
    """

    def __init__(self, url: str, dimension: int = DIMENSION, timeout: float = 10.0,
                 retries: int = 3, backoff: float = 0.5):
        self.url = url
        self.dimension = dimension
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff

    def embed(self, texts) -> list[np.ndarray]:
        texts = list(texts)
        payload = json.dumps({"texts": texts}).encode("utf-8")
        last: Exception | None = None
        for attempt in range(self.retries):
            try:
                req = urllib.request.Request(
                    self.url, data=payload, headers={"Content-Type": "application/json"}
                )
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    body = json.load(resp)
                vectors = [np.asarray(v, dtype=np.float64) for v in body["vectors"]]
                if len(vectors) != len(texts) or any(
                    v.shape != (self.dimension,) for v in vectors
                ):
                    raise ValueError("embedding service returned wrong shapes")
                return vectors
            except (OSError, ValueError, KeyError, urllib.error.URLError) as exc:
                last = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2 ** attempt)
        raise TransportError(f"embedding service failed after {self.retries} attempts: {last}")
