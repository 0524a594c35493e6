"""Two-player word-association game with a synthetic-data pipeline and a
Siamese compatibility model."""

__version__ = "0.1.0"

from .embeddings import EmbeddingTable, centroid_keyword, cosine, embed_round, synthetic_table
from .lexicon import (
    RoundSpec,
    Theme,
    WordEntry,
    build_round_spec,
    filter_by_difficulty,
    load_lexicon,
    shuffle_for_player,
)
from .model import CompatibilityRegressor
from .scoring import RoundScore, compute_wcmr, round_points, session_total, update_streak
from .session import Session, SessionState

__all__ = [
    "CompatibilityRegressor",
    "EmbeddingTable",
    "RoundScore",
    "RoundSpec",
    "Session",
    "SessionState",
    "Theme",
    "WordEntry",
    "build_round_spec",
    "centroid_keyword",
    "compute_wcmr",
    "cosine",
    "embed_round",
    "filter_by_difficulty",
    "load_lexicon",
    "round_points",
    "session_total",
    "shuffle_for_player",
    "synthetic_table",
    "update_streak",
]
