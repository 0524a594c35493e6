"""Theme taxonomy, word pools, difficulty filtering, round construction.

Lexicon files are UTF-8 text, one record per line:
``theme<TAB>subcategory<TAB>word<TAB>difficulty`` with difficulty in 1..6
(1 = very familiar, 6 = rare or domain-specific).
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

from .embeddings import EmbeddingTable, centroid_keyword
from .errors import DuplicateWordError, InsufficientWordsError, LexiconFormatError

log = logging.getLogger(__name__)

MATRIX_SIZE = 20
SAMPLE_SIZE = MATRIX_SIZE + 1  # matrix plus the keyword
QUOTA_CHOICES = (3, 4, 5)
MIN_DIFFICULTY, MAX_DIFFICULTY = 1, 6
DEFAULT_MAX_RATING = 3
POOL_SIZE_GUIDELINE = 50


def normalize_word(raw: str) -> str:
    return raw.strip().casefold()


@dataclass(frozen=True)
class WordEntry:
    word: str
    theme: str
    subcategory: str
    difficulty: int


@dataclass(frozen=True)
class Subcategory:
    name: str
    words: tuple[str, ...]


@dataclass(frozen=True)
class Theme:
    name: str
    subcategories: tuple[Subcategory, ...]

    @property
    def words(self) -> list[str]:
        """All words of the theme in file order."""
        out = []
        for sub in self.subcategories:
            out.extend(sub.words)
        return out


@dataclass(frozen=True)
class RoundSpec:
    """What both players see in one round: keyword, 20-word matrix, quota."""

    theme: str
    keyword: str
    matrix: tuple[str, ...]
    quota: int

    def __post_init__(self):
        if len(self.matrix) != MATRIX_SIZE or len(set(self.matrix)) != MATRIX_SIZE:
            raise ValueError(f"matrix must hold {MATRIX_SIZE} distinct words")
        if self.keyword in self.matrix:
            raise ValueError("keyword must not appear in the matrix")
        if self.quota not in QUOTA_CHOICES:
            raise ValueError(f"quota must be one of {QUOTA_CHOICES}")


def load_word_entries(path) -> list[WordEntry]:
    """Parse a lexicon/ratings file; rejects malformed lines and words
    repeated within one theme, reporting the offending line number."""
    entries: list[WordEntry] = []
    seen: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise LexiconFormatError(
                    f"expected 4 tab-separated fields, got {len(parts)}", line_no
                )
            theme, sub, raw_word, raw_rating = (p.strip() for p in parts)
            word = normalize_word(raw_word)
            if not theme or not sub or not word:
                raise LexiconFormatError("empty theme, subcategory or word", line_no)
            try:
                difficulty = int(raw_rating)
            except ValueError:
                raise LexiconFormatError(
                    f"difficulty {raw_rating!r} is not an integer", line_no
                ) from None
            if not MIN_DIFFICULTY <= difficulty <= MAX_DIFFICULTY:
                raise LexiconFormatError(
                    f"difficulty {difficulty} outside "
                    f"[{MIN_DIFFICULTY}, {MAX_DIFFICULTY}]",
                    line_no,
                )
            key = (theme, word)
            if key in seen:
                raise DuplicateWordError(
                    f"{word!r} already listed under theme {theme!r} "
                    f"(line {seen[key]})",
                    line_no,
                )
            seen[key] = line_no
            entries.append(WordEntry(word, theme, sub, difficulty))
    return entries


def themes_from_entries(entries) -> list[Theme]:
    """Group entries into themes, preserving file order."""
    order: list[str] = []
    subs: dict[str, dict[str, list[str]]] = {}
    for entry in entries:
        if entry.theme not in subs:
            subs[entry.theme] = {}
            order.append(entry.theme)
        theme_subs = subs[entry.theme]
        theme_subs.setdefault(entry.subcategory, []).append(entry.word)
    themes = []
    for name in order:
        subcats = tuple(
            Subcategory(sub_name, tuple(words)) for sub_name, words in subs[name].items()
        )
        theme = Theme(name, subcats)
        if len(theme.words) < POOL_SIZE_GUIDELINE:
            log.warning(
                "theme %r has only %d words (guideline is %d+)",
                name, len(theme.words), POOL_SIZE_GUIDELINE,
            )
        themes.append(theme)
    return themes


def load_lexicon(path) -> list[Theme]:
    return themes_from_entries(load_word_entries(path))


def filter_by_difficulty(entries, max_rating: int = DEFAULT_MAX_RATING) -> list:
    """Keep only entries rated at or below max_rating; order preserved."""
    return [e for e in entries if e.difficulty <= max_rating]


def load_filtered_themes(path, max_rating: int = DEFAULT_MAX_RATING) -> list[Theme]:
    return themes_from_entries(filter_by_difficulty(load_word_entries(path), max_rating))


def build_round_spec(theme: Theme, embeddings: EmbeddingTable, rng: random.Random) -> RoundSpec:
    """Sample 21 theme words; the one nearest the sample's centroid becomes
    the keyword, the other 20 form the matrix; quota drawn from {3,4,5}."""
    pool = theme.words
    if len(pool) < SAMPLE_SIZE:
        raise InsufficientWordsError(
            f"theme {theme.name!r} has {len(pool)} words, needs {SAMPLE_SIZE}"
        )
    embeddings.require(pool)
    sampled = rng.sample(pool, SAMPLE_SIZE)
    keyword, matrix = centroid_keyword(sampled, embeddings)
    quota = rng.choice(QUOTA_CHOICES)
    return RoundSpec(theme=theme.name, keyword=keyword, matrix=tuple(matrix), quota=quota)


def shuffle_for_player(spec: RoundSpec, player_seed: int) -> list[str]:
    """Deterministic per-player permutation of the matrix."""
    order = list(spec.matrix)
    random.Random(player_seed).shuffle(order)
    return order
