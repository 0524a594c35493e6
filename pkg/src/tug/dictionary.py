"""Pluggable word-definition providers behind ``GET /define?word=``.

The backing source is deliberately generic: anything with a
``define(word) -> str | None`` method works. The default derives a short
gloss from the lexicon itself so the game runs fully offline.
"""

from __future__ import annotations

from typing import Protocol

from .lexicon import Theme, normalize_word


class DictionaryProvider(Protocol):
    def define(self, word: str) -> str | None: ...


class StaticDictionary:
    def __init__(self, definitions: dict[str, str]):
        self._defs = {normalize_word(k): v for k, v in definitions.items()}

    def define(self, word: str) -> str | None:
        return self._defs.get(normalize_word(word))


class LexiconDictionary:
    """Glosses a word by where it lives in the theme taxonomy."""

    def __init__(self, themes: list[Theme]):
        self._index: dict[str, list[str]] = {}
        for theme in themes:
            for sub in theme.subcategories:
                for word in sub.words:
                    self._index.setdefault(word, []).append(f"{theme.name} / {sub.name}")

    def define(self, word: str) -> str | None:
        places = self._index.get(normalize_word(word))
        if not places:
            return None
        return f"{normalize_word(word)}: used in {'; '.join(places)}"
