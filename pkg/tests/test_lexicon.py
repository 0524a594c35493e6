"""Lexicon loading, difficulty filtering, round construction, shuffles."""

import random

import pytest

from tug.embeddings import EmbeddingTable, cosine, synthetic_table
from tug.errors import DuplicateWordError, InsufficientWordsError, LexiconFormatError, MissingEmbeddingError
from tug.lexicon import (
    Subcategory,
    Theme,
    WordEntry,
    build_round_spec,
    filter_by_difficulty,
    load_lexicon,
    load_word_entries,
    shuffle_for_player,
    themes_from_entries,
)


def write_lexicon(tmp_path, text):
    path = tmp_path / "lex.tsv"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadLexicon:
    def test_shipped_adventure_theme_has_expected_subcategories(self, all_themes):
        by_name = {t.name: t for t in all_themes}
        adventure = by_name["Adventure & Exploration"]
        assert [s.name for s in adventure.subcategories] == [
            "Settings & Activities", "Objects & Tools",
            "Feelings & Motivations", "Roles & Archetypes",
        ]
        assert "jungle" in adventure.words
        assert "mountain" in adventure.words

    def test_shipped_lexicon_is_fifteen_themes(self, all_themes):
        assert len(all_themes) == 15

    def test_empty_file_yields_no_themes(self, tmp_path):
        assert load_lexicon(write_lexicon(tmp_path, "")) == []

    def test_duplicate_word_in_theme_rejected_with_line(self, tmp_path):
        path = write_lexicon(
            tmp_path,
            "T\tS\tjungle\t1\nT\tS2\tjungle\t2\n",
        )
        with pytest.raises(DuplicateWordError) as err:
            load_lexicon(path)
        assert "line 2" in str(err.value)

    def test_same_word_in_two_themes_is_allowed(self, tmp_path):
        themes = load_lexicon(write_lexicon(tmp_path, "A\tS\tjungle\t1\nB\tS\tjungle\t1\n"))
        assert [t.name for t in themes] == ["A", "B"]

    def test_parse_error_reports_line_number(self, tmp_path):
        path = write_lexicon(tmp_path, "A\tS\tok\t1\nbroken line\n")
        with pytest.raises(LexiconFormatError) as err:
            load_word_entries(path)
        assert "line 2" in str(err.value)

    def test_difficulty_range_enforced(self, tmp_path):
        with pytest.raises(LexiconFormatError):
            load_word_entries(write_lexicon(tmp_path, "A\tS\tword\t7\n"))
        with pytest.raises(LexiconFormatError):
            load_word_entries(write_lexicon(tmp_path, "A\tS\tword\tx\n"))

    def test_words_are_casefolded_and_trimmed(self, tmp_path):
        entries = load_word_entries(write_lexicon(tmp_path, "A\tS\t  JuNgLe \t1\n"))
        assert entries[0].word == "jungle"

    def test_small_pool_warns(self, tmp_path, caplog):
        with caplog.at_level("WARNING"):
            load_lexicon(write_lexicon(tmp_path, "A\tS\tword\t1\n"))
        assert any("guideline" in r.message for r in caplog.records)


class TestFilterByDifficulty:
    def test_threshold_application(self):
        entries = [
            WordEntry("compass", "T", "S", 2),
            WordEntry("peregrination", "T", "S", 5),
        ]
        assert filter_by_difficulty(entries) == [entries[0]]

    def test_all_easy_is_identity(self):
        entries = [WordEntry(f"w{i}", "T", "S", 1) for i in range(5)]
        assert filter_by_difficulty(entries) == entries

    def test_max_rating_six_is_noop(self):
        entries = [WordEntry(f"w{i}", "T", "S", d) for i, d in enumerate((1, 3, 6))]
        assert filter_by_difficulty(entries, 6) == entries

    def test_subset_threshold_and_idempotence(self):
        rng = random.Random(5)
        entries = [WordEntry(f"w{i}", "T", "S", rng.randint(1, 6)) for i in range(200)]
        kept = filter_by_difficulty(entries, 3)
        assert all(e.difficulty <= 3 for e in kept)
        assert set(kept) <= set(entries)
        assert filter_by_difficulty(kept, 3) == kept
        # order preserved
        positions = [entries.index(e) for e in kept]
        assert positions == sorted(positions)


def make_theme(n_words, name="Fixture"):
    words = tuple(f"word{i:02d}" for i in range(n_words))
    return Theme(name, (Subcategory("All", words),))


class TestBuildRoundSpec:
    def test_golden_fixed_seed_replay(self):
        # recorded once: the spec a seeded rng produces over a 25-word theme
        theme = make_theme(25)
        table = synthetic_table([theme], seed=3)
        spec = build_round_spec(theme, table, random.Random(42))
        again = build_round_spec(theme, table, random.Random(42))
        assert spec == again
        assert spec.theme == "Fixture"
        assert spec.keyword == GOLDEN_KEYWORD
        assert list(spec.matrix) == GOLDEN_MATRIX
        assert spec.quota == GOLDEN_QUOTA

    def test_exactly_21_words_forces_the_sample(self, ):
        theme = make_theme(21)
        table = synthetic_table([theme], seed=3)
        spec = build_round_spec(theme, table, random.Random(0))
        assert set(spec.matrix) | {spec.keyword} == set(theme.words)

    def test_twenty_words_insufficient(self):
        theme = make_theme(20)
        table = synthetic_table([theme], seed=3)
        with pytest.raises(InsufficientWordsError):
            build_round_spec(theme, table, random.Random(0))

    def test_missing_embedding_lists_absent_words(self):
        theme = make_theme(22)
        partial = synthetic_table([make_theme(20)], seed=3)  # word20, word21 absent
        with pytest.raises(MissingEmbeddingError) as err:
            build_round_spec(theme, partial, random.Random(0))
        assert err.value.words == ["word20", "word21"]

    def test_keyword_is_centroid_argmax_against_brute_force(self, full_themes, full_table):
        import numpy as np
        for seed in range(25):
            rng = random.Random(seed)
            theme = full_themes[seed % len(full_themes)]
            spec = build_round_spec(theme, full_table, rng)
            sample = [spec.keyword, *spec.matrix]
            centroid = np.mean([full_table[w] for w in sample], axis=0)
            best = max(sample, key=lambda w: (cosine(full_table[w], centroid), w))
            brute = min(
                (w for w in sample
                 if cosine(full_table[w], centroid) == cosine(full_table[best], centroid)),
            )
            assert spec.keyword == brute

    def test_union_is_21_distinct_theme_words(self, full_themes, full_table):
        for seed in range(10):
            theme = full_themes[seed % len(full_themes)]
            spec = build_round_spec(theme, full_table, random.Random(seed))
            union = set(spec.matrix) | {spec.keyword}
            assert len(union) == 21
            assert union <= set(theme.words)
            assert spec.quota in (3, 4, 5)


class TestShuffleForPlayer:
    def _spec(self, table):
        theme = make_theme(25)
        return build_round_spec(theme, table, random.Random(1)), theme

    def test_permutation_property(self):
        theme = make_theme(25)
        table = synthetic_table([theme], seed=3)
        spec = build_round_spec(theme, table, random.Random(1))
        for seed in (0, 1, 99, 12345):
            assert sorted(shuffle_for_player(spec, seed)) == sorted(spec.matrix)

    def test_same_seed_same_order(self):
        theme = make_theme(25)
        table = synthetic_table([theme], seed=3)
        spec = build_round_spec(theme, table, random.Random(1))
        assert shuffle_for_player(spec, 7) == shuffle_for_player(spec, 7)

    def test_distinct_seeds_usually_differ(self):
        theme = make_theme(25)
        table = synthetic_table([theme], seed=3)
        spec = build_round_spec(theme, table, random.Random(1))
        rng = random.Random(0)
        differing = 0
        for _ in range(100):
            a, b = rng.getrandbits(64), rng.getrandbits(64)
            if a == b:
                continue
            if shuffle_for_player(spec, a) != shuffle_for_player(spec, b):
                differing += 1
        assert differing >= 99


# frozen golden values (recorded from the fixed-seed run above)
GOLDEN_KEYWORD = "word01"
GOLDEN_MATRIX = [
    "word20", "word03", "word00", "word08", "word07", "word24", "word04",
    "word23", "word02", "word13", "word22", "word14", "word17", "word11",
    "word21", "word15", "word10", "word05", "word06", "word18",
]
GOLDEN_QUOTA = 4
