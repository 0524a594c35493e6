import pathlib

import pytest

from tug.config import default_lexicon_path
from tug.embeddings import synthetic_table
from tug.lexicon import load_filtered_themes, load_lexicon

DATA_DIR = pathlib.Path(__file__).parent / "data"
MINI_LEXICON = DATA_DIR / "mini_lexicon.tsv"

TABLE_SEED = 7


@pytest.fixture(scope="session")
def mini_lexicon_path():
    return str(MINI_LEXICON)


@pytest.fixture(scope="session")
def mini_themes():
    return load_filtered_themes(MINI_LEXICON)


@pytest.fixture(scope="session")
def mini_table(mini_themes):
    return synthetic_table(mini_themes, TABLE_SEED)


@pytest.fixture(scope="session")
def full_lexicon_path():
    return default_lexicon_path()


@pytest.fixture(scope="session")
def full_themes(full_lexicon_path):
    return load_filtered_themes(full_lexicon_path)


@pytest.fixture(scope="session")
def full_table(full_themes):
    return synthetic_table(full_themes, TABLE_SEED)


@pytest.fixture(scope="session")
def all_themes(full_lexicon_path):
    """Unfiltered themes (difficulty 1..6), for loader-level tests."""
    return load_lexicon(full_lexicon_path)
