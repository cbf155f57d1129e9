import pathlib

import pytest

from readward.harness import packaged_manual_path
from readward.manual import normalize, read_contexts
from readward.providers import LexicalProvider
from readward.reason import build_table

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def lexical():
    return LexicalProvider()


@pytest.fixture(scope="session")
def game_doc(lexical):
    def load(game):
        with open(packaged_manual_path(game), encoding="utf-8") as fh:
            return normalize(fh.read())

    return load


@pytest.fixture(scope="session")
def game_table(lexical, game_doc):
    cache = {}

    def build(game, positive=5.0, negative=5.0):
        key = (game, positive, negative)
        if key not in cache:
            _, contexts = read_contexts(lexical, game_doc(game))
            cache[key] = build_table(
                lexical, contexts, positive_reward=positive, negative_reward=negative
            )
        return cache[key]

    return build


@pytest.fixture()
def fixtures_dir():
    return FIXTURES
