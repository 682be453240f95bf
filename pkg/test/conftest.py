import io

import pytest

from path_srl.config import NETWORKS, config_from_dict
from path_srl.processing.conll_io import Sentence, Token, read_corpus
from path_srl.processing.dep_graph import build_tree
from path_srl.processing.toy_grammar import generate_corpus
from path_srl.training.train_pipeline import train_bundle


def make_token(id, form, lemma, ppos, head, deprel, pred="", apreds=()):
    return Token(id, form, lemma, lemma, ppos, ppos, "_", "_", head, head, deprel, deprel, bool(pred), pred, tuple(apreds))


def make_sentence(rows, predicates=()):
    """rows: (form, lemma, ppos, head, deprel); predicates: (token id, sense, {argument id: role})"""
    tokens = tuple(make_token(k, *row) for k, row in enumerate(rows, start=1))
    return Sentence(tokens).with_annotation(list(predicates))


TROUBLE_ROWS = [
    ("He", "he", "N", 2, "SBJ"),
    ("had", "have", "V", 0, "ROOT"),
    ("trouble", "trouble", "N", 2, "OBJ"),
    ("raising", "raise", "V", 3, "NMOD"),
    ("funds", "fund", "N", 4, "OBJ"),
]


@pytest.fixture
def trouble():
    """He had trouble raising funds, with raising annotated"""
    return make_sentence(TROUBLE_ROWS, [(4, "raise.01", {1: "A0", 5: "A1"})])


@pytest.fixture
def trouble_tree(trouble):
    return build_tree(trouble)


@pytest.fixture(scope="session")
def toy_corpus():
    return generate_corpus(60, seed=7)


@pytest.fixture(scope="session")
def toy_train():
    return generate_corpus(200, seed=1)


@pytest.fixture(scope="session")
def toy_heldout():
    return generate_corpus(50, seed=1001)


SMALL_NETWORK = {"embed_dim": 8, "hidden_dim": 24, "alpha": 0.05, "dropout": 0.0, "epochs": 4}


@pytest.fixture(scope="session")
def small_config():
    """Small networks and few epochs, for tests that only need a working bundle"""
    return config_from_dict({"seed": 3, "networks": {name: dict(SMALL_NETWORK) for name in NETWORKS}})


@pytest.fixture(scope="session")
def small_run(toy_corpus, small_config):
    return train_bundle(toy_corpus, toy_corpus[:10], small_config)


@pytest.fixture(scope="session")
def small_bundle(small_run):
    return small_run.bundle


def parse(text: str):
    return read_corpus(io.StringIO(text))
