"""Shared fixtures: bundled knowledge base, corpora, and a trained model."""

from pathlib import Path

import pytest

import fqninfer as fq

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def kb():
    return fq.load_kb(FIXTURES / "kb" / "global.kb")


@pytest.fixture(scope="session")
def train_items():
    return fq.load_corpus(FIXTURES / "train")


@pytest.fixture(scope="session")
def eval_items():
    return fq.load_corpus(FIXTURES / "corpus")


@pytest.fixture(scope="session")
def model(train_items):
    return fq.train(fq.training_pairs(train_items, kb=None), eta=2, alpha=1.0)


@pytest.fixture(scope="session")
def by_id(eval_items):
    return {item.snippet_id: item for item in eval_items}
