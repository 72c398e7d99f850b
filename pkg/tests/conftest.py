"""Shared fixtures: small corpora and reference models."""

import numpy as np
import pytest

from lookahead import markov_train, transformer_init


def make_phrase_corpus(seed: int, vocab: int = 8, phrases: int = 6, repeats: int = 400) -> list[int]:
    """Repetitive-but-branching token stream built from a phrase bank.

    Phrases share sub-patterns, so an order-3 model sees mostly
    deterministic contexts with occasional branch points at the seams.
    """
    rng = np.random.default_rng(seed)
    bank = [
        [int(t) for t in rng.integers(0, vocab, size=rng.integers(5, 9))]
        for _ in range(phrases)
    ]
    corpus: list[int] = []
    for _ in range(repeats):
        corpus.extend(bank[rng.integers(0, phrases)])
    return corpus


@pytest.fixture(scope="session")
def ab_model():
    """Order-1 model of the alternating two-token corpus."""
    return markov_train([[0, 1] * 4], order=1, smoothing=0.01, vocab_size=2)


@pytest.fixture(scope="session")
def phrase_model():
    return markov_train([make_phrase_corpus(7)], order=3, smoothing=0.1, vocab_size=8)


@pytest.fixture(scope="session")
def tiny_transformer():
    return transformer_init(seed=11, vocab_size=12, d_model=16, n_layers=2, n_heads=2)
