"""Shared corpus/vocab synthesis helpers for the test suite."""

from __future__ import annotations

import json

import numpy as np
import pytest

from docmix.corpus import load_corpus
from docmix.wordpiece import SPECIAL_TOKENS, load_vocab


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


def write_vocab(path, tokens):
    """Write specials followed by the given tokens, one per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for token in (*SPECIAL_TOKENS, *tokens):
            fh.write(token + "\n")
    return path


def word_list(n):
    return [f"tok{i:03d}" for i in range(n)]


def synth_text(rng, words, length):
    return " ".join(words[i] for i in rng.integers(len(words), size=length))


def ring_corpus_records(n_docs, doc_tokens, vocab_words, seed=11):
    """Link-rich corpus: doc i links to doc i+1 (mod n); every doc has outlinks."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_docs):
        records.append({
            "id": f"doc{i:04d}",
            "title": f"Doc {i}",
            "text": synth_text(rng, vocab_words, doc_tokens),
            "links": [f"doc{(i + 1) % n_docs:04d}"],
        })
    return records


@pytest.fixture
def small_vocab(tmp_path):
    path = write_vocab(tmp_path / "vocab.txt", word_list(50))
    return load_vocab(path)


@pytest.fixture
def linked_corpus(tmp_path):
    """40 documents in a link ring, each long enough for several segments."""
    words = word_list(50)
    path = write_jsonl(tmp_path / "corpus.jsonl", ring_corpus_records(40, 400, words))
    return load_corpus(path)
