import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from docmix.corpus import CorpusFormatError, load_corpus, normalize_whitespace, save_corpus

from conftest import write_jsonl


def test_load_two_docs(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "one two", "links": ["B"]},
        {"id": "B", "title": "", "text": "three four", "links": []},
    ])
    corpus = load_corpus(path)
    assert len(corpus) == 2
    assert corpus["A"].outlinks == ("B",)
    assert corpus["B"].outlinks == ()
    assert corpus.ids == ["A", "B"]


def test_self_links_and_duplicates_dropped(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "x", "links": ["A", "B", "B"]},
    ])
    corpus = load_corpus(path)
    assert corpus["A"].outlinks == ("B",)
    assert corpus.load_report.self_links_dropped == 1
    assert corpus.load_report.duplicate_links_dropped == 1


def test_duplicate_id_names_both_lines(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "x", "links": []},
        {"id": "B", "title": "", "text": "y", "links": []},
        {"id": "A", "title": "", "text": "z", "links": []},
    ])
    with pytest.raises(CorpusFormatError, match=r"line 3.*line 1"):
        load_corpus(path)


def test_empty_file_is_empty_corpus(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("")
    corpus = load_corpus(path)
    assert len(corpus) == 0


@pytest.mark.parametrize("line,fragment", [
    ("not json", "line 1"),
    ('["list"]', "not an object"),
    ('{"id": "A", "title": "", "text": "x"}', "links"),
    ('{"id": "", "title": "", "text": "x", "links": []}', "id"),
    ('{"id": "A", "title": "", "text": "   ", "links": []}', "empty"),
    ('{"id": "A", "title": "", "text": "x", "links": [1]}', "links"),
    ('{"id": "A", "title": 3, "text": "x", "links": []}', "title"),
])
def test_malformed_lines(tmp_path, line, fragment):
    path = tmp_path / "c.jsonl"
    path.write_text(line + "\n")
    with pytest.raises(CorpusFormatError, match=fragment):
        load_corpus(path)


def test_unknown_keys_counted(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "x", "links": [], "extra": 1, "more": 2},
    ])
    corpus = load_corpus(path)
    assert corpus.load_report.unknown_keys_ignored == 2


def test_whitespace_normalization(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "  a\t\tb\n c  ", "links": []},
    ])
    assert load_corpus(path)["A"].text == "a b c"
    assert normalize_whitespace(" x \n y ") == "x y"


def test_unresolved_targets_survive_ingestion(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "", "text": "x", "links": ["missing"]},
    ])
    assert load_corpus(path)["A"].outlinks == ("missing",)


def test_deterministic_load(tmp_path):
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "t", "text": "a b", "links": ["B"]},
        {"id": "B", "title": "", "text": "c", "links": []},
    ])
    assert load_corpus(path) == load_corpus(path)


_ids = st.text(alphabet="abcdefgh", min_size=1, max_size=6)
_texts = st.text(alphabet="xyz \t", min_size=1, max_size=30).filter(lambda t: t.strip())


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(_ids, st.tuples(_texts, st.lists(_ids, max_size=4)), min_size=1, max_size=8))
def test_roundtrip(tmp_path_factory, docs):
    tmp = tmp_path_factory.mktemp("rt")
    records = [
        {"id": doc_id, "title": "", "text": text, "links": links}
        for doc_id, (text, links) in docs.items()
    ]
    original = tmp / "orig.jsonl"
    write_jsonl(original, records)
    corpus = load_corpus(original)
    saved = tmp / "saved.jsonl"
    save_corpus(corpus, saved)
    assert load_corpus(saved) == corpus


def test_roundtrip_preserves_bytes_after_one_pass(tmp_path):
    # Saving an already-normalized corpus twice produces identical bytes.
    path = write_jsonl(tmp_path / "c.jsonl", [
        {"id": "A", "title": "t", "text": "a   b", "links": ["B", "B", "A"]},
        {"id": "B", "title": "", "text": "c", "links": []},
    ])
    corpus = load_corpus(path)
    first, second = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    save_corpus(corpus, first)
    save_corpus(load_corpus(first), second)
    assert first.read_bytes() == second.read_bytes()
