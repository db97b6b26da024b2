"""Corpus ingestion: line-delimited document records with outgoing links.

Each line of a corpus file is a JSON object with keys ``id`` (string),
``title`` (string), ``text`` (string) and ``links`` (array of strings).
Unknown keys are ignored (counted in the load report). Self-links and
duplicate outlinks are removed at load time; link targets that do not
exist in the corpus are kept here and only resolved when a graph is built.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

REQUIRED_KEYS = ("id", "title", "text", "links")


class CorpusFormatError(ValueError):
    """Raised for malformed corpus files; message names the offending line."""


@dataclass(frozen=True)
class Document:
    id: str
    title: str
    text: str
    outlinks: tuple[str, ...]


@dataclass
class LoadReport:
    documents: int = 0
    self_links_dropped: int = 0
    duplicate_links_dropped: int = 0
    unknown_keys_ignored: int = 0


@dataclass
class Corpus:
    documents: list[Document]
    id_index: dict[str, int]
    load_report: LoadReport = field(default_factory=LoadReport, compare=False)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, doc_id: str) -> Document:
        return self.documents[self.id_index[doc_id]]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.id_index

    @property
    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]


def normalize_whitespace(text: str) -> str:
    """Collapse all whitespace runs to single spaces and strip the ends."""
    return " ".join(text.split())


def _parse_record(raw: str, lineno: int, report: LoadReport) -> Document:
    try:
        record = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(record, dict):
        raise CorpusFormatError(f"line {lineno}: record is not an object")

    for key in REQUIRED_KEYS:
        if key not in record:
            raise CorpusFormatError(f"line {lineno}: missing key {key!r}")
    report.unknown_keys_ignored += sum(1 for k in record if k not in REQUIRED_KEYS)

    doc_id = record["id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusFormatError(f"line {lineno}: 'id' must be a nonempty string")
    title = record["title"]
    if not isinstance(title, str):
        raise CorpusFormatError(f"line {lineno}: 'title' must be a string")
    text = record["text"]
    if not isinstance(text, str):
        raise CorpusFormatError(f"line {lineno}: 'text' must be a string")
    text = normalize_whitespace(text)
    if not text:
        raise CorpusFormatError(f"line {lineno}: 'text' is empty after whitespace normalization")
    links = record["links"]
    if not isinstance(links, list) or any(not isinstance(t, str) for t in links):
        raise CorpusFormatError(f"line {lineno}: 'links' must be an array of strings")

    outlinks = []
    seen = set()
    for target in links:
        if target == doc_id:
            report.self_links_dropped += 1
        elif target in seen:
            report.duplicate_links_dropped += 1
        else:
            seen.add(target)
            outlinks.append(target)
    return Document(id=doc_id, title=title, text=text, outlinks=tuple(outlinks))


def load_corpus(path) -> Corpus:
    """Load a line-delimited corpus file, preserving file order.

    Raises CorpusFormatError naming the line number for malformed records
    and both line numbers for duplicate document ids. An empty file yields
    an empty corpus.
    """
    report = LoadReport()
    documents: list[Document] = []
    id_lines: dict[str, int] = {}
    id_index: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            doc = _parse_record(raw, lineno, report)
            if doc.id in id_lines:
                raise CorpusFormatError(
                    f"line {lineno}: duplicate id {doc.id!r} (first seen on line {id_lines[doc.id]})"
                )
            id_lines[doc.id] = lineno
            id_index[doc.id] = len(documents)
            documents.append(doc)
    report.documents = len(documents)
    return Corpus(documents=documents, id_index=id_index, load_report=report)


def save_corpus(corpus: Corpus, path) -> None:
    """Write the corpus back out in the line-delimited record schema."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in corpus.documents:
            record = {
                "id": doc.id,
                "title": doc.title,
                "text": doc.text,
                "links": list(doc.outlinks),
            }
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")
