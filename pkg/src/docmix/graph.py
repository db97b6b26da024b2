"""Directed document graphs: hyperlink edges, TF-IDF top-k edges, random edges.

All three builders produce the same DocumentGraph shape (no self-loops, no
duplicate edges, per-node in-degree on the final edge set) so downstream
sampling works identically in every mode. Graphs persist as a one-line
header ``#mode=<edge_mode> nodes=<N> edges=<E>`` followed by
``source<TAB>target`` lines sorted by (source, target).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .corpus import Corpus

EDGE_MODES = ("hyperlink", "tfidf", "random")
DEFAULT_TFIDF_K = 5

_TERM_RE = re.compile(r"[^\W_]+", re.UNICODE)
_HEADER_RE = re.compile(r"^#mode=(\w+) nodes=(\d+) edges=(\d+)$")


class GraphFormatError(ValueError):
    """Raised for malformed graph files."""


@dataclass
class GraphBuildReport:
    dangling_links_dropped: int = 0
    zero_vector_docs: int = 0
    out_degree_clamped: bool = False


@dataclass
class DocumentGraph:
    node_ids: list[str]
    out_edges: dict[str, list[str]]
    in_degree: dict[str, int]
    edge_mode: str
    report: GraphBuildReport = field(default_factory=GraphBuildReport, compare=False)

    @property
    def edge_count(self) -> int:
        return sum(len(succ) for succ in self.out_edges.values())

    def successors(self, node: str) -> list[str]:
        return self.out_edges[node]


def _finish(node_ids: list[str], out_edges: dict[str, list[str]], mode: str,
            report: GraphBuildReport) -> DocumentGraph:
    in_degree = {node: 0 for node in node_ids}
    for succ in out_edges.values():
        for target in succ:
            in_degree[target] += 1
    return DocumentGraph(node_ids=node_ids, out_edges=out_edges,
                         in_degree=in_degree, edge_mode=mode, report=report)


def build_hyperlink_graph(corpus: Corpus) -> DocumentGraph:
    """One directed edge per resolvable outlink; dangling targets dropped and counted."""
    report = GraphBuildReport()
    node_ids = corpus.ids
    out_edges: dict[str, list[str]] = {}
    for doc in corpus:
        succ = []
        for target in doc.outlinks:
            if target in corpus:
                succ.append(target)
            else:
                report.dangling_links_dropped += 1
        out_edges[doc.id] = succ
    return _finish(node_ids, out_edges, "hyperlink", report)


@dataclass
class TfIdfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_vectors: sp.csr_matrix  # rows L2-normalized (zero rows for docs with no terms)
    doc_ids: list[str]
    zero_vector_docs: list[str] = field(default_factory=list)


def extract_terms(text: str) -> list[str]:
    """Lowercased word terms: maximal alphanumeric runs (underscore excluded)."""
    return _TERM_RE.findall(text.lower())


def fit_tfidf(corpus: Corpus) -> TfIdfModel:
    """Fit tf-idf vectors over the corpus.

    Term frequency is the raw count, idf(t) = ln((1+N)/(1+df(t))) + 1, and
    each document vector is L2-normalized. Documents with no extractable
    terms get the zero vector and are flagged.
    """
    if len(corpus) == 0:
        raise ValueError("fit_tfidf requires a nonempty corpus")
    doc_terms = []
    df: dict[str, int] = {}
    for doc in corpus:
        counts: dict[str, int] = {}
        for term in extract_terms(doc.text):
            counts[term] = counts.get(term, 0) + 1
        doc_terms.append(counts)
        for term in counts:
            df[term] = df.get(term, 0) + 1

    vocabulary = {term: col for col, term in enumerate(sorted(df))}
    n_docs = len(corpus)
    idf = np.empty(len(vocabulary))
    for term, col in vocabulary.items():
        idf[col] = np.log((1.0 + n_docs) / (1.0 + df[term])) + 1.0

    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    zero_docs: list[str] = []
    for doc, counts in zip(corpus, doc_terms):
        cols = sorted(vocabulary[t] for t in counts)
        weights = np.array([counts[term] for term in sorted(counts, key=vocabulary.get)],
                           dtype=float)
        if len(cols) == 0:
            zero_docs.append(doc.id)
        else:
            weights *= idf[cols]
            norm = float(np.linalg.norm(weights))
            weights /= norm
            indices.extend(cols)
            data.extend(weights)
        indptr.append(len(indices))
    matrix = sp.csr_matrix((data, indices, indptr), shape=(n_docs, len(vocabulary)))
    return TfIdfModel(vocabulary=vocabulary, idf=idf, doc_vectors=matrix,
                      doc_ids=corpus.ids, zero_vector_docs=zero_docs)


def build_tfidf_graph(corpus: Corpus, model: TfIdfModel, k: int = DEFAULT_TFIDF_K) -> DocumentGraph:
    """Edges from each document to its k most-cosine-similar others.

    Ties break by ascending document id; documents with zero vectors get no
    outgoing edges; k larger than the corpus yields edges to all other
    documents.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if model.doc_ids != corpus.ids:
        raise ValueError("tf-idf model was not fit on this corpus")
    report = GraphBuildReport(zero_vector_docs=len(model.zero_vector_docs))
    node_ids = corpus.ids
    n = len(node_ids)
    k_eff = min(k, n - 1)
    zero_docs = set(model.zero_vector_docs)

    # Candidates pre-sorted by ascending id; a stable sort on descending
    # similarity then realizes the (-similarity, id) order exactly.
    id_order = np.array(sorted(range(n), key=node_ids.__getitem__))
    matrix_t = model.doc_vectors.T.tocsc()

    out_edges: dict[str, list[str]] = {}
    for i, node in enumerate(node_ids):
        if node in zero_docs or k_eff <= 0:
            out_edges[node] = []
            continue
        row = (model.doc_vectors[i] @ matrix_t).toarray().ravel()
        candidates = id_order[id_order != i]
        ranked = np.argsort(-row[candidates], kind="stable")
        out_edges[node] = [node_ids[candidates[r]] for r in ranked[:k_eff]]
    return _finish(node_ids, out_edges, "tfidf", report)


def build_random_graph(corpus: Corpus, out_degree: int, seed: int) -> DocumentGraph:
    """Give every node out_degree distinct random successors (never itself)."""
    if out_degree < 1:
        raise ValueError("out_degree must be >= 1")
    n = len(corpus)
    if n < 2:
        raise ValueError("random graph requires a corpus of size >= 2")
    report = GraphBuildReport()
    degree = out_degree
    if degree >= n:
        degree = n - 1
        report.out_degree_clamped = True
    node_ids = corpus.ids
    rng = np.random.default_rng(seed)
    out_edges: dict[str, list[str]] = {}
    for i, node in enumerate(node_ids):
        others = np.delete(np.arange(n), i)
        picks = rng.choice(others, size=degree, replace=False)
        out_edges[node] = [node_ids[j] for j in picks]
    return _finish(node_ids, out_edges, "random", report)


def save_graph(graph: DocumentGraph, path) -> None:
    """Persist as header plus source<TAB>target lines sorted by (source, target)."""
    edges = sorted((src, dst) for src, succ in graph.out_edges.items() for dst in succ)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#mode={graph.edge_mode} nodes={len(graph.node_ids)} edges={len(edges)}\n")
        for src, dst in edges:
            fh.write(f"{src}\t{dst}\n")


def load_graph(path, corpus: Corpus) -> DocumentGraph:
    """Load a persisted graph, resolving nodes against the given corpus."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        match = _HEADER_RE.match(header)
        if not match:
            raise GraphFormatError(f"line 1: bad header {header!r}")
        mode, n_nodes, n_edges = match.group(1), int(match.group(2)), int(match.group(3))
        if mode not in EDGE_MODES:
            raise GraphFormatError(f"line 1: unknown edge mode {mode!r}")
        if n_nodes != len(corpus):
            raise GraphFormatError(
                f"graph has {n_nodes} nodes but corpus has {len(corpus)} documents"
            )
        out_edges: dict[str, list[str]] = {doc_id: [] for doc_id in corpus.ids}
        count = 0
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: expected source<TAB>target")
            src, dst = parts
            if src not in corpus or dst not in corpus:
                raise GraphFormatError(f"line {lineno}: unknown node in edge {src!r} -> {dst!r}")
            out_edges[src].append(dst)
            count += 1
        if count != n_edges:
            raise GraphFormatError(f"header says {n_edges} edges but file has {count}")
    return _finish(corpus.ids, out_edges, mode, GraphBuildReport())
