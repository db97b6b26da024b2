"""Segment-pair training instances: sampling, packing, masking, labeling.

An instance is ``[CLS] A [SEP] B [SEP]`` where segment A is an anchor
sampled from the corpus and segment B is, per draw, the next segment of
the same document (contiguous), a segment of a uniformly random other
document (random), or a segment of a document one edge away on the active
graph (linked), sampled with probability inversely proportional to the
target's global in-degree. The relation label records which option was
realized (contiguous=0, random=1, linked=2). Masking follows the
15% / 80-10-10 scheme.

Every instance index gets its own generator seeded by (seed, index), so a
stream is a pure function of (corpus, graph, config) regardless of worker
count or execution order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .corpus import Corpus, Document
from .graph import DocumentGraph
from .wordpiece import Vocabulary, tokenize

OPTIONS = ("contiguous", "random", "linked")
DRP_LABELS = {"contiguous": 0, "random": 1, "linked": 2}

MIN_SEGMENT_TOKENS = 16
_MAX_BUILD_ATTEMPTS = 10_000

RECORD_KEYS = ("token_ids", "type_ids", "mlm_positions", "mlm_labels",
               "drp_label", "anchor_doc", "partner_doc", "option")


@dataclass(frozen=True)
class MixConfig:
    p_contiguous: float = 1.0 / 3.0
    p_random: float = 1.0 / 3.0
    p_linked: float = 1.0 / 3.0
    max_seq_len: int = 512
    seed: int = 0
    mask_rate: float = 0.15
    replace_mask: float = 0.8
    replace_random: float = 0.1
    keep: float = 0.1

    def __post_init__(self) -> None:
        probs = (self.p_contiguous, self.p_random, self.p_linked)
        if min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError("option probabilities must be nonnegative and sum to 1")
        fracs = (self.replace_mask, self.replace_random, self.keep)
        if min(fracs) < 0 or abs(sum(fracs) - 1.0) > 1e-9:
            raise ValueError("replacement fractions must be nonnegative and sum to 1")
        if not 0.0 <= self.mask_rate <= 1.0:
            raise ValueError("mask_rate must be in [0, 1]")
        if self.max_seq_len < 5:
            raise ValueError("max_seq_len must be >= 5 (room for [CLS], two [SEP], two tokens)")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    @classmethod
    def from_weights(cls, weights: tuple[float, float, float], **kwargs) -> "MixConfig":
        """Build from three nonnegative weights, normalized to sum 1."""
        total = sum(weights)
        if min(weights) < 0 or total <= 0:
            raise ValueError("mix weights must be nonnegative with a positive sum")
        return cls(p_contiguous=weights[0] / total, p_random=weights[1] / total,
                   p_linked=weights[2] / total, **kwargs)

    @property
    def target_segment_len(self) -> int:
        return (self.max_seq_len - 3) // 2


@dataclass(frozen=True)
class SegmentPair:
    anchor_doc: str
    partner_doc: str
    anchor_span: tuple[int, int]
    partner_span: tuple[int, int]
    option: str


@dataclass
class TrainingInstance:
    token_ids: list[int]
    type_ids: list[int]
    mlm_positions: list[int]
    mlm_labels: list[int]
    drp_label: int
    anchor_doc: str
    partner_doc: str
    option: str
    pair: Optional[SegmentPair] = field(default=None, compare=False, repr=False)


def segment_spans(n_tokens: int, target_len: int) -> list[tuple[int, int]]:
    """Split a token stream into consecutive spans of exactly target_len.

    A final remainder shorter than MIN_SEGMENT_TOKENS is merged into the
    previous span; a document shorter than MIN_SEGMENT_TOKENS is a single
    span.
    """
    if target_len < 1:
        raise ValueError("target_len must be >= 1")
    if n_tokens <= 0:
        return []
    if n_tokens < MIN_SEGMENT_TOKENS:
        return [(0, n_tokens)]
    spans = [(start, start + target_len)
             for start in range(0, n_tokens - target_len + 1, target_len)]
    covered = spans[-1][1] if spans else 0
    remainder = n_tokens - covered
    if remainder >= MIN_SEGMENT_TOKENS or not spans:
        spans.append((covered, n_tokens))
    elif remainder > 0:
        spans[-1] = (spans[-1][0], n_tokens)
    return spans


def segment_document(doc: Document, vocab: Vocabulary, target_len: int,
                     lowercase: bool = True) -> list[tuple[int, int]]:
    """Tokenize a document and return its segment spans."""
    return segment_spans(len(tokenize(doc.text, vocab, lowercase=lowercase)), target_len)


def choose_option(mix: MixConfig, rng: np.random.Generator, linkless: bool = False) -> str:
    """Draw an option; for linkless corpora p_linked splits evenly onto the others."""
    p_c, p_r, p_l = mix.p_contiguous, mix.p_random, mix.p_linked
    if linkless:
        p_c, p_r, p_l = p_c + p_l / 2.0, p_r + p_l / 2.0, 0.0
    u = rng.random() * (p_c + p_r + p_l)
    if u < p_c:
        return "contiguous"
    if u < p_c + p_r:
        return "random"
    return "linked"


def sample_linked_document(graph: DocumentGraph, anchor: str,
                           rng: np.random.Generator) -> str:
    """Pick a successor of anchor with probability proportional to 1/in-degree."""
    successors = graph.out_edges[anchor]
    if not successors:
        raise ValueError(f"document {anchor!r} has no outlinks")
    weights = [1.0 / graph.in_degree[succ] for succ in successors]
    u = rng.random() * sum(weights)
    acc = 0.0
    for succ, weight in zip(successors, weights):
        acc += weight
        if u < acc:
            return succ
    return successors[-1]


def apply_mlm_masking(token_ids: list[int], maskable_positions, mix: MixConfig,
                      vocab: Vocabulary, rng: np.random.Generator
                      ) -> tuple[list[int], list[int], list[int]]:
    """Select round(mask_rate * |maskable|) positions (min 1) and corrupt them.

    Per selected position: replace_mask -> [MASK], replace_random -> a
    uniform non-special vocab id, keep -> unchanged. Returns the masked
    token list, the sorted selected positions, and the original ids there.
    No maskable positions yields an empty mask set.
    """
    maskable = np.asarray(maskable_positions, dtype=np.int64)
    m = len(maskable)
    if m == 0:
        return list(token_ids), [], []
    n_mask = max(1, math.floor(mix.mask_rate * m + 0.5))
    n_mask = min(n_mask, m)
    selected = rng.choice(m, size=n_mask, replace=False)
    positions = np.sort(maskable[selected])
    out = list(token_ids)
    labels = []
    nonspecial = vocab.nonspecial_ids
    for pos in positions:
        labels.append(token_ids[pos])
        u = rng.random()
        if u < mix.replace_mask:
            out[pos] = vocab.mask_id
        elif u < mix.replace_mask + mix.replace_random:
            out[pos] = nonspecial[rng.integers(len(nonspecial))]
    return out, [int(p) for p in positions], labels


class InstanceGenerator:
    """Builds training instances from a corpus, a graph, and a vocabulary.

    Documents are tokenized and segmented once up front; afterwards the
    generator is read-only and safe to drive from multiple threads.
    """

    def __init__(self, corpus: Corpus, graph: Optional[DocumentGraph],
                 vocab: Vocabulary, mix: MixConfig, lowercase: bool = True):
        if len(corpus) == 0:
            raise ValueError("cannot generate instances from an empty corpus")
        self.corpus = corpus
        self.graph = graph
        self.vocab = vocab
        self.mix = mix
        self.linkless = graph is None or graph.edge_count == 0
        self.doc_ids = corpus.ids
        self.doc_tokens = [tokenize(doc.text, vocab, lowercase=lowercase) for doc in corpus]
        target = mix.target_segment_len
        self.doc_spans = [segment_spans(len(toks), target) for toks in self.doc_tokens]
        self.multi_segment_docs = any(len(spans) >= 2 for spans in self.doc_spans)
        self.discarded = 0

    def _linked_ok(self, anchor_idx: int) -> bool:
        if self.linkless:
            return False
        return len(self.graph.out_edges[self.doc_ids[anchor_idx]]) > 0

    def _redraw(self, weights: dict[str, float], feasible: dict[str, bool],
                rng: np.random.Generator, structural: bool) -> Optional[str]:
        """Redraw among feasible options with renormalized probabilities.

        When every feasible option has zero configured weight: a structural
        redraw (the drawn option is impossible for this corpus, so retrying
        cannot help) falls back to a uniform choice over the feasible
        options; an anchor-level redraw returns None so the caller resamples
        the anchor instead, which preserves the configured mix.
        """
        live = {option: weights[option] for option in weights if feasible[option]}
        total = sum(live.values())
        if total > 0.0:
            u = rng.random() * total
            acc = 0.0
            for option, weight in live.items():
                acc += weight
                if u < acc:
                    return option
            return next(reversed(live))
        if structural and live:
            options = sorted(live)
            return options[int(rng.integers(len(options)))]
        return None

    def build_pair(self, rng: np.random.Generator) -> SegmentPair:
        """Sample an anchor segment, draw an option, and pick a partner segment.

        Infeasible draws (linked with no outlinks, random in a one-document
        corpus, contiguous when no document has two segments) redraw among
        the feasible options with renormalized probabilities; the realized
        option is what gets recorded.
        """
        mix = self.mix
        n = len(self.doc_ids)
        for _ in range(_MAX_BUILD_ATTEMPTS):
            anchor_idx = int(rng.integers(n))
            seg_idx = int(rng.integers(len(self.doc_spans[anchor_idx])))
            option = choose_option(mix, rng, linkless=self.linkless)

            if option == "linked" and not self._linked_ok(anchor_idx):
                option = self._redraw(
                    {"contiguous": mix.p_contiguous, "random": mix.p_random},
                    {"contiguous": self.multi_segment_docs, "random": n >= 2},
                    rng, structural=False)
            elif option == "random" and n < 2:
                option = self._redraw(
                    {"contiguous": mix.p_contiguous, "linked": mix.p_linked},
                    {"contiguous": self.multi_segment_docs, "linked": self._linked_ok(anchor_idx)},
                    rng, structural=True)
            elif option == "contiguous" and not self.multi_segment_docs:
                option = self._redraw(
                    {"random": mix.p_random, "linked": mix.p_linked},
                    {"random": n >= 2, "linked": self._linked_ok(anchor_idx)},
                    rng, structural=True)
            if option is None:
                continue

            if option == "contiguous":
                while seg_idx + 1 >= len(self.doc_spans[anchor_idx]):
                    anchor_idx = int(rng.integers(n))
                    seg_idx = int(rng.integers(len(self.doc_spans[anchor_idx])))
                anchor_id = self.doc_ids[anchor_idx]
                return SegmentPair(anchor_id, anchor_id,
                                   self.doc_spans[anchor_idx][seg_idx],
                                   self.doc_spans[anchor_idx][seg_idx + 1], "contiguous")
            anchor_id = self.doc_ids[anchor_idx]
            if option == "random":
                partner_idx = int(rng.integers(n - 1))
                if partner_idx >= anchor_idx:
                    partner_idx += 1
            else:
                partner_idx = self.corpus.id_index[sample_linked_document(self.graph, anchor_id, rng)]
            partner_seg = int(rng.integers(len(self.doc_spans[partner_idx])))
            return SegmentPair(anchor_id, self.doc_ids[partner_idx],
                               self.doc_spans[anchor_idx][seg_idx],
                               self.doc_spans[partner_idx][partner_seg], option)
        raise ValueError("no feasible segment pair for this corpus/graph/mix combination")

    def assemble_instance(self, pair: SegmentPair,
                          rng: np.random.Generator) -> Optional[TrainingInstance]:
        """Pack a pair into [CLS] A [SEP] B [SEP], truncate, mask, and label.

        While over budget, the last token of the currently longer segment is
        dropped (segment B on ties). Returns None when truncation empties a
        segment; the caller counts and retries.
        """
        vocab = self.vocab
        a = self.doc_tokens[self.corpus.id_index[pair.anchor_doc]][slice(*pair.anchor_span)]
        b = self.doc_tokens[self.corpus.id_index[pair.partner_doc]][slice(*pair.partner_span)]
        budget = self.mix.max_seq_len - 3
        while len(a) + len(b) > budget:
            if len(a) > len(b):
                a = a[:-1]
            else:
                b = b[:-1]
        if not a or not b:
            return None
        token_ids = [vocab.cls_id] + a + [vocab.sep_id] + b + [vocab.sep_id]
        first_sep = len(a) + 1
        type_ids = [0] * (first_sep + 1) + [1] * (len(b) + 1)
        maskable = np.concatenate([np.arange(1, first_sep),
                                   np.arange(first_sep + 1, len(token_ids) - 1)])
        masked, positions, labels = apply_mlm_masking(token_ids, maskable, self.mix, vocab, rng)
        return TrainingInstance(
            token_ids=masked, type_ids=type_ids, mlm_positions=positions,
            mlm_labels=labels, drp_label=DRP_LABELS[pair.option],
            anchor_doc=pair.anchor_doc, partner_doc=pair.partner_doc,
            option=pair.option, pair=pair,
        )

    def generate(self, index: int) -> TrainingInstance:
        """Build the instance for one stream index with its own sub-generator."""
        rng = np.random.default_rng([self.mix.seed, index])
        for _ in range(_MAX_BUILD_ATTEMPTS):
            instance = self.assemble_instance(self.build_pair(rng), rng)
            if instance is not None:
                return instance
            self.discarded += 1
        raise ValueError("could not assemble a valid instance (all pairs truncated away)")


def generate_stream(corpus: Corpus, graph: Optional[DocumentGraph], vocab: Vocabulary,
                    mix: MixConfig, instance_count: int, workers: int = 1,
                    lowercase: bool = True) -> Iterator[TrainingInstance]:
    """Yield exactly instance_count valid instances in index order.

    Per-index seeding makes the output identical for any worker count.
    """
    if instance_count < 0:
        raise ValueError("instance_count must be >= 0")
    if instance_count == 0:
        return
    gen = InstanceGenerator(corpus, graph, vocab, mix, lowercase=lowercase)
    if workers <= 1:
        for index in range(instance_count):
            yield gen.generate(index)
        return
    chunk = 256
    starts = range(0, instance_count, chunk)

    def run_chunk(start: int) -> list[TrainingInstance]:
        return [gen.generate(i) for i in range(start, min(start + chunk, instance_count))]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for block in pool.map(run_chunk, starts):
            yield from block


def instance_to_record(instance: TrainingInstance) -> dict:
    """Canonical line-record form of an instance (fixed key order)."""
    return {
        "token_ids": [int(t) for t in instance.token_ids],
        "type_ids": [int(t) for t in instance.type_ids],
        "mlm_positions": [int(p) for p in instance.mlm_positions],
        "mlm_labels": [int(t) for t in instance.mlm_labels],
        "drp_label": int(instance.drp_label),
        "anchor_doc": instance.anchor_doc,
        "partner_doc": instance.partner_doc,
        "option": instance.option,
    }


def write_instances(instances: Iterable[TrainingInstance], path) -> int:
    """Write instances as line-delimited records; returns the count written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(json.dumps(instance_to_record(instance), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


class RecordFormatError(ValueError):
    """Raised for malformed instance record files."""


def _record_to_instance(record: dict, lineno: int) -> TrainingInstance:
    if not isinstance(record, dict):
        raise RecordFormatError(f"line {lineno}: record is not an object")
    for key in RECORD_KEYS:
        if key not in record:
            raise RecordFormatError(f"line {lineno}: missing key {key!r}")
    for key in ("token_ids", "type_ids", "mlm_positions", "mlm_labels"):
        value = record[key]
        if not isinstance(value, list) or any(not isinstance(v, int) for v in value):
            raise RecordFormatError(f"line {lineno}: {key!r} must be an array of integers")
    if not isinstance(record["drp_label"], int) or record["drp_label"] not in (0, 1, 2):
        raise RecordFormatError(f"line {lineno}: 'drp_label' must be 0, 1, or 2")
    if record["option"] not in OPTIONS:
        raise RecordFormatError(f"line {lineno}: unknown option {record['option']!r}")
    for key in ("anchor_doc", "partner_doc"):
        if not isinstance(record[key], str):
            raise RecordFormatError(f"line {lineno}: {key!r} must be a string")
    return TrainingInstance(
        token_ids=record["token_ids"], type_ids=record["type_ids"],
        mlm_positions=record["mlm_positions"], mlm_labels=record["mlm_labels"],
        drp_label=record["drp_label"], anchor_doc=record["anchor_doc"],
        partner_doc=record["partner_doc"], option=record["option"],
    )


def read_instances(path) -> list[TrainingInstance]:
    """Read a line-delimited instance file; errors name the line number."""
    instances = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise RecordFormatError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            instances.append(_record_to_instance(record, lineno))
    return instances


def instance_violations(instance: TrainingInstance, vocab: Vocabulary, mix: MixConfig,
                        graph: Optional[DocumentGraph] = None) -> list[str]:
    """Check every structural invariant of one instance; returns violations."""
    problems = []
    ids, types = instance.token_ids, instance.type_ids
    n = len(ids)
    if n > mix.max_seq_len:
        problems.append(f"length {n} exceeds max_seq_len {mix.max_seq_len}")
    if len(types) != n:
        problems.append("type_ids length mismatch")
    if any(t < 0 or t >= vocab.size for t in ids):
        problems.append("token id out of vocabulary range")
    if not ids or ids[0] != vocab.cls_id:
        problems.append("first token is not [CLS]")
    if ids.count(vocab.cls_id) != 1:
        problems.append("expected exactly one [CLS]")
    sep_positions = [i for i, t in enumerate(ids) if t == vocab.sep_id]
    if len(sep_positions) != 2 or sep_positions[-1] != n - 1:
        problems.append("expected exactly two [SEP] with one at the end")
        return problems
    first_sep = sep_positions[0]
    expected_types = [0] * (first_sep + 1) + [1] * (n - first_sep - 1)
    if types != expected_types:
        problems.append("type_ids do not switch to 1 right after the first [SEP]")
    special_positions = {0, first_sep, n - 1}

    positions, labels = instance.mlm_positions, instance.mlm_labels
    if any(positions[i] >= positions[i + 1] for i in range(len(positions) - 1)):
        problems.append("mlm_positions not strictly increasing")
    if any(p in special_positions for p in positions):
        problems.append("mlm_positions index a special token")
    if any(p < 0 or p >= n for p in positions):
        problems.append("mlm_positions out of range")
    maskable = n - 3
    expected_count = min(max(1, math.floor(mix.mask_rate * maskable + 0.5)), maskable) if maskable > 0 else 0
    if len(positions) != expected_count:
        problems.append(f"expected {expected_count} masked positions, found {len(positions)}")
    if len(labels) != len(positions):
        problems.append("mlm_labels length mismatch")
    forbidden = vocab.special_ids - {vocab.unk_id}
    if any(lbl in forbidden or lbl < 0 or lbl >= vocab.size for lbl in labels):
        problems.append("mlm_labels contain structural special tokens")
    for pos, lbl in zip(positions, labels):
        token = ids[pos]
        if token != vocab.mask_id and token != lbl and token in vocab.special_ids:
            problems.append(f"masked position {pos} holds an unexpected special token")

    if instance.option not in OPTIONS or DRP_LABELS.get(instance.option) != instance.drp_label:
        problems.append("drp_label does not encode the option")
    if instance.option == "contiguous":
        if instance.anchor_doc != instance.partner_doc:
            problems.append("contiguous instance spans two documents")
        if instance.pair is not None and instance.pair.partner_span[0] != instance.pair.anchor_span[1]:
            problems.append("contiguous partner span is not adjacent to the anchor span")
    elif instance.anchor_doc == instance.partner_doc:
        problems.append(f"{instance.option} instance stays within one document")
    if instance.option == "linked" and graph is not None:
        if instance.partner_doc not in graph.out_edges.get(instance.anchor_doc, []):
            problems.append("linked instance is not an edge of the active graph")
    return problems
