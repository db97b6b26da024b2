"""Paired synthetic experiment: does cross-document context add knowledge?

The corpus holds M document pairs (P_i, Q_i) joined by mutual links. All
documents are built from the same small set of shared filler templates:
each document contains every template exactly once (order shuffled), and
its only distinctive token is a marker written into a fixed slot of every
segment - trigger t_i throughout P_i, bridge b_i throughout Q_i. The
symmetry is the point: filler context is identical across documents, so a
masked marker slot cannot be answered from the surrounding text or from
memorized document fragments. The only evidence is the marker of the
*other* segment in the pair - an exact copy for contiguous instances, and
the paired marker for linked instances, which requires knowing the t/b
association that only linked sampling ever places in one context.

Two models with identical budgets train on streams that differ only in the
option mix (standard thirds vs. no linked option). The linked-trained
model should (a) classify held-out segment relations accurately and
(b) assign far lower masked-token loss to bridge slots whose trigger sits
in the other segment; the no-link model can do no better than spreading
mass over all markers.

The instance streams come from the data engine's CLI; this module only
writes corpus/vocab files and reads record files back.
"""

from __future__ import annotations

import json
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .evaluate import evaluate_bridge_tokens, evaluate_drp_accuracy
from .records import Instance, read_instances, read_vocab
from .train import TrainerConfig, train

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")


@dataclass
class BridgedCorpus:
    corpus_path: Path
    vocab_path: Path
    graph_path: Path
    doc_words: dict[str, list[str]]
    fillers: list[str]
    triggers: list[str]
    bridges: list[str]
    pair_ids: list[tuple[str, str]]
    segment_len: int
    marker_slots: tuple[int, int]


def build_bridged_corpus(workdir: Path, n_pairs: int = 16, n_fillers: int = 40,
                         segment_len: int = 30, n_templates: int = 12,
                         seed: int = 0) -> BridgedCorpus:
    """Write the synthetic corpus + vocab.

    Every document is the same n_templates filler templates (one segment
    each, order shuffled per document) with the document's marker written
    into the two fixed marker slots of every segment, so context carries no
    marker information by construction. Two slots give the same redundancy
    real text has: one marker can be lost to masking corruption and the
    segment's identity is still decidable."""
    workdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    fillers = [f"w{i:03d}" for i in range(n_fillers)]
    triggers = [f"t{i:03d}" for i in range(n_pairs)]
    bridges = [f"b{i:03d}" for i in range(n_pairs)]
    marker_slots = (segment_len // 3, (2 * segment_len) // 3)
    templates = [[fillers[int(rng.integers(n_fillers))] for _ in range(segment_len)]
                 for _ in range(n_templates)]

    def doc_text(marker: str) -> list[str]:
        words: list[str] = []
        for template_idx in rng.permutation(n_templates):
            segment = list(templates[template_idx])
            for slot in marker_slots:
                segment[slot] = marker
            words.extend(segment)
        return words

    doc_words: dict[str, list[str]] = {}
    records = []
    pair_ids = []
    for i in range(n_pairs):
        p_id, q_id = f"p{i:03d}", f"q{i:03d}"
        pair_ids.append((p_id, q_id))
        for doc_id, marker, target in ((p_id, triggers[i], q_id), (q_id, bridges[i], p_id)):
            words = doc_text(marker)
            doc_words[doc_id] = words
            records.append({"id": doc_id, "title": doc_id, "text": " ".join(words),
                            "links": [target]})

    corpus_path = workdir / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    vocab_path = workdir / "vocab.txt"
    vocab_path.write_text("\n".join([*SPECIALS, *fillers, *triggers, *bridges]) + "\n",
                          encoding="utf-8")
    return BridgedCorpus(corpus_path=corpus_path, vocab_path=vocab_path,
                         graph_path=workdir / "graph.tsv", doc_words=doc_words,
                         fillers=fillers, triggers=triggers, bridges=bridges,
                         pair_ids=pair_ids, segment_len=segment_len,
                         marker_slots=marker_slots)


def run_data_engine(*args: str) -> None:
    """Invoke the data engine CLI in a subprocess."""
    result = subprocess.run([sys.executable, "-m", "docmix", *args],
                            capture_output=True, text=True)
    if result.returncode != 0:
        raise RuntimeError(f"docmix {' '.join(args)} failed: {result.stderr.strip()}")


def make_instance_files(setup: BridgedCorpus, count: int, max_seq_len: int,
                        seed: int, workdir: Path) -> dict[str, Path]:
    """Generate the linked-mix, no-link, and held-out instance streams."""
    run_data_engine("build-graph", "--mode", "hyperlink",
                    "--corpus", str(setup.corpus_path), "--out", str(setup.graph_path))
    paths = {}
    jobs = (
        ("mix", "1,1,1", seed, count),
        ("nolink", "1,1,0", seed, count),
        ("heldout", "1,1,1", seed + 1, max(1000, count // 8)),
    )
    for name, mix, job_seed, job_count in jobs:
        out = workdir / f"instances_{name}.jsonl"
        run_data_engine("make-instances", "--corpus", str(setup.corpus_path),
                        "--vocab", str(setup.vocab_path), "--graph", str(setup.graph_path),
                        "--out", str(out), "--count", str(job_count),
                        "--max-seq-len", str(max_seq_len), "--mix", mix,
                        "--seed", str(job_seed))
        paths[name] = out
    return paths


def make_bridge_eval_instances(setup: BridgedCorpus, vocab,
                               probes_per_pair: int = 12, seed: int = 777) -> list[Instance]:
    """Probes of shape [CLS] trigger-segment [SEP] bridge-segment [SEP] built
    from real corpus segments, with both bridge slots masked.

    By corpus symmetry the visible filler context says nothing about which
    marker fills the slots, and no bridge copy is visible anywhere, so the
    trigger in segment A is the only evidence."""
    token_of = vocab.token_to_id
    length = setup.segment_len
    rng = np.random.default_rng(seed)
    probes = []
    for (p_id, q_id), (trigger, bridge) in zip(setup.pair_ids,
                                               zip(setup.triggers, setup.bridges)):
        p_words = setup.doc_words[p_id]
        q_words = setup.doc_words[q_id]
        n_segments = len(p_words) // length
        for _ in range(probes_per_pair):
            a_start = int(rng.integers(n_segments)) * length
            b_start = int(rng.integers(n_segments)) * length
            a_tokens = [token_of[w] for w in p_words[a_start:a_start + length]]
            b_tokens = [token_of[w] for w in q_words[b_start:b_start + length]]
            positions, labels = [], []
            for slot in setup.marker_slots:
                assert a_tokens[slot] == token_of[trigger]
                assert b_tokens[slot] == token_of[bridge]
                b_tokens[slot] = vocab.mask_id
                positions.append(length + 2 + slot)
                labels.append(token_of[bridge])
            token_ids = [vocab.cls_id] + a_tokens + [token_of["[SEP]"]] \
                + b_tokens + [token_of["[SEP]"]]
            first_sep = length + 1
            type_ids = [0] * (first_sep + 1) + [1] * (length + 1)
            probes.append(Instance(token_ids=token_ids, type_ids=type_ids,
                                   mlm_positions=positions, mlm_labels=labels,
                                   drp_label=2))
    return probes


@dataclass
class ExperimentResult:
    drp_accuracy: float
    bridge_loss_mix: float
    bridge_loss_nolink: float
    metrics_mix: list[dict] = field(repr=False, default_factory=list)
    metrics_nolink: list[dict] = field(repr=False, default_factory=list)


def run_bridged_experiment(workdir, n_pairs: int = 12, count: int = 48_000,
                           max_seq_len: int = 32, total_steps: int = 6000,
                           batch_size: int = 32, peak_lr: float = 1e-3,
                           dropout: float = 0.0, seed: int = 0) -> ExperimentResult:
    """Train the linked-mix and no-link models on equal budgets and compare."""
    workdir = Path(workdir)
    # Template length matches the engine's segment target so document
    # segmentation lands exactly on template boundaries.
    segment_len = (max_seq_len - 3) // 2
    setup = build_bridged_corpus(workdir, n_pairs=n_pairs, segment_len=segment_len,
                                 seed=seed)
    paths = make_instance_files(setup, count=count, max_seq_len=max_seq_len,
                                seed=seed, workdir=workdir)
    vocab = read_vocab(setup.vocab_path)
    # Dropout defaults to zero here: with exactly one informative marker per
    # segment, dropping it breaks the only signal path and stalls learning.
    config = TrainerConfig(vocab_size=vocab.size, max_seq_len=max_seq_len,
                           total_steps=total_steps, warmup_steps=total_steps // 10,
                           batch_size=batch_size, peak_lr=peak_lr, seed=seed,
                           dropout=dropout, pad_id=vocab.pad_id)
    model_mix, metrics_mix = train(config, read_instances(paths["mix"]),
                                   metrics_path=workdir / "metrics_mix.jsonl",
                                   checkpoint_path=workdir / "model_mix.pt")
    model_nolink, metrics_nolink = train(config, read_instances(paths["nolink"]),
                                         metrics_path=workdir / "metrics_nolink.jsonl",
                                         checkpoint_path=workdir / "model_nolink.pt")
    heldout = read_instances(paths["heldout"])
    accuracy = evaluate_drp_accuracy(model_mix, heldout, pad_id=vocab.pad_id)
    probes = make_bridge_eval_instances(setup, vocab)
    bridge_ids = [vocab.token_to_id[b] for b in setup.bridges]
    loss_mix = evaluate_bridge_tokens(model_mix, probes, bridge_ids, pad_id=vocab.pad_id)
    loss_nolink = evaluate_bridge_tokens(model_nolink, probes, bridge_ids, pad_id=vocab.pad_id)
    return ExperimentResult(drp_accuracy=accuracy, bridge_loss_mix=loss_mix,
                            bridge_loss_nolink=loss_nolink,
                            metrics_mix=metrics_mix, metrics_nolink=metrics_nolink)
