"""Exact summaries of instance streams and graphs.

All counts are exhaustive (no sampling). Replacement-split classification
needs the [MASK] id: at a masked position, the token is [MASK] (masked),
equal to its label (kept), or anything else (randomized). Without a
vocabulary the split is reported as absent, as it is for streams with no
masks at all.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .corpus import Corpus
from .graph import DocumentGraph
from .instances import TrainingInstance


@dataclass
class StreamStats:
    instance_count: int
    option_counts: dict[int, int]
    option_frequencies: dict[int, float]
    maskable_total: int
    masked_total: int
    mask_rate: Optional[float]
    replacement_split: Optional[dict[str, float]]
    replacement_counts: Optional[dict[str, int]]
    length_histogram: dict[int, int] = field(default_factory=dict)
    partner_in_degree_histogram: dict[int, int] = field(default_factory=dict)


def summarize_stream(instances: Iterable[TrainingInstance],
                     corpus: Optional[Corpus] = None,
                     graph: Optional[DocumentGraph] = None,
                     mask_id: Optional[int] = None) -> StreamStats:
    """Aggregate exact statistics over a stream of instances."""
    count = 0
    option_counts = Counter({0: 0, 1: 0, 2: 0})
    lengths: Counter = Counter()
    partner_degrees: Counter = Counter()
    maskable_total = 0
    masked_total = 0
    replaced = Counter(mask=0, random=0, keep=0)
    for instance in instances:
        count += 1
        option_counts[instance.drp_label] += 1
        lengths[len(instance.token_ids)] += 1
        maskable_total += max(len(instance.token_ids) - 3, 0)
        masked_total += len(instance.mlm_positions)
        if mask_id is not None:
            for pos, label in zip(instance.mlm_positions, instance.mlm_labels):
                token = instance.token_ids[pos]
                if token == mask_id:
                    replaced["mask"] += 1
                elif token == label:
                    replaced["keep"] += 1
                else:
                    replaced["random"] += 1
        if graph is not None and instance.drp_label == 2:
            partner_degrees[graph.in_degree.get(instance.partner_doc, 0)] += 1

    frequencies = {label: (option_counts[label] / count if count else 0.0)
                   for label in (0, 1, 2)}
    mask_rate = masked_total / maskable_total if maskable_total else None
    split = None
    split_counts = None
    if mask_id is not None and masked_total:
        split_counts = dict(replaced)
        split = {kind: replaced[kind] / masked_total for kind in ("mask", "random", "keep")}
    return StreamStats(
        instance_count=count,
        option_counts=dict(option_counts),
        option_frequencies=frequencies,
        maskable_total=maskable_total,
        masked_total=masked_total,
        mask_rate=mask_rate,
        replacement_split=split,
        replacement_counts=split_counts,
        length_histogram=dict(sorted(lengths.items())),
        partner_in_degree_histogram=dict(sorted(partner_degrees.items())),
    )


def graph_stats(graph: DocumentGraph) -> dict:
    """Node/edge counts and in-degree distribution quantiles."""
    degrees = np.array([graph.in_degree[node] for node in graph.node_ids], dtype=float)
    if len(degrees) == 0:
        quantiles = {"min": 0, "p25": 0, "median": 0, "p75": 0, "max": 0, "mean": 0.0}
    else:
        quantiles = {
            "min": int(degrees.min()),
            "p25": float(np.percentile(degrees, 25)),
            "median": float(np.percentile(degrees, 50)),
            "p75": float(np.percentile(degrees, 75)),
            "max": int(degrees.max()),
            "mean": float(degrees.mean()),
        }
    return {
        "mode": graph.edge_mode,
        "nodes": len(graph.node_ids),
        "edges": graph.edge_count,
        "in_degree": quantiles,
    }


def stats_record(stats: StreamStats) -> dict:
    """Machine-readable form of StreamStats (JSON-serializable)."""
    return {
        "instance_count": stats.instance_count,
        "option_counts": {str(k): v for k, v in stats.option_counts.items()},
        "option_frequencies": {str(k): v for k, v in stats.option_frequencies.items()},
        "maskable_total": stats.maskable_total,
        "masked_total": stats.masked_total,
        "mask_rate": stats.mask_rate,
        "replacement_split": stats.replacement_split,
        "replacement_counts": stats.replacement_counts,
        "length_histogram": {str(k): v for k, v in stats.length_histogram.items()},
        "partner_in_degree_histogram": {str(k): v for k, v in stats.partner_in_degree_histogram.items()},
    }


def render_stats(stats: StreamStats) -> str:
    """Human-readable rendering of a stream summary."""
    lines = [f"instances: {stats.instance_count}"]
    names = {0: "contiguous", 1: "random", 2: "linked"}
    for label in (0, 1, 2):
        lines.append(f"  {names[label]:<11} {stats.option_counts.get(label, 0):>8} "
                     f"({stats.option_frequencies.get(label, 0.0):.4f})")
    if stats.mask_rate is not None:
        lines.append(f"mask rate: {stats.masked_total}/{stats.maskable_total} = {stats.mask_rate:.4f}")
    else:
        lines.append("mask rate: n/a (no maskable tokens)")
    if stats.replacement_split is not None:
        split = stats.replacement_split
        lines.append(f"replacements: mask={split['mask']:.4f} random={split['random']:.4f} "
                     f"keep={split['keep']:.4f}")
    else:
        lines.append("replacements: n/a")
    if stats.length_histogram:
        low, high = min(stats.length_histogram), max(stats.length_histogram)
        lines.append(f"lengths: {low}..{high} over {len(stats.length_histogram)} distinct values")
    if stats.partner_in_degree_histogram:
        lines.append("linked partner in-degree histogram: "
                     + ", ".join(f"{d}:{c}" for d, c in stats.partner_in_degree_histogram.items()))
    return "\n".join(lines)
