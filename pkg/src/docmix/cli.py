"""Command-line front door: build-graph, make-instances, stats.

Every run echoes one effective-config line (all resolved parameters
including the seed) to stderr, so any output can be reproduced from its
log line alone. Machine-readable output goes to stdout; reports and
diagnostics go to stderr. Exit status is 0 on success, nonzero with a
one-line diagnostic otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus as corpus_mod
from . import graph as graph_mod
from . import instances as inst_mod
from . import stats as stats_mod
from . import wordpiece

DEFAULT_MAX_SEQ_LEN = 512
DEFAULT_K = 5
DEFAULT_SEED = 0
DEFAULT_MIX = "1,1,1"


def _parse_mix(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("--mix needs three comma-separated weights, e.g. 1,1,1")
    try:
        weights = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--mix weights must be numbers, got {text!r}")
    if min(weights) < 0 or sum(weights) <= 0:
        raise argparse.ArgumentTypeError("--mix weights must be nonnegative with a positive sum")
    return weights


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docmix",
        description="Build document graphs and segment-pair pretraining instances.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_graph = sub.add_parser("build-graph", help="build a document graph from a corpus")
    p_graph.add_argument("--corpus", required=True, help="corpus file (line-delimited records)")
    p_graph.add_argument("--out", required=True, help="output graph file")
    p_graph.add_argument("--mode", required=True, choices=graph_mod.EDGE_MODES)
    p_graph.add_argument("--k", type=int, default=DEFAULT_K,
                         help="neighbors per document (tfidf) or successors per node "
                              f"(random); default {DEFAULT_K}")
    p_graph.add_argument("--seed", type=int, default=DEFAULT_SEED,
                         help=f"random-edge seed (random mode only); default {DEFAULT_SEED}")

    p_inst = sub.add_parser("make-instances", help="generate training instances")
    p_inst.add_argument("--corpus", required=True)
    p_inst.add_argument("--vocab", required=True, help="one-token-per-line vocab file")
    p_inst.add_argument("--graph", default=None,
                        help="graph file; omit for a linkless corpus")
    p_inst.add_argument("--out", required=True, help="output instance file")
    p_inst.add_argument("--count", type=int, required=True, help="instances to emit")
    p_inst.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"stream seed; default {DEFAULT_SEED}")
    p_inst.add_argument("--max-seq-len", type=int, default=DEFAULT_MAX_SEQ_LEN,
                        help=f"token budget per instance; default {DEFAULT_MAX_SEQ_LEN}")
    p_inst.add_argument("--mix", type=_parse_mix, default=DEFAULT_MIX,
                        help="contiguous,random,linked weights, normalized to sum 1 "
                             f"(default {DEFAULT_MIX}: exact thirds)")
    p_inst.add_argument("--workers", type=int, default=1,
                        help="worker threads; changes throughput only, never output bytes")
    p_inst.add_argument("--no-lowercase", action="store_true",
                        help="disable lowercasing before tokenization")

    p_stats = sub.add_parser("stats", help="summarize an instance file")
    p_stats.add_argument("--in", dest="input", required=True, help="instance file")
    p_stats.add_argument("--corpus", default=None)
    p_stats.add_argument("--graph", default=None,
                         help="graph file (needs --corpus); adds partner in-degree histogram")
    p_stats.add_argument("--vocab", default=None,
                         help="vocab file; enables the replacement-split breakdown")
    p_stats.add_argument("--text", action="store_true",
                         help="print the human-readable report instead of JSON")
    return parser


def _echo_config(args: argparse.Namespace) -> None:
    skip = {"subcommand"}
    pairs = " ".join(f"{key.replace('_', '-')}={value!r}"
                     for key, value in sorted(vars(args).items()) if key not in skip)
    print(f"config: subcommand={args.subcommand} {pairs}", file=sys.stderr)


def _cmd_build_graph(args: argparse.Namespace) -> int:
    corpus = corpus_mod.load_corpus(args.corpus)
    report = corpus.load_report
    print(f"loaded {report.documents} documents "
          f"(self-links dropped: {report.self_links_dropped}, "
          f"duplicate links dropped: {report.duplicate_links_dropped}, "
          f"unknown keys ignored: {report.unknown_keys_ignored})", file=sys.stderr)
    if args.mode == "hyperlink":
        graph = graph_mod.build_hyperlink_graph(corpus)
    elif args.mode == "tfidf":
        model = graph_mod.fit_tfidf(corpus)
        graph = graph_mod.build_tfidf_graph(corpus, model, k=args.k)
    else:
        graph = graph_mod.build_random_graph(corpus, out_degree=args.k, seed=args.seed)
    graph_mod.save_graph(graph, args.out)
    extra = ""
    if graph.report.dangling_links_dropped:
        extra += f", dangling links dropped: {graph.report.dangling_links_dropped}"
    if graph.report.zero_vector_docs:
        extra += f", zero-vector documents: {graph.report.zero_vector_docs}"
    if graph.report.out_degree_clamped:
        extra += ", out-degree clamped to corpus size - 1"
    print(f"wrote {args.out}: mode={graph.edge_mode} nodes={len(graph.node_ids)} "
          f"edges={graph.edge_count}{extra}", file=sys.stderr)
    return 0


def _cmd_make_instances(args: argparse.Namespace) -> int:
    if args.count < 0:
        print("error: --count must be >= 0", file=sys.stderr)
        return 1
    corpus = corpus_mod.load_corpus(args.corpus)
    vocab = wordpiece.load_vocab(args.vocab)
    graph = graph_mod.load_graph(args.graph, corpus) if args.graph else None
    mix = inst_mod.MixConfig.from_weights(
        args.mix if isinstance(args.mix, tuple) else _parse_mix(args.mix),
        max_seq_len=args.max_seq_len, seed=args.seed)
    stream = inst_mod.generate_stream(
        corpus, graph, vocab, mix, args.count,
        workers=max(1, args.workers), lowercase=not args.no_lowercase)
    written = inst_mod.write_instances(stream, args.out)
    print(f"wrote {written} instances to {args.out}", file=sys.stderr)
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    instances = inst_mod.read_instances(args.input)
    corpus = corpus_mod.load_corpus(args.corpus) if args.corpus else None
    graph = None
    if args.graph:
        if corpus is None:
            print("error: --graph requires --corpus to resolve node ids", file=sys.stderr)
            return 1
        graph = graph_mod.load_graph(args.graph, corpus)
    mask_id = wordpiece.load_vocab(args.vocab).mask_id if args.vocab else None
    stats = stats_mod.summarize_stream(instances, corpus=corpus, graph=graph, mask_id=mask_id)
    if args.text:
        print(stats_mod.render_stats(stats))
    else:
        record = stats_mod.stats_record(stats)
        if graph is not None:
            record["graph"] = stats_mod.graph_stats(graph)
        print(json.dumps(record))
    return 0


_COMMANDS = {
    "build-graph": _cmd_build_graph,
    "make-instances": _cmd_make_instances,
    "stats": _cmd_stats,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _echo_config(args)
    try:
        return _COMMANDS[args.subcommand](args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1
    except (corpus_mod.CorpusFormatError, graph_mod.GraphFormatError,
            wordpiece.VocabError, inst_mod.RecordFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
