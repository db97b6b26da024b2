"""docmix: document graphs and segment-pair pretraining instances.

Pipeline: load a line-delimited corpus, build a document graph
(hyperlink, tf-idf top-k, or random edges), then generate
``[CLS] A [SEP] B [SEP]`` instances whose second segment is a contiguous,
random, or linked partner, with MLM masking and a three-way relation
label.
"""

from .corpus import Corpus, CorpusFormatError, Document, LoadReport, load_corpus, save_corpus
from .graph import (
    DocumentGraph,
    GraphFormatError,
    TfIdfModel,
    build_hyperlink_graph,
    build_random_graph,
    build_tfidf_graph,
    fit_tfidf,
    load_graph,
    save_graph,
)
from .instances import (
    MixConfig,
    SegmentPair,
    TrainingInstance,
    apply_mlm_masking,
    choose_option,
    generate_stream,
    instance_violations,
    read_instances,
    sample_linked_document,
    segment_document,
    segment_spans,
    write_instances,
)
from .stats import StreamStats, graph_stats, render_stats, stats_record, summarize_stream
from .wordpiece import Vocabulary, VocabError, load_vocab, tokenize

__version__ = "0.1.0"
