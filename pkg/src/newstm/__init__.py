"""newstm: topic modelling of dated news corpora.

Pipeline: ingest a JSONL article corpus, preprocess it into bag-of-words
vectors, train static LDA (collapsed Gibbs) or a chained dynamic topic
model over monthly time slices, and emit coherence/overlap diagnostics
plus deterministic SVG figures.
"""

__version__ = "0.1.0"
