"""paraforge: build, rank, and slice a headline paraphrase corpus, then train
and evaluate a desk-scale BPE + encoder-decoder paraphrase generator."""

__version__ = "0.1.0"
