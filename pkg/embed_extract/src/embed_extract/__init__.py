"""Last-token embedding extraction for alignment corpora.

Reads prompt/completion JSONL, encodes each concatenated pair with a causal
encoder, takes the final hidden state of the last non-padding token, and
writes the EMB1 + JSONL pair plus a provenance manifest.
"""

from .extractor import ExtractConfig, ExtractReport, extract_embeddings

__version__ = "0.1.0"

__all__ = ["ExtractConfig", "ExtractReport", "extract_embeddings", "__version__"]
