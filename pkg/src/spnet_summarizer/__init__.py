"""Dialog summarization with speaker-role, slot and domain scaffolds.

This package defines a dual-encoder pointer-generator summarizer trained from
scratch, its corpus tooling and metrics, and a convert, train and evaluate graph.
"""

from spnet_summarizer.graph import graph

__all__ = ["graph"]
