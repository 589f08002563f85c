"""Define the state structures for the pipeline graph."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass
class InputState:
    """Defines the input state for the pipeline, representing a narrower interface to the outside world."""

    input_path: str = field(default="")
    """
    MultiWOZ JSON file to convert. When empty, a synthetic corpus of
    ``Configuration.synthetic_dialogs`` dialogs is generated instead.
    """


@dataclass
class State(InputState):
    """Complete pipeline state: where each stage left its artifacts."""

    # Control flow
    next: Optional[str] = field(default=None)           # next node to route to

    # Corpus
    corpus_dir: str = field(default="")
    manifest: Dict[str, Any] = field(default_factory=dict)

    # Training
    checkpoint_path: str = field(default="")
    trained: bool = field(default=False)                # False when an existing checkpoint was reused
    epochs_run: int = field(default=0)

    # Evaluation
    report_path: str = field(default="")
    summaries_path: str = field(default="")
    metrics: Dict[str, Any] = field(default_factory=dict)
    """Headline scores: ROUGE F1 per variant, CIC mean and classifier macro F1."""
