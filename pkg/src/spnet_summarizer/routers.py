"""Routers for each node."""

import os
from typing import Literal

from spnet_summarizer.state import State


def route_prepared_corpus(state: State) -> Literal["train_summarizer", "evaluate_summarizer"]:
    """Route to training unless a usable checkpoint already exists.

    Args:
        state (State): Current pipeline state

    Returns:
        str: Next node to execute
    """
    # Check if routing is explicitly set
    if state.next:
        return state.next  # type: ignore

    # Fallback: reuse a checkpoint found on disk
    if state.checkpoint_path and os.path.exists(state.checkpoint_path):
        return "evaluate_summarizer"

    # Default: train a new model
    return "train_summarizer"
