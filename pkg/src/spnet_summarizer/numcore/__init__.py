"""Numerical kernel.

Dense tensors, a define-by-run graph with reverse-mode differentiation, Adam and a
finite-difference oracle: the minimum needed to train and verify the summarizer.
"""

from spnet_summarizer.numcore.gradcheck import finite_diff_gradient, relative_error
from spnet_summarizer.numcore.ops import (
    LSTMWeights,
    linear_forward,
    lstm_cell_forward,
    sigmoid,
    softmax,
)
from spnet_summarizer.numcore.optim import AdamState, adam_step, clip_grad_norm
from spnet_summarizer.numcore.tensor import (
    Graph,
    Tensor,
    backward,
    get_dtype,
    get_precision,
    precision,
    set_precision,
)

__all__ = [
    "AdamState",
    "Graph",
    "LSTMWeights",
    "Tensor",
    "adam_step",
    "backward",
    "clip_grad_norm",
    "finite_diff_gradient",
    "get_dtype",
    "get_precision",
    "linear_forward",
    "lstm_cell_forward",
    "precision",
    "relative_error",
    "set_precision",
    "sigmoid",
    "softmax",
]
