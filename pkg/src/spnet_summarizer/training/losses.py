"""Summarization, domain and joint losses."""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike

from spnet_summarizer.exceptions import ContractError, DimensionError
from spnet_summarizer.model.network import DomainPrediction
from spnet_summarizer.numcore import Tensor
from spnet_summarizer.numcore import ops

PROB_FLOOR = 1e-12


def loss_summarization(distributions: Sequence[Tensor], targets: Sequence[int]) -> Tensor:
    """Mean negative log-likelihood of the target tokens.

    Probabilities are floored at ``1e-12`` before the log.

    Raises:
        ContractError: If there are no steps, or a target is outside its distribution.
    """
    if not targets:
        raise ContractError("Summarization loss needs at least one target step")
    if len(distributions) != len(targets):
        raise ContractError(f"{len(distributions)} distributions for {len(targets)} targets")
    picked = []
    for step, (dist, target) in enumerate(zip(distributions, targets)):
        if not 0 <= target < dist.shape[0]:
            raise ContractError(f"Target id {target} at step {step} is outside a distribution of size {dist.shape[0]}")
        picked.append(ops.gather(dist, [target]))
    probs = ops.clip(ops.concat(picked), PROB_FLOOR, 1.0)
    return ops.mul_const(ops.mean(ops.log(probs)), -1.0)


def loss_domain(prediction: Union[DomainPrediction, Tensor], labels: ArrayLike) -> Tensor:
    """Binary cross-entropy averaged over domains (non-negative).

    Both ``d`` and ``1 - d`` are floored at ``1e-12`` before the log.

    Raises:
        DimensionError: If predictions and labels differ in length.
        ContractError: If a probability is non-finite or outside ``[0, 1]``.
    """
    d = prediction.probabilities if isinstance(prediction, DomainPrediction) else prediction
    y = np.asarray(labels, dtype=d.data.dtype).reshape(-1)
    if y.shape != d.shape:
        raise DimensionError(f"Domain labels {y.shape} do not match predictions {d.shape}")
    if not np.all(np.isfinite(d.data)) or np.any(d.data < 0) or np.any(d.data > 1):
        raise ContractError("Domain probabilities must lie in [0, 1]")
    positive = ops.log(ops.clip(d, PROB_FLOOR, 1.0))
    negative = ops.log(ops.clip(ops.rsub_const(1.0, d), PROB_FLOOR, 1.0))
    per_domain = ops.add(ops.mul(Tensor(y), positive), ops.mul(Tensor(1.0 - y), negative))
    return ops.mul_const(ops.mean(per_domain), -1.0)


def loss_total(loss_summ: Tensor, loss_dom: Tensor, lambda_domain: float) -> Tensor:
    """``loss_summ + lambda * loss_dom``."""
    return ops.add(loss_summ, ops.mul_const(loss_dom, lambda_domain))
