import math

import numpy as np
import pytest

from spnet_summarizer.exceptions import ContractError, DimensionError
from spnet_summarizer.numcore import Tensor
from spnet_summarizer.training.losses import loss_domain, loss_summarization, loss_total


def test_summarization_loss_values(float64) -> None:
    certain = Tensor([0.0, 1.0, 0.0])
    assert loss_summarization([certain, certain], [1, 1]).item() == pytest.approx(0.0, abs=1e-12)

    half = Tensor([0.5, 0.5])
    assert loss_summarization([half], [0]).item() == pytest.approx(math.log(2.0))

    # Mean over steps, not sum
    loss = loss_summarization([half, certain], [1, 1]).item()
    assert loss == pytest.approx(math.log(2.0) / 2)


def test_summarization_loss_floors_zero_probability(float64) -> None:
    loss = loss_summarization([Tensor([1.0, 0.0])], [1]).item()
    assert loss == pytest.approx(-math.log(1e-12))


def test_summarization_loss_contracts(float64) -> None:
    with pytest.raises(ContractError):
        loss_summarization([], [])
    with pytest.raises(ContractError):
        loss_summarization([Tensor([0.5, 0.5])], [2])
    with pytest.raises(ContractError):
        loss_summarization([Tensor([0.5, 0.5])], [0, 1])


def test_domain_loss_values(float64) -> None:
    assert loss_domain(Tensor([0.5]), [1]).item() == pytest.approx(math.log(2.0))

    expected = -(math.log(0.9) + math.log(0.8)) / 2
    assert loss_domain(Tensor([0.9, 0.2]), [1, 0]).item() == pytest.approx(expected)
    assert expected == pytest.approx(0.16425, abs=1e-5)

    # Perfect predictions only leave the floor
    assert loss_domain(Tensor([1.0, 0.0, 1.0]), np.array([1, 0, 1])).item() == pytest.approx(0.0, abs=1e-10)


def test_domain_loss_contracts(float64) -> None:
    with pytest.raises(DimensionError):
        loss_domain(Tensor([0.5, 0.5]), [1])
    with pytest.raises(ContractError):
        loss_domain(Tensor([1.5]), [1])


def test_total_loss(float64) -> None:
    assert loss_total(Tensor([2.0]), Tensor([0.6]), 0.5).item() == pytest.approx(2.3)
    assert loss_total(Tensor([2.0]), Tensor([0.6]), 0.0).item() == pytest.approx(2.0)
