import math

import numpy as np
import pytest

from spnet_summarizer.exceptions import ContractError, DimensionError, DomainError, OptimizationError
from spnet_summarizer.numcore import (
    AdamState,
    Graph,
    LSTMWeights,
    Tensor,
    adam_step,
    backward,
    clip_grad_norm,
    finite_diff_gradient,
    get_precision,
    linear_forward,
    lstm_cell_forward,
    precision,
    relative_error,
    sigmoid,
    softmax,
)
from spnet_summarizer.numcore import ops


def _scalar_lstm(x, h_prev, c_prev, W, b):
    """Reference LSTM step written with plain floats, gate order (i, f, g, o)."""
    d = len(h_prev)
    z_in = list(x) + list(h_prev)
    z = [b[r] + sum(W[r][k] * z_in[k] for k in range(len(z_in))) for r in range(4 * d)]

    def sig(v):
        return 1.0 / (1.0 + math.exp(-v))

    c, h = [], []
    for j in range(d):
        i, f, g, o = sig(z[j]), sig(z[d + j]), math.tanh(z[2 * d + j]), sig(z[3 * d + j])
        c_j = f * c_prev[j] + i * g
        c.append(c_j)
        h.append(o * math.tanh(c_j))
    return h, c


def test_linear_forward_hand_example(float64) -> None:
    """Test the affine map on the worked example and the trivial cases."""
    W = Tensor([[1.0, 2.0], [3.0, 4.0]])
    out = linear_forward(Tensor([1.0, 1.0]), W, Tensor([1.0, 1.0]))
    np.testing.assert_allclose(out.data, [4.0, 8.0])

    x = Tensor([0.3, -2.0])
    np.testing.assert_array_equal(linear_forward(x, Tensor(np.zeros((2, 2))), Tensor.zeros(2)).data, [0.0, 0.0])
    np.testing.assert_array_equal(linear_forward(x, Tensor(np.eye(2)), Tensor.zeros(2)).data, x.data)


def test_linear_forward_rejects_mismatched_shapes() -> None:
    """Test that the error names the offending operand."""
    W = Tensor.parameter(np.ones((2, 3)), "out_V")
    with pytest.raises(DimensionError, match="out_V"):
        linear_forward(Tensor([1.0, 1.0]), W, Tensor.zeros(2))


def test_softmax_values(float64) -> None:
    np.testing.assert_allclose(softmax(Tensor([0.0, 0.0])).data, [0.5, 0.5])
    np.testing.assert_allclose(softmax(Tensor([1.0, 2.0, 3.0])).data, [0.09003, 0.24473, 0.66524], atol=1e-5)

    # Shift invariance
    e = np.array([0.2, -1.3, 4.0])
    np.testing.assert_allclose(softmax(Tensor(e)).data, softmax(Tensor(e + 100.0)).data, atol=1e-12)


def test_softmax_mask_and_errors(float64) -> None:
    """Test that masked positions get exactly zero and bad inputs are rejected."""
    out = softmax(Tensor([1.0, 5.0, 2.0]), mask=np.array([True, False, True]))
    assert out.data[1] == 0.0
    assert abs(out.data.sum() - 1.0) < 1e-12

    with pytest.raises(DomainError):
        softmax(Tensor([1.0, np.inf]))
    with pytest.raises(ContractError):
        softmax(Tensor([1.0, 2.0]), mask=np.array([False, False]))


def test_sigmoid_values(float64) -> None:
    assert sigmoid(Tensor([0.0])).item() == 0.5
    assert abs(sigmoid(Tensor([1.0])).item() - 0.731059) < 1e-6
    x = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(sigmoid(Tensor(-x)).data, 1.0 - sigmoid(Tensor(x)).data, atol=1e-12)
    # Saturates without overflow warnings
    assert sigmoid(Tensor([-1000.0])).item() == 0.0


def test_lstm_cell_zero_cases(float64) -> None:
    """Test the gate algebra with all-zero weights."""
    weights = LSTMWeights(W=Tensor(np.zeros((12, 5))), b=Tensor.zeros(12))
    x = Tensor([0.4, -0.1])

    h, c = lstm_cell_forward(x, Tensor.zeros(3), Tensor.zeros(3), weights)
    np.testing.assert_array_equal(h.data, np.zeros(3))
    np.testing.assert_array_equal(c.data, np.zeros(3))

    c_prev = np.array([1.0, -2.0, 0.5])
    h, c = lstm_cell_forward(x, Tensor.zeros(3), Tensor(c_prev), weights)
    np.testing.assert_allclose(c.data, 0.5 * c_prev)
    np.testing.assert_allclose(h.data, 0.5 * np.tanh(0.5 * c_prev))


def test_lstm_cell_matches_scalar_reference(float64) -> None:
    rng = np.random.default_rng(7)
    d_in, d_h = 3, 4
    W = rng.uniform(-0.5, 0.5, size=(4 * d_h, d_in + d_h))
    b = rng.uniform(-0.5, 0.5, size=4 * d_h)
    x, h_prev, c_prev = rng.normal(size=d_in), rng.normal(size=d_h), rng.normal(size=d_h)

    h, c = lstm_cell_forward(Tensor(x), Tensor(h_prev), Tensor(c_prev), LSTMWeights(Tensor(W), Tensor(b)))
    h_ref, c_ref = _scalar_lstm(x, h_prev, c_prev, W.tolist(), b.tolist())
    np.testing.assert_allclose(h.data, h_ref, atol=1e-10)
    np.testing.assert_allclose(c.data, c_ref, atol=1e-10)


def test_backward_quadratic_and_constant(float64) -> None:
    """Test d(sum p^2)/dp = 2p and that unreached parameters get zero gradients."""
    p = Tensor.parameter([1.0, -2.0, 3.0], "p")
    q = Tensor.parameter([5.0], "q")
    with Graph() as graph:
        loss = ops.sum_(ops.mul(p, p))
    grads = backward(graph, loss, {"p": p, "q": q})
    np.testing.assert_allclose(grads["p"], [2.0, -4.0, 6.0])
    np.testing.assert_array_equal(grads["q"], [0.0])

    with Graph() as graph:
        loss = ops.sum_(Tensor([1.0, 2.0]))
    assert not backward(graph, loss, {"p": p})["p"].any()


def test_backward_accumulates_over_shared_inputs(float64) -> None:
    """Test that a tensor used twice receives the sum of both paths."""
    p = Tensor.parameter([2.0], "p")
    with Graph() as graph:
        loss = ops.add(ops.mul(p, p), ops.mul_const(p, 3.0))
    assert backward(graph, loss, {"p": p})["p"][0] == pytest.approx(7.0)


def test_backward_requires_scalar_loss(float64) -> None:
    p = Tensor.parameter([1.0, 2.0], "p")
    with Graph() as graph:
        out = ops.mul(p, p)
    with pytest.raises(ContractError):
        backward(graph, out, {"p": p})


def test_no_graph_records_nothing(float64) -> None:
    """Test that forward passes outside a graph leave no trace."""
    p = Tensor.parameter([1.0], "p")
    out = ops.mul(p, p)
    assert not out.requires_grad
    with Graph() as graph:
        ops.mul(p, p)
    assert len(graph) == 1


def test_adam_zero_gradient_keeps_parameters(float64) -> None:
    p = Tensor.parameter([0.5, -0.25], "p")
    state = AdamState.for_params({"p": p})
    adam_step({"p": p}, {"p": np.zeros(2)}, state)
    np.testing.assert_array_equal(p.data, [0.5, -0.25])
    assert state.t == 1


def test_adam_first_step_moves_by_learning_rate(float64) -> None:
    """Test that the bias-corrected first update has magnitude lr, against the gradient sign."""
    p = Tensor.parameter([1.0], "p")
    state = AdamState.for_params({"p": p}, lr=0.001)
    adam_step({"p": p}, {"p": np.array([3.7])}, state)
    assert p.data[0] == pytest.approx(1.0 - 0.001, abs=1e-9)

    p = Tensor.parameter([1.0], "p")
    state = AdamState.for_params({"p": p}, lr=0.001)
    adam_step({"p": p}, {"p": np.array([-0.02])}, state)
    assert p.data[0] == pytest.approx(1.0 + 0.001, abs=1e-9)


def test_adam_is_deterministic(float64) -> None:
    def run():
        rng = np.random.default_rng(3)
        p = Tensor.parameter(rng.normal(size=4), "p")
        state = AdamState.for_params({"p": p})
        for _ in range(10):
            adam_step({"p": p}, {"p": rng.normal(size=4)}, state)
        return p.data.copy()

    np.testing.assert_array_equal(run(), run())


def test_adam_rejects_non_finite_gradients(float64) -> None:
    p = Tensor.parameter([1.0], "p")
    state = AdamState.for_params({"p": p})
    with pytest.raises(OptimizationError):
        adam_step({"p": p}, {"p": np.array([np.nan])}, state)
    assert state.t == 0


def test_clip_grad_norm() -> None:
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    assert clip_grad_norm(grads, 1.0) == pytest.approx(5.0)
    total = np.sqrt(grads["a"][0] ** 2 + grads["b"][0] ** 2)
    assert total == pytest.approx(1.0, abs=1e-9)

    untouched = {"a": np.array([3.0])}
    clip_grad_norm(untouched, None)
    assert untouched["a"][0] == 3.0


def test_finite_diff_examples(float64) -> None:
    p = Tensor.parameter([3.0], "p")
    numeric = finite_diff_gradient(lambda: float(p.data[0] ** 2), {"p": p})
    assert numeric["p"][0] == pytest.approx(6.0, abs=1e-6)
    # Perturbations are undone
    assert p.data[0] == 3.0

    w = Tensor.parameter([1.0, 2.0, 3.0], "w")
    coeffs = np.array([0.5, -1.0, 2.0])
    numeric = finite_diff_gradient(lambda: float(coeffs @ w.data), {"w": w}, coordinates={"w": [2, 0]})
    np.testing.assert_allclose(numeric["w"], [2.0, 0.5], atol=1e-9)


def test_relative_error_floor() -> None:
    assert relative_error(np.array([1.0]), np.array([1.0])) == 0.0
    assert relative_error(np.array([0.0]), np.array([1e-9])) == pytest.approx(1e-3)


def test_precision_context() -> None:
    """Test that tensors follow the active precision and the context restores it."""
    before = get_precision()
    with precision("float64"):
        assert Tensor([1.0]).data.dtype == np.float64
        with precision("float32"):
            assert Tensor([1.0]).data.dtype == np.float32
        assert get_precision() == "float64"
    assert get_precision() == before


def test_tensor_contracts() -> None:
    with pytest.raises(DimensionError):
        Tensor(np.zeros((0, 3)))
    assert Tensor(2.5).shape == (1,)
    with pytest.raises(ContractError):
        Tensor([1.0, 2.0]).item()
