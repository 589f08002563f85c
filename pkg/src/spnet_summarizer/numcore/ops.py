"""Forward operations with their local derivatives.

Shapes must conform exactly; the only broadcast forms are the explicit ones
(``scale`` by a single-element tensor and ``add_rowwise``).
"""

from __future__ import annotations

from typing import Any, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from spnet_summarizer.exceptions import ContractError, DimensionError, DomainError
from spnet_summarizer.numcore.tensor import Tensor, make_output


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.data.shape != b.data.shape:
        raise DimensionError(
            f"{op}: operand shapes differ ({a.name or 'a'}={a.shape}, {b.name or 'b'}={b.shape})"
        )


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum."""
    _check_same_shape("add", a, b)
    return make_output("add", a.data + b.data, (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise difference."""
    _check_same_shape("sub", a, b)
    return make_output("sub", a.data - b.data, (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product."""
    _check_same_shape("mul", a, b)
    x, y = a.data, b.data
    return make_output("mul", x * y, (a, b), lambda g: (g * y, g * x))


def scale(a: Tensor, s: Tensor) -> Tensor:
    """Multiply every entry of ``a`` by the single-element tensor ``s``."""
    if s.data.size != 1:
        raise DimensionError(f"scale: factor must have one element, got shape {s.shape}")
    x, k = a.data, s.data.reshape(-1)[0]

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any], NDArray[Any]]:
        return g * k, np.array([np.sum(g * x)], dtype=x.dtype)

    return make_output("scale", x * k, (a, s), _backward)


def mul_const(a: Tensor, c: float) -> Tensor:
    """Multiply by a Python constant."""
    k = a.data.dtype.type(c)
    return make_output("mul_const", a.data * k, (a,), lambda g: (g * k,))


def rsub_const(c: float, a: Tensor) -> Tensor:
    """Compute ``c - a``."""
    k = a.data.dtype.type(c)
    return make_output("rsub_const", k - a.data, (a,), lambda g: (-g,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix/vector product for 1-D and 2-D operands."""
    x, y = a.data, b.data
    if x.ndim > 2 or y.ndim > 2 or x.shape[-1] != y.shape[0]:
        raise DimensionError(
            f"matmul: cannot multiply {a.name or 'a'}{a.shape} by {b.name or 'b'}{b.shape}"
        )
    out = x @ y
    if out.ndim == 0:
        out = out.reshape(1)

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any], NDArray[Any]]:
        if x.ndim == 2 and y.ndim == 1:
            return np.outer(g, y), x.T @ g
        if x.ndim == 1 and y.ndim == 2:
            return y @ g, np.outer(x, g)
        if x.ndim == 2 and y.ndim == 2:
            return g @ y.T, x.T @ g
        return g[0] * y, g[0] * x

    return make_output("matmul", out, (a, b), _backward)


def transpose(a: Tensor) -> Tensor:
    """Transpose a matrix."""
    if a.data.ndim != 2:
        raise DimensionError(f"transpose: expected a matrix, got shape {a.shape}")
    return make_output("transpose", np.ascontiguousarray(a.data.T), (a,), lambda g: (g.T,))


def add_rowwise(m: Tensor, v: Tensor) -> Tensor:
    """Add vector ``v`` to every row of matrix ``m``."""
    if m.data.ndim != 2 or v.data.ndim != 1 or m.data.shape[1] != v.data.shape[0]:
        raise DimensionError(f"add_rowwise: cannot add {v.shape} to rows of {m.shape}")
    return make_output("add_rowwise", m.data + v.data, (m, v), lambda g: (g, g.sum(axis=0)))


def concat(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate vectors end to end."""
    if not tensors or any(t.data.ndim != 1 for t in tensors):
        raise DimensionError("concat: expected one or more vectors")
    sizes = [t.data.shape[0] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any], ...]:
        return tuple(g[bounds[i]:bounds[i + 1]] for i in range(len(sizes)))

    return make_output("concat", np.concatenate([t.data for t in tensors]), tuple(tensors), _backward)


def stack(tensors: Sequence[Tensor]) -> Tensor:
    """Stack equal-length vectors as the rows of a matrix."""
    if not tensors:
        raise DimensionError("stack: expected at least one vector")
    width = tensors[0].data.shape
    if any(t.data.shape != width or t.data.ndim != 1 for t in tensors):
        raise DimensionError("stack: all operands must be vectors of one length")
    return make_output(
        "stack", np.stack([t.data for t in tensors]), tuple(tensors), lambda g: tuple(g)
    )


def slice_(a: Tensor, start: int, stop: int) -> Tensor:
    """Take ``a[start:stop]`` of a vector."""
    if a.data.ndim != 1 or not 0 <= start < stop <= a.data.shape[0]:
        raise DimensionError(f"slice: [{start}:{stop}] out of range for shape {a.shape}")
    shape, dtype = a.data.shape, a.data.dtype

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any]]:
        full = np.zeros(shape, dtype=dtype)
        full[start:stop] = g
        return (full,)

    return make_output("slice", a.data[start:stop].copy(), (a,), _backward)


def row(m: Tensor, index: int) -> Tensor:
    """Select one row of a matrix."""
    if m.data.ndim != 2 or not 0 <= index < m.data.shape[0]:
        raise DimensionError(f"row: index {index} out of range for shape {m.shape}")
    shape, dtype = m.data.shape, m.data.dtype

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any]]:
        full = np.zeros(shape, dtype=dtype)
        full[index] = g
        return (full,)

    return make_output("row", m.data[index].copy(), (m,), _backward)


def take_rows(m: Tensor, indices: Sequence[int]) -> Tensor:
    """Gather rows of a matrix (embedding lookup)."""
    idx = np.asarray(indices, dtype=np.int64)
    if m.data.ndim != 2 or idx.ndim != 1 or idx.size == 0:
        raise DimensionError(f"take_rows: bad operands {m.shape} / {idx.shape}")
    if idx.min() < 0 or idx.max() >= m.data.shape[0]:
        raise ContractError(f"take_rows: index out of range for {m.data.shape[0]} rows")
    shape, dtype = m.data.shape, m.data.dtype

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any]]:
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full, idx, g)
        return (full,)

    return make_output("take_rows", m.data[idx], (m,), _backward)


def gather(a: Tensor, indices: Sequence[int]) -> Tensor:
    """Pick entries of a vector."""
    idx = np.asarray(indices, dtype=np.int64)
    if a.data.ndim != 1 or idx.ndim != 1 or idx.size == 0:
        raise DimensionError(f"gather: bad operands {a.shape} / {idx.shape}")
    if idx.min() < 0 or idx.max() >= a.data.shape[0]:
        raise ContractError(f"gather: index out of range for size {a.data.shape[0]}")
    shape, dtype = a.data.shape, a.data.dtype

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any]]:
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full, idx, g)
        return (full,)

    return make_output("gather", a.data[idx], (a,), _backward)


def pad(a: Tensor, size: int) -> Tensor:
    """Zero-pad a vector on the right up to ``size``."""
    n = a.data.shape[0]
    if a.data.ndim != 1 or size < n:
        raise DimensionError(f"pad: cannot pad {a.shape} to {size}")
    out = np.zeros(size, dtype=a.data.dtype)
    out[:n] = a.data
    return make_output("pad", out, (a,), lambda g: (g[:n],))


def scatter_add(values: Tensor, indices: Sequence[int], size: int) -> Tensor:
    """Sum ``values[i]`` into slot ``indices[i]`` of a zero vector of length ``size``."""
    idx = np.asarray(indices, dtype=np.int64)
    if values.data.ndim != 1 or idx.shape != values.data.shape:
        raise DimensionError(f"scatter_add: {values.shape} values for {idx.shape} indices")
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise ContractError(f"scatter_add: index out of range for size {size}")
    out = np.zeros(size, dtype=values.data.dtype)
    np.add.at(out, idx, values.data)
    return make_output("scatter_add", out, (values,), lambda g: (g[idx],))


def tanh(a: Tensor) -> Tensor:
    y = np.tanh(a.data)
    return make_output("tanh", y, (a,), lambda g: (g * (1.0 - y * y),))


def sigmoid(a: Tensor) -> Tensor:
    """Logistic function, saturating instead of overflowing."""
    y = expit(a.data)
    return make_output("sigmoid", y, (a,), lambda g: (g * y * (1.0 - y),))


def relu(a: Tensor) -> Tensor:
    x = a.data
    return make_output("relu", np.maximum(x, 0), (a,), lambda g: (g * (x > 0),))


def log(a: Tensor) -> Tensor:
    """Natural logarithm of strictly positive entries."""
    x = a.data
    if np.any(x <= 0):
        raise DomainError("log: non-positive input")
    return make_output("log", np.log(x), (a,), lambda g: (g / x,))


def clip(a: Tensor, low: float, high: float) -> Tensor:
    """Clamp entries to ``[low, high]``; the gradient passes only where unclamped."""
    x = a.data
    inside = (x >= low) & (x <= high)
    out = np.clip(x, low, high).astype(x.dtype, copy=False)
    return make_output("clip", out, (a,), lambda g: (g * inside,))


def sum_(a: Tensor) -> Tensor:
    x = a.data
    return make_output(
        "sum", np.array([x.sum()], dtype=x.dtype), (a,), lambda g: (np.full(x.shape, g[0], dtype=x.dtype),)
    )


def mean(a: Tensor) -> Tensor:
    x = a.data
    n = x.size
    return make_output(
        "mean",
        np.array([x.sum() / n], dtype=x.dtype),
        (a,),
        lambda g: (np.full(x.shape, g[0] / n, dtype=x.dtype),),
    )


def softmax(e: Tensor, mask: Optional[NDArray[np.bool_]] = None) -> Tensor:
    """Normalize a vector into a distribution, restricted to unmasked positions.

    Masked positions receive exactly zero probability. The maximum is subtracted
    before exponentiation.
    """
    x = e.data
    if x.ndim != 1 or x.size == 0:
        raise DomainError(f"softmax: expected a non-empty vector, got shape {e.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("softmax: non-finite input")
    if mask is None:
        shifted = np.exp(x - x.max())
    else:
        keep = np.asarray(mask, dtype=bool)
        if keep.shape != x.shape:
            raise DimensionError(f"softmax: mask {keep.shape} does not match input {x.shape}")
        if not keep.any():
            raise ContractError("softmax: every position is masked")
        shifted = np.where(keep, np.exp(x - x[keep].max()), 0).astype(x.dtype, copy=False)
    y = shifted / shifted.sum()

    def _backward(g: NDArray[Any]) -> Tuple[NDArray[Any]]:
        return (y * (g - np.dot(g, y)),)

    return make_output("softmax", y, (e,), _backward)


def linear_forward(x: Tensor, W: Tensor, b: Tensor) -> Tensor:
    """Affine map ``W @ x + b``."""
    if W.data.ndim != 2 or x.data.ndim != 1 or W.data.shape[1] != x.data.shape[0]:
        raise DimensionError(
            f"linear: weight {W.name or 'W'}{W.shape} does not accept input {x.name or 'x'}{x.shape}"
        )
    if b.data.shape != (W.data.shape[0],):
        raise DimensionError(
            f"linear: bias {b.name or 'b'}{b.shape} does not match weight {W.name or 'W'}{W.shape}"
        )
    return add(matmul(W, x), b)


class LSTMWeights(NamedTuple):
    """Stacked gate weights in (input, forget, candidate, output) order.

    ``W`` has shape ``(4*d_h, d_in + d_h)`` acting on ``[x, h_prev]``.
    """

    W: Tensor
    b: Tensor


def lstm_cell_forward(
    x: Tensor, h_prev: Tensor, c_prev: Tensor, weights: LSTMWeights
) -> Tuple[Tensor, Tensor]:
    """Run one LSTM step and return ``(h, c)``."""
    d_h = h_prev.data.shape[0]
    if c_prev.data.shape != (d_h,):
        raise DimensionError(f"lstm: cell state {c_prev.shape} does not match hidden {h_prev.shape}")
    if weights.W.data.shape != (4 * d_h, x.data.shape[0] + d_h):
        raise DimensionError(
            f"lstm: weight {weights.W.shape} does not fit input {x.shape} and hidden {h_prev.shape}"
        )
    z = linear_forward(concat([x, h_prev]), weights.W, weights.b)
    i = sigmoid(slice_(z, 0, d_h))
    f = sigmoid(slice_(z, d_h, 2 * d_h))
    g = tanh(slice_(z, 2 * d_h, 3 * d_h))
    o = sigmoid(slice_(z, 3 * d_h, 4 * d_h))
    c = add(mul(f, c_prev), mul(i, g))
    h = mul(o, tanh(c))
    return h, c
