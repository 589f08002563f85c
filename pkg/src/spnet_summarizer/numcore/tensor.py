"""Dense tensors, the define-by-run graph and reverse-mode differentiation.

Every forward op records a node on the active ``Graph`` when at least one of its
inputs requires a gradient. Nodes are appended in creation order, which is a valid
topological order, so ``backward`` walks the node list in reverse.
"""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from spnet_summarizer.exceptions import ConfigurationError, ContractError, DimensionError

PRECISIONS: Dict[str, Any] = {"float32": np.float32, "float64": np.float64}

_precision = "float32"
_active_graph: ContextVar[Optional["Graph"]] = ContextVar("spnet_active_graph", default=None)


def set_precision(name: str) -> None:
    """Switch the global floating point precision ("float32" or "float64")."""
    global _precision
    if name not in PRECISIONS:
        raise ConfigurationError(f"Unknown precision '{name}', expected one of {sorted(PRECISIONS)}")
    _precision = name


def get_precision() -> str:
    """Return the name of the active precision."""
    return _precision


def get_dtype() -> Any:
    """Return the numpy dtype of the active precision."""
    return PRECISIONS[_precision]


@contextmanager
def precision(name: str) -> Iterator[None]:
    """Temporarily switch the global precision."""
    previous = get_precision()
    set_precision(name)
    try:
        yield
    finally:
        set_precision(previous)


class Tensor:
    """A dense row-major array with an optional gradient requirement.

    Scalars are represented with shape ``(1,)``; every extent is positive.
    """

    __slots__ = ("data", "name", "requires_grad")

    def __init__(
        self,
        data: ArrayLike,
        name: Optional[str] = None,
        requires_grad: bool = False,
        dtype: Any = None,
    ) -> None:
        array = np.asarray(data, dtype=dtype if dtype is not None else get_dtype())
        if array.ndim == 0:
            array = array.reshape(1)
        if any(extent <= 0 for extent in array.shape):
            raise DimensionError(f"Tensor '{name or 'anonymous'}' has a non-positive extent: {array.shape}")
        self.data: NDArray[Any] = array
        self.name = name
        self.requires_grad = requires_grad

    @classmethod
    def parameter(cls, data: ArrayLike, name: str) -> Tensor:
        """Create a trainable leaf tensor."""
        return cls(np.array(data, dtype=get_dtype()), name=name, requires_grad=True)

    @classmethod
    def zeros(cls, *shape: int) -> Tensor:
        """Create a constant zero tensor."""
        return cls(np.zeros(shape, dtype=get_dtype()))

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        """Return the value of a single-element tensor."""
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> NDArray[Any]:
        """Return a copy of the underlying array."""
        return self.data.copy()

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


BackwardFn = Callable[[NDArray[Any]], Sequence[Optional[NDArray[Any]]]]


@dataclass
class Node:
    """One recorded operation: its kind, inputs, cached output and local backward."""

    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardFn


class Graph:
    """Tape of operations recorded while the graph is active.

    Use as a context manager; a fresh graph is built per example.
    """

    def __init__(self) -> None:
        self.nodes: List[Node] = []
        self._token: Any = None

    def __enter__(self) -> Graph:
        self._token = _active_graph.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _active_graph.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def topological_order(self) -> List[int]:
        """Node ids in forward order."""
        return list(range(len(self.nodes)))

    def record(self, op: str, inputs: Tuple[Tensor, ...], output: Tensor, backward: BackwardFn) -> None:
        self.nodes.append(Node(op=op, inputs=inputs, output=output, backward=backward))


def active_graph() -> Optional[Graph]:
    """Return the graph currently recording, if any."""
    return _active_graph.get()


def make_output(op: str, data: NDArray[Any], inputs: Tuple[Tensor, ...], backward: BackwardFn) -> Tensor:
    """Wrap a forward result and record it when gradients are needed."""
    requires_grad = any(t.requires_grad for t in inputs)
    out = Tensor.__new__(Tensor)
    out.data = data
    out.name = None
    out.requires_grad = requires_grad
    if requires_grad:
        graph = _active_graph.get()
        if graph is not None:
            graph.record(op, inputs, out, backward)
        else:
            out.requires_grad = False
    return out


def backward(graph: Graph, loss: Tensor, params: Mapping[str, Tensor]) -> Dict[str, NDArray[Any]]:
    """Back-propagate a scalar loss through the graph.

    Args:
        graph: The graph the loss was computed on.
        loss: A single-element tensor.
        params: Named parameters to collect gradients for.

    Returns:
        Gradient per parameter name; parameters the loss does not reach get zeros.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")

    grads: Dict[int, NDArray[Any]] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(graph.nodes):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        for tensor, local in zip(node.inputs, node.backward(upstream)):
            if local is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + local
            else:
                grads[key] = local

    return {
        name: grads[id(t)] if id(t) in grads else np.zeros_like(t.data)
        for name, t in params.items()
    }
