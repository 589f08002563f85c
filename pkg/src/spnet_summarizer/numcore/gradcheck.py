"""Central finite differences, used as the oracle for ``backward``."""

from __future__ import annotations

from typing import Any, Callable, Dict, Mapping, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.numcore.tensor import Tensor


def finite_diff_gradient(
    f: Callable[[], float],
    params: Mapping[str, Tensor],
    eps: float = 1e-5,
    coordinates: Optional[Mapping[str, Sequence[int]]] = None,
) -> Dict[str, NDArray[Any]]:
    """Estimate ``d f / d p`` by ``(f(p+eps) - f(p-eps)) / 2eps`` per coordinate.

    ``f`` reads the parameters in place, so it must be pure and deterministic.
    Every perturbation is undone before returning.

    Args:
        f: Scalar function of the current parameter values.
        params: Parameters to differentiate against.
        eps: Perturbation size.
        coordinates: Optional flat indices per parameter name. When given, only
            those parameters and coordinates are perturbed and the result holds one
            value per requested coordinate, in order.

    Returns:
        Numerical gradient per parameter name.
    """
    result: Dict[str, NDArray[Any]] = {}
    names = list(coordinates) if coordinates is not None else list(params)
    for name in names:
        flat = params[name].data.reshape(-1)
        indices = range(flat.size) if coordinates is None else coordinates[name]
        estimates = np.zeros(len(indices), dtype=np.float64)
        for k, index in enumerate(indices):
            original = flat[index]
            flat[index] = original + eps
            upper = f()
            flat[index] = original - eps
            lower = f()
            flat[index] = original
            estimates[k] = (upper - lower) / (2.0 * eps)
        if coordinates is None:
            result[name] = estimates.reshape(params[name].data.shape)
        else:
            result[name] = estimates
    return result


def relative_error(analytic: NDArray[Any], numeric: NDArray[Any], floor: float = 1e-6) -> float:
    """Largest ``|a - n| / max(|a| + |n|, floor)`` over all entries."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - n) / np.maximum(np.abs(a) + np.abs(n), floor)))
