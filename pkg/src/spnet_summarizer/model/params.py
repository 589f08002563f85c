"""Model dimensions and the trainable parameter set."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterator, List, Mapping, NamedTuple, Tuple

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.exceptions import ConfigurationError, DimensionError
from spnet_summarizer.numcore import LSTMWeights, Tensor, get_dtype

INIT_RANGE = 0.08
FORGET_BIAS = 1.0

ENCODER_PREFIXES: Tuple[str, str] = ("usr", "sys")
SHARED_PREFIX = "dlg"


@dataclass(frozen=True)
class ModelDims:
    """Layer sizes.

    With ``speaker_roles`` each role encoder has ``encoder_hidden`` units, split evenly
    over both directions. Without it one shared encoder reads the whole dialog with
    twice that size, so the context and the decoder state keep their sizes.
    """

    vocab_size: int
    n_domains: int
    embedding_dim: int = 128
    encoder_hidden: int = 256
    decoder_hidden: int = 512
    attention_dim: int = 256
    output_hidden: int = 512
    classifier_hidden: int = 256
    speaker_roles: bool = True

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not isinstance(value, bool) and value < 1:
                raise ConfigurationError(f"Model dimension {name} must be positive, got {value}")
        if self.encoder_hidden % 2:
            raise ConfigurationError(f"encoder_hidden must be even, got {self.encoder_hidden}")
        if self.decoder_hidden != 2 * self.encoder_hidden:
            raise ConfigurationError(
                f"decoder_hidden ({self.decoder_hidden}) must equal the two concatenated "
                f"encoder states ({2 * self.encoder_hidden})"
            )

    @property
    def encoder_roles(self) -> Tuple[str, ...]:
        """Parameter prefix of every encoder, in encoder-id order."""
        return ENCODER_PREFIXES if self.speaker_roles else (SHARED_PREFIX,)

    @property
    def stream_hidden(self) -> int:
        """Size of one encoder state (both directions)."""
        return self.encoder_hidden if self.speaker_roles else 2 * self.encoder_hidden

    @property
    def direction_hidden(self) -> int:
        return self.stream_hidden // 2

    @property
    def context_dim(self) -> int:
        return 2 * self.encoder_hidden

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def parameter_shapes(dims: ModelDims) -> Dict[str, Tuple[int, ...]]:
    """Shape of every parameter, in canonical (initialization and storage) order."""
    E, h, H, D = dims.embedding_dim, dims.direction_hidden, dims.stream_hidden, dims.decoder_hidden
    A, C = dims.attention_dim, dims.context_dim
    shapes: Dict[str, Tuple[int, ...]] = {"embedding": (dims.vocab_size, E)}
    for role in dims.encoder_roles:
        for direction in ("fwd", "bwd"):
            shapes[f"enc_{role}_{direction}_W"] = (4 * h, E + h)
            shapes[f"enc_{role}_{direction}_b"] = (4 * h,)
    shapes["dec_W"] = (4 * D, E + D)
    shapes["dec_b"] = (4 * D,)
    for role in dims.encoder_roles:
        shapes[f"attn_{role}_W_h"] = (A, H)
        shapes[f"attn_{role}_W_s"] = (A, D)
        shapes[f"attn_{role}_v"] = (A,)
        shapes[f"attn_{role}_b"] = (A,)
    shapes.update(
        {
            "ptr_w_h": (C,),
            "ptr_w_s": (D,),
            "ptr_w_x": (E,),
            "ptr_b": (1,),
            "out_V": (dims.output_hidden, D + C),
            "out_b": (dims.output_hidden,),
            "out_V2": (dims.vocab_size, dims.output_hidden),
            "out_b2": (dims.vocab_size,),
            "cls_U": (dims.classifier_hidden, C),
            "cls_b": (dims.classifier_hidden,),
            "cls_U2": (dims.n_domains, dims.classifier_hidden),
            "cls_b2": (dims.n_domains,),
        }
    )
    return shapes


class AttentionParams(NamedTuple):
    W_h: Tensor
    W_s: Tensor
    v: Tensor
    b: Tensor


class PointerParams(NamedTuple):
    w_h: Tensor
    w_s: Tensor
    w_x: Tensor
    b: Tensor


class ModelParams:
    """Every trainable array of the network, keyed by a stable name.

    Shapes are checked against ``parameter_shapes(dims)`` at construction.
    """

    def __init__(self, dims: ModelDims, arrays: Mapping[str, NDArray[Any]]) -> None:
        expected = parameter_shapes(dims)
        unknown = sorted(set(arrays) - set(expected))
        missing = sorted(set(expected) - set(arrays))
        if unknown or missing:
            raise DimensionError(f"Parameter set mismatch: missing {missing}, unexpected {unknown}")
        self.dims = dims
        self.tensors: Dict[str, Tensor] = {}
        for name, shape in expected.items():
            array = np.asarray(arrays[name], dtype=get_dtype())
            if array.shape != shape:
                raise DimensionError(f"Parameter '{name}' has shape {array.shape}, expected {shape}")
            self.tensors[name] = Tensor.parameter(array, name)

    @classmethod
    def initialize(cls, dims: ModelDims, seed: int) -> ModelParams:
        """Uniform ``[-0.08, 0.08]`` weights, zero biases, LSTM forget-gate biases at 1.0."""
        rng = np.random.Generator(np.random.PCG64(seed))
        arrays: Dict[str, NDArray[Any]] = {}
        for name, shape in parameter_shapes(dims).items():
            if name.endswith("_b") or name.endswith("_b2"):
                arrays[name] = np.zeros(shape)
            else:
                arrays[name] = rng.uniform(-INIT_RANGE, INIT_RANGE, size=shape)
        for name in _lstm_names(dims):
            hidden = parameter_shapes(dims)[f"{name}_b"][0] // 4
            arrays[f"{name}_b"][hidden:2 * hidden] = FORGET_BIAS
        return cls(dims, arrays)

    @classmethod
    def zeros(cls, dims: ModelDims) -> ModelParams:
        return cls(dims, {name: np.zeros(shape) for name, shape in parameter_shapes(dims).items()})

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self.tensors.items())

    def arrays(self) -> Dict[str, NDArray[Any]]:
        """Copies of the parameter arrays in canonical order."""
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def copy(self) -> ModelParams:
        return ModelParams(self.dims, self.arrays())

    def n_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def lstm(self, prefix: str) -> LSTMWeights:
        """LSTM weights stored under ``{prefix}_W`` / ``{prefix}_b``."""
        return LSTMWeights(W=self.tensors[f"{prefix}_W"], b=self.tensors[f"{prefix}_b"])

    def attention(self, encoder: int) -> AttentionParams:
        role = self.dims.encoder_roles[encoder]
        return AttentionParams(
            W_h=self.tensors[f"attn_{role}_W_h"],
            W_s=self.tensors[f"attn_{role}_W_s"],
            v=self.tensors[f"attn_{role}_v"],
            b=self.tensors[f"attn_{role}_b"],
        )

    def pointer(self) -> PointerParams:
        return PointerParams(
            w_h=self.tensors["ptr_w_h"],
            w_s=self.tensors["ptr_w_s"],
            w_x=self.tensors["ptr_w_x"],
            b=self.tensors["ptr_b"],
        )


def _lstm_names(dims: ModelDims) -> List[str]:
    names = [f"enc_{role}_{d}" for role in dims.encoder_roles for d in ("fwd", "bwd")]
    return names + ["dec"]
