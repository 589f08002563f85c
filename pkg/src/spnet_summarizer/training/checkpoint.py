"""Binary checkpoint format.

Layout, little-endian throughout::

    b"SPNT" | u16 format version | u8 float width (4 or 8) | u32 header length
    | JSON header | parameter arrays | Adam m arrays | Adam v arrays | SHA-256 of all preceding bytes

The header carries the training config, model dimensions, vocabulary, domain
inventory, epoch and schedule counters, Adam scalars and the shape table. Arrays
follow the shape table order.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.corpus.vocab import Vocabulary
from spnet_summarizer.exceptions import CheckpointError, PrecisionMismatchError
from spnet_summarizer.misc import PathLike
from spnet_summarizer.model.params import ModelDims, ModelParams, parameter_shapes
from spnet_summarizer.numcore import AdamState, get_precision
from spnet_summarizer.numcore.tensor import PRECISIONS
from spnet_summarizer.training.config import TrainingConfig

logger = logging.getLogger(__name__)

MAGIC = b"SPNT"
FORMAT_VERSION = 1
_PREAMBLE = struct.Struct("<4sHBI")
_DIGEST_SIZE = hashlib.sha256().digest_size
_WIDTHS = {"float32": 4, "float64": 8}


@dataclass
class ScheduleState:
    """Learning-rate schedule counters carried across epochs."""

    lr: float
    previous_val_loss: Optional[float] = None
    halvings: int = 0
    enabled: bool = True


@dataclass
class Checkpoint:
    config: TrainingConfig
    params: ModelParams
    adam: AdamState
    vocab: Vocabulary
    domain_inventory: Tuple[str, ...]
    epoch: int = 0
    best_val_loss: Optional[float] = None
    best_epoch: Optional[int] = None
    schedule: Optional[ScheduleState] = None

    @property
    def precision(self) -> str:
        return self.config.precision


def save_checkpoint(path: PathLike, checkpoint: Checkpoint) -> None:
    """Write ``checkpoint`` atomically.

    Raises:
        CheckpointError: If the file cannot be written.
    """
    precision = get_precision()
    dtype = np.dtype(PRECISIONS[precision]).newbyteorder("<")
    params = checkpoint.params
    shapes = parameter_shapes(params.dims)
    schedule = checkpoint.schedule or ScheduleState(lr=checkpoint.adam.lr)
    header = {
        "config": checkpoint.config.to_dict(),
        "dims": params.dims.to_dict(),
        "vocab": list(checkpoint.vocab.tokens),
        "domain_inventory": list(checkpoint.domain_inventory),
        "epoch": checkpoint.epoch,
        "best_val_loss": checkpoint.best_val_loss,
        "best_epoch": checkpoint.best_epoch,
        "schedule": {
            "lr": schedule.lr,
            "previous_val_loss": schedule.previous_val_loss,
            "halvings": schedule.halvings,
            "enabled": schedule.enabled,
        },
        "adam": {
            "lr": checkpoint.adam.lr,
            "beta1": checkpoint.adam.beta1,
            "beta2": checkpoint.adam.beta2,
            "epsilon": checkpoint.adam.epsilon,
            "t": checkpoint.adam.t,
        },
        "shapes": [[name, list(shape)] for name, shape in shapes.items()],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")

    chunks: List[bytes] = [_PREAMBLE.pack(MAGIC, FORMAT_VERSION, _WIDTHS[precision], len(header_bytes)), header_bytes]
    for source in (params.arrays(), checkpoint.adam.m, checkpoint.adam.v):
        for name, shape in shapes.items():
            array = source.get(name)
            if array is None:
                array = np.zeros(shape)
            chunks.append(np.ascontiguousarray(array, dtype=dtype).tobytes())
    body = b"".join(chunks)

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(tmp, "wb") as f:
            f.write(body)
            f.write(hashlib.sha256(body).digest())
        os.replace(tmp, path)
    except OSError as e:
        raise CheckpointError(f"Cannot write checkpoint '{path}': {e}") from e
    logger.debug(f"Checkpoint written to {path} (epoch {checkpoint.epoch})")


def read_checkpoint_precision(path: PathLike) -> str:
    """Precision a checkpoint was written in, read from its preamble only.

    Raises:
        CheckpointError: If the file is unreadable or not a checkpoint.
    """
    try:
        with open(path, "rb") as f:
            preamble = f.read(_PREAMBLE.size)
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint '{path}': {e}") from e
    if len(preamble) < _PREAMBLE.size:
        raise CheckpointError(f"Checkpoint '{path}' is truncated")
    magic, _, width, _ = _PREAMBLE.unpack(preamble)
    if magic != MAGIC:
        raise CheckpointError(f"'{path}' is not a checkpoint file")
    for name, w in _WIDTHS.items():
        if w == width:
            return name
    raise CheckpointError(f"Checkpoint '{path}' has an unknown float width {width}")


def load_checkpoint(path: PathLike) -> Checkpoint:
    """Read a checkpoint written by ``save_checkpoint``.

    Nothing is constructed until the checksum, version and precision are verified.

    Raises:
        CheckpointError: On unreadable, truncated, corrupted or wrong-version files.
        PrecisionMismatchError: If the file's precision differs from the session's.
    """
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise CheckpointError(f"Cannot read checkpoint '{path}': {e}") from e
    if len(blob) < _PREAMBLE.size + _DIGEST_SIZE:
        raise CheckpointError(f"Checkpoint '{path}' is truncated")
    body, digest = blob[:-_DIGEST_SIZE], blob[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointError(f"Checkpoint '{path}' failed its checksum (truncated or corrupted)")

    magic, version, width, header_len = _PREAMBLE.unpack_from(body)
    if magic != MAGIC:
        raise CheckpointError(f"'{path}' is not a checkpoint file")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"Checkpoint format version {version} is not supported (expected {FORMAT_VERSION})")
    session = get_precision()
    if width != _WIDTHS[session]:
        stored = next((name for name, w in _WIDTHS.items() if w == width), f"{width * 8}-bit")
        raise PrecisionMismatchError(
            f"Checkpoint '{path}' holds {stored} arrays but the session precision is {session}"
        )

    offset = _PREAMBLE.size
    try:
        header = json.loads(body[offset:offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"Checkpoint '{path}' has an unreadable header: {e}") from e
    offset += header_len

    dims = ModelDims(**header["dims"])
    shapes = [(name, tuple(shape)) for name, shape in header["shapes"]]
    if dict(shapes) != parameter_shapes(dims):
        raise CheckpointError(f"Checkpoint '{path}' shape table does not match its model dimensions")
    dtype = np.dtype(PRECISIONS[session]).newbyteorder("<")
    expected = offset + 3 * sum(int(np.prod(shape)) for _, shape in shapes) * width
    if expected != len(body):
        raise CheckpointError(f"Checkpoint '{path}' has {len(body)} bytes of content, expected {expected}")

    groups: List[Dict[str, NDArray[Any]]] = []
    for _ in range(3):
        group: Dict[str, NDArray[Any]] = {}
        for name, shape in shapes:
            count = int(np.prod(shape))
            array = np.frombuffer(body, dtype=dtype, count=count, offset=offset).reshape(shape)
            group[name] = array.astype(PRECISIONS[session], copy=True)
            offset += count * width
        groups.append(group)

    adam_header = header["adam"]
    adam = AdamState(
        lr=adam_header["lr"],
        beta1=adam_header["beta1"],
        beta2=adam_header["beta2"],
        epsilon=adam_header["epsilon"],
        t=adam_header["t"],
        m=groups[1],
        v=groups[2],
    )
    schedule_header = header["schedule"]
    return Checkpoint(
        config=TrainingConfig.from_dict(header["config"]),
        params=ModelParams(dims, groups[0]),
        adam=adam,
        vocab=Vocabulary(tokens=tuple(header["vocab"])),
        domain_inventory=tuple(header["domain_inventory"]),
        epoch=header["epoch"],
        best_val_loss=header["best_val_loss"],
        best_epoch=header["best_epoch"],
        schedule=ScheduleState(
            lr=schedule_header["lr"],
            previous_val_loss=schedule_header["previous_val_loss"],
            halvings=schedule_header["halvings"],
            enabled=schedule_header["enabled"],
        ),
    )
