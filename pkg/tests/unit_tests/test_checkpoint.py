import hashlib
import struct

import numpy as np
import pytest

from spnet_summarizer.exceptions import CheckpointError, PrecisionMismatchError
from spnet_summarizer.model.params import ModelParams
from spnet_summarizer.numcore import AdamState, adam_step, precision
from spnet_summarizer.training.checkpoint import (
    Checkpoint,
    ScheduleState,
    load_checkpoint,
    read_checkpoint_precision,
    save_checkpoint,
)

DOMAINS = ("restaurant", "hotel")


@pytest.fixture
def checkpoint(float64, random_params, tiny_vocab, small_config) -> Checkpoint:
    params = random_params(5)
    adam = AdamState.for_params(params.tensors, lr=0.002)
    rng = np.random.default_rng(0)
    for _ in range(3):
        adam_step(params.tensors, {n: rng.normal(size=t.shape) for n, t in params.items()}, adam)
    return Checkpoint(
        config=small_config(),
        params=params,
        adam=adam,
        vocab=tiny_vocab,
        domain_inventory=DOMAINS,
        epoch=7,
        best_val_loss=1.25,
        best_epoch=6,
        schedule=ScheduleState(lr=0.001, previous_val_loss=1.3, halvings=1),
    )


def test_round_trip_is_bit_identical(checkpoint, tmp_path) -> None:
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    loaded = load_checkpoint(path)

    for name, array in checkpoint.params.arrays().items():
        np.testing.assert_array_equal(loaded.params[name].data, array)
        np.testing.assert_array_equal(loaded.adam.m[name], checkpoint.adam.m[name])
        np.testing.assert_array_equal(loaded.adam.v[name], checkpoint.adam.v[name])
    assert loaded.adam.t == 3
    assert loaded.adam.lr == 0.002
    assert loaded.schedule == checkpoint.schedule
    assert loaded.vocab == checkpoint.vocab
    assert loaded.domain_inventory == DOMAINS
    assert (loaded.epoch, loaded.best_epoch, loaded.best_val_loss) == (7, 6, 1.25)
    assert loaded.config == checkpoint.config
    assert loaded.params.dims == checkpoint.params.dims
    assert not (tmp_path / "model.ckpt.tmp").exists()


def test_truncated_file_is_rejected(checkpoint, tmp_path) -> None:
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)

    path.write_bytes(blob[:5])
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_corrupted_byte_is_rejected(checkpoint, tmp_path) -> None:
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0xFF
    path.write_bytes(bytes(blob))
    with pytest.raises(CheckpointError, match="checksum"):
        load_checkpoint(path)


def test_unknown_version_is_rejected(checkpoint, tmp_path) -> None:
    """Test a well-formed file whose version field says 2."""
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    body = bytearray(path.read_bytes()[: -hashlib.sha256().digest_size])
    struct.pack_into("<H", body, 4, 2)
    path.write_bytes(bytes(body) + hashlib.sha256(bytes(body)).digest())
    with pytest.raises(CheckpointError, match="version 2"):
        load_checkpoint(path)


def test_precision_mismatch(checkpoint, tmp_path) -> None:
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, checkpoint)
    assert read_checkpoint_precision(path) == "float64"
    with precision("float32"):
        with pytest.raises(PrecisionMismatchError):
            load_checkpoint(path)


def test_missing_file(tmp_path) -> None:
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "absent.ckpt")
    with pytest.raises(CheckpointError):
        read_checkpoint_precision(tmp_path / "absent.ckpt")


def test_shared_encoder_checkpoint_round_trip(float64, tiny_vocab, small_config, tmp_path) -> None:
    config = small_config(use_speaker_roles=False)
    params = ModelParams.initialize(config.model_dims(len(tiny_vocab), len(DOMAINS)), seed=3)
    path = tmp_path / "shared.ckpt"
    save_checkpoint(
        path, Checkpoint(config, params, AdamState.for_params(params.tensors), tiny_vocab, DOMAINS)
    )
    loaded = load_checkpoint(path)
    assert loaded.params.dims.speaker_roles is False
    assert loaded.config.use_speaker_roles is False
    np.testing.assert_array_equal(loaded.params["enc_dlg_bwd_W"].data, params["enc_dlg_bwd_W"].data)
