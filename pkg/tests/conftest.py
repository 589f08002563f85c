from typing import Callable, Dict, Iterator, List

import numpy as np
import pytest

from spnet_summarizer.corpus.synthetic import generate_synthetic_corpus
from spnet_summarizer.corpus.types import DelexRecord, Dialog, SlotEntry
from spnet_summarizer.corpus.vocab import EOS, RESERVED_TOKENS, Vocabulary, extend_vocab
from spnet_summarizer.model.params import ModelDims, ModelParams, parameter_shapes
from spnet_summarizer.numcore import precision
from spnet_summarizer.training.config import TrainingConfig
from spnet_summarizer.training.examples import TrainingExample

TINY_WORDS = (
    "[place_name]", "[time]", "a", "at", "book", "table", "the", "to", "want", "you",
    "is", "it", "for", "and", "go", ".",
)


@pytest.fixture
def float64() -> Iterator[None]:
    """Run the test in 64-bit precision."""
    with precision("float64"):
        yield


@pytest.fixture
def tiny_dims() -> ModelDims:
    return ModelDims(
        vocab_size=len(RESERVED_TOKENS) + len(TINY_WORDS),
        n_domains=2,
        embedding_dim=8,
        encoder_hidden=16,
        decoder_hidden=32,
        attention_dim=8,
        output_hidden=8,
        classifier_hidden=8,
    )


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return Vocabulary(tokens=RESERVED_TOKENS + TINY_WORDS)


@pytest.fixture
def random_params(tiny_dims: ModelDims) -> Callable[[int, float], ModelParams]:
    """Build parameters with every entry (biases included) drawn uniformly from [-scale, scale]."""

    def build(seed: int, scale: float = 0.3) -> ModelParams:
        rng = np.random.default_rng(seed)
        arrays = {
            name: rng.uniform(-scale, scale, size=shape) for name, shape in parameter_shapes(tiny_dims).items()
        }
        return ModelParams(tiny_dims, arrays)

    return build


@pytest.fixture
def random_example(tiny_vocab: Vocabulary) -> Callable[[int], TrainingExample]:
    """Build a random example over the tiny vocabulary, with one OOV token per stream."""

    def build(seed: int) -> TrainingExample:
        rng = np.random.default_rng(seed)
        words = [t for t in tiny_vocab.tokens[len(RESERVED_TOKENS):] if not t.startswith("[")]
        user = [str(w) for w in rng.choice(words, size=int(rng.integers(2, 5)))] + ["[time]", "zorblax"]
        system = [str(w) for w in rng.choice(words, size=int(rng.integers(2, 4)))] + ["quux", "[place_name]"]
        table = [
            SlotEntry("[time]", "18:00", 0, len(user) - 2, "restaurant"),
            SlotEntry("[place_name]", "ask restaurant", 1, len(system) - 1, "restaurant"),
        ]
        record = DelexRecord(user_stream=user, system_stream=system, slot_table=table)
        extended = extend_vocab(tiny_vocab, user, system)
        target = [str(w) for w in rng.choice(words, size=int(rng.integers(2, 5)))] + ["[time]", "zorblax"]
        return TrainingExample(
            dialog_id=f"rand-{seed}",
            record=record,
            vocab=extended,
            target_tokens=target,
            target_ids=extended.encode(target) + [EOS],
            domains=np.asarray([1, int(rng.integers(0, 2))], dtype=np.int64),
        )

    return build


@pytest.fixture(scope="session")
def synthetic_dialogs() -> List[Dialog]:
    return generate_synthetic_corpus(seed=0, n_dialogs=32)


@pytest.fixture
def small_config() -> Callable[..., TrainingConfig]:
    """Build a config for a model small enough to train on a desk in seconds per epoch."""

    def build(**overrides: object) -> TrainingConfig:
        values: Dict[str, object] = dict(
            embedding_dim=16,
            encoder_hidden=32,
            decoder_hidden=64,
            attention_dim=16,
            output_hidden=32,
            classifier_hidden=16,
            learning_rate=0.005,
            batch_size=8,
            max_epochs=2,
            precision="float64",
            max_decode_len=40,
        )
        values.update(overrides)
        return TrainingConfig.from_dict(values)

    return build
