"""Training hyperparameters."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Mapping, Optional

from spnet_summarizer.exceptions import ConfigurationError
from spnet_summarizer.model.params import ModelDims


@dataclass(kw_only=True)
class TrainingConfig:
    """Objective, optimizer, schedule, decoding and model-shape settings of a run."""

    # === OBJECTIVE ===
    lambda_domain: float = field(
        default=0.5,
        metadata={"description": "Weight of the domain classification loss; 0 ablates the domain scaffold."},
    )
    use_slot_scaffold: bool = field(
        default=True,
        metadata={
            "description": "Train on delexicalized streams and fill slots from attention. "
            "False trains on surface tokens with the copy mechanism only."
        },
    )
    use_speaker_roles: bool = field(
        default=True,
        metadata={
            "description": "Encode user and system turns with separate encoders. "
            "False reads the interleaved dialog with one shared encoder."
        },
    )

    # === OPTIMIZER ===
    learning_rate: float = field(default=0.001, metadata={"description": "Initial Adam learning rate."})
    beta1: float = field(default=0.9, metadata={"description": "Adam first-moment decay."})
    beta2: float = field(default=0.999, metadata={"description": "Adam second-moment decay."})
    adam_epsilon: float = field(default=1e-8, metadata={"description": "Adam denominator epsilon."})
    max_grad_norm: Optional[float] = field(
        default=None,
        metadata={"description": "Clip the batch gradient to this global L2 norm; None disables clipping."},
    )

    # === SCHEDULE ===
    batch_size: int = field(default=8, metadata={"description": "Dialogs per optimizer step."})
    max_epochs: int = field(default=300, metadata={"description": "Epoch cap."})
    lr_halving: bool = field(
        default=True,
        metadata={"description": "Halve the learning rate whenever the validation loss increases."},
    )
    convergence_loss: Optional[float] = field(
        default=None,
        metadata={"description": "Stop once the epoch's mean summarization loss falls below this value."},
    )
    seed: int = field(default=0, metadata={"description": "Seed for initialization and batch shuffling."})
    precision: str = field(default="float32", metadata={"description": "float32 or float64."})

    # === DECODING ===
    beam_size: int = field(default=3, metadata={"description": "Beam width used for summarization."})
    max_decode_len: int = field(default=120, metadata={"description": "Maximum summary length in tokens."})
    length_penalty: Optional[float] = field(
        default=None, metadata={"description": "Length-penalty exponent alpha; None disables it."}
    )
    coverage_penalty: Optional[float] = field(
        default=None, metadata={"description": "Coverage-penalty weight beta; None disables it."}
    )

    # === MODEL SHAPE ===
    vocab_size: Optional[int] = field(
        default=None,
        metadata={"description": "Cap on the fixed vocabulary, reserved and slot tokens included; None keeps all."},
    )
    embedding_dim: int = field(default=128, metadata={"description": "Word embedding size."})
    encoder_hidden: int = field(
        default=256, metadata={"description": "Hidden size per role encoder (half per direction)."}
    )
    decoder_hidden: int = field(
        default=512, metadata={"description": "Decoder hidden size; must be twice encoder_hidden."}
    )
    attention_dim: int = field(default=256, metadata={"description": "Attention projection size."})
    output_hidden: int = field(default=512, metadata={"description": "Hidden size of the output projection."})
    classifier_hidden: int = field(default=256, metadata={"description": "Hidden size of the domain classifier."})

    @classmethod
    def field_names(cls) -> set[str]:
        return {f.name for f in fields(cls) if f.init}

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> TrainingConfig:
        """Build a config from a mapping, rejecting unknown keys."""
        unknown = sorted(set(values) - cls.field_names())
        if unknown:
            raise ConfigurationError(f"Unknown training option(s): {', '.join(unknown)}")
        return cls(**dict(values))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def model_dims(self, vocab_size: int, n_domains: int) -> ModelDims:
        return ModelDims(
            vocab_size=vocab_size,
            n_domains=n_domains,
            embedding_dim=self.embedding_dim,
            encoder_hidden=self.encoder_hidden,
            decoder_hidden=self.decoder_hidden,
            attention_dim=self.attention_dim,
            output_hidden=self.output_hidden,
            classifier_hidden=self.classifier_hidden,
            speaker_roles=self.use_speaker_roles,
        )
