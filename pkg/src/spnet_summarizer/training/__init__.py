"""Joint summarization and domain-classification training."""

from spnet_summarizer.training.checkpoint import (
    Checkpoint,
    ScheduleState,
    load_checkpoint,
    read_checkpoint_precision,
    save_checkpoint,
)
from spnet_summarizer.training.config import TrainingConfig
from spnet_summarizer.training.examples import (
    TrainingExample,
    build_corpus_vocab,
    example_loss,
    prepare_example,
    prepare_examples,
)
from spnet_summarizer.training.losses import loss_domain, loss_summarization, loss_total
from spnet_summarizer.training.params_validation import validate_training_config
from spnet_summarizer.training.trainer import (
    EpochStats,
    Trainer,
    TrainingResult,
    apply_lr_rule,
    artifact_path,
    domain_inventory_of,
    epoch_permutation,
    train_epoch,
    train_model,
    validate_and_schedule,
    validation_loss,
)

__all__ = [
    "Checkpoint",
    "EpochStats",
    "ScheduleState",
    "Trainer",
    "TrainingConfig",
    "TrainingExample",
    "TrainingResult",
    "apply_lr_rule",
    "artifact_path",
    "build_corpus_vocab",
    "domain_inventory_of",
    "epoch_permutation",
    "example_loss",
    "load_checkpoint",
    "loss_domain",
    "loss_summarization",
    "loss_total",
    "prepare_example",
    "prepare_examples",
    "read_checkpoint_precision",
    "save_checkpoint",
    "train_epoch",
    "train_model",
    "validate_and_schedule",
    "validate_training_config",
    "validation_loss",
]
