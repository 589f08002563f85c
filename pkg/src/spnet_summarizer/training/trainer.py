"""Training loop: teacher-forced joint loss, Adam, validation-driven LR halving."""

from __future__ import annotations

import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np
import pandas as pd  # type: ignore
from numpy.typing import NDArray

from spnet_summarizer.corpus.types import Dialog
from spnet_summarizer.corpus.vocab import Vocabulary
from spnet_summarizer.exceptions import ConfigurationError, ContractError, CorpusError, NumericalError
from spnet_summarizer.model.params import ModelParams
from spnet_summarizer.numcore import AdamState, Graph, adam_step, backward, clip_grad_norm, get_precision, precision
from spnet_summarizer.training.checkpoint import Checkpoint, ScheduleState, load_checkpoint, save_checkpoint
from spnet_summarizer.training.config import TrainingConfig
from spnet_summarizer.training.examples import (
    TrainingExample,
    build_corpus_vocab,
    example_loss,
    prepare_examples,
)
from spnet_summarizer.training.params_validation import validate_training_config

LOG_COLUMNS = ["epoch", "loss1", "loss2", "total", "val_loss", "lr"]
DEFAULT_LOG_PREFIX = "training"


def artifact_path(output_dir: str, suffix: str, log_prefix: str = DEFAULT_LOG_PREFIX) -> str:
    """Path of a run artifact such as ``best.ckpt``, ``last.ckpt`` or ``log.csv``."""
    return os.path.join(output_dir, f"{log_prefix}_{suffix}")


@dataclass
class EpochStats:
    """Mean losses of one epoch (over examples) and the per-batch totals."""

    epoch: int
    loss1: float
    loss2: float
    total: float
    lr: float
    batch_losses: List[float] = field(default_factory=list)
    grad_norm: float = 0.0


def epoch_permutation(n: int, seed: int, epoch: int) -> NDArray[np.int64]:
    """Shuffle order of an epoch; depends only on ``(seed, epoch)``."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, epoch])))
    return rng.permutation(n)


def train_epoch(
    examples: Sequence[TrainingExample],
    params: ModelParams,
    optimizer: AdamState,
    config: TrainingConfig,
    epoch: int = 0,
) -> EpochStats:
    """One pass over ``examples`` in shuffled batches with one Adam step per batch.

    The batch gradient is the mean of the per-example gradients.

    Raises:
        ContractError: If there are no examples.
        NumericalError: If a loss is not finite; the error names the batch.
    """
    if not examples:
        raise ContractError("Cannot train on an empty corpus")
    order = epoch_permutation(len(examples), config.seed, epoch)
    sums = {"loss1": 0.0, "loss2": 0.0, "total": 0.0}
    batch_losses: List[float] = []
    grad_norm = 0.0
    for batch_index, start in enumerate(range(0, len(order), config.batch_size)):
        batch = [examples[i] for i in order[start:start + config.batch_size]]
        grads: Dict[str, NDArray[Any]] = {}
        batch_total = 0.0
        for example in batch:
            with Graph() as graph:
                losses = example_loss(example, params, config.lambda_domain)
            total = losses.total.item()
            if not math.isfinite(total):
                raise NumericalError(
                    f"Non-finite loss in batch {batch_index} of epoch {epoch + 1} (dialog {example.dialog_id})",
                    batch_index=batch_index,
                )
            for name, grad in backward(graph, losses.total, params.tensors).items():
                grads[name] = grads[name] + grad if name in grads else grad
            sums["loss1"] += losses.summarization.item()
            sums["loss2"] += losses.domain.item()
            sums["total"] += total
            batch_total += total
        scale = 1.0 / len(batch)
        for name in grads:
            grads[name] = grads[name] * grads[name].dtype.type(scale)
        grad_norm = clip_grad_norm(grads, config.max_grad_norm)
        adam_step(params.tensors, grads, optimizer)
        batch_losses.append(batch_total / len(batch))
    n = len(examples)
    return EpochStats(
        epoch=epoch + 1,
        loss1=sums["loss1"] / n,
        loss2=sums["loss2"] / n,
        total=sums["total"] / n,
        lr=optimizer.lr,
        batch_losses=batch_losses,
        grad_norm=grad_norm,
    )


def validation_loss(examples: Sequence[TrainingExample], params: ModelParams, lambda_domain: float) -> float:
    """Mean joint loss without recording a graph."""
    if not examples:
        raise ContractError("Validation needs at least one dialog")
    return sum(example_loss(e, params, lambda_domain).total.item() for e in examples) / len(examples)


def apply_lr_rule(schedule: ScheduleState, val_loss: float) -> float:
    """Halve the learning rate when ``val_loss`` exceeds the previous epoch's."""
    if schedule.enabled and schedule.previous_val_loss is not None and val_loss > schedule.previous_val_loss:
        schedule.lr /= 2.0
        schedule.halvings += 1
    schedule.previous_val_loss = val_loss
    return schedule.lr


def validate_and_schedule(
    params: ModelParams,
    examples: Sequence[TrainingExample],
    schedule: ScheduleState,
    lambda_domain: float,
) -> Tuple[float, float]:
    """Return the validation loss and the learning rate for the next epoch."""
    val_loss = validation_loss(examples, params, lambda_domain)
    return val_loss, apply_lr_rule(schedule, val_loss)


@dataclass
class TrainingResult:
    params: ModelParams
    last_params: ModelParams
    vocab: Vocabulary
    domain_inventory: Tuple[str, ...]
    history: pd.DataFrame
    best_epoch: Optional[int]
    best_val_loss: Optional[float]
    epochs_run: int
    converged: bool
    checkpoint_path: Optional[str] = None
    last_checkpoint_path: Optional[str] = None


class Trainer:
    """Runs epochs, keeps the best-validation parameters and writes the run's artifacts."""

    def __init__(self,
                 config: TrainingConfig,
                 train_examples: Sequence[TrainingExample],
                 valid_examples: Sequence[TrainingExample],
                 vocab: Vocabulary,
                 domain_inventory: Sequence[str],
                 output_dir: Optional[str] = None,
                 log_prefix: str = DEFAULT_LOG_PREFIX,
                 resume: Optional[Checkpoint] = None,
                 resume_best: Optional[Checkpoint] = None) -> None:
        """Initialize the trainer.

        Args:
            config: Validated training configuration.
            train_examples: Prepared training dialogs.
            valid_examples: Prepared validation dialogs.
            vocab: Fixed vocabulary the examples were prepared with.
            domain_inventory: Domain names, in classifier output order.
            output_dir: Directory for checkpoints, CSV log and curve (if None, nothing is saved)
            log_prefix: Prefix for log and artifact file names
            resume: Checkpoint to continue from; the run then picks up at its epoch.
            resume_best: Best-validation checkpoint of the interrupted run, when it is
                not the resume checkpoint itself.
        """
        if get_precision() != config.precision:
            raise ConfigurationError(
                f"Session precision {get_precision()} does not match the configured {config.precision}"
            )
        self.config = config
        self.train_examples = list(train_examples)
        self.valid_examples = list(valid_examples)
        self.vocab = vocab
        self.domain_inventory = tuple(domain_inventory)

        # Tracking
        self.history: Dict[str, List[Any]] = {column: [] for column in LOG_COLUMNS}
        self.best_val_loss: Optional[float] = None
        self.best_epoch: Optional[int] = None
        self.start_epoch = 0

        # Setup output directory and logging
        self.output_dir = output_dir
        self.log_prefix = log_prefix
        self.logger: logging.Logger
        self._setup_logging()

        if resume is not None:
            try:
                self._restore(resume, resume_best)
            except Exception:
                self._close_logging()
                raise
        else:
            dims = config.model_dims(len(vocab), len(self.domain_inventory))
            self.params = ModelParams.initialize(dims, config.seed)
            self.optimizer = AdamState.for_params(
                self.params.tensors,
                lr=config.learning_rate,
                beta1=config.beta1,
                beta2=config.beta2,
                epsilon=config.adam_epsilon,
            )
            self.schedule = ScheduleState(lr=config.learning_rate, enabled=config.lr_halving)
            self.best_params = self.params.copy()

    def _setup_logging(self) -> None:
        """Set up logging configuration."""
        # Only create directories and files if output_dir is provided
        if self.output_dir is not None:
            os.makedirs(self.output_dir, exist_ok=True)
            log_file = os.path.join(self.output_dir, f"{self.log_prefix}.log")

        # Configure root logger
        logging.basicConfig(
            level=logging.INFO,
            format='%(asctime)s %(levelname)s: %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        # Setup logger
        self.logger = logging.getLogger(f"{self.log_prefix}_{id(self)}")
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        # Always add console handler
        formatter = logging.Formatter('%(asctime)s %(levelname)s: %(message)s', datefmt='%Y-%m-%d %H:%M:%S')
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        # Only add file handler if output_dir is provided
        if self.output_dir is not None:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            self.logger.addHandler(file_handler)

        self.logger.info("=== Starting new training run ===")
        if self.output_dir is not None:
            self.logger.info(f"Output directory: {self.output_dir}")
        else:
            self.logger.info("No output directory specified - files will not be saved")
        c = self.config
        self.logger.info(
            f"Configuration: lambda={c.lambda_domain}, lr={c.learning_rate}, batch={c.batch_size}, "
            f"epochs={c.max_epochs}, slots={'on' if c.use_slot_scaffold else 'off'}, "
            f"roles={'on' if c.use_speaker_roles else 'off'}, "
            f"seed={c.seed}, precision={c.precision}"
        )
        self.logger.info(
            f"Corpus: {len(self.train_examples)} training / {len(self.valid_examples)} validation dialogs, "
            f"vocabulary {len(self.vocab)}, domains {list(self.domain_inventory)}"
        )

    def _close_logging(self) -> None:
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

    def _restore(self, checkpoint: Checkpoint, best: Optional[Checkpoint] = None) -> None:
        if checkpoint.vocab != self.vocab or checkpoint.domain_inventory != self.domain_inventory:
            raise ConfigurationError("Resume checkpoint was trained with a different vocabulary or domain inventory")
        if checkpoint.params.dims != self.config.model_dims(len(self.vocab), len(self.domain_inventory)):
            raise ConfigurationError("Resume checkpoint has different model dimensions than the configuration")
        self.params = checkpoint.params
        self.optimizer = checkpoint.adam
        self.schedule = checkpoint.schedule or ScheduleState(lr=checkpoint.adam.lr, enabled=self.config.lr_halving)
        self.start_epoch = checkpoint.epoch
        self.best_val_loss = checkpoint.best_val_loss
        self.best_epoch = checkpoint.best_epoch
        if checkpoint.best_epoch is None or checkpoint.best_epoch == checkpoint.epoch:
            self.best_params = checkpoint.params.copy()
        elif best is not None and best.epoch == checkpoint.best_epoch and best.vocab == self.vocab:
            self.best_params = best.params
        else:
            self.logger.warning(
                f"Best checkpoint of epoch {checkpoint.best_epoch} not found; best-model tracking restarts"
            )
            self.best_val_loss = None
            self.best_epoch = None
            self.best_params = checkpoint.params.copy()
        if self.output_dir is not None:
            log_path = self._path("log.csv")
            if os.path.exists(log_path):
                previous = pd.read_csv(log_path)
                previous = previous[previous["epoch"] <= checkpoint.epoch]
                for column in LOG_COLUMNS:
                    self.history[column] = previous[column].tolist()
            if self.best_epoch is not None and not os.path.exists(self._path("best.ckpt")):
                save_checkpoint(self._path("best.ckpt"), self._checkpoint(self.best_params, self.best_epoch))
        self.logger.info(f"Resuming from epoch {checkpoint.epoch} (lr={self.schedule.lr})")

    def _path(self, suffix: str) -> str:
        assert self.output_dir is not None
        return artifact_path(self.output_dir, suffix, self.log_prefix)

    def _checkpoint(self, params: ModelParams, epoch: int) -> Checkpoint:
        return Checkpoint(
            config=self.config,
            params=params,
            adam=self.optimizer,
            vocab=self.vocab,
            domain_inventory=self.domain_inventory,
            epoch=epoch,
            best_val_loss=self.best_val_loss,
            best_epoch=self.best_epoch,
            schedule=self.schedule,
        )

    def fit(self) -> TrainingResult:
        """Train until ``max_epochs`` or until the summarization loss converges.

        The run logger's handlers are closed when training ends.
        """
        try:
            return self._fit()
        finally:
            self._close_logging()

    def _fit(self) -> TrainingResult:
        t0 = time.perf_counter()
        converged = False
        epoch = self.start_epoch
        for epoch in range(self.start_epoch, self.config.max_epochs):
            stats = train_epoch(self.train_examples, self.params, self.optimizer, self.config, epoch)
            val_loss, next_lr = validate_and_schedule(
                self.params, self.valid_examples, self.schedule, self.config.lambda_domain
            )
            self.optimizer.lr = next_lr
            self._record(stats, val_loss)

            if self.best_val_loss is None or val_loss < self.best_val_loss:
                self.best_val_loss = val_loss
                self.best_epoch = stats.epoch
                self.best_params = self.params.copy()
                if self.output_dir is not None:
                    save_checkpoint(self._path("best.ckpt"), self._checkpoint(self.best_params, stats.epoch))
            if self.output_dir is not None:
                save_checkpoint(self._path("last.ckpt"), self._checkpoint(self.params, stats.epoch))
                self._save_log()

            if self.config.convergence_loss is not None and stats.loss1 < self.config.convergence_loss:
                self.logger.info(f"Summarization loss {stats.loss1:.4f} below {self.config.convergence_loss}, stopping")
                converged = True
                epoch += 1
                break
        else:
            epoch = max(self.start_epoch, self.config.max_epochs)
        elapsed = time.perf_counter() - t0

        if self.output_dir is not None and self.history["epoch"]:
            self._create_visualization()
        self._log_results(elapsed, epoch, converged)

        return TrainingResult(
            params=self.best_params,
            last_params=self.params,
            vocab=self.vocab,
            domain_inventory=self.domain_inventory,
            history=pd.DataFrame(self.history, columns=LOG_COLUMNS),
            best_epoch=self.best_epoch,
            best_val_loss=self.best_val_loss,
            epochs_run=epoch - self.start_epoch,
            converged=converged,
            checkpoint_path=self._path("best.ckpt") if self.output_dir is not None else None,
            last_checkpoint_path=self._path("last.ckpt") if self.output_dir is not None else None,
        )

    def _record(self, stats: EpochStats, val_loss: float) -> None:
        row = {
            "epoch": stats.epoch,
            "loss1": stats.loss1,
            "loss2": stats.loss2,
            "total": stats.total,
            "val_loss": val_loss,
            "lr": stats.lr,
        }
        for column in LOG_COLUMNS:
            self.history[column].append(row[column])
        self.logger.info(
            f"[Epoch {stats.epoch}] loss1={stats.loss1:.4f}, loss2={stats.loss2:.4f}, "
            f"total={stats.total:.4f}, val={val_loss:.4f}, lr={stats.lr:.6g}, |g|={stats.grad_norm:.3f}"
        )

    def _save_log(self) -> None:
        pd.DataFrame(self.history, columns=LOG_COLUMNS).to_csv(self._path("log.csv"), index=False)

    def _create_visualization(self) -> None:
        """Plot training and validation loss per epoch next to the CSV log."""
        plt.figure()
        plt.plot(self.history["epoch"], self.history["total"], marker="o", label="train")
        plt.plot(self.history["epoch"], self.history["val_loss"], marker="x", label="validation")
        plt.title("Joint loss over epochs")
        plt.xlabel("Epoch")
        plt.ylabel("Loss")
        plt.legend()
        plt.grid(True)
        plt.savefig(self._path("curve.png"))
        plt.close()

    def _log_results(self, elapsed: float, epoch: int, converged: bool) -> None:
        """Log the final training summary."""
        self.logger.info("=== Final Results ===")
        self.logger.info(f"Epochs completed:          {epoch}")
        self.logger.info(f"Converged:                 {converged}")
        if self.history["epoch"]:
            self.logger.info(f"Final summarization loss:  {self.history['loss1'][-1]:.4f}")
            self.logger.info(f"Final domain loss:         {self.history['loss2'][-1]:.4f}")
        if self.best_val_loss is not None:
            self.logger.info(f"Best validation loss:      {self.best_val_loss:.4f} (epoch {self.best_epoch})")
        self.logger.info(f"Learning rate halvings:    {self.schedule.halvings}")
        self.logger.info(f"Training time (s):         {elapsed:.2f}")
        if self.output_dir is not None:
            self.logger.info(f"Results directory:         {self.output_dir}")
        else:
            self.logger.info("No files saved (output_dir=None)")


def domain_inventory_of(dialogs: Sequence[Dialog]) -> Tuple[str, ...]:
    """The shared domain inventory of a corpus.

    Raises:
        CorpusError: If the corpus is empty or mixes inventories.
    """
    if not dialogs:
        raise CorpusError("The corpus is empty")
    inventory = dialogs[0].domain_inventory
    for dialog in dialogs:
        if dialog.domain_inventory != inventory:
            raise CorpusError(f"Dialog {dialog.id} uses a different domain inventory")
    return tuple(inventory)


def train_model(
    config: TrainingConfig,
    train_dialogs: Sequence[Dialog],
    valid_dialogs: Sequence[Dialog],
    output_dir: Optional[str] = None,
    resume_from: Optional[str] = None,
    log_prefix: str = DEFAULT_LOG_PREFIX,
) -> TrainingResult:
    """Validate the config, build the vocabulary and examples, and train.

    Runs under ``config.precision``.
    """
    validate_training_config(config)
    inventory = domain_inventory_of(list(train_dialogs) + list(valid_dialogs))
    with precision(config.precision):
        resume = load_checkpoint(resume_from) if resume_from is not None else None
        resume_best = _find_best_checkpoint(resume, resume_from, output_dir, log_prefix)
        vocab = resume.vocab if resume is not None else build_corpus_vocab(
            train_dialogs, config.vocab_size, config.use_slot_scaffold
        )
        trainer = Trainer(
            config,
            prepare_examples(train_dialogs, vocab, config.use_slot_scaffold, config.use_speaker_roles),
            prepare_examples(valid_dialogs, vocab, config.use_slot_scaffold, config.use_speaker_roles),
            vocab,
            inventory,
            output_dir=output_dir,
            log_prefix=log_prefix,
            resume=resume,
            resume_best=resume_best,
        )
        return trainer.fit()


def _find_best_checkpoint(
    resume: Optional[Checkpoint], resume_from: Optional[str], output_dir: Optional[str], log_prefix: str
) -> Optional[Checkpoint]:
    """Load the best-validation checkpoint that belongs to ``resume``.

    Looks in the output directory, then next to the resume checkpoint; a candidate
    counts only if it was saved at the resume checkpoint's best epoch.
    """
    if resume is None or resume.best_epoch is None or resume.best_epoch == resume.epoch:
        return None
    candidates = []
    if output_dir is not None:
        candidates.append(artifact_path(output_dir, "best.ckpt", log_prefix))
    if resume_from is not None:
        candidates.append(artifact_path(os.path.dirname(resume_from) or ".", "best.ckpt", log_prefix))
    for path in dict.fromkeys(candidates):
        if not os.path.exists(path):
            continue
        best = load_checkpoint(path)
        if best.epoch == resume.best_epoch and best.best_val_loss == resume.best_val_loss:
            return best
    return None
