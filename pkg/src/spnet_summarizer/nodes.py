"""Nodes of the convert, train and evaluate pipeline."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict

from spnet_summarizer.configuration import Configuration
from spnet_summarizer.corpus.conversion import convert_corpus, split_paths
from spnet_summarizer.corpus.jsonl import read_dialogs
from spnet_summarizer.corpus.multiwoz import SplitSizes
from spnet_summarizer.evaluation.report import evaluate_predictions, write_report
from spnet_summarizer.evaluation.summarize import DecodingOptions, summarize_corpus
from spnet_summarizer.misc import write_jsonl
from spnet_summarizer.numcore import precision
from spnet_summarizer.state import State
from spnet_summarizer.training.checkpoint import load_checkpoint, read_checkpoint_precision
from spnet_summarizer.training.trainer import artifact_path, train_model

logger = logging.getLogger(__name__)


def _model_dir(configuration: Configuration) -> str:
    return os.path.join(configuration.output_dir, "model")


def prepare_corpus(state: State) -> Dict[str, Any]:
    """Convert the input file, or generate a synthetic corpus, into JSONL splits.

    Args:
        state (State): The current pipeline state.

    Returns:
        Dict[str, Any]: Corpus location, manifest and the stage to run next.
    """
    configuration = Configuration.from_context()
    training = configuration.training_config()
    corpus_dir = os.path.join(configuration.output_dir, "corpus")
    manifest = convert_corpus(
        corpus_dir,
        input_path=state.input_path or None,
        synthetic_dialogs=None if state.input_path else configuration.synthetic_dialogs,
        sizes=SplitSizes.parse(configuration.split) if configuration.split else None,
        seed=training.seed,
    )

    checkpoint = artifact_path(_model_dir(configuration), "best.ckpt")
    reuse = os.path.exists(checkpoint) and not configuration.retrain
    if reuse:
        logger.info(f"Reusing checkpoint {checkpoint}")
    return {
        "corpus_dir": corpus_dir,
        "manifest": manifest,
        "checkpoint_path": checkpoint if reuse else "",
        "next": "evaluate_summarizer" if reuse else "train_summarizer",
    }


def train_summarizer(state: State) -> Dict[str, Any]:
    """Train on the train split, selecting parameters on the valid split.

    Args:
        state (State): The current pipeline state.

    Returns:
        Dict[str, Any]: Path of the best-validation checkpoint.
    """
    configuration = Configuration.from_context()
    paths = split_paths(state.corpus_dir)
    result = train_model(
        configuration.training_config(),
        read_dialogs(paths["train"]),
        read_dialogs(paths["valid"]),
        output_dir=_model_dir(configuration),
    )
    return {
        "checkpoint_path": result.checkpoint_path,
        "trained": True,
        "epochs_run": result.epochs_run,
        "next": None,
    }


def evaluate_summarizer(state: State) -> Dict[str, Any]:
    """Summarize the test split with the checkpoint and write the report.

    Args:
        state (State): The current pipeline state.

    Returns:
        Dict[str, Any]: Report and summaries paths with the headline scores.
    """
    configuration = Configuration.from_context()
    test = read_dialogs(split_paths(state.corpus_dir)["test"])
    with precision(read_checkpoint_precision(state.checkpoint_path)):
        checkpoint = load_checkpoint(state.checkpoint_path)
        summaries, failures = summarize_corpus(
            test,
            checkpoint.params,
            checkpoint.vocab,
            DecodingOptions.from_config(checkpoint.config),
            workers=configuration.workers,
        )
    report = evaluate_predictions(test, summaries, failures)

    report_dir = Path(configuration.output_dir) / "report"
    json_path, _ = write_report(report, report_dir)
    summaries_path = report_dir / "summaries.jsonl"
    write_jsonl(summaries_path, (s.to_record() for s in summaries))
    return {
        "report_path": str(json_path),
        "summaries_path": str(summaries_path),
        "metrics": report.headline(),
    }
