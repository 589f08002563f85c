"""Command-line entry points: convert, train, summarize, evaluate and pipeline.

Exit codes: 0 on success, 2 for configuration, input, schema or checkpoint errors,
3 when training or decoding fails numerically.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv

from spnet_summarizer.config_parser import RunConfig, parse_run_config
from spnet_summarizer.corpus.conversion import convert_corpus
from spnet_summarizer.corpus.jsonl import read_dialogs
from spnet_summarizer.corpus.slots import load_canonical_table
from spnet_summarizer.evaluation.report import evaluate_predictions, write_report
from spnet_summarizer.evaluation.summarize import DecodingOptions, DialogSummary, summarize_corpus
from spnet_summarizer.exceptions import NumericalError, OptimizationError, SPNetError
from spnet_summarizer.graph import graph
from spnet_summarizer.misc import read_jsonl, write_jsonl
from spnet_summarizer.numcore import precision
from spnet_summarizer.training.checkpoint import Checkpoint, load_checkpoint, read_checkpoint_precision
from spnet_summarizer.training.trainer import train_model

logger = logging.getLogger("spnet_summarizer")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
LOG_LEVEL_ENV = "SPNET_LOG_LEVEL"


def setup_logging() -> None:
    """Configure the root logger; the level comes from ``SPNET_LOG_LEVEL``."""
    level_name = os.getenv(LOG_LEVEL_ENV, "INFO").upper()
    level = getattr(logging, level_name, None)
    logging.basicConfig(
        level=level if isinstance(level, int) else logging.INFO,
        format='%(asctime)s %(levelname)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        stream=sys.stderr,
    )


# === COMMANDS ===

def cmd_convert(config: RunConfig) -> int:
    """Write train/valid/test JSONL splits and a manifest."""
    assert config.output_dir is not None
    table = load_canonical_table(config.canonical_table) if config.canonical_table else None
    manifest = convert_corpus(
        config.output_dir,
        input_path=config.input,
        synthetic_dialogs=config.synthetic,
        sizes=config.split,
        seed=config.seed,
        table=table,
    )
    counts = manifest["counts"]
    logger.info(f"Split counts: train={counts['train']}, valid={counts['valid']}, test={counts['test']}")
    return EXIT_OK


def cmd_train(config: RunConfig) -> int:
    """Train, writing best/last checkpoints and the per-epoch log."""
    assert config.train is not None and config.valid is not None and config.output_dir is not None
    result = train_model(
        config.training,
        read_dialogs(config.train),
        read_dialogs(config.valid),
        output_dir=str(config.output_dir),
        resume_from=str(config.resume) if config.resume else None,
    )
    logger.info(f"Best checkpoint: {result.checkpoint_path} (epoch {result.best_epoch})")
    return EXIT_OK


def _load_for_inference(config: RunConfig) -> Checkpoint:
    """Load the checkpoint in its own precision unless one was requested explicitly."""
    assert config.checkpoint is not None
    if not config.explicit_precision:
        config.training.precision = read_checkpoint_precision(config.checkpoint)
    with precision(config.training.precision):
        return load_checkpoint(config.checkpoint)


def _summarize(config: RunConfig, dialogs: List[Any]) -> tuple[List[DialogSummary], Dict[str, str]]:
    checkpoint = _load_for_inference(config)
    options = DecodingOptions.from_config(checkpoint.config, beam=config.beam, greedy=config.greedy)
    with precision(config.training.precision):
        return summarize_corpus(dialogs, checkpoint.params, checkpoint.vocab, options, config.workers)


def cmd_summarize(config: RunConfig) -> int:
    """Summarize dialogs into a JSONL file with the slot-fill audit."""
    assert config.input is not None and config.output is not None
    dialogs = read_dialogs(config.input)
    summaries, failures = _summarize(config, dialogs)
    written = write_jsonl(config.output, (s.to_record() for s in summaries))
    unresolved = sum(s.unresolved for s in summaries)
    logger.info(f"Wrote {written} summaries to {config.output}")
    if unresolved or failures:
        logger.warning(f"Summary: {unresolved} unresolved slot token(s), {len(failures)} dialog(s) failed")
    return EXIT_OK


def cmd_evaluate(config: RunConfig) -> int:
    """Score summaries (decoded, read from a file, or the references) and write the report."""
    assert config.input is not None and config.output_dir is not None
    dialogs = read_dialogs(config.input)
    failures: Dict[str, str] = {}
    if config.references:
        summaries = [DialogSummary.from_reference(d) for d in dialogs]
    elif config.predictions is not None:
        summaries = [DialogSummary.from_record(r) for r in read_jsonl(config.predictions)]
    else:
        summaries, failures = _summarize(config, dialogs)
        write_jsonl(config.output_dir / "summaries.jsonl", (s.to_record() for s in summaries))
    report = evaluate_predictions(dialogs, summaries, failures)
    json_path, text_path = write_report(report, config.output_dir)
    headline = ", ".join(f"{k}={'n/a' if v is None else f'{v:.4f}'}" for k, v in report.headline().items())
    logger.info(f"{headline}; report written to {json_path} and {text_path}")
    return EXIT_OK


def cmd_pipeline(config: RunConfig) -> int:
    """Run convert, train (unless a checkpoint can be reused) and evaluate as one graph."""
    assert config.output_dir is not None
    configurable: Dict[str, Any] = {
        "output_dir": str(config.output_dir),
        "retrain": config.retrain,
        "workers": config.workers,
        "training": config.training.to_dict(),
    }
    if config.synthetic is not None:
        configurable["synthetic_dialogs"] = config.synthetic
    if config.split is not None:
        sizes = config.split
        configurable["split"] = f"{'*' if sizes.train is None else sizes.train},{sizes.valid},{sizes.test}"
    result = graph.invoke(
        {"input_path": str(config.input) if config.input else ""},
        config={"configurable": configurable},
    )
    logger.info(f"Pipeline finished; report at {result['report_path']}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "convert": cmd_convert,
    "train": cmd_train,
    "summarize": cmd_summarize,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


# === ARGUMENTS ===

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spnet", description="Dialog summarization with semantic scaffolds.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, help="Flat key=value config file; flags win over its values.")
        sub.add_argument("--seed", type=int)
        sub.add_argument("--precision", choices=["float32", "float64"])
        return sub

    convert = add("convert", "Convert MultiWOZ or generate a synthetic corpus into JSONL splits.")
    convert.add_argument("--input", help="MultiWOZ JSON file.")
    convert.add_argument("--synthetic", type=int, help="Generate this many synthetic dialogs instead.")
    convert.add_argument("--output-dir", dest="output_dir")
    convert.add_argument("--split", help="train,valid,test sizes; '*' for train takes the rest.")
    convert.add_argument("--canonical-table", dest="canonical_table")

    train = add("train", "Train a model.")
    train.add_argument("--train")
    train.add_argument("--valid")
    train.add_argument("--output-dir", dest="output_dir")
    train.add_argument("--resume", help="Checkpoint to continue training from.")
    train.add_argument("--lambda", dest="lambda_domain", type=float, help="Domain loss weight.")
    train.add_argument("--lexical", action="store_const", const=False, dest="use_slot_scaffold",
                       help="Train on surface tokens without the slot scaffold.")
    train.add_argument("--shared-encoder", action="store_const", const=False, dest="use_speaker_roles",
                       help="Read the interleaved dialog with one encoder instead of one per speaker role.")

    summarize = add("summarize", "Summarize dialogs with a trained checkpoint.")
    summarize.add_argument("--checkpoint")
    summarize.add_argument("--input", help="Dialogs JSONL.")
    summarize.add_argument("--output", help="Summaries JSONL to write.")

    evaluate = add("evaluate", "Score summaries with ROUGE, CIC and domain F1.")
    evaluate.add_argument("--checkpoint")
    evaluate.add_argument("--input", help="Dialogs JSONL with references.")
    evaluate.add_argument("--output-dir", dest="output_dir")
    evaluate.add_argument("--predictions", help="Summaries JSONL to score instead of decoding.")
    evaluate.add_argument("--references", action="store_const", const=True,
                          help="Score the references against themselves.")

    pipeline = add("pipeline", "Convert, train and evaluate in one run.")
    pipeline.add_argument("--input", help="MultiWOZ JSON file; a synthetic corpus is generated without it.")
    pipeline.add_argument("--synthetic", type=int)
    pipeline.add_argument("--output-dir", dest="output_dir")
    pipeline.add_argument("--split")
    pipeline.add_argument("--lambda", dest="lambda_domain", type=float)
    pipeline.add_argument("--shared-encoder", action="store_const", const=False, dest="use_speaker_roles")
    pipeline.add_argument("--retrain", action="store_const", const=True)

    for sub in (summarize, evaluate, pipeline):
        sub.add_argument("--beam", type=int)
        sub.add_argument("--greedy", action="store_const", const=True)
        sub.add_argument("--workers", type=int)
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    values = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    if args.command == "pipeline" and values.get("beam") is not None:
        values["beam_size"] = values.pop("beam")
    return values


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code."""
    load_dotenv()
    setup_logging()
    args = build_parser().parse_args(argv)
    try:
        config = parse_run_config(args.command, args.config, _overrides(args))
        return COMMANDS[args.command](config)
    except (NumericalError, OptimizationError, FloatingPointError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERIC
    except (SPNetError, OSError) as e:
        logger.error(str(e))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
