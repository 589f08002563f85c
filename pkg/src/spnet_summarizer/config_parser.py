"""Parse flat key=value config files and command-line overrides into a RunConfig."""

from __future__ import annotations

import os
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional

from dotenv import dotenv_values

from spnet_summarizer.corpus.multiwoz import SplitSizes
from spnet_summarizer.exceptions import ConfigurationError
from spnet_summarizer.training.config import TrainingConfig
from spnet_summarizer.training.params_validation import validate_training_config

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}
_NONE = {"", "none", "null"}


def _to_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ValueError(f"expected true or false, got '{raw}'")


def _to_path(raw: str) -> Path:
    return Path(raw).expanduser()


# run-level keys and how their text values are read
_RUN_KEYS: Dict[str, Callable[[str], Any]] = {
    "input": _to_path,
    "output": _to_path,
    "output_dir": _to_path,
    "train": _to_path,
    "valid": _to_path,
    "checkpoint": _to_path,
    "resume": _to_path,
    "predictions": _to_path,
    "canonical_table": _to_path,
    "split": SplitSizes.parse,
    "synthetic": int,
    "workers": int,
    "beam": int,
    "greedy": _to_bool,
    "references": _to_bool,
    "retrain": _to_bool,
}


@dataclass
class RunConfig:
    """Everything one command needs: its paths, switches and the training config."""

    command: str
    training: TrainingConfig = field(default_factory=TrainingConfig)
    config_path: Optional[Path] = None

    # === PATHS ===
    input: Optional[Path] = None
    output: Optional[Path] = None
    output_dir: Optional[Path] = None
    train: Optional[Path] = None
    valid: Optional[Path] = None
    checkpoint: Optional[Path] = None
    resume: Optional[Path] = None
    predictions: Optional[Path] = None
    canonical_table: Optional[Path] = None

    # === CORPUS ===
    split: Optional[SplitSizes] = None
    synthetic: Optional[int] = None

    # === DECODING / EXECUTION ===
    workers: int = 1
    beam: Optional[int] = None
    greedy: bool = False
    references: bool = False
    retrain: bool = False
    explicit_precision: bool = False

    @property
    def seed(self) -> int:
        return self.training.seed


def read_config_file(path: Path) -> Dict[str, str]:
    """Read a flat ``key=value`` file; keys are case-insensitive."""
    if not path.is_file():
        raise ConfigurationError(f"Config file '{path}' does not exist")
    values = dotenv_values(path)
    return {key.strip().lower(): (value or "") for key, value in values.items()}


def parse_run_config(
    command: str, config_path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """Merge a config file with command-line overrides (flags win) and validate it.

    Args:
        command: Subcommand the config is for.
        config_path: Optional flat ``key=value`` file.
        overrides: Values from flags; ``None`` entries are ignored. Strings are
            parsed like file values, other values are taken as they are.

    Raises:
        ConfigurationError: On unknown keys, unparsable values, invalid training
            settings, or missing, unreadable or unwritable paths.
    """
    raw: Dict[str, Any] = read_config_file(config_path) if config_path is not None else {}
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    training_fields = TrainingConfig.field_names()
    unknown = sorted(set(raw) - set(_RUN_KEYS) - training_fields)
    if unknown:
        raise ConfigurationError(f"Unknown configuration key(s): {', '.join(unknown)}")

    run_values: Dict[str, Any] = {}
    training_values: Dict[str, Any] = {}
    hints = typing.get_type_hints(TrainingConfig)
    for key, value in raw.items():
        try:
            if key in _RUN_KEYS:
                run_values[key] = _RUN_KEYS[key](value) if isinstance(value, str) else value
            else:
                training_values[key] = _coerce(value, hints[key]) if isinstance(value, str) else value
        except ValueError as e:
            raise ConfigurationError(f"Invalid value for '{key}': {e}") from e

    training = TrainingConfig.from_dict(training_values)
    validate_training_config(training)
    config = RunConfig(
        command=command,
        training=training,
        config_path=config_path,
        explicit_precision="precision" in raw,
        **run_values,
    )
    validate_paths(config)
    return config


def _coerce(raw: str, hint: Any) -> Any:
    """Read a text value as the type a TrainingConfig field is annotated with."""
    args = typing.get_args(hint)
    if type(None) in args:
        if raw.strip().lower() in _NONE:
            return None
        hint = next(a for a in args if a is not type(None))
    if hint is bool:
        return _to_bool(raw)
    if hint is int:
        return int(raw)
    if hint is float:
        return float(raw)
    return raw.strip()


# === PATH VALIDATION ===

_REQUIRED: Dict[str, tuple[str, ...]] = {
    "convert": ("output_dir",),
    "train": ("train", "valid", "output_dir"),
    "summarize": ("checkpoint", "input", "output"),
    "evaluate": ("input", "output_dir"),
    "pipeline": ("output_dir",),
}
_INPUT_FILES = ("input", "train", "valid", "checkpoint", "resume", "predictions", "canonical_table")


def validate_paths(config: RunConfig) -> None:
    """Check every path of a command before any work starts.

    Raises:
        ConfigurationError: If a required path is missing, an input is unreadable or an
            output location is not writable.
    """
    missing = [key for key in _REQUIRED.get(config.command, ()) if getattr(config, key) is None]
    if missing:
        raise ConfigurationError(f"'{config.command}' needs: {', '.join(missing)}")

    if config.command == "convert" and (config.input is None) == (config.synthetic is None):
        raise ConfigurationError("'convert' needs exactly one of an input file or a synthetic corpus size")
    if config.command == "evaluate" and not (config.checkpoint or config.predictions or config.references):
        raise ConfigurationError("'evaluate' needs a checkpoint, a predictions file or the references switch")
    if config.synthetic is not None and config.synthetic < 1:
        raise ConfigurationError("synthetic corpus size must be at least 1")
    if config.workers < 1:
        raise ConfigurationError("workers must be at least 1")

    for key in _INPUT_FILES:
        path = getattr(config, key)
        if path is not None:
            _check_readable(key, path)

    if config.output_dir is not None:
        _check_writable_dir("output_dir", config.output_dir)
    if config.output is not None:
        _check_writable_dir("output", config.output.parent)


def _check_readable(key: str, path: Path) -> None:
    if not path.is_file() or not os.access(path, os.R_OK):
        raise ConfigurationError(f"{key} '{path}' is not a readable file")


def _check_writable_dir(key: str, path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigurationError(f"{key} '{path}' cannot be created: {e}") from e
    if not os.access(path, os.W_OK):
        raise ConfigurationError(f"{key} '{path}' is not writable")
