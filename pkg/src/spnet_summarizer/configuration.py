"""Define the configurable parameters for the pipeline graph."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional

from langchain_core.runnables import ensure_config
from langgraph.config import get_config

from spnet_summarizer.training.config import TrainingConfig


@dataclass(kw_only=True)
class Configuration:
    """The configuration for the convert, train and evaluate pipeline."""

    output_dir: str = field(
        default="runs/pipeline",
        metadata={
            "description": "Directory receiving the corpus splits, the checkpoints and the report."
        },
    )

    synthetic_dialogs: int = field(
        default=32,
        metadata={
            "description": "Size of the generated corpus when no input file is given."
        },
    )

    split: Optional[str] = field(
        default=None,
        metadata={
            "description": "Split sizes as 'train,valid,test'; '*' for train takes the rest. "
            "Defaults depend on the corpus source."
        },
    )

    retrain: bool = field(
        default=False,
        metadata={
            "description": "Train even if the output directory already holds a checkpoint."
        },
    )

    workers: int = field(
        default=1,
        metadata={
            "description": "Worker threads used to decode the test split."
        },
    )

    training: Dict[str, Any] = field(
        default_factory=dict,
        metadata={
            "description": "TrainingConfig overrides, e.g. {'lambda_domain': 0.0, 'max_epochs': 50}."
        },
    )

    def training_config(self) -> TrainingConfig:
        return TrainingConfig.from_dict(self.training)

    @classmethod
    def from_context(cls) -> Configuration:
        """Create a Configuration instance from a RunnableConfig object."""
        try:
            config = get_config()
        except RuntimeError:
            config = None
        config = ensure_config(config)
        configurable = config.get("configurable") or {}
        _fields = {f.name for f in fields(cls) if f.init}
        return cls(**{k: v for k, v in configurable.items() if k in _fields})
