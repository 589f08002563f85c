"""Write train/valid/test JSONL splits and their manifest."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from spnet_summarizer.corpus.jsonl import SCHEMA_VERSION, write_dialogs
from spnet_summarizer.corpus.multiwoz import SplitSizes, convert_multiwoz, read_multiwoz_file, split_dialogs
from spnet_summarizer.corpus.slots import CanonicalizationTable, load_canonical_table
from spnet_summarizer.corpus.synthetic import generate_synthetic_corpus
from spnet_summarizer.corpus.types import Dialog
from spnet_summarizer.exceptions import ConfigurationError, CorpusError
from spnet_summarizer.misc import PathLike, write_json

logger = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")
MANIFEST = "manifest.json"


def synthetic_split_sizes(n_dialogs: int) -> SplitSizes:
    """Default split of a synthetic corpus: a tenth each for validation and test."""
    held_out = max(1, n_dialogs // 10)
    return SplitSizes(train=None, valid=held_out, test=held_out)


def split_paths(directory: PathLike) -> Dict[str, Path]:
    return {name: Path(directory) / f"{name}.jsonl" for name in SPLITS}


def convert_corpus(
    output_dir: PathLike,
    input_path: Optional[PathLike] = None,
    synthetic_dialogs: Optional[int] = None,
    sizes: Optional[SplitSizes] = None,
    seed: int = 0,
    table: Optional[CanonicalizationTable] = None,
) -> Dict[str, Any]:
    """Convert a MultiWOZ file, or generate a synthetic corpus, into JSONL splits.

    Exactly one of ``input_path`` and ``synthetic_dialogs`` must be given. The same
    inputs and seed always produce byte-identical files.

    Returns:
        The manifest that was written next to the splits.

    Raises:
        ConfigurationError: If the source is ambiguous or the split sizes do not fit.
        CorpusError: If the input cannot be read or nothing converts.
    """
    if (input_path is None) == (synthetic_dialogs is None):
        raise ConfigurationError("Give either an input file or a synthetic corpus size, not both")
    table = table or load_canonical_table()

    stats: Dict[str, Any] = {}
    dialogs: List[Dialog]
    if synthetic_dialogs is not None:
        dialogs = generate_synthetic_corpus(seed, synthetic_dialogs)
        source: Dict[str, Any] = {"type": "synthetic", "n_dialogs": synthetic_dialogs}
        sizes = sizes or synthetic_split_sizes(synthetic_dialogs)
    else:
        assert input_path is not None
        result = convert_multiwoz(read_multiwoz_file(input_path), table)
        dialogs = result.dialogs
        stats = {
            "total": result.stats.total,
            "skipped": result.stats.skipped,
            "rejected": result.stats.rejected,
            "skipped_ids": result.stats.skipped_ids,
            "rejected_ids": result.stats.rejected_ids,
        }
        source = {"type": "multiwoz", "path": Path(input_path).name}
        sizes = sizes or SplitSizes(train=None)
    if not dialogs:
        raise CorpusError("No dialogs to write")

    splits = split_dialogs(dialogs, sizes, seed)
    paths = split_paths(output_dir)
    counts = {name: write_dialogs(paths[name], splits[name]) for name in SPLITS}

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "source": source,
        "seed": seed,
        "counts": counts,
        "canonical_table_version": table.version,
        "domain_inventory": list(dialogs[0].domain_inventory),
        "conversion": stats,
    }
    write_json(Path(output_dir) / MANIFEST, manifest)
    logger.info(
        f"Wrote {counts['train']}/{counts['valid']}/{counts['test']} train/valid/test dialogs to {output_dir}"
    )
    return manifest
