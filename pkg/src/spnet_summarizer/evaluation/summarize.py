"""Decode, slot-fill and relexicalize summaries for whole corpora."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from spnet_summarizer.corpus.types import Dialog
from spnet_summarizer.corpus.vocab import Vocabulary, extend_vocab
from spnet_summarizer.exceptions import SchemaError, SPNetError
from spnet_summarizer.model.decoding import DEFAULT_BEAM, DEFAULT_MAX_LEN, beam_decode, greedy_decode
from spnet_summarizer.model.network import classify_domains, encode_dialog
from spnet_summarizer.model.params import ModelParams
from spnet_summarizer.model.slot_filling import RelexicalizedSummary, SlotFill, relexicalize_decoded
from spnet_summarizer.training.config import TrainingConfig
from spnet_summarizer.training.examples import source_record

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DecodingOptions:
    beam: int = DEFAULT_BEAM
    greedy: bool = False
    max_len: int = DEFAULT_MAX_LEN
    length_penalty: Optional[float] = None
    coverage_penalty: Optional[float] = None
    use_slot_scaffold: bool = True

    @classmethod
    def from_config(cls, config: TrainingConfig, beam: Optional[int] = None, greedy: bool = False) -> DecodingOptions:
        """Decoding settings of a trained run, with optional beam/greedy overrides."""
        return cls(
            beam=beam if beam is not None else config.beam_size,
            greedy=greedy,
            max_len=config.max_decode_len,
            length_penalty=config.length_penalty,
            coverage_penalty=config.coverage_penalty,
            use_slot_scaffold=config.use_slot_scaffold,
        )


@dataclass
class DialogSummary:
    """A generated summary with its delexicalized template and slot-fill audit."""

    dialog_id: str
    tokens: List[str]
    template: List[str]
    fills: List[SlotFill] = field(default_factory=list)
    domain_probabilities: List[float] = field(default_factory=list)

    @property
    def unresolved(self) -> int:
        return sum(not f.resolved for f in self.fills)

    def to_record(self) -> Dict[str, Any]:
        return {
            "id": self.dialog_id,
            "summary": self.tokens,
            "summary_text": " ".join(self.tokens),
            "template": self.template,
            "fills": [f.to_dict() for f in self.fills],
            "unresolved": self.unresolved,
            "domain_probabilities": self.domain_probabilities,
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> DialogSummary:
        """Read a summaries JSONL record; only ``id`` and ``summary`` are required.

        Raises:
            SchemaError: If the record is malformed.
        """
        try:
            tokens = [str(t) for t in record["summary"]]
            return cls(
                dialog_id=str(record["id"]),
                tokens=tokens,
                template=[str(t) for t in record.get("template", tokens)],
                fills=[SlotFill(**f) for f in record.get("fills", [])],
                domain_probabilities=[float(p) for p in record.get("domain_probabilities", [])],
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"Malformed summary record: {e}") from e

    @classmethod
    def from_reference(cls, dialog: Dialog) -> DialogSummary:
        return cls(
            dialog_id=dialog.id,
            tokens=list(dialog.reference_summary),
            template=list(dialog.reference_summary_delex),
        )


def summarize_dialog(
    dialog: Dialog, params: ModelParams, vocab: Vocabulary, options: DecodingOptions = DecodingOptions()
) -> DialogSummary:
    """Decode one dialog and fill its slot tokens from the source."""
    record = source_record(dialog, options.use_slot_scaffold, params.dims.speaker_roles)
    extended = extend_vocab(vocab, record.user_stream, record.system_stream)
    encoded = encode_dialog(record, extended, params)
    if options.greedy:
        result = greedy_decode(encoded, params, options.max_len)
    else:
        result = beam_decode(
            encoded, params, options.beam, options.max_len, options.length_penalty, options.coverage_penalty
        )
    if options.use_slot_scaffold:
        filled = relexicalize_decoded(result.tokens, result.traces, record.slot_table)
    else:
        filled = RelexicalizedSummary(tokens=list(result.tokens))
    prediction = classify_domains(*encoded.final_pair, params)
    return DialogSummary(
        dialog_id=dialog.id,
        tokens=filled.tokens,
        template=list(result.tokens),
        fills=filled.fills,
        domain_probabilities=[float(p) for p in prediction.values],
    )


def summarize_corpus(
    dialogs: Sequence[Dialog],
    params: ModelParams,
    vocab: Vocabulary,
    options: DecodingOptions = DecodingOptions(),
    workers: int = 1,
) -> Tuple[List[DialogSummary], Dict[str, str]]:
    """Summarize every dialog; results keep the input order.

    Returns:
        The summaries, and a map from the id of each dialog that failed to its error.
    """

    def run(dialog: Dialog) -> Tuple[Dialog, Optional[DialogSummary], Optional[str]]:
        try:
            return dialog, summarize_dialog(dialog, params, vocab, options), None
        except (SPNetError, FloatingPointError) as e:
            return dialog, None, str(e)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, dialogs))
    else:
        outcomes = [run(d) for d in dialogs]

    summaries: List[DialogSummary] = []
    failures: Dict[str, str] = {}
    for dialog, summary, error in outcomes:
        if summary is None:
            logger.warning(f"Dialog {dialog.id} could not be summarized and is excluded: {error}")
            failures[dialog.id] = error or "unknown error"
        else:
            summaries.append(summary)
    return summaries, failures
