"""Turn dialogs into model inputs and compute per-example losses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from spnet_summarizer.corpus.delex import build_delex_record, build_lexical_record, build_shared_record
from spnet_summarizer.corpus.types import DelexRecord, Dialog
from spnet_summarizer.corpus.vocab import EOS, ExtendedVocab, Vocabulary, build_vocab, extend_vocab
from spnet_summarizer.exceptions import ContractError
from spnet_summarizer.model.network import EncodedDialog, classify_domains, encode_dialog, teacher_forced_steps
from spnet_summarizer.model.params import ModelParams
from spnet_summarizer.numcore import Tensor
from spnet_summarizer.training.losses import loss_domain, loss_summarization, loss_total


@dataclass
class TrainingExample:
    """One dialog ready for teacher forcing.

    ``target_ids`` are extended-vocabulary ids of the target summary followed by EOS.
    """

    dialog_id: str
    record: DelexRecord
    vocab: ExtendedVocab
    target_tokens: List[str]
    target_ids: List[int]
    domains: NDArray[np.int64]


@dataclass
class LossBreakdown:
    summarization: Tensor
    domain: Tensor
    total: Tensor
    encoded: EncodedDialog


def source_record(dialog: Dialog, use_slot_scaffold: bool = True, speaker_roles: bool = True) -> DelexRecord:
    """Delexicalized streams with their slot table, or surface streams for lexical training.

    Without speaker roles the turns are interleaved into one stream.
    """
    if not speaker_roles:
        return build_shared_record(dialog, delexicalize=use_slot_scaffold)
    return build_delex_record(dialog) if use_slot_scaffold else build_lexical_record(dialog)


def target_tokens(dialog: Dialog, use_slot_scaffold: bool = True) -> List[str]:
    return list(dialog.reference_summary_delex if use_slot_scaffold else dialog.reference_summary)


def corpus_streams(dialogs: Sequence[Dialog], use_slot_scaffold: bool = True) -> Iterator[List[str]]:
    """Every source stream and target summary of a corpus, for vocabulary building."""
    for dialog in dialogs:
        record = source_record(dialog, use_slot_scaffold)
        yield record.user_stream
        yield record.system_stream
        yield target_tokens(dialog, use_slot_scaffold)


def build_corpus_vocab(
    dialogs: Sequence[Dialog], max_size: Optional[int] = None, use_slot_scaffold: bool = True
) -> Vocabulary:
    """Vocabulary of a training corpus; lexical training still reserves the slot tokens."""
    return build_vocab(corpus_streams(dialogs, use_slot_scaffold), max_size)


def prepare_example(
    dialog: Dialog, vocab: Vocabulary, use_slot_scaffold: bool = True, speaker_roles: bool = True
) -> TrainingExample:
    record = source_record(dialog, use_slot_scaffold, speaker_roles)
    extended = extend_vocab(vocab, record.user_stream, record.system_stream)
    tokens = target_tokens(dialog, use_slot_scaffold)
    return TrainingExample(
        dialog_id=dialog.id,
        record=record,
        vocab=extended,
        target_tokens=tokens,
        target_ids=extended.encode(tokens) + [EOS],
        domains=np.asarray(dialog.domains, dtype=np.int64),
    )


def prepare_examples(
    dialogs: Sequence[Dialog], vocab: Vocabulary, use_slot_scaffold: bool = True, speaker_roles: bool = True
) -> List[TrainingExample]:
    return [prepare_example(d, vocab, use_slot_scaffold, speaker_roles) for d in dialogs]


def example_loss(example: TrainingExample, params: ModelParams, lambda_domain: float) -> LossBreakdown:
    """Teacher-forced joint loss of one example.

    Raises:
        ContractError: If the example's domain inventory does not fit the classifier.
    """
    if example.domains.shape[0] != params.dims.n_domains:
        raise ContractError(
            f"Dialog {example.dialog_id} has {example.domains.shape[0]} domain labels, "
            f"the classifier predicts {params.dims.n_domains}"
        )
    encoded = encode_dialog(example.record, example.vocab, params)
    traces = teacher_forced_steps(encoded, params, example.target_ids)
    summarization = loss_summarization([t.distribution for t in traces], example.target_ids)
    domain = loss_domain(classify_domains(*encoded.final_pair, params), example.domains)
    return LossBreakdown(
        summarization=summarization,
        domain=domain,
        total=loss_total(summarization, domain, lambda_domain),
        encoded=encoded,
    )
