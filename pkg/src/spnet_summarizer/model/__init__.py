"""Dual-encoder pointer-generator network with slot filling and a domain classifier."""

from spnet_summarizer.model.decoding import (
    DEFAULT_BEAM,
    DEFAULT_MAX_LEN,
    DecodeResult,
    StepOutput,
    beam_decode,
    beam_search,
    greedy_decode,
    greedy_search,
)
from spnet_summarizer.model.network import (
    DecoderStepTrace,
    DomainPrediction,
    EncodedDialog,
    attend,
    classify_domains,
    decoder_step,
    encode_dialog,
    final_distribution,
    generation_prob,
    init_decoder_state,
    merge_context,
    mix_distribution,
    teacher_forced_steps,
)
from spnet_summarizer.model.params import ModelDims, ModelParams, parameter_shapes
from spnet_summarizer.model.slot_filling import (
    RelexicalizedSummary,
    SlotFill,
    fill_slot_value,
    relexicalize_decoded,
)

__all__ = [
    "DEFAULT_BEAM",
    "DEFAULT_MAX_LEN",
    "DecodeResult",
    "DecoderStepTrace",
    "DomainPrediction",
    "EncodedDialog",
    "ModelDims",
    "ModelParams",
    "RelexicalizedSummary",
    "SlotFill",
    "StepOutput",
    "attend",
    "beam_decode",
    "beam_search",
    "classify_domains",
    "decoder_step",
    "encode_dialog",
    "fill_slot_value",
    "final_distribution",
    "generation_prob",
    "greedy_decode",
    "greedy_search",
    "init_decoder_state",
    "merge_context",
    "mix_distribution",
    "parameter_shapes",
    "relexicalize_decoded",
    "teacher_forced_steps",
]
