"""Dialog corpora: conversion, delexicalization, vocabularies and synthetic data."""

from spnet_summarizer.corpus.conversion import SPLITS, convert_corpus, split_paths, synthetic_split_sizes
from spnet_summarizer.corpus.delex import (
    Relexicalization,
    build_delex_record,
    build_lexical_record,
    build_shared_record,
    delexicalize_tokens,
    delexicalize_turn,
    relexicalize_text,
)
from spnet_summarizer.corpus.jsonl import dialog_from_record, dialog_to_record, read_dialogs, write_dialogs
from spnet_summarizer.corpus.multiwoz import (
    MULTIWOZ_DOMAINS,
    ConversionResult,
    SplitSizes,
    convert_multiwoz,
    read_multiwoz_file,
    split_dialogs,
)
from spnet_summarizer.corpus.slots import CanonicalizationTable, canonicalize_slot, load_canonical_table, slot_inventory
from spnet_summarizer.corpus.synthetic import (
    DEFAULT_DOMAIN_TEMPLATES,
    DomainTemplate,
    generate_synthetic_corpus,
    select_templates,
)
from spnet_summarizer.corpus.tokenizer import tokenize
from spnet_summarizer.corpus.types import (
    SYSTEM_ENCODER,
    USER_ENCODER,
    DelexRecord,
    Dialog,
    Role,
    SlotEntry,
    SlotSpan,
    Turn,
    is_slot_token,
)
from spnet_summarizer.corpus.vocab import (
    EOS,
    PAD,
    SOS,
    UNK,
    ExtendedVocab,
    Vocabulary,
    build_vocab,
    extend_vocab,
)

__all__ = [
    "DEFAULT_DOMAIN_TEMPLATES",
    "EOS",
    "MULTIWOZ_DOMAINS",
    "PAD",
    "SOS",
    "SYSTEM_ENCODER",
    "UNK",
    "USER_ENCODER",
    "CanonicalizationTable",
    "ConversionResult",
    "DelexRecord",
    "Dialog",
    "DomainTemplate",
    "ExtendedVocab",
    "Relexicalization",
    "Role",
    "SPLITS",
    "SlotEntry",
    "SlotSpan",
    "SplitSizes",
    "Turn",
    "Vocabulary",
    "build_delex_record",
    "build_lexical_record",
    "build_shared_record",
    "build_vocab",
    "canonicalize_slot",
    "convert_corpus",
    "convert_multiwoz",
    "delexicalize_tokens",
    "delexicalize_turn",
    "dialog_from_record",
    "dialog_to_record",
    "extend_vocab",
    "generate_synthetic_corpus",
    "is_slot_token",
    "load_canonical_table",
    "read_dialogs",
    "read_multiwoz_file",
    "relexicalize_text",
    "select_templates",
    "slot_inventory",
    "split_dialogs",
    "split_paths",
    "synthetic_split_sizes",
    "tokenize",
    "write_dialogs",
]
