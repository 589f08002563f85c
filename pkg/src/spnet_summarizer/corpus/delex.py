"""Delexicalization and table-based relexicalization.

Each annotated slot span collapses into a single slot token; the slot table keeps
the surface value together with the encoder and stream position it came from.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from spnet_summarizer.corpus.types import (
    USER_ENCODER,
    DelexRecord,
    Dialog,
    Role,
    SlotEntry,
    SlotSpan,
    Turn,
    is_slot_token,
    validate_spans,
)

logger = logging.getLogger(__name__)


@dataclass
class Relexicalization:
    """Surface tokens plus the positions of slot tokens that could not be resolved."""

    tokens: List[str]
    unresolved: List[int] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return bool(self.unresolved)


def delexicalize_tokens(
    tokens: Sequence[str], spans: Sequence[SlotSpan], encoder: int = USER_ENCODER
) -> Tuple[List[str], List[SlotEntry]]:
    """Replace every span by its slot token.

    Raises:
        ContractError: If spans overlap, are unsorted or do not match the tokens.
    """
    validate_spans(tokens, spans)
    out: List[str] = []
    entries: List[SlotEntry] = []
    cursor = 0
    for span in spans:
        out.extend(tokens[cursor:span.start])
        entries.append(SlotEntry(span.slot, span.value, encoder, len(out), span.domain))
        out.append(span.slot)
        cursor = span.end
    out.extend(tokens[cursor:])
    return out, entries


def delexicalize_turn(turn: Turn) -> Tuple[List[str], List[SlotEntry]]:
    """Delexicalize one turn; table positions are relative to the turn."""
    return delexicalize_tokens(turn.tokens, turn.slot_spans, turn.role.encoder_id)


def relexicalize_text(
    tokens: Sequence[str], slot_table: Sequence[SlotEntry], source: Optional[int] = None
) -> Relexicalization:
    """Replace slot tokens by surface values from a slot table.

    Args:
        tokens: Delexicalized tokens.
        slot_table: Entries to resolve against.
        source: When ``tokens`` is itself a source stream, the encoder it belongs to;
            entries recorded at the same position are then used first. Otherwise
            slot tokens resolve by slot name, earliest ``(encoder, position)`` first.

    Returns:
        The surface tokens; unresolvable slot tokens are kept verbatim and flagged.
    """
    positional: Dict[int, SlotEntry] = {}
    if source is not None:
        positional = {e.position: e for e in slot_table if e.encoder == source}
    by_name: Dict[str, SlotEntry] = {}
    for entry in sorted(slot_table, key=lambda e: (e.encoder, e.position)):
        by_name.setdefault(entry.slot, entry)

    result = Relexicalization(tokens=[])
    for index, token in enumerate(tokens):
        if not is_slot_token(token):
            result.tokens.append(token)
            continue
        entry = positional.get(index)
        if entry is None or entry.slot != token:
            entry = by_name.get(token)
        if entry is None:
            result.unresolved.append(index)
            result.tokens.append(token)
            continue
        result.tokens.extend(entry.value.split(" "))
    if result.flagged:
        logger.warning(f"{len(result.unresolved)} slot token(s) left unresolved")
    return result


def build_delex_record(dialog: Dialog) -> DelexRecord:
    """Split a dialog into delexicalized user and system streams with one slot table."""
    streams: Dict[int, List[str]] = {0: [], 1: []}
    table: List[SlotEntry] = []
    for turn in dialog.turns:
        encoder = turn.role.encoder_id
        tokens, entries = delexicalize_turn(turn)
        offset = len(streams[encoder])
        streams[encoder].extend(tokens)
        table.extend(
            SlotEntry(e.slot, e.value, e.encoder, e.position + offset, e.domain) for e in entries
        )
    return DelexRecord(user_stream=streams[0], system_stream=streams[1], slot_table=table)


def build_lexical_record(dialog: Dialog) -> DelexRecord:
    """Split a dialog into surface-form streams with an empty slot table."""
    user: List[str] = []
    system: List[str] = []
    for turn in dialog.turns:
        (user if turn.role is Role.USER else system).extend(turn.tokens)
    return DelexRecord(user_stream=user, system_stream=system, slot_table=[])


def build_shared_record(dialog: Dialog, delexicalize: bool = True) -> DelexRecord:
    """Interleave all turns, in dialog order, into one stream read by a single encoder.

    Every slot table entry points into that stream (encoder 0); the system stream is
    left empty.
    """
    stream: List[str] = []
    table: List[SlotEntry] = []
    for turn in dialog.turns:
        if delexicalize:
            tokens, entries = delexicalize_tokens(turn.tokens, turn.slot_spans, USER_ENCODER)
            table.extend(
                SlotEntry(e.slot, e.value, USER_ENCODER, e.position + len(stream), e.domain) for e in entries
            )
        else:
            tokens = list(turn.tokens)
        stream.extend(tokens)
    return DelexRecord(user_stream=stream, system_stream=[], slot_table=table)
