"""Attention-driven slot filling.

When the decoder emits a slot token, the value is copied from the source position
that carries that slot and received the most merged attention at that step.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from spnet_summarizer.corpus.types import SlotEntry, is_slot_token
from spnet_summarizer.exceptions import ContractError
from spnet_summarizer.model.network import DecoderStepTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SlotFill:
    """Provenance of one filled slot; unresolved fills keep the slot token as value."""

    slot: str
    value: str
    resolved: bool
    encoder: Optional[int] = None
    position: Optional[int] = None
    attention: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RelexicalizedSummary:
    tokens: List[str]
    fills: List[SlotFill] = field(default_factory=list)

    @property
    def unresolved(self) -> int:
        return sum(not f.resolved for f in self.fills)


def fill_slot_value(slot: str, trace: DecoderStepTrace, slot_table: Sequence[SlotEntry]) -> SlotFill:
    """Pick the surface value of ``slot`` with the highest merged attention.

    Ties go to the lowest ``(encoder, position)``.
    """
    merged = trace.merged_attention
    best: Optional[SlotEntry] = None
    best_weight = -1.0
    for entry in sorted(slot_table, key=lambda e: (e.encoder, e.position)):
        if entry.slot != slot:
            continue
        weights = merged[entry.encoder] if 0 <= entry.encoder < len(merged) else np.zeros(0)
        if not 0 <= entry.position < weights.shape[0]:
            raise ContractError(
                f"Slot table entry {entry.slot}@{entry.encoder}:{entry.position} is outside the source stream"
            )
        weight = float(weights[entry.position])
        if weight > best_weight:
            best, best_weight = entry, weight
    if best is None:
        return SlotFill(slot=slot, value=slot, resolved=False)
    return SlotFill(
        slot=slot,
        value=best.value,
        resolved=True,
        encoder=best.encoder,
        position=best.position,
        attention=best_weight,
    )


def relexicalize_decoded(
    tokens: Sequence[str], traces: Sequence[DecoderStepTrace], slot_table: Sequence[SlotEntry]
) -> RelexicalizedSummary:
    """Fill every slot token of a decoded summary using the step that emitted it."""
    if len(traces) < len(tokens):
        raise ContractError(f"{len(tokens)} tokens but only {len(traces)} decoder steps")
    summary = RelexicalizedSummary(tokens=[])
    for token, trace in zip(tokens, traces):
        if not is_slot_token(token):
            summary.tokens.append(token)
            continue
        fill = fill_slot_value(token, trace, slot_table)
        summary.fills.append(fill)
        summary.tokens.extend(fill.value.split(" ") if fill.resolved else [token])
    if summary.unresolved:
        logger.warning(f"{summary.unresolved} slot token(s) could not be filled from the source")
    return summary
