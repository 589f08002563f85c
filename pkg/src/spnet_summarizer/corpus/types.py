"""Dialog corpus data structures."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

from spnet_summarizer.exceptions import ContractError

USER_ENCODER = 0
SYSTEM_ENCODER = 1

_SLOT_TOKEN = re.compile(r"^\[[a-z0-9_\-]+\]$")


def is_slot_token(token: str) -> bool:
    """Return True for placeholder tokens such as ``[time]``."""
    return bool(_SLOT_TOKEN.match(token))


class Role(str, Enum):
    """Speaker role of a turn."""

    USER = "user"
    SYSTEM = "system"

    @property
    def encoder_id(self) -> int:
        """Index of the encoder that reads this role (user 0, system 1)."""
        return USER_ENCODER if self is Role.USER else SYSTEM_ENCODER


@dataclass(frozen=True)
class SlotSpan:
    """A slot value located in a token sequence; ``end`` is exclusive."""

    slot: str
    value: str
    start: int
    end: int
    domain: Optional[str] = None


def validate_spans(
    tokens: Sequence[str], spans: Sequence[SlotSpan], inventory: Optional[Iterable[str]] = None
) -> None:
    """Check that spans are sorted, in bounds, non-overlapping and match the tokens.

    Raises:
        ContractError: On the first violated invariant.
    """
    allowed = set(inventory) if inventory is not None else None
    previous_end = 0
    covered = set()
    for span in spans:
        if not 0 <= span.start < span.end <= len(tokens):
            raise ContractError(f"Span {span.slot} [{span.start}, {span.end}) is out of bounds for {len(tokens)} tokens")
        if span.start < previous_end:
            raise ContractError(f"Span {span.slot} at {span.start} overlaps or is out of order")
        if " ".join(tokens[span.start:span.end]) != span.value:
            raise ContractError(
                f"Span {span.slot} value '{span.value}' does not match tokens "
                f"'{' '.join(tokens[span.start:span.end])}'"
            )
        if allowed is not None and span.slot not in allowed:
            raise ContractError(f"Slot {span.slot} is not in the canonical inventory")
        covered.update(range(span.start, span.end))
        previous_end = span.end
    for index, token in enumerate(tokens):
        if index not in covered and is_slot_token(token):
            raise ContractError(f"Token '{token}' at {index} looks like a slot token but has no span")


@dataclass
class Turn:
    """One utterance with its speaker role and slot annotations."""

    role: Role
    tokens: List[str]
    slot_spans: List[SlotSpan] = field(default_factory=list)

    def validate(self, inventory: Optional[Iterable[str]] = None) -> None:
        validate_spans(self.tokens, self.slot_spans, inventory)


@dataclass
class Dialog:
    """A role-tagged conversation with its reference summary and domain labels."""

    id: str
    turns: List[Turn]
    domains: Tuple[int, ...]
    domain_inventory: Tuple[str, ...]
    reference_summary: List[str]
    reference_summary_delex: List[str]
    summary_spans: List[SlotSpan] = field(default_factory=list)

    @property
    def active_domains(self) -> List[str]:
        return [name for name, bit in zip(self.domain_inventory, self.domains) if bit]

    def validate(self, inventory: Optional[Iterable[str]] = None) -> None:
        """Check the dialog-level invariants.

        Raises:
            ContractError: On the first violated invariant.
        """
        allowed = set(inventory) if inventory is not None else None
        if len(self.domains) != len(self.domain_inventory):
            raise ContractError(f"Dialog {self.id}: domain labels do not match the inventory")
        if not any(self.domains):
            raise ContractError(f"Dialog {self.id}: no active domain")
        for index, turn in enumerate(self.turns):
            expected = Role.USER if index % 2 == 0 else Role.SYSTEM
            if turn.role is not expected:
                raise ContractError(f"Dialog {self.id}: turn {index} should be a {expected.value} turn")
            turn.validate(allowed)
        validate_spans(self.reference_summary, self.summary_spans, allowed)
        for token in self.reference_summary_delex:
            if is_slot_token(token) and allowed is not None and token not in allowed:
                raise ContractError(f"Dialog {self.id}: summary slot {token} is not in the inventory")


@dataclass(frozen=True)
class SlotEntry:
    """Where a slot token came from: its surface value, encoder and stream position."""

    slot: str
    value: str
    encoder: int
    position: int
    domain: Optional[str] = None


@dataclass
class DelexRecord:
    """Delexicalized user/system streams and the table mapping slot tokens back."""

    user_stream: List[str]
    system_stream: List[str]
    slot_table: List[SlotEntry]

    def stream(self, encoder: int) -> List[str]:
        return self.user_stream if encoder == USER_ENCODER else self.system_stream
