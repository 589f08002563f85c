"""Convert MultiWOZ-style dialog files into summarization dialogs.

The goal instruction shown to the crowd worker serves as the reference summary. Slot
values come from the belief state, the goal and the span annotations; every value
is located in the turns and in the summary and replaced by its canonical slot.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from spnet_summarizer.corpus.delex import delexicalize_tokens
from spnet_summarizer.corpus.slots import CanonicalizationTable, load_canonical_table
from spnet_summarizer.corpus.tokenizer import strip_markup, tokenize
from spnet_summarizer.corpus.types import Dialog, Role, SlotSpan, Turn
from spnet_summarizer.exceptions import ConfigurationError, ContractError, CorpusError

logger = logging.getLogger(__name__)

MULTIWOZ_DOMAINS: Tuple[str, ...] = (
    "attraction",
    "hospital",
    "hotel",
    "police",
    "restaurant",
    "taxi",
    "train",
)

IGNORED_VALUES = frozenset(
    {"", "not mentioned", "none", "dontcare", "dont care", "don't care", "do n't care", "yes", "no"}
)

# span_info slot labels mapped onto belief-state slot names
_SPAN_SLOTS: Dict[str, str] = {
    "area": "area",
    "arrive": "arriveby",
    "day": "day",
    "department": "department",
    "depart": "departure",
    "dest": "destination",
    "food": "food",
    "internet": "internet",
    "leave": "leaveat",
    "name": "name",
    "parking": "parking",
    "people": "people",
    "price": "pricerange",
    "stars": "stars",
    "stay": "stay",
    "time": "time",
    "type": "type",
}
_BOOKING_SLOTS = frozenset({"day", "people", "stay", "time"})


@dataclass(frozen=True)
class SplitSizes:
    """Requested split sizes; ``train=None`` takes every remaining dialog."""

    train: Optional[int] = 8438
    valid: int = 1000
    test: int = 1000

    @classmethod
    def parse(cls, text: str) -> SplitSizes:
        """Parse ``"train,valid,test"``; an empty or ``*`` train entry means the rest."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ConfigurationError(f"Split sizes must be 'train,valid,test', got '{text}'")
        try:
            train = None if parts[0] in ("", "*") else int(parts[0])
            sizes = cls(train=train, valid=int(parts[1]), test=int(parts[2]))
        except ValueError as e:
            raise ConfigurationError(f"Split sizes must be integers, got '{text}'") from e
        if min(sizes.valid, sizes.test, sizes.train if sizes.train is not None else 0) < 0:
            raise ConfigurationError(f"Split sizes must be non-negative, got '{text}'")
        return sizes


@dataclass
class ConversionStats:
    total: int = 0
    converted: int = 0
    skipped: int = 0
    rejected: int = 0
    skipped_ids: List[str] = field(default_factory=list)
    rejected_ids: List[str] = field(default_factory=list)


@dataclass
class ConversionResult:
    dialogs: List[Dialog]
    stats: ConversionStats


def read_multiwoz_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Read a MultiWOZ JSON file (dialog id -> record)."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CorpusError(f"Cannot read MultiWOZ file '{path}': {e}") from e
    if not isinstance(payload, dict):
        raise CorpusError(f"MultiWOZ file '{path}' must map dialog ids to records")
    return payload


def convert_multiwoz(
    records: Mapping[str, Mapping[str, Any]],
    table: Optional[CanonicalizationTable] = None,
    domains: Sequence[str] = MULTIWOZ_DOMAINS,
) -> ConversionResult:
    """Convert raw records into dialogs, ordered by dialog id.

    Records without a goal message or without an active domain are skipped; records
    whose annotations cannot be aligned with their text are rejected. Both are logged.
    """
    table = table or load_canonical_table()
    stats = ConversionStats(total=len(records))
    dialogs: List[Dialog] = []
    for dialog_id in sorted(records):
        record = records[dialog_id]
        goal = record.get("goal") or {}
        summary_text = _goal_message(goal)
        active = tuple(int(bool(goal.get(d))) for d in domains)
        if not summary_text or not any(active):
            logger.warning(f"Skipping {dialog_id}: missing summary or domains")
            stats.skipped += 1
            stats.skipped_ids.append(dialog_id)
            continue
        try:
            dialog = _convert_record(dialog_id, record, summary_text, active, tuple(domains), table)
        except (ContractError, CorpusError) as e:
            logger.warning(f"Rejecting {dialog_id}: {e}")
            stats.rejected += 1
            stats.rejected_ids.append(dialog_id)
            continue
        dialogs.append(dialog)
    stats.converted = len(dialogs)
    logger.info(
        f"Converted {stats.converted}/{stats.total} dialogs "
        f"({stats.skipped} skipped, {stats.rejected} rejected)"
    )
    return ConversionResult(dialogs=dialogs, stats=stats)


def split_dialogs(dialogs: Sequence[Dialog], sizes: SplitSizes, seed: int = 0) -> Dict[str, List[Dialog]]:
    """Partition dialogs into train/valid/test with a seeded permutation.

    Dialogs are sorted by id before shuffling so the result depends only on the input
    set and the seed; each split keeps id order.

    Raises:
        ConfigurationError: If the sizes do not fit the number of dialogs.
    """
    ordered = sorted(dialogs, key=lambda d: d.id)
    n = len(ordered)
    held_out = sizes.valid + sizes.test
    train_size = n - held_out if sizes.train is None else sizes.train
    if train_size < 0 or train_size + held_out != n:
        raise ConfigurationError(
            f"Split sizes {train_size},{sizes.valid},{sizes.test} do not partition {n} dialogs"
        )
    order = np.random.Generator(np.random.PCG64(seed)).permutation(n)
    picks = {
        "valid": order[: sizes.valid],
        "test": order[sizes.valid:held_out],
        "train": order[held_out:],
    }
    return {name: [ordered[i] for i in sorted(idx)] for name, idx in picks.items()}


def _goal_message(goal: Mapping[str, Any]) -> str:
    message = goal.get("message")
    if isinstance(message, list):
        message = " ".join(str(m) for m in message)
    if not isinstance(message, str):
        return ""
    return " ".join(strip_markup(message).split())


def _convert_record(
    dialog_id: str,
    record: Mapping[str, Any],
    summary_text: str,
    active: Tuple[int, ...],
    domains: Tuple[str, ...],
    table: CanonicalizationTable,
) -> Dialog:
    log = record.get("log")
    if not isinstance(log, list) or not log:
        raise CorpusError("empty or missing log")
    for index, entry in enumerate(log):
        if not isinstance(entry, dict):
            raise CorpusError(f"turn {index} is not an object")
        _check_span_info(entry, index)
    values = _value_inventory(record, domains, table)

    turns: List[Turn] = []
    for index, entry in enumerate(log):
        text = entry.get("text")
        if not isinstance(text, str):
            raise CorpusError(f"turn {index} has no text")
        tokens = tokenize(text)
        role = Role.USER if index % 2 == 0 else Role.SYSTEM
        turns.append(Turn(role=role, tokens=tokens, slot_spans=_match_values(tokens, values)))

    summary = tokenize(summary_text)
    summary_spans = _match_values(summary, values)
    summary_delex, _ = delexicalize_tokens(summary, summary_spans)
    dialog = Dialog(
        id=dialog_id,
        turns=turns,
        domains=active,
        domain_inventory=domains,
        reference_summary=summary,
        reference_summary_delex=summary_delex,
        summary_spans=summary_spans,
    )
    dialog.validate()
    return dialog


def _check_span_info(entry: Mapping[str, Any], index: int) -> None:
    n_words = len(str(entry.get("text", "")).split())
    for span in entry.get("span_info") or []:
        if not isinstance(span, (list, tuple)) or len(span) != 5:
            raise CorpusError(f"turn {index} has a malformed span annotation {span!r}")
        start, end = span[3], span[4]
        if not (isinstance(start, int) and isinstance(end, int) and 0 <= start <= end < n_words):
            raise CorpusError(f"turn {index} span {span!r} is outside the {n_words} words of the turn")


def _value_inventory(
    record: Mapping[str, Any], domains: Tuple[str, ...], table: CanonicalizationTable
) -> Dict[Tuple[str, ...], Tuple[str, str]]:
    """Collect value tokens -> (canonical slot, domain); the first source to name a value wins."""
    inventory: Dict[Tuple[str, ...], Tuple[str, str]] = {}

    def register(domain: str, slot: str, value: Any) -> None:
        if not isinstance(value, str) or value.strip().lower() in IGNORED_VALUES:
            return
        tokens = tuple(tokenize(value))
        if not tokens or tokens in inventory:
            return
        key = f"{domain}-{slot}".lower()
        if key not in table.as_dict:
            return
        inventory[tokens] = (table.canonicalize(key), domain)

    for entry in record.get("log") or []:
        for act, slot, value, *_ in entry.get("span_info") or []:
            domain = str(act).split("-")[0].lower()
            name = _SPAN_SLOTS.get(str(slot).lower())
            if domain not in domains or name is None:
                continue
            booking = name in _BOOKING_SLOTS and not (domain == "train" and name == "day")
            register(domain, f"book-{name}" if booking else name, value)

    for entry in record.get("log") or []:
        for domain, belief in (entry.get("metadata") or {}).items():
            if domain not in domains or not isinstance(belief, dict):
                continue
            for slot, value in (belief.get("semi") or {}).items():
                register(domain, slot, value)
            for slot, value in (belief.get("book") or {}).items():
                if slot != "booked":
                    register(domain, f"book-{slot}", value)

    goal = record.get("goal") or {}
    for domain in domains:
        spec = goal.get(domain) or {}
        for section in ("info", "fail_info"):
            for slot, value in (spec.get(section) or {}).items():
                register(domain, slot, value)
        for section in ("book", "fail_book"):
            for slot, value in (spec.get(section) or {}).items():
                register(domain, f"book-{slot}", value)
    return inventory


def _match_values(
    tokens: Sequence[str], values: Mapping[Tuple[str, ...], Tuple[str, str]]
) -> List[SlotSpan]:
    """Locate values longest-first without overlap and return spans sorted by start."""
    taken = [False] * len(tokens)
    spans: List[SlotSpan] = []
    for value in sorted(values, key=lambda v: (-len(v), v)):
        slot, domain = values[value]
        width = len(value)
        for start in range(len(tokens) - width + 1):
            end = start + width
            if tuple(tokens[start:end]) == value and not any(taken[start:end]):
                spans.append(SlotSpan(slot, " ".join(value), start, end, domain))
                for i in range(start, end):
                    taken[i] = True
    return sorted(spans, key=lambda s: s.start)

