"""Seeded synthetic dialogs for desk-scale training and tests.

A dialog instantiates one or two domain templates with random slot values and closes
with a farewell exchange. Its reference summary is rendered from the same templates,
so every summary is learnable from the dialog it belongs to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from spnet_summarizer.corpus.delex import delexicalize_tokens
from spnet_summarizer.corpus.tokenizer import tokenize
from spnet_summarizer.corpus.types import Dialog, Role, SlotSpan, Turn
from spnet_summarizer.exceptions import ConfigurationError

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")

CLOSING_TURNS: Tuple[str, str] = ("thank you , goodbye .", "you are welcome . goodbye .")


@dataclass(frozen=True)
class DomainTemplate:
    """Turn and summary templates of one domain.

    Placeholders ``{slot}`` name a canonical slot without brackets; ``slots`` holds the
    value pool of each.
    """

    domain: str
    slots: Mapping[str, Tuple[str, ...]]
    user_turns: Tuple[str, ...]
    system_turns: Tuple[str, ...]
    summary: str

    def __post_init__(self) -> None:
        if len(self.user_turns) != len(self.system_turns) or not self.user_turns:
            raise ConfigurationError(f"Template '{self.domain}' needs paired user and system turns")
        used = {m for text in (*self.user_turns, *self.system_turns, self.summary) for m in _PLACEHOLDER.findall(text)}
        missing = used - set(self.slots)
        if missing:
            raise ConfigurationError(f"Template '{self.domain}' has no values for {sorted(missing)}")
        if any(not pool for pool in self.slots.values()):
            raise ConfigurationError(f"Template '{self.domain}' has an empty value pool")


DEFAULT_DOMAIN_TEMPLATES: Tuple[DomainTemplate, ...] = (
    DomainTemplate(
        domain="restaurant",
        slots={
            "food": ("chinese", "italian", "indian", "british", "thai", "french"),
            "place_name": ("golden wok", "ask restaurant", "pizza hut", "the curry garden", "bedouin", "la raza"),
            "time": ("12:30", "13:15", "17:45", "18:00", "19:30", "20:15"),
        },
        user_turns=(
            "i want to find a {food} restaurant .",
            "please book it for {time} .",
        ),
        system_turns=(
            "{place_name} serves {food} food . shall i book it ?",
            "done , your table at {place_name} is at {time} .",
        ),
        summary="you want a {food} restaurant . book {place_name} at {time} .",
    ),
    DomainTemplate(
        domain="hotel",
        slots={
            "stars": ("2", "3", "4", "5"),
            "stay": ("1", "2", "3", "4", "5"),
            "parking": ("free parking", "no parking", "paid parking"),
        },
        user_turns=(
            "i need a {stars} star hotel .",
            "i will stay {stay} nights .",
        ),
        system_turns=(
            "i found a {stars} star hotel with {parking} .",
            "booked for {stay} nights .",
        ),
        summary="you want a {stars} star hotel with {parking} for {stay} nights .",
    ),
    DomainTemplate(
        domain="taxi",
        slots={
            "departure": ("the station", "kings college", "the airport", "cafe jello", "the museum"),
            "destination": ("the cinema", "queens college", "the hospital", "the park", "the theatre"),
        },
        user_turns=("i need a taxi from {departure} to {destination} .",),
        system_turns=("a taxi will take you from {departure} to {destination} .",),
        summary="you need a taxi from {departure} to {destination} .",
    ),
    DomainTemplate(
        domain="train",
        slots={
            "day": ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"),
            "people": ("1", "2", "3", "4", "5", "6"),
        },
        user_turns=("i need a train on {day} .", "book seats for {people} people ."),
        system_turns=("there is a train on {day} .", "i booked {people} seats ."),
        summary="you need a train on {day} for {people} people .",
    ),
    DomainTemplate(
        domain="attraction",
        slots={
            "type": ("museum", "college", "park", "theatre", "cinema"),
            "area": ("north", "south", "east", "west", "centre"),
        },
        user_turns=("is there a {type} in the {area} ?",),
        system_turns=("yes , there is a {type} in the {area} .",),
        summary="you want a {type} in the {area} .",
    ),
)


def select_templates(domains: Sequence[str], templates: Sequence[DomainTemplate] = DEFAULT_DOMAIN_TEMPLATES) -> Tuple[DomainTemplate, ...]:
    """Pick templates by domain name, in the given order."""
    by_name = {t.domain: t for t in templates}
    unknown = [d for d in domains if d not in by_name]
    if unknown:
        raise ConfigurationError(f"No template for domain(s) {unknown}")
    return tuple(by_name[d] for d in domains)


def generate_synthetic_corpus(
    seed: int,
    n_dialogs: int,
    templates: Optional[Sequence[DomainTemplate]] = None,
) -> List[Dialog]:
    """Generate ``n_dialogs`` dialogs deterministically from ``seed``.

    Each dialog draws one or two distinct domains, samples one value per slot, and
    renders the turns and summary from the same values.
    """
    if n_dialogs < 1:
        raise ConfigurationError(f"n_dialogs must be at least 1, got {n_dialogs}")
    templates = tuple(templates) if templates is not None else DEFAULT_DOMAIN_TEMPLATES
    if not templates:
        raise ConfigurationError("At least one domain template is required")
    inventory = tuple(t.domain for t in templates)
    rng = np.random.Generator(np.random.PCG64(seed))

    dialogs: List[Dialog] = []
    for i in range(n_dialogs):
        k = int(rng.integers(1, min(2, len(templates)) + 1))
        chosen = [templates[j] for j in rng.choice(len(templates), size=k, replace=False)]

        turns: List[Turn] = []
        summary: List[str] = []
        summary_spans: List[SlotSpan] = []
        for template in chosen:
            values = {name: pool[int(rng.integers(len(pool)))] for name, pool in template.slots.items()}
            for user_text, system_text in zip(template.user_turns, template.system_turns):
                turns.append(_render_turn(Role.USER, user_text, values, template.domain))
                turns.append(_render_turn(Role.SYSTEM, system_text, values, template.domain))
            tokens, spans = _render(template.summary, values, template.domain)
            summary_spans.extend(
                SlotSpan(s.slot, s.value, s.start + len(summary), s.end + len(summary), s.domain) for s in spans
            )
            summary.extend(tokens)
        turns.append(Turn(Role.USER, tokenize(CLOSING_TURNS[0])))
        turns.append(Turn(Role.SYSTEM, tokenize(CLOSING_TURNS[1])))

        delex, _ = delexicalize_tokens(summary, summary_spans)
        active = {t.domain for t in chosen}
        dialogs.append(
            Dialog(
                id=f"syn-{seed}-{i:05d}",
                turns=turns,
                domains=tuple(int(d in active) for d in inventory),
                domain_inventory=inventory,
                reference_summary=summary,
                reference_summary_delex=delex,
                summary_spans=summary_spans,
            )
        )
    return dialogs


def _render_turn(role: Role, text: str, values: Dict[str, str], domain: str) -> Turn:
    tokens, spans = _render(text, values, domain)
    return Turn(role=role, tokens=tokens, slot_spans=spans)


def _render(text: str, values: Mapping[str, str], domain: str) -> Tuple[List[str], List[SlotSpan]]:
    """Fill placeholders and record where each value landed."""
    tokens: List[str] = []
    spans: List[SlotSpan] = []
    cursor = 0
    for match in _PLACEHOLDER.finditer(text):
        tokens.extend(tokenize(text[cursor:match.start()]))
        name = match.group(1)
        value_tokens = tokenize(values[name])
        start = len(tokens)
        tokens.extend(value_tokens)
        spans.append(SlotSpan(f"[{name}]", " ".join(value_tokens), start, len(tokens), domain))
        cursor = match.end()
    tokens.extend(tokenize(text[cursor:]))
    return tokens, spans
