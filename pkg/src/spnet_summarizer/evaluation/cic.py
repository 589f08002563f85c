"""Critical information completeness: recall of reference slot values in a candidate.

Per domain, the score is the fraction of reference ``(slot, value)`` pairs whose
tokenized value appears as a contiguous token run in the candidate. A dialog's score
is the arithmetic mean over its domains with at least one reference value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Set, Tuple

from spnet_summarizer.corpus.tokenizer import tokenize
from spnet_summarizer.corpus.types import Dialog, SlotEntry, SlotSpan, is_slot_token

UNKNOWN_DOMAIN = "*"

SlotValue = Tuple[str, Tuple[str, ...]]


def normalize_value(value: str) -> Tuple[str, ...]:
    return tuple(tokenize(value))


@dataclass(frozen=True)
class SlotValueSet:
    """Reference slot values grouped by domain; duplicates count once."""

    values: Mapping[str, FrozenSet[SlotValue]] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[Optional[str], str, str]]) -> SlotValueSet:
        """Build from ``(domain, slot, surface value)`` triples."""
        grouped: Dict[str, Set[SlotValue]] = {}
        for domain, slot, value in pairs:
            normalized = normalize_value(value)
            if normalized:
                grouped.setdefault(domain or UNKNOWN_DOMAIN, set()).add((slot, normalized))
        return cls({domain: frozenset(v) for domain, v in sorted(grouped.items())})

    @property
    def domains(self) -> Tuple[str, ...]:
        return tuple(sorted(d for d, v in self.values.items() if v))

    def count(self, domain: str) -> int:
        return len(self.values.get(domain, ()))

    def __len__(self) -> int:
        return sum(len(v) for v in self.values.values())


@dataclass
class CICScore:
    """Per-domain completeness and their mean; ``mean`` is None when not applicable."""

    per_domain: Dict[str, float]
    mean: Optional[float]

    @property
    def applicable(self) -> bool:
        return self.mean is not None


def slot_values_from_spans(spans: Sequence[SlotSpan]) -> SlotValueSet:
    return SlotValueSet.from_pairs((s.domain, s.slot, s.value) for s in spans)


def slot_values_from_dialog(dialog: Dialog) -> SlotValueSet:
    """Values annotated in a dialog's reference summary."""
    return slot_values_from_spans(dialog.summary_spans)


def slot_values_from_table(delex_summary: Sequence[str], slot_table: Sequence[SlotEntry]) -> SlotValueSet:
    """Values a delexicalized summary refers to, resolved through a slot table.

    Each slot token takes the earliest ``(encoder, position)`` entry of that slot;
    tokens with no entry contribute nothing.
    """
    first: Dict[str, SlotEntry] = {}
    for entry in sorted(slot_table, key=lambda e: (e.encoder, e.position)):
        first.setdefault(entry.slot, entry)
    return SlotValueSet.from_pairs(
        (first[t].domain, t, first[t].value) for t in delex_summary if is_slot_token(t) and t in first
    )


def contains_run(tokens: Sequence[str], run: Sequence[str]) -> bool:
    """True if ``run`` occurs in ``tokens`` as a contiguous subsequence."""
    n = len(run)
    if n == 0:
        return False
    first = run[0]
    return any(
        tokens[i] == first and tuple(tokens[i:i + n]) == tuple(run) for i in range(len(tokens) - n + 1)
    )


def cic(reference: SlotValueSet, candidate: Sequence[str]) -> CICScore:
    """Recall of reference slot values in the candidate, per domain and averaged.

    ``candidate`` is a relexicalized (surface-form) summary; it is lowercased before
    matching. Domains without reference values are left out; if none remain the score
    is not applicable.
    """
    tokens = [t.lower() for t in candidate]
    per_domain: Dict[str, float] = {}
    for domain in reference.domains:
        values = reference.values[domain]
        matched = sum(contains_run(tokens, value) for _, value in values)
        per_domain[domain] = matched / len(values)
    mean = sum(per_domain.values()) / len(per_domain) if per_domain else None
    return CICScore(per_domain=per_domain, mean=mean)
