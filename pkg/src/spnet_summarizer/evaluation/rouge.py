"""ROUGE-N and ROUGE-L over token sequences.

No stemming and no stopword removal; tokens are compared as given.
"""

from __future__ import annotations

from collections import Counter
from typing import List, NamedTuple, Sequence, Tuple

from spnet_summarizer.exceptions import ContractError


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


ZERO = RougeScore(0.0, 0.0, 0.0)


def f_measure(precision: float, recall: float) -> float:
    """Harmonic mean; 0 when both are 0."""
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def ngrams(tokens: Sequence[str], n: int) -> Counter[Tuple[str, ...]]:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(reference: Sequence[str], candidate: Sequence[str], n: int = 1) -> RougeScore:
    """Clipped n-gram overlap between a reference and a candidate.

    Args:
        reference: Reference tokens; must not be empty.
        candidate: Candidate tokens; empty scores ``(0, 0, 0)``.
        n: Gram size.

    Raises:
        ContractError: If the reference is empty or ``n < 1``.
    """
    if n < 1:
        raise ContractError(f"ROUGE-N needs n >= 1, got {n}")
    if not reference:
        raise ContractError("ROUGE needs a non-empty reference")
    if not candidate:
        return ZERO
    ref_grams = ngrams(reference, n)
    cand_grams = ngrams(candidate, n)
    overlap = sum((ref_grams & cand_grams).values())
    ref_total = sum(ref_grams.values())
    cand_total = sum(cand_grams.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    return RougeScore(precision, recall, f_measure(precision, recall))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Length of the longest common subsequence (two-row dynamic programme)."""
    if not a or not b:
        return 0
    previous: List[int] = [0] * (len(b) + 1)
    for x in a:
        current = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            current[j] = previous[j - 1] + 1 if x == y else max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def rouge_l(reference: Sequence[str], candidate: Sequence[str]) -> RougeScore:
    """LCS-based precision, recall and F1.

    Raises:
        ContractError: If the reference is empty.
    """
    if not reference:
        raise ContractError("ROUGE needs a non-empty reference")
    if not candidate:
        return ZERO
    lcs = lcs_length(reference, candidate)
    precision = lcs / len(candidate)
    recall = lcs / len(reference)
    return RougeScore(precision, recall, f_measure(precision, recall))
