"""Evaluation Report Formatting Module.

Renders a MetricReport as an aligned plain-text report. Scores are shown both in
[0, 1] and in the x100 form used by published result tables.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Dict, Optional

import pandas as pd  # type: ignore

if TYPE_CHECKING:
    from spnet_summarizer.evaluation.report import MetricReport


def format_report_text(report: MetricReport) -> str:
    """Format a metric report for display or for ``report.txt``.

    Args:
        report: Corpus-level evaluation results.

    Returns:
        str: Sections for coverage, ROUGE, CIC and the domain classifier.

    Example:
        >>> print(format_report_text(report))
        Evaluation Report:

        1. Coverage:
           - Dialogs evaluated: 32
        ...
    """
    response_parts = [
        "Evaluation Report:",
        "",
        _format_coverage(report),
        _format_rouge(report),
        _format_cic(report),
        _format_classifier(report),
    ]

    # Join non-empty parts
    return "\n".join(part for part in response_parts if part.strip())


def _format_coverage(report: MetricReport) -> str:
    """Format the counts section."""
    lines = [
        "1. Coverage:",
        f"   - Dialogs evaluated: {report.n_evaluated}",
        f"   - Dialogs excluded: {len(report.excluded)}",
        f"   - Unresolved slot tokens: {report.unresolved}",
    ]
    for dialog_id, reason in sorted(report.excluded.items()):
        lines.append(f"     * {dialog_id}: {reason}")
    return "\n".join(lines)


def _format_rouge(report: MetricReport) -> str:
    """Format ROUGE precision/recall/F1 as an aligned table."""
    table = pd.DataFrame(
        {
            "precision": [s.precision for s in report.rouge.values()],
            "recall": [s.recall for s in report.rouge.values()],
            "f1": [s.f1 for s in report.rouge.values()],
            "f1 x100": [100 * s.f1 for s in report.rouge.values()],
        },
        index=list(report.rouge),
    )
    return "\n2. ROUGE:\n" + _indent(table.to_string(float_format=lambda v: f"{v:.4f}"))


def _format_cic(report: MetricReport) -> str:
    """Format per-domain CIC and the mean."""
    if report.cic_mean is None:
        return "\n3. CIC: not applicable (no reference slot values)"
    rows: Dict[str, float] = {**report.cic_per_domain, "mean": report.cic_mean}
    table = pd.DataFrame(
        {"cic": list(rows.values()), "x100": [100 * v for v in rows.values()]},
        index=list(rows),
    )
    header = f"\n3. CIC ({report.cic_applicable} dialogs with reference slot values):\n"
    return header + _indent(table.to_string(float_format=lambda v: f"{v:.4f}"))


def _format_classifier(report: MetricReport) -> str:
    """Format the domain classifier section if probabilities were available."""
    if report.classifier is None:
        return ""
    classifier = report.classifier
    lines = [f"\n4. Domain Classifier (threshold {classifier.threshold}):"]
    for domain, f1 in classifier.per_domain.items():
        lines.append(f"   - {domain}: {_safe_format_score(f1)}")
    lines.append(f"   - macro F1: {_safe_format_score(classifier.macro_f1)}")
    return "\n".join(lines)


def _safe_format_score(value: Optional[float]) -> str:
    """Format a score, or n/a when it is undefined."""
    return "n/a" if value is None else f"{value:.4f}"


def _indent(text: str) -> str:
    return "\n".join("   " + line for line in text.splitlines())
