"""Summary quality metrics and corpus evaluation."""

from spnet_summarizer.evaluation.cic import (
    CICScore,
    SlotValueSet,
    cic,
    contains_run,
    slot_values_from_dialog,
    slot_values_from_spans,
    slot_values_from_table,
)
from spnet_summarizer.evaluation.formatting import format_report_text
from spnet_summarizer.evaluation.report import (
    ClassifierReport,
    MetricReport,
    PairScores,
    evaluate_model,
    evaluate_predictions,
    f1_at_threshold,
    score_pair,
    write_report,
)
from spnet_summarizer.evaluation.rouge import RougeScore, lcs_length, rouge_l, rouge_n
from spnet_summarizer.evaluation.summarize import (
    DecodingOptions,
    DialogSummary,
    summarize_corpus,
    summarize_dialog,
)

__all__ = [
    "CICScore",
    "ClassifierReport",
    "DecodingOptions",
    "DialogSummary",
    "MetricReport",
    "PairScores",
    "RougeScore",
    "SlotValueSet",
    "cic",
    "contains_run",
    "evaluate_model",
    "evaluate_predictions",
    "f1_at_threshold",
    "format_report_text",
    "lcs_length",
    "rouge_l",
    "rouge_n",
    "score_pair",
    "slot_values_from_dialog",
    "slot_values_from_spans",
    "slot_values_from_table",
    "summarize_corpus",
    "summarize_dialog",
    "write_report",
]
