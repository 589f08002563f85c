"""Corpus-level evaluation: ROUGE, CIC and domain-classifier F1."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from spnet_summarizer.corpus.types import Dialog
from spnet_summarizer.corpus.vocab import Vocabulary
from spnet_summarizer.evaluation.cic import CICScore, cic, slot_values_from_dialog
from spnet_summarizer.evaluation.formatting import format_report_text
from spnet_summarizer.evaluation.rouge import RougeScore, rouge_l, rouge_n
from spnet_summarizer.evaluation.summarize import DecodingOptions, DialogSummary, summarize_corpus
from spnet_summarizer.misc import PathLike, write_json
from spnet_summarizer.model.params import ModelParams

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ROUGE_METRICS = ("rouge1", "rouge2", "rougeL")
DOMAIN_THRESHOLD = 0.5


@dataclass
class PairScores:
    dialog_id: str
    rouge: Dict[str, RougeScore]
    cic: CICScore
    unresolved: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "id": self.dialog_id,
            **{name: score._asdict() for name, score in self.rouge.items()},
            "cic": {"per_domain": self.cic.per_domain, "mean": self.cic.mean},
            "unresolved": self.unresolved,
        }


@dataclass
class ClassifierReport:
    """Per-domain F1 of the domain head at a fixed threshold; None where undefined."""

    per_domain: Dict[str, Optional[float]]
    macro_f1: Optional[float]
    threshold: float = DOMAIN_THRESHOLD

    def to_dict(self) -> Dict[str, Any]:
        return {"per_domain_f1": self.per_domain, "macro_f1": self.macro_f1, "threshold": self.threshold}


@dataclass
class MetricReport:
    """Scores per evaluated pair and their corpus means.

    ``cic_mean`` averages the per-dialog CIC over dialogs where it is applicable;
    ``cic_per_domain`` averages each domain over the dialogs that have values for it.
    """

    pairs: List[PairScores]
    rouge: Dict[str, RougeScore]
    cic_per_domain: Dict[str, float]
    cic_mean: Optional[float]
    unresolved: int = 0
    excluded: Dict[str, str] = field(default_factory=dict)
    classifier: Optional[ClassifierReport] = None

    @property
    def n_evaluated(self) -> int:
        return len(self.pairs)

    @property
    def cic_applicable(self) -> int:
        return sum(p.cic.applicable for p in self.pairs)

    def headline(self) -> Dict[str, Optional[float]]:
        """ROUGE F1 per variant, the CIC mean and the classifier macro F1."""
        scores: Dict[str, Optional[float]] = {name: score.f1 for name, score in self.rouge.items()}
        scores["cic"] = self.cic_mean
        scores["domain_macro_f1"] = self.classifier.macro_f1 if self.classifier is not None else None
        return scores

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "n_evaluated": self.n_evaluated,
            "n_excluded": len(self.excluded),
            "excluded": dict(sorted(self.excluded.items())),
            "rouge": {name: score._asdict() for name, score in self.rouge.items()},
            "cic": {
                "per_domain": self.cic_per_domain,
                "mean": self.cic_mean,
                "n_applicable": self.cic_applicable,
            },
            "unresolved_slots": self.unresolved,
            "classifier": self.classifier.to_dict() if self.classifier is not None else None,
            "pairs": [p.to_dict() for p in self.pairs],
        }


def score_pair(dialog: Dialog, candidate: Sequence[str], unresolved: int = 0) -> PairScores:
    """Score one relexicalized candidate against a dialog's reference summary."""
    reference = dialog.reference_summary
    return PairScores(
        dialog_id=dialog.id,
        rouge={
            "rouge1": rouge_n(reference, candidate, 1),
            "rouge2": rouge_n(reference, candidate, 2),
            "rougeL": rouge_l(reference, candidate),
        },
        cic=cic(slot_values_from_dialog(dialog), candidate),
        unresolved=unresolved,
    )


def f1_at_threshold(labels: Sequence[int], probabilities: Sequence[float], threshold: float = DOMAIN_THRESHOLD) -> Optional[float]:
    """Binary F1 of ``probability >= threshold``; None with no positives predicted or present."""
    tp = fp = fn = 0
    for label, p in zip(labels, probabilities):
        predicted = p >= threshold
        tp += bool(label) and predicted
        fp += (not label) and predicted
        fn += bool(label) and not predicted
    if tp + fp + fn == 0:
        return None
    return 2 * tp / (2 * tp + fp + fn)


def classifier_report(
    dialogs: Sequence[Dialog], probabilities: Sequence[Sequence[float]], threshold: float = DOMAIN_THRESHOLD
) -> ClassifierReport:
    inventory = dialogs[0].domain_inventory
    per_domain: Dict[str, Optional[float]] = {}
    for i, domain in enumerate(inventory):
        per_domain[domain] = f1_at_threshold(
            [d.domains[i] for d in dialogs], [p[i] for p in probabilities], threshold
        )
    defined = [f for f in per_domain.values() if f is not None]
    macro = sum(defined) / len(defined) if defined else None
    return ClassifierReport(per_domain=per_domain, macro_f1=macro, threshold=threshold)


def aggregate(pairs: Sequence[PairScores]) -> Tuple[Dict[str, RougeScore], Dict[str, float], Optional[float]]:
    """Arithmetic means of ROUGE, per-domain CIC and per-dialog CIC."""
    rouge: Dict[str, RougeScore] = {}
    for name in ROUGE_METRICS:
        if pairs:
            rouge[name] = RougeScore(*(sum(p.rouge[name][k] for p in pairs) / len(pairs) for k in range(3)))
        else:
            rouge[name] = RougeScore(0.0, 0.0, 0.0)
    by_domain: Dict[str, List[float]] = {}
    for pair in pairs:
        for domain, score in pair.cic.per_domain.items():
            by_domain.setdefault(domain, []).append(score)
    per_domain = {d: sum(v) / len(v) for d, v in sorted(by_domain.items())}
    means = [p.cic.mean for p in pairs if p.cic.mean is not None]
    return rouge, per_domain, (sum(means) / len(means) if means else None)


def evaluate_predictions(
    dialogs: Sequence[Dialog],
    summaries: Sequence[DialogSummary],
    excluded: Optional[Mapping[str, str]] = None,
) -> MetricReport:
    """Score summaries against their dialogs' references, in dialog order.

    Dialogs without a summary are excluded and counted.
    """
    by_id = {s.dialog_id: s for s in summaries}
    unknown = sorted(set(by_id) - {d.id for d in dialogs})
    if unknown:
        logger.warning(f"{len(unknown)} summaries have no matching dialog and are ignored")
    skipped: Dict[str, str] = dict(excluded or {})
    pairs: List[PairScores] = []
    scored: List[Tuple[Dialog, DialogSummary]] = []
    for dialog in dialogs:
        summary = by_id.get(dialog.id)
        if summary is None:
            skipped.setdefault(dialog.id, "no summary")
            continue
        pairs.append(score_pair(dialog, summary.tokens, summary.unresolved))
        scored.append((dialog, summary))
    if skipped:
        logger.warning(f"{len(skipped)} dialog(s) excluded from evaluation")

    rouge, per_domain, cic_mean = aggregate(pairs)
    with_probs = [
        (d, s.domain_probabilities) for d, s in scored if len(s.domain_probabilities) == len(d.domain_inventory)
    ]
    classifier = (
        classifier_report([d for d, _ in with_probs], [p for _, p in with_probs]) if with_probs else None
    )
    return MetricReport(
        pairs=pairs,
        rouge=rouge,
        cic_per_domain=per_domain,
        cic_mean=cic_mean,
        unresolved=sum(p.unresolved for p in pairs),
        excluded=skipped,
        classifier=classifier,
    )


def evaluate_model(
    params: ModelParams,
    vocab: Vocabulary,
    dialogs: Sequence[Dialog],
    options: DecodingOptions = DecodingOptions(),
    workers: int = 1,
) -> MetricReport:
    """Decode, slot-fill and relexicalize every dialog, then score the results."""
    summaries, failures = summarize_corpus(dialogs, params, vocab, options, workers)
    return evaluate_predictions(dialogs, summaries, failures)


def write_report(report: MetricReport, output_dir: PathLike) -> Tuple[Path, Path]:
    """Write ``report.json`` and ``report.txt`` into ``output_dir``."""
    output_dir = Path(output_dir)
    json_path = output_dir / "report.json"
    text_path = output_dir / "report.txt"
    write_json(json_path, report.to_dict())
    text_path.write_text(format_report_text(report) + "\n", encoding="utf-8")
    return json_path, text_path
