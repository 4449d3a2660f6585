"""Sentence-level evaluation of extracted statements against gold labels.

A statement counts as a predicted positive for every claim sentence it is
anchored on; metrics are precision / recall / F1 over those sentences,
with either any claim or only complete claims as the positive class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import GoldClass, GoldLabel, PressBriefing
from .errors import EvaluationError
from .extraction import PipelineConfig, PipelineResources, Statement, run_pipeline

ANY_CLAIM = "any_claim"
COMPLETE_CLAIM = "complete_claim"

_POSITIVE_CLASSES = {
    ANY_CLAIM: {GoldClass.INCOMPLETE_CLAIM, GoldClass.COMPLETE_CLAIM},
    COMPLETE_CLAIM: {GoldClass.COMPLETE_CLAIM},
}


@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def population(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True, slots=True)
class MetricRow:
    config_label: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True, slots=True)
class EvaluationReport:
    rows: tuple[MetricRow, ...]
    positive_class: str
    complete_ratio: float | None = None


def confusion(
    predicted: Iterable[tuple[str, int]],
    gold: Sequence[GoldLabel],
    positive_class: str = ANY_CLAIM,
) -> ConfusionCounts:
    """Tally predictions (doc_id, sentence_index pairs) against gold labels."""
    if positive_class not in _POSITIVE_CLASSES:
        raise ValueError(f"unknown positive class {positive_class!r}")
    positives = _POSITIVE_CLASSES[positive_class]
    gold_map = {(label.doc_id, label.sentence_index): label.gold_class for label in gold}
    predicted_set = set(predicted)
    unlabeled = predicted_set - gold_map.keys()
    if unlabeled:
        raise EvaluationError(f"predictions without gold labels: {sorted(unlabeled)[:5]}")
    tp = fp = fn = tn = 0
    for key, gold_class in gold_map.items():
        is_positive = gold_class in positives
        is_predicted = key in predicted_set
        if is_positive and is_predicted:
            tp += 1
        elif is_positive:
            fn += 1
        elif is_predicted:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean with the 0/0 -> 0 convention."""
    if precision + recall == 0.0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def prf(counts: ConfusionCounts) -> tuple[float, float, float]:
    """Precision, recall, F1 with the 0/0 -> 0 convention."""
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else 0.0
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else 0.0
    return precision, recall, f1_score(precision, recall)


def metric_row(label: str, counts: ConfusionCounts) -> MetricRow:
    precision, recall, f1 = prf(counts)
    return MetricRow(config_label=label, precision=precision, recall=recall, f1=f1)


def statement_predictions(statements: Iterable[Statement]) -> set[tuple[str, int]]:
    """Sentence-level predicted positives: every anchored claim sentence."""
    return {
        (claim.doc_id, claim.sentence_index)
        for statement in statements
        for claim in statement.anchor_claims
    }


def config_label(config: PipelineConfig) -> str:
    """Table-style label: confidence threshold plus the filter method."""
    label = f"{config.claim_threshold:g}"
    suffix = {
        None: "",
        "embedding": " embedding",
        "wikify_title": " w. title",
        "wikify_intro": " w. intro",
    }[config.filter_method]
    return label + suffix


def sweep(
    briefings: Sequence[PressBriefing],
    gold: Sequence[GoldLabel],
    configs: Sequence[PipelineConfig],
    resources: PipelineResources,
    positive_class: str = COMPLETE_CLAIM,
) -> EvaluationReport:
    """One metric row per config, evaluated over all briefings."""
    rows: list[MetricRow] = []
    seen_labels: set[str] = set()
    for config in configs:
        predicted: set[tuple[str, int]] = set()
        for briefing in briefings:
            outcome = run_pipeline(briefing, config, resources)
            predicted |= statement_predictions(outcome.statements)
        counts = confusion(predicted, gold, positive_class)
        label = config_label(config)
        if label in seen_labels:
            label = f"{label} #{sum(1 for l in seen_labels if l.startswith(label)) + 1}"
        seen_labels.add(label)
        rows.append(metric_row(label, counts))
    return EvaluationReport(rows=tuple(rows), positive_class=positive_class)


def complete_ratio(statements: Sequence[Statement], gold: Sequence[GoldLabel]) -> float | None:
    """Fraction of statements containing a complete-claim gold sentence.

    None for an empty statement list; statements whose span is not fully
    covered by gold labels cannot be resolved and raise EvaluationError.
    """
    if not statements:
        return None
    gold_map = {(label.doc_id, label.sentence_index): label.gold_class for label in gold}
    hits = 0
    for statement in statements:
        start, end = statement.sentence_span
        classes = []
        for index in range(start, end + 1):
            gold_class = gold_map.get((statement.doc_id, index))
            if gold_class is None:
                raise EvaluationError(
                    f"statement {statement.doc_id}[{start},{end}] has no gold label "
                    f"for sentence {index}"
                )
            classes.append(gold_class)
        if GoldClass.COMPLETE_CLAIM in classes:
            hits += 1
    return hits / len(statements)


def report_csv(report: EvaluationReport) -> str:
    lines = ["config_label,precision,recall,f1"]
    for row in report.rows:
        lines.append(
            f"{row.config_label},{row.precision:.3f},{row.recall:.3f},{row.f1:.3f}"
        )
    return "\n".join(lines) + "\n"


def report_json(report: EvaluationReport) -> str:
    payload = {
        "positive_class": report.positive_class,
        "complete_ratio": (
            None if report.complete_ratio is None else round(report.complete_ratio, 3)
        ),
        "rows": [
            {
                "config_label": row.config_label,
                "precision": round(row.precision, 3),
                "recall": round(row.recall, 3),
                "f1": round(row.f1, 3),
            }
            for row in report.rows
        ],
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
