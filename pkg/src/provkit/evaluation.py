"""Confusion matrices, the five summary metrics and batch reports.

The positive class is a ChatGPT paraphrase.  A Phase I NearCopy verdict
also counts as a positive prediction.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import IO, Iterable, Mapping, Sequence

from provkit.classifier import Label

METRIC_NAMES = ("accuracy", "precision", "sensitivity", "specificity", "f1")

POSITIVE_LABELS = {Label.CHATGPT, Label.NEAR_COPY}
_TRUE_POSITIVE_NAMES = {"chatgpt", "chatgptparaphrase", "chatgpt-4", "positive", "1", "true"}
_TRUE_NEGATIVE_NAMES = {"other", "negative", "0", "false"}


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise EvaluationError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fn + other.fn, self.fp + other.fp, self.tn + other.tn
        )


@dataclass(frozen=True)
class MetricSet:
    """Fractions in [0, 1]; ``None`` where the denominator is zero."""

    accuracy: float | None
    precision: float | None
    sensitivity: float | None
    specificity: float | None
    f1: float | None

    def as_percent(self) -> dict[str, str]:
        return {name: pct(getattr(self, name)) for name in METRIC_NAMES}


def pct(value: float | None) -> str:
    """Percentage with two decimals, rounded half-up; ``n/a`` when undefined."""
    if value is None:
        return "n/a"
    return str((Decimal(repr(value)) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _is_positive(label) -> bool:
    if isinstance(label, Label):
        if label is Label.INCONCLUSIVE:
            raise EvaluationError("Inconclusive is not a final label")
        return label in POSITIVE_LABELS
    name = str(label).strip().lower()
    if name in _TRUE_POSITIVE_NAMES or name == Label.NEAR_COPY.value.lower():
        return True
    if name in _TRUE_NEGATIVE_NAMES:
        return False
    raise EvaluationError(f"unrecognised label {label!r}")


def score_run(records: Iterable[tuple[object, object]]) -> ConfusionMatrix:
    """Count ``(predicted, true)`` label pairs into a confusion matrix.

    Labels may be :class:`Label` members or strings such as ``"ChatGPT"``
    and ``"Other"``.
    """
    tp = fn = fp = tn = 0
    seen = False
    for predicted, truth in records:
        seen = True
        p, t = _is_positive(predicted), _is_positive(truth)
        if t and p:
            tp += 1
        elif t:
            fn += 1
        elif p:
            fp += 1
        else:
            tn += 1
    if not seen:
        raise EvaluationError("score_run needs at least one record")
    return ConfusionMatrix(tp, fn, fp, tn)


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def metrics(cm: ConfusionMatrix) -> MetricSet:
    if cm.total == 0:
        raise EvaluationError("empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    sensitivity = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or sensitivity is None or precision + sensitivity == 0:
        f1 = None
    else:
        f1 = 2 * precision * sensitivity / (precision + sensitivity)
    return MetricSet(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        sensitivity=sensitivity,
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        f1=f1,
    )


def aggregate(cms: Mapping[str, ConfusionMatrix] | Sequence[ConfusionMatrix]) -> MetricSet:
    """Metrics of the element-wise sum of several matrices."""
    mats = list(cms.values()) if isinstance(cms, Mapping) else list(cms)
    if not mats:
        raise EvaluationError("aggregate needs at least one matrix")
    total = ConfusionMatrix()
    for m in mats:
        total = total + m
    return metrics(total)


def build_report(run_id: str, config: dict, per_category: Mapping[str, ConfusionMatrix], **extra) -> dict:
    report = {
        "run_id": run_id,
        "config": config,
        "per_category": [
            {"category": cat, "confusion": asdict(cm), "metrics": asdict(metrics(cm))}
            for cat, cm in per_category.items()
        ],
        "overall": asdict(aggregate(per_category)),
    }
    report.update(extra)
    return report


def write_report_json(report: dict, fh: IO[str]) -> None:
    json.dump(report, fh, indent=2, sort_keys=False)
    fh.write("\n")


def write_metrics_csv(per_category: Mapping[str, ConfusionMatrix], fh: IO[str]) -> None:
    """Metric rows by category columns plus an ``Overall`` column, in percent."""
    cats = list(per_category)
    sets = [metrics(per_category[c]) for c in cats] + [aggregate(per_category)]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["metric", *cats, "Overall"])
    for name in METRIC_NAMES:
        writer.writerow([name, *(pct(getattr(s, name)) for s in sets)])


def read_metrics_csv(fh: IO[str]) -> dict[str, dict[str, str]]:
    """``{column: {metric: value}}`` from a CSV written by :func:`write_metrics_csv`."""
    rows = list(csv.reader(fh))
    header, body = rows[0][1:], rows[1:]
    return {col: {r[0]: r[i + 1] for r in body} for i, col in enumerate(header)}
