"""Re-contextualizing reported results against the stronger baseline.

Takes experiment records, one reported best-of-t validation accuracy
each, recomputes both random baselines, and sorts every result into
``below_both``, ``flip`` (above the standard baseline but not above the
maximum baseline), or ``above_both``.  Also estimates the expected best
accuracy directly from observed per-prompt samples, and evaluates how
well each baseline predicts above-random held-out accuracy.

Record processing is independent per record; aggregates depend only on
the multiset of inputs.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from .dist import LabelScheme, PerExampleLabels, UniformLabels
from .errors import DomainError
from .orderstat import TaskSpec, accuracy_to_count, baseline_report

__all__ = [
    "CATEGORIES",
    "ExperimentRecord",
    "AuditVerdict",
    "CategoryCounts",
    "GroupCounts",
    "AuditSummary",
    "PredictorStats",
    "PredictionEvaluation",
    "RowError",
    "LoadResult",
    "empirical_expected_max",
    "categorize_observation",
    "classify",
    "aggregate",
    "evaluate_prediction",
    "roc_points",
    "pr_points",
    "read_records",
]

CATEGORIES = ("below_both", "flip", "above_both")

# Observed max accuracy must agree with the max of any per-prompt values.
_MAX_MATCH_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ExperimentRecord:
    """One reported result: a best-of-t accuracy on an n-example task.

    ``per_prompt_accuracies`` (all t individual accuracies) and the
    held-out fields are optional; when a per-prompt list is present its
    maximum must agree with ``observed_max_accuracy``.  If its length
    disagrees with ``t``, the explicit ``t`` wins and a warning is
    attached (published summaries often omit the raw per-prompt data).
    """

    id: str
    model: str
    dataset: str
    n: int
    labels: LabelScheme
    t: int
    observed_max_accuracy: float
    per_prompt_accuracies: tuple[float, ...] | None = None
    heldout_accuracy: float | None = None
    heldout_n: int | None = None
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        # TaskSpec construction validates n, t and the labels length.
        spec = self.spec()
        accuracy_to_count(spec.n, self.observed_max_accuracy)
        if self.per_prompt_accuracies is not None:
            if len(self.per_prompt_accuracies) == 0:
                raise DomainError(f"record {self.id!r}: per_prompt_accuracies is empty")
            for a in self.per_prompt_accuracies:
                accuracy_to_count(spec.n, a)
            best = max(self.per_prompt_accuracies)
            if abs(best - self.observed_max_accuracy) > _MAX_MATCH_TOLERANCE:
                raise DomainError(
                    f"record {self.id!r}: observed_max_accuracy {self.observed_max_accuracy} "
                    f"does not match the per-prompt maximum {best}"
                )
            if len(self.per_prompt_accuracies) != self.t:
                message = (
                    f"record {self.id!r}: t={self.t} but "
                    f"{len(self.per_prompt_accuracies)} per-prompt accuracies given; t wins"
                )
                object.__setattr__(self, "warnings", self.warnings + (message,))
        if self.heldout_accuracy is not None:
            if self.heldout_n is None:
                raise DomainError(f"record {self.id!r}: heldout_accuracy without heldout_n")
            if self.heldout_n < 1:
                raise DomainError(f"record {self.id!r}: heldout_n must be >= 1")
            accuracy_to_count(self.heldout_n, self.heldout_accuracy)
        elif self.heldout_n is not None:
            raise DomainError(f"record {self.id!r}: heldout_n without heldout_accuracy")

    def spec(self) -> TaskSpec:
        return TaskSpec(n=self.n, labels=self.labels, t=self.t)


@dataclass(frozen=True)
class AuditVerdict:
    """One record's category and the numbers behind it."""

    id: str
    model: str
    dataset: str
    observed_max_accuracy: float
    category: str
    expected_standard: float
    expected_max: float
    p_standard: float
    p_max: float


@dataclass(frozen=True)
class CategoryCounts:
    """Verdict counts plus the share of above-standard results that flipped."""

    below_both: int = 0
    flip: int = 0
    above_both: int = 0

    @property
    def total(self) -> int:
        return self.below_both + self.flip + self.above_both

    @property
    def flipped_denominator_zero(self) -> bool:
        return self.flip + self.above_both == 0

    @property
    def flipped_percentage(self) -> float:
        """100 * flip / (flip + above_both); 0.0 when nothing beat the standard baseline."""
        denominator = self.flip + self.above_both
        if denominator == 0:
            return 0.0
        return 100.0 * self.flip / denominator


@dataclass(frozen=True)
class GroupCounts:
    model: str
    dataset: str
    counts: CategoryCounts


@dataclass(frozen=True)
class AuditSummary:
    """Overall counts and a per-(model, dataset) breakdown, sorted by key."""

    total: CategoryCounts
    groups: tuple[GroupCounts, ...]


@dataclass(frozen=True)
class PredictorStats:
    """Confusion counts and derived rates for one binary predictor."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0


@dataclass(frozen=True)
class PredictionEvaluation:
    """How well each baseline predicted above-random held-out accuracy.

    ``standard`` and ``max`` are the two threshold predictors; the ROC
    and precision-recall curves come from the shared ranking score (the
    validation distribution function).  With single-class ground truth
    the undefined curve areas are NaN and their point lists empty.
    """

    standard: PredictorStats
    max: PredictorStats
    roc_points: tuple[tuple[float, float], ...]
    auroc: float
    pr_points: tuple[tuple[float, float], ...]
    aupr: float
    n_records: int


@dataclass(frozen=True)
class RowError:
    """A rejected input row: its 1-based row number, field if known, and why."""

    row: int
    field: str | None
    message: str


@dataclass(frozen=True)
class LoadResult:
    records: tuple[ExperimentRecord, ...]
    errors: tuple[RowError, ...]


def empirical_expected_max(accuracies: Sequence[float], t: int) -> float:
    """Expected best of ``t`` draws from the empirical distribution of a sample.

    ``sum_v v * (P(V <= v)^t - P(V < v)^t)`` over distinct observed
    values: the sample mean at ``t = 1``, approaching the sample maximum
    as ``t`` grows.
    """
    if len(accuracies) == 0:
        raise DomainError("accuracies must be nonempty")
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    values = np.asarray(accuracies, dtype=float)
    distinct, counts = np.unique(values, return_counts=True)
    at_most = np.cumsum(counts) / values.size
    below = at_most - counts / values.size
    return float(distinct @ (at_most**t - below**t))


def categorize_observation(observed: float, expected_standard: float, expected_max: float) -> str:
    """Sort one observation against both baselines; beating is strict.

    Ties sit with the weaker category: equal to the standard baseline is
    ``below_both``, equal to the maximum baseline is ``flip``.
    """
    if observed <= expected_standard:
        return "below_both"
    if observed <= expected_max:
        return "flip"
    return "above_both"


def classify(record: ExperimentRecord) -> AuditVerdict:
    """Compare one record's best-of-t accuracy against both baselines."""
    report = baseline_report(record.spec(), record.observed_max_accuracy)
    return AuditVerdict(
        id=record.id,
        model=record.model,
        dataset=record.dataset,
        observed_max_accuracy=record.observed_max_accuracy,
        category=categorize_observation(
            record.observed_max_accuracy, report.expected_standard, report.expected_max
        ),
        expected_standard=report.expected_standard,
        expected_max=report.expected_max,
        p_standard=report.p_standard,
        p_max=report.p_max,
    )


def _count_categories(verdicts: Iterable[AuditVerdict]) -> CategoryCounts:
    tally = {category: 0 for category in CATEGORIES}
    for verdict in verdicts:
        tally[verdict.category] += 1
    return CategoryCounts(**tally)


def aggregate(verdicts: Sequence[AuditVerdict]) -> AuditSummary:
    """Total and per-(model, dataset) category counts with flip percentages."""
    if len(verdicts) == 0:
        raise DomainError("verdicts must be nonempty")
    by_group: dict[tuple[str, str], list[AuditVerdict]] = {}
    for verdict in verdicts:
        by_group.setdefault((verdict.model, verdict.dataset), []).append(verdict)
    groups = tuple(
        GroupCounts(model=model, dataset=dataset, counts=_count_categories(group))
        for (model, dataset), group in sorted(by_group.items())
    )
    return AuditSummary(total=_count_categories(verdicts), groups=groups)


def _score_groups(
    truths: Sequence[bool], scores: Sequence[float]
) -> list[tuple[int, int]]:
    """(positives, negatives) per distinct score, descending; ties grouped."""
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    groups: list[tuple[int, int]] = []
    i = 0
    while i < len(order):
        j = i
        pos = neg = 0
        while j < len(order) and scores[order[j]] == scores[order[i]]:
            if truths[order[j]]:
                pos += 1
            else:
                neg += 1
            j += 1
        groups.append((pos, neg))
        i = j
    return groups


def roc_points(truths: Sequence[bool], scores: Sequence[float]) -> tuple[tuple[float, float], ...]:
    """ROC sweep points (fpr, tpr) over descending score thresholds.

    Tied scores enter in a single step.  Requires both classes present.
    """
    positives = sum(bool(v) for v in truths)
    negatives = len(truths) - positives
    if positives == 0 or negatives == 0:
        raise DomainError("ROC needs both a positive and a negative example")
    points = [(0.0, 0.0)]
    tp = fp = 0
    for pos, neg in _score_groups(truths, scores):
        tp += pos
        fp += neg
        points.append((fp / negatives, tp / positives))
    return tuple(points)


def pr_points(truths: Sequence[bool], scores: Sequence[float]) -> tuple[tuple[float, float], ...]:
    """Precision-recall sweep points (recall, precision), ties grouped."""
    positives = sum(bool(v) for v in truths)
    if positives == 0:
        raise DomainError("precision-recall needs a positive example")
    points = []
    tp = fp = 0
    for pos, neg in _score_groups(truths, scores):
        tp += pos
        fp += neg
        points.append((tp / positives, tp / (tp + fp)))
    return tuple(points)


def _trapezoidal_area(points: Sequence[tuple[float, float]]) -> float:
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def _step_area(points: Sequence[tuple[float, float]]) -> float:
    # Step interpolation: no credit between precision-recall points.
    area = 0.0
    previous_recall = 0.0
    for recall, precision in points:
        area += (recall - previous_recall) * precision
        previous_recall = recall
    return area


def evaluate_prediction(records: Sequence[ExperimentRecord]) -> PredictionEvaluation:
    """Score both baselines as predictors of above-random held-out accuracy.

    Ground truth is ``heldout_accuracy`` strictly above the standard
    baseline (the held-out set is used once, so no stronger bar applies).
    Each threshold predictor fires when the observed maximum validation
    accuracy is strictly above its baseline.  The shared ranking score is
    the validation distribution function F(count - 1): the fraction of
    random classifiers the observed accuracy strictly beats.
    """
    if len(records) == 0:
        raise DomainError("records must be nonempty")
    truths: list[bool] = []
    standard_preds: list[bool] = []
    max_preds: list[bool] = []
    scores: list[float] = []
    for record in records:
        if record.heldout_accuracy is None or record.heldout_n is None:
            raise DomainError(f"record {record.id!r} is missing held-out fields")
        report = baseline_report(record.spec(), record.observed_max_accuracy)
        truths.append(record.heldout_accuracy > report.expected_standard)
        standard_preds.append(record.observed_max_accuracy > report.expected_standard)
        max_preds.append(record.observed_max_accuracy > report.expected_max)
        scores.append(1.0 - report.p_standard)
    positives = sum(truths)
    negatives = len(truths) - positives
    if positives and negatives:
        roc = roc_points(truths, scores)
        auroc = _trapezoidal_area(roc)
    else:
        roc, auroc = (), math.nan
    if positives:
        pr = pr_points(truths, scores)
        aupr = _step_area(pr)
    else:
        pr, aupr = (), math.nan
    return PredictionEvaluation(
        standard=_confusion(truths, standard_preds),
        max=_confusion(truths, max_preds),
        roc_points=roc,
        auroc=auroc,
        pr_points=pr,
        aupr=aupr,
        n_records=len(records),
    )


def _confusion(truths: Sequence[bool], predictions: Sequence[bool]) -> PredictorStats:
    tp = fp = tn = fn = 0
    for truth, predicted in zip(truths, predictions):
        if predicted:
            if truth:
                tp += 1
            else:
                fp += 1
        elif truth:
            fn += 1
        else:
            tn += 1
    return PredictorStats(tp=tp, fp=fp, tn=tn, fn=fn)


# ---------------------------------------------------------------------------
# Record ingestion

_REQUIRED_FIELDS = ("id", "model", "dataset", "n", "labels", "t", "observed_max_accuracy")


def _parse_labels(value: object) -> LabelScheme:
    if isinstance(value, bool):
        raise DomainError(f"labels must be an integer or per-example counts, got {value!r}")
    if isinstance(value, int):
        return UniformLabels(value)
    if isinstance(value, (list, tuple)):
        return PerExampleLabels.from_label_counts([_parse_int(c, "labels") for c in value])
    if isinstance(value, str):
        text = value.strip()
        if ";" in text:
            return PerExampleLabels.from_label_counts(
                [_parse_int(part, "labels") for part in text.split(";")]
            )
        return UniformLabels(_parse_int(text, "labels"))
    raise DomainError(f"labels must be an integer or per-example counts, got {value!r}")


def _parse_int(value: object, field: str) -> int:
    if isinstance(value, bool):
        raise DomainError(f"{field} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value == int(value):
        return int(value)
    if isinstance(value, str):
        try:
            return int(value.strip())
        except ValueError:
            raise DomainError(f"{field} must be an integer, got {value!r}") from None
    raise DomainError(f"{field} must be an integer, got {value!r}")


def _parse_float(value: object, field: str) -> float:
    if isinstance(value, bool):
        raise DomainError(f"{field} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            raise DomainError(f"{field} must be a number, got {value!r}") from None
    raise DomainError(f"{field} must be a number, got {value!r}")


def _record_from_mapping(
    raw: Mapping[str, object], row: int, errors: list[RowError]
) -> ExperimentRecord | None:
    present = {
        key: value
        for key, value in raw.items()
        if value is not None and not (isinstance(value, str) and value.strip() == "")
    }
    missing = [field for field in _REQUIRED_FIELDS if field not in present]
    if missing:
        errors.append(RowError(row, missing[0], f"missing required field(s): {', '.join(missing)}"))
        return None
    fields: dict[str, object] = {}
    ok = True
    for field, parser in (
        ("n", _parse_int),
        ("t", _parse_int),
        ("observed_max_accuracy", _parse_float),
    ):
        try:
            fields[field] = parser(present[field], field)
        except DomainError as exc:
            errors.append(RowError(row, field, str(exc)))
            ok = False
    try:
        fields["labels"] = _parse_labels(present["labels"])
    except DomainError as exc:
        errors.append(RowError(row, "labels", str(exc)))
        ok = False
    for field, parser in (("heldout_accuracy", _parse_float), ("heldout_n", _parse_int)):
        if field in present:
            try:
                fields[field] = parser(present[field], field)
            except DomainError as exc:
                errors.append(RowError(row, field, str(exc)))
                ok = False
    if "per_prompt_accuracies" in present:
        value = present["per_prompt_accuracies"]
        if not isinstance(value, (list, tuple)):
            errors.append(RowError(row, "per_prompt_accuracies", "must be an array of accuracies"))
            ok = False
        else:
            try:
                fields["per_prompt_accuracies"] = tuple(
                    _parse_float(v, "per_prompt_accuracies") for v in value
                )
            except DomainError as exc:
                errors.append(RowError(row, "per_prompt_accuracies", str(exc)))
                ok = False
    if not ok:
        return None
    try:
        return ExperimentRecord(
            id=str(present["id"]),
            model=str(present["model"]),
            dataset=str(present["dataset"]),
            **fields,  # type: ignore[arg-type]
        )
    except DomainError as exc:
        errors.append(RowError(row, None, str(exc)))
        return None


def read_records(source: str | Path | TextIO, format: str = "csv") -> LoadResult:
    """Parse experiment records from a path or an open text stream.

    ``format`` is ``"csv"`` (header row required) or ``"jsonl"`` (one
    JSON object per line).  Malformed rows become :class:`RowError`
    entries carrying their row number instead of silently disappearing.
    """
    if format not in ("csv", "jsonl"):
        raise DomainError(f"format must be 'csv' or 'jsonl', got {format!r}")
    if hasattr(source, "read"):
        return _read_stream(source, format)  # type: ignore[arg-type]
    with open(source, "r", encoding="utf-8", newline="") as handle:
        return _read_stream(handle, format)


def _read_stream(stream: TextIO, format: str) -> LoadResult:
    records: list[ExperimentRecord] = []
    errors: list[RowError] = []
    if format == "csv":
        reader = csv.DictReader(stream)
        if reader.fieldnames is None:
            raise DomainError("CSV input has no header row")
        for row_number, raw in enumerate(reader, start=1):
            record = _record_from_mapping(raw, row_number, errors)
            if record is not None:
                records.append(record)
    else:
        for row_number, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(RowError(row_number, None, f"invalid JSON: {exc}"))
                continue
            if not isinstance(raw, dict):
                errors.append(RowError(row_number, None, "each line must be a JSON object"))
                continue
            record = _record_from_mapping(raw, row_number, errors)
            if record is not None:
                records.append(record)
    return LoadResult(records=tuple(records), errors=tuple(errors))
