"""Command-line front end.

Subcommands: ``baseline``, ``pvalue``, ``threshold``, ``grid``,
``audit``, ``simulate``, ``curve``.  Output is CSV by default or
JSON-lines with ``--format json`` (one object per line; ``audit`` lines
carry a ``kind`` field mirroring the CSV sections).  Floats are printed
with 12 significant digits and output is byte-identical across runs for
identical inputs, flags and seeds.

Exit codes: 0 success, 2 usage or validation error, 3 numeric or
feasibility error.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import math
from pathlib import Path

import click
import numpy as np

from . import audit as audit_mod
from .dist import LabelScheme, PerExampleLabels, UniformLabels
from .errors import ConvergenceError, DomainError, FeasibilityError
from .oracle import SimulationConfig, simulate_expected_max
from .orderstat import (
    TaskSpec,
    expected_max_accuracy,
    expected_standard_accuracy,
    min_accuracy_at_significance,
    min_accuracy_beating_max,
    p_value_max,
    p_value_standard,
    tail_probability_max,
    tail_probability_standard,
)

_VALIDATION_EXIT = 2
_NUMERIC_EXIT = 3


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (FeasibilityError, ConvergenceError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(_NUMERIC_EXIT)
        except DomainError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(_VALIDATION_EXIT)

    return wrapper


# ---------------------------------------------------------------------------
# Output helpers

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.12g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, float):
        if math.isnan(value):
            return None
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


def _csv_block(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _json_lines(objects) -> str:
    return "".join(json.dumps(_jsonable(obj)) + "\n" for obj in objects)


def _emit_record(payload: dict, header, row, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit(_json_lines([payload]), out)
    else:
        _emit(_csv_block(header, [row]), out)


def _emit_rows(rows: list[dict], header, fmt: str, out: str | None) -> None:
    if fmt == "json":
        _emit(_json_lines(rows), out)
    else:
        _emit(_csv_block(header, [[row[key] for key in header] for row in rows]), out)


# ---------------------------------------------------------------------------
# Flag parsing

def _scheme(m: int | None, labels: str | None) -> LabelScheme:
    if (m is None) == (labels is None):
        raise DomainError("provide exactly one of --m or --labels")
    if m is not None:
        return UniformLabels(m)
    return _parse_label_counts(labels)


def _parse_label_counts(text: str) -> PerExampleLabels:
    try:
        counts = [int(part) for part in text.split(";")]
    except ValueError:
        raise DomainError(
            f"--labels must be semicolon-delimited integer label counts, got {text!r}"
        ) from None
    return PerExampleLabels.from_label_counts(counts)


def _parse_axis(text: str, name: str) -> list[int]:
    """Axis syntax: 'a,b,c' explicit, 'lo:hi' every integer, 'lo:hi:count' log-spaced."""
    try:
        parts = [int(part) for part in text.replace(":", ",").split(",")]
    except ValueError:
        raise DomainError(
            f"{name} must be 'a,b,c', 'lo:hi', or 'lo:hi:count' (log-spaced), got {text!r}"
        ) from None
    if ":" in text:
        if len(parts) == 2:
            lo, hi = parts
            if hi - lo >= 10**6:
                raise DomainError(f"{name} range {text!r} has over 10^6 points; use lo:hi:count")
            values = list(range(lo, hi + 1))
        elif len(parts) == 3:
            lo, hi, count = parts
            if lo < 1 or hi < lo or count < 1:
                raise DomainError(f"{name} log-range needs 1 <= lo <= hi and count >= 1")
            values = sorted({int(round(v)) for v in np.geomspace(lo, hi, count)})
        else:
            raise DomainError(f"{name} range syntax is 'lo:hi' or 'lo:hi:count', got {text!r}")
    else:
        values = sorted(set(parts))
    if not values or min(values) < 1:
        raise DomainError(f"{name} values must be integers >= 1, got {text!r}")
    return values


_format_option = click.option(
    "--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True
)
_out_option = click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
_m_option = click.option("--m", type=int, default=None, help="Number of labels per example.")
_labels_option = click.option(
    "--labels", default=None, help="Semicolon-delimited per-example label counts, e.g. 2;3;4."
)


@click.group()
def main() -> None:
    """Stronger random baselines for reused validation sets."""


@main.command()
@click.option("--n", type=int, required=True, help="Validation-set size.")
@_m_option
@_labels_option
@click.option("--t", type=int, required=True, help="Number of validation-set evaluations.")
@_format_option
@_out_option
@_handle_errors
def baseline(n, m, labels, t, fmt, out) -> None:
    """Standard and maximum random baselines, and the accuracy that beats them."""
    spec = TaskSpec(n=n, labels=_scheme(m, labels), t=t)
    payload = {
        "expected_standard": expected_standard_accuracy(spec),
        "expected_max": expected_max_accuracy(spec),
        "min_accuracy_beating_max": min_accuracy_beating_max(spec),
    }
    _emit_record(payload, list(payload), list(payload.values()), fmt, out)


@main.command()
@click.option("--n", type=int, required=True)
@_m_option
@_labels_option
@click.option("--t", type=int, required=True)
@click.option("--acc", type=float, required=True, help="Observed accuracy (must be k/n).")
@_format_option
@_out_option
@_handle_errors
def pvalue(n, m, labels, t, acc, fmt, out) -> None:
    """p-values of an observed accuracy against both baselines."""
    spec = TaskSpec(n=n, labels=_scheme(m, labels), t=t)
    payload = {
        "p_standard": p_value_standard(spec, acc),
        "p_max": p_value_max(spec, acc),
    }
    _emit_record(payload, list(payload), list(payload.values()), fmt, out)


@main.command()
@click.option("--n", type=int, required=True)
@_m_option
@_labels_option
@click.option("--t", type=int, required=True)
@click.option("--alpha", type=float, default=None, help="Significance level for the p-value solver.")
@_format_option
@_out_option
@_handle_errors
def threshold(n, m, labels, t, alpha, fmt, out) -> None:
    """Least attainable accuracies above the maximum baseline / below alpha.

    Empty (null) values mean the threshold is unattainable.
    """
    spec = TaskSpec(n=n, labels=_scheme(m, labels), t=t)
    payload = {
        "min_accuracy_beating_max": min_accuracy_beating_max(spec),
        "min_accuracy_at_significance": (
            min_accuracy_at_significance(spec, alpha) if alpha is not None else None
        ),
    }
    _emit_record(payload, list(payload), list(payload.values()), fmt, out)


@main.command()
@click.option("--n", "n_axis", required=True, help="n axis: 'a,b,c', 'lo:hi', or 'lo:hi:count'.")
@click.option("--t", "t_axis", required=True, help="t axis: 'a,b,c', 'lo:hi', or 'lo:hi:count'.")
@_m_option
@_labels_option
@click.option(
    "--quantity",
    type=click.Choice(["expected_max", "p_value", "threshold"]),
    default="expected_max",
    show_default=True,
)
@click.option("--acc", type=float, default=None, help="Accuracy for --quantity p_value.")
@click.option("--alpha", type=float, default=None, help="Significance level for --quantity threshold.")
@_format_option
@_out_option
@_handle_errors
def grid(n_axis, t_axis, m, labels, quantity, acc, alpha, fmt, out) -> None:
    """One value per (n, t) cell, n-major ascending; empty cells are unattainable."""
    scheme = _scheme(m, labels)
    ns = _parse_axis(n_axis, "--n")
    ts = _parse_axis(t_axis, "--t")
    if isinstance(scheme, PerExampleLabels):
        for n in ns:
            if len(scheme.probabilities) != n:
                raise DomainError(
                    f"per-example scheme has {len(scheme.probabilities)} probabilities "
                    f"but the n axis contains {n}"
                )
    if quantity == "p_value" and acc is None:
        raise DomainError("--quantity p_value requires --acc")
    if quantity == "threshold" and alpha is None:
        raise DomainError("--quantity threshold requires --alpha")
    rows = []
    for n in ns:
        for t in ts:
            spec = TaskSpec(n=n, labels=scheme, t=t)
            if quantity == "expected_max":
                value = expected_max_accuracy(spec)
            elif quantity == "p_value":
                value = tail_probability_max(spec, acc)
            else:
                value = min_accuracy_at_significance(spec, alpha)
            rows.append({"n": n, "t": t, "value": value})
    _emit_rows(rows, ["n", "t", "value"], fmt, out)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--input-format",
    type=click.Choice(["csv", "jsonl"]),
    default=None,
    help="Defaults by extension (.jsonl/.ndjson are JSON-lines, anything else CSV).",
)
@click.option("--eval-heldout", is_flag=True, help="Also score held-out prediction quality.")
@_format_option
@_out_option
@_handle_errors
def audit(input_path, input_format, eval_heldout, fmt, out) -> None:
    """Classify records against both baselines and aggregate the verdicts."""
    records = _load_records_strict(input_path, input_format)
    verdicts = [audit_mod.classify(record) for record in records]
    summary = audit_mod.aggregate(verdicts)
    prediction = audit_mod.evaluate_prediction(records) if eval_heldout else None
    if fmt == "json":
        lines = [{"kind": "verdict", **_verdict_dict(v)} for v in verdicts]
        lines += _summary_lines(summary)
        if prediction is not None:
            lines += _prediction_lines(prediction)
        _emit(_json_lines(lines), out)
        return
    blocks = [
        _csv_block(_VERDICT_HEADER, [_verdict_row(v) for v in verdicts]),
        _csv_block(_SUMMARY_HEADER, _summary_rows(summary)),
    ]
    if prediction is not None:
        blocks.append(
            _csv_block(
                ["predictor", "tp", "fp", "tn", "fn", "accuracy", "precision", "recall"],
                [_predictor_row("standard", prediction.standard),
                 _predictor_row("max", prediction.max)],
            )
        )
        blocks.append(
            _csv_block(["metric", "value"], [["auroc", prediction.auroc], ["aupr", prediction.aupr]])
        )
        points = [["roc", x, y] for x, y in prediction.roc_points]
        points += [["pr", x, y] for x, y in prediction.pr_points]
        blocks.append(_csv_block(["curve", "x", "y"], points))
    _emit("\n".join(blocks), out)


@main.command()
@click.option("--n", type=int, required=True)
@_m_option
@_labels_option
@click.option("--t", type=int, required=True)
@click.option("--trials", type=int, required=True)
@click.option("--seed", type=int, required=True)
@_format_option
@_out_option
@_handle_errors
def simulate(n, m, labels, t, trials, seed, fmt, out) -> None:
    """Monte Carlo estimate of the maximum baseline next to the closed form."""
    spec = TaskSpec(n=n, labels=_scheme(m, labels), t=t)
    result = simulate_expected_max(SimulationConfig(spec=spec, trials=trials, seed=seed))
    payload = {
        "estimate": result.estimate,
        "std_error": result.std_error,
        "closed_form": expected_max_accuracy(spec),
        "trials": result.trials,
        "seed": result.seed,
        "generator": result.generator,
    }
    _emit_record(payload, list(payload), list(payload.values()), fmt, out)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--input-format",
    type=click.Choice(["csv", "jsonl"]),
    default=None,
    help="Defaults by extension; per-prompt accuracies require JSON-lines.",
)
@click.option(
    "--t",
    "t_axis",
    default=None,
    help="t axis ('a,b,c', 'lo:hi', or 'lo:hi:count'); default 1..record t.",
)
@_format_option
@_out_option
@_handle_errors
def curve(input_path, input_format, t_axis, fmt, out) -> None:
    """Empirical expected-max curve next to the maximum baseline, per record.

    Every record must carry per_prompt_accuracies.  The p-value columns
    evaluate the empirical curve value at each t.
    """
    records = _load_records_strict(input_path, input_format)
    for record in records:
        if record.per_prompt_accuracies is None:
            raise DomainError(f"record {record.id!r} has no per_prompt_accuracies")
    ts_flag = _parse_axis(t_axis, "--t") if t_axis is not None else None
    rows = []
    for record in records:
        ts = ts_flag if ts_flag is not None else list(range(1, record.t + 1))
        for t in ts:
            spec = TaskSpec(n=record.n, labels=record.labels, t=t)
            empirical = audit_mod.empirical_expected_max(record.per_prompt_accuracies, t)
            # the estimator is bounded by the sample range; shed float dust
            empirical = min(max(empirical, 0.0), 1.0)
            rows.append(
                {
                    "id": record.id,
                    "t": t,
                    "empirical_expected_max": empirical,
                    "expected_max_baseline": expected_max_accuracy(spec),
                    "p_standard": tail_probability_standard(spec, empirical),
                    "p_max": tail_probability_max(spec, empirical),
                }
            )
    header = ["id", "t", "empirical_expected_max", "expected_max_baseline", "p_standard", "p_max"]
    _emit_rows(rows, header, fmt, out)


# ---------------------------------------------------------------------------
# audit/curve plumbing

def _load_records_strict(input_path: str, input_format: str | None):
    if input_format is None:
        suffix = Path(input_path).suffix.lower()
        input_format = "jsonl" if suffix in (".jsonl", ".ndjson") else "csv"
    loaded = audit_mod.read_records(input_path, format=input_format)
    for record in loaded.records:
        for warning in record.warnings:
            click.echo(f"warning: {warning}", err=True)
    if loaded.errors:
        for error in loaded.errors:
            location = f"row {error.row}" + (f", field {error.field}" if error.field else "")
            click.echo(f"error: {location}: {error.message}", err=True)
        raise SystemExit(_VALIDATION_EXIT)
    if not loaded.records:
        raise DomainError("input contains no records")
    return list(loaded.records)


_VERDICT_HEADER = [
    "id",
    "model",
    "dataset",
    "observed_max_accuracy",
    "expected_standard",
    "expected_max",
    "p_standard",
    "p_max",
    "category",
]

_SUMMARY_HEADER = [
    "scope",
    "model",
    "dataset",
    "below_both",
    "flip",
    "above_both",
    "flipped_percentage",
    "flipped_denominator_zero",
]


def _verdict_row(v: audit_mod.AuditVerdict) -> list:
    return [
        v.id,
        v.model,
        v.dataset,
        v.observed_max_accuracy,
        v.expected_standard,
        v.expected_max,
        v.p_standard,
        v.p_max,
        v.category,
    ]


def _verdict_dict(v: audit_mod.AuditVerdict) -> dict:
    return {
        "id": v.id,
        "model": v.model,
        "dataset": v.dataset,
        "observed_max_accuracy": v.observed_max_accuracy,
        "expected_standard": v.expected_standard,
        "expected_max": v.expected_max,
        "p_standard": v.p_standard,
        "p_max": v.p_max,
        "category": v.category,
    }


def _counts_fields(counts: audit_mod.CategoryCounts) -> list:
    return [
        counts.below_both,
        counts.flip,
        counts.above_both,
        counts.flipped_percentage,
        counts.flipped_denominator_zero,
    ]


def _summary_rows(summary: audit_mod.AuditSummary) -> list[list]:
    rows = [["total", None, None, *_counts_fields(summary.total)]]
    for group in summary.groups:
        rows.append(["group", group.model, group.dataset, *_counts_fields(group.counts)])
    return rows


def _counts_dict(counts: audit_mod.CategoryCounts) -> dict:
    return {
        "below_both": counts.below_both,
        "flip": counts.flip,
        "above_both": counts.above_both,
        "flipped_percentage": counts.flipped_percentage,
        "flipped_denominator_zero": counts.flipped_denominator_zero,
    }


def _summary_lines(summary: audit_mod.AuditSummary) -> list[dict]:
    lines = [
        {"kind": "summary", "scope": "total", "model": None, "dataset": None,
         **_counts_dict(summary.total)}
    ]
    for g in summary.groups:
        lines.append(
            {"kind": "summary", "scope": "group", "model": g.model, "dataset": g.dataset,
             **_counts_dict(g.counts)}
        )
    return lines


def _predictor_row(name: str, stats: audit_mod.PredictorStats) -> list:
    return [name, stats.tp, stats.fp, stats.tn, stats.fn,
            stats.accuracy, stats.precision, stats.recall]


def _predictor_dict(stats: audit_mod.PredictorStats) -> dict:
    return {
        "tp": stats.tp,
        "fp": stats.fp,
        "tn": stats.tn,
        "fn": stats.fn,
        "accuracy": stats.accuracy,
        "precision": stats.precision,
        "recall": stats.recall,
    }


def _prediction_lines(prediction: audit_mod.PredictionEvaluation) -> list[dict]:
    lines = [
        {"kind": "predictor", "predictor": "standard", **_predictor_dict(prediction.standard)},
        {"kind": "predictor", "predictor": "max", **_predictor_dict(prediction.max)},
        {"kind": "metric", "metric": "auroc", "value": prediction.auroc},
        {"kind": "metric", "metric": "aupr", "value": prediction.aupr},
    ]
    lines += [{"kind": "curve", "curve": "roc", "x": x, "y": y} for x, y in prediction.roc_points]
    lines += [{"kind": "curve", "curve": "pr", "x": x, "y": y} for x, y in prediction.pr_points]
    return lines


if __name__ == "__main__":
    main()
