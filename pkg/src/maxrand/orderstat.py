"""The maximum random baseline and its tail probabilities.

When an experiment evaluates ``t`` prompts (or classifiers, or
hyperparameter settings) on the same validation set and reports the best
accuracy, the fair comparison is the best of ``t`` random classifiers,
not a single one.  The best count among ``t`` iid copies of a count
``X`` has cdf ``F(k)^t`` and pmf ``F(k)^t - (F(k) - f(k))^t``; its
expectation over accuracies is the maximum random baseline.  This module
computes that distribution, the baseline, p-values against both the
single-classifier and maximum baselines, and the smallest attainable
accuracies that clear either bar.

Everything here is a pure function of immutable inputs and is safe to
call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .dist import (
    CountDistribution,
    LabelScheme,
    PerExampleLabels,
    UniformLabels,
    count_distribution,
    tail_sums,
)
from .errors import DomainError

__all__ = [
    "COUNT_TOLERANCE",
    "TaskSpec",
    "MaxOrderDistribution",
    "BaselineReport",
    "accuracy_to_count",
    "max_order_distribution",
    "expected_standard_accuracy",
    "expected_max_accuracy",
    "p_value_standard",
    "p_value_max",
    "tail_probability_standard",
    "tail_probability_max",
    "min_accuracy_beating_max",
    "min_accuracy_at_significance",
    "baseline_report",
]

# Accuracy on n examples is definitionally k/n; observed values farther
# than this from every attainable k/n are rejected, never rounded.
COUNT_TOLERANCE = 1e-6

# Expectations are computed to ~1e-15; ties at a baseline must not count
# as beating it.  Attainable accuracies are spaced 1/n apart, so this
# guard cannot skip a genuinely higher value.
_TIE_GUARD = 1e-9


@dataclass(frozen=True)
class TaskSpec:
    """An evaluation setup: ``n`` examples, a label scheme, ``t`` reuses.

    ``t`` counts how many times the validation set is evaluated before
    the maximum accuracy is reported; ``t = 1`` is the true few-shot
    setting, where the maximum and standard baselines coincide.
    """

    n: int
    labels: LabelScheme
    t: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        if self.t < 1:
            raise DomainError(f"t must be >= 1, got {self.t}")
        if isinstance(self.labels, PerExampleLabels) and len(self.labels.probabilities) != self.n:
            raise DomainError(
                f"per-example scheme has {len(self.labels.probabilities)} "
                f"probabilities but n={self.n}"
            )

    @classmethod
    def uniform(cls, n: int, m: int, t: int) -> "TaskSpec":
        """Spec for a task with ``m`` equally likely labels per example."""
        return cls(n=n, labels=UniformLabels(m), t=t)


@dataclass(frozen=True, eq=False)
class MaxOrderDistribution:
    """Distribution of the maximum count among ``t`` iid copies of ``base``."""

    base: CountDistribution
    t: int
    pmf_max: np.ndarray
    cdf_max: np.ndarray


@dataclass(frozen=True)
class BaselineReport:
    """Both baselines for one task, with p-values when an accuracy was observed.

    ``expected_max >= expected_standard`` always, with equality at t = 1;
    the p-values satisfy ``p_standard <= p_max``.
    """

    spec: TaskSpec
    expected_standard: float
    expected_max: float
    observed_accuracy: float | None = None
    p_standard: float | None = None
    p_max: float | None = None


@lru_cache(maxsize=256)
def _base_distribution(spec: TaskSpec) -> CountDistribution:
    return count_distribution(spec.labels, spec.n)


def accuracy_to_count(n: int, observed: float) -> int:
    """Map an observed accuracy to its integer correct count out of ``n``.

    Rejects values that do not sit within ``COUNT_TOLERANCE`` of some
    k/n: silently rounding could flip a p-value at a decision boundary.
    """
    if not 0.0 <= observed <= 1.0:
        raise DomainError(f"accuracy must lie in [0, 1], got {observed}")
    count = round(n * observed)
    if abs(n * observed - count) > COUNT_TOLERANCE * n:
        raise DomainError(
            f"accuracy {observed!r} does not correspond to an integer count out of {n}"
        )
    return count


def max_order_distribution(base: CountDistribution, t: int) -> MaxOrderDistribution:
    """Sample-maximum distribution of ``t`` iid counts drawn from ``base``.

    ``P(max <= k) = F(k)^t`` is evaluated as ``exp(t ln F(k))`` so that
    large ``t`` keeps full precision, and the pmf is the difference of
    consecutive cdf values.  ``t = 1`` returns the base arrays unchanged.
    """
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    if t == 1:
        pmf_max = base.pmf.copy()
        cdf_max = base.cdf.copy()
    else:
        with np.errstate(divide="ignore"):
            cdf_max = np.exp(t * np.log(base.cdf))
        pmf_max = np.diff(cdf_max, prepend=0.0)
    for array in (pmf_max, cdf_max):
        array.flags.writeable = False
    return MaxOrderDistribution(base=base, t=t, pmf_max=pmf_max, cdf_max=cdf_max)


def expected_standard_accuracy(spec: TaskSpec) -> float:
    """Expected accuracy of a single random classifier (1/m, or the mean p_i)."""
    return spec.labels.expected_accuracy()


def expected_max_accuracy(spec: TaskSpec) -> float:
    """Expected best accuracy among ``t`` random classifiers.

    The maximum random baseline: ``(1/n) * sum_k k * pmf_max[k]``.
    """
    mo = max_order_distribution(_base_distribution(spec), spec.t)
    counts = np.arange(spec.n + 1, dtype=float)
    return float(counts @ mo.pmf_max) / spec.n


def _max_tail(tail: float, t: int) -> float:
    """P(best of t >= threshold) from the single-classifier tail probability.

    ``1 - (1 - tail)^t`` in expm1/log1p form, which stays accurate both
    when the tail is near 1 and deep in the upper tail.
    """
    if t == 1 or tail <= 0.0 or tail >= 1.0:
        return min(max(tail, 0.0), 1.0)
    return -math.expm1(t * math.log1p(-tail))


def p_value_standard(spec: TaskSpec, observed: float) -> float:
    """P(a single random classifier scores at least ``observed``).

    Equals ``1 - F(n*observed - 1)`` with ``F(-1) = 0``; the observed
    accuracy must map to an integer count.
    """
    count = accuracy_to_count(spec.n, observed)
    return _base_distribution(spec).tail(count)


def p_value_max(spec: TaskSpec, observed: float) -> float:
    """P(the best of ``t`` random classifiers scores at least ``observed``).

    Equals ``1 - F(n*observed - 1)^t``; coincides with
    :func:`p_value_standard` at ``t = 1``.
    """
    count = accuracy_to_count(spec.n, observed)
    return _max_tail(_base_distribution(spec).tail(count), spec.t)


def _threshold_count(n: int, accuracy: float) -> int:
    """Smallest count whose accuracy is >= ``accuracy`` (counts are integers)."""
    nearest = round(n * accuracy)
    if abs(n * accuracy - nearest) <= COUNT_TOLERANCE * n:
        return nearest
    return math.ceil(n * accuracy)


def tail_probability_standard(spec: TaskSpec, accuracy: float) -> float:
    """P(a single random classifier scores at least ``accuracy``), any real value.

    Exact for integer-valued counts: ``P(X/n >= a) = P(X >= ceil(n a))``.
    Unlike :func:`p_value_standard` this accepts accuracies between
    attainable values, e.g. an empirical expected maximum.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise DomainError(f"accuracy must lie in [0, 1], got {accuracy}")
    return _base_distribution(spec).tail(_threshold_count(spec.n, accuracy))


def tail_probability_max(spec: TaskSpec, accuracy: float) -> float:
    """P(the best of ``t`` random classifiers scores at least ``accuracy``)."""
    if not 0.0 <= accuracy <= 1.0:
        raise DomainError(f"accuracy must lie in [0, 1], got {accuracy}")
    tail = _base_distribution(spec).tail(_threshold_count(spec.n, accuracy))
    return _max_tail(tail, spec.t)


def min_accuracy_beating_max(spec: TaskSpec) -> float | None:
    """Least attainable accuracy k/n strictly above the maximum baseline.

    Exact ties do not beat the baseline; the comparison carries a small
    guard so rounding in the expectation cannot flip a tie either way.
    Returns None when no attainable accuracy clears the baseline, which
    requires every example to be guessed correctly with certainty.
    """
    target = expected_max_accuracy(spec)
    for k in range(spec.n + 1):
        if k / spec.n > target + _TIE_GUARD:
            return k / spec.n
    return None


def min_accuracy_at_significance(spec: TaskSpec, alpha: float) -> float | None:
    """Least attainable accuracy whose max-baseline p-value is below ``alpha``.

    Monotone scan over counts (the p-value is nonincreasing in the
    count); None when even a perfect score is not significant.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    tails = tail_sums(_base_distribution(spec).pmf)
    for k in range(spec.n + 1):
        if _max_tail(float(tails[k]), spec.t) < alpha:
            return k / spec.n
    return None


def baseline_report(spec: TaskSpec, observed_accuracy: float | None = None) -> BaselineReport:
    """Both baselines for ``spec``, with p-values for an observed accuracy."""
    expected_standard = expected_standard_accuracy(spec)
    expected_max = expected_max_accuracy(spec)
    if observed_accuracy is None:
        return BaselineReport(spec, expected_standard, expected_max)
    count = accuracy_to_count(spec.n, observed_accuracy)
    tail = _base_distribution(spec).tail(count)
    return BaselineReport(
        spec=spec,
        expected_standard=expected_standard,
        expected_max=expected_max,
        observed_accuracy=observed_accuracy,
        p_standard=tail,
        p_max=_max_tail(tail, spec.t),
    )
