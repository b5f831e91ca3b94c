"""Seeded Monte Carlo and exhaustive oracles for the closed forms.

These deliberately avoid the order-statistic formulas: the simulator
draws actual counts and takes maxima, and the enumerator sums over every
t-tuple of counts.  They exist so the closed forms can be validated
independently, and they are public so audits can reproduce the agreement
evidence.

Each simulation owns its generator; identical configs give bit-identical
results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dist import count_distribution
from .errors import DomainError, FeasibilityError
from .orderstat import TaskSpec

__all__ = [
    "GENERATOR",
    "ENUMERATION_LIMIT",
    "SimulationConfig",
    "SimulationResult",
    "simulate_expected_max",
    "enumerate_max_pmf",
]

# numpy's PCG64: a named, published, portable 64-bit generator, so the
# same (spec, trials, seed) reproduces across machines.
GENERATOR = "pcg64"

ENUMERATION_LIMIT = 10**7

# Uniform draws per batch.  Batching bounds memory without changing the
# draw order, so results are independent of the batch size.
_CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True)
class SimulationConfig:
    """A reproducible simulation request."""

    spec: TaskSpec
    trials: int
    seed: int

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class SimulationResult:
    """Monte Carlo estimate with its standard error and provenance."""

    estimate: float
    std_error: float
    trials: int
    seed: int
    generator: str = field(default=GENERATOR)


def simulate_expected_max(config: SimulationConfig) -> SimulationResult:
    """Estimate the expected maximum accuracy by direct simulation.

    Each trial draws ``t`` iid counts by inverse-cdf lookup (binary
    search on the precomputed cdf) and records the maximum accuracy;
    returns the sample mean and its standard error.
    """
    spec = config.spec
    base = count_distribution(spec.labels, spec.n)
    rng = np.random.Generator(np.random.PCG64(config.seed))
    maxima = np.empty(config.trials)
    rows_per_chunk = max(1, _CHUNK_DRAWS // spec.t)
    done = 0
    while done < config.trials:
        rows = min(rows_per_chunk, config.trials - done)
        u = rng.random((rows, spec.t))
        # u in [0, 1) and cdf[n] == 1, so every lookup lands in 0..n.
        counts = np.searchsorted(base.cdf, u, side="right")
        maxima[done : done + rows] = counts.max(axis=1) / spec.n
        done += rows
    estimate = float(maxima.mean())
    if config.trials > 1:
        std_error = float(maxima.std(ddof=1)) / math.sqrt(config.trials)
    else:
        std_error = 0.0
    return SimulationResult(
        estimate=estimate,
        std_error=std_error,
        trials=config.trials,
        seed=config.seed,
    )


def enumerate_max_pmf(spec: TaskSpec) -> np.ndarray:
    """Exact pmf of the maximum count, by summing all (n+1)^t weighted tuples.

    Raises:
        FeasibilityError: when ``(n+1)^t`` exceeds :data:`ENUMERATION_LIMIT`.
    """
    size = (spec.n + 1) ** spec.t
    if size > ENUMERATION_LIMIT:
        raise FeasibilityError(
            f"(n+1)^t = {size} tuples exceeds the enumeration limit of {ENUMERATION_LIMIT}"
        )
    base = count_distribution(spec.labels, spec.n)
    counts = np.arange(spec.n + 1)
    weights = base.pmf.copy()
    maxima = counts.copy()
    for _ in range(spec.t - 1):
        weights = np.multiply.outer(weights, base.pmf).ravel()
        maxima = np.maximum.outer(maxima, counts).ravel()
    return np.bincount(maxima, weights=weights, minlength=spec.n + 1)
