"""Monte Carlo estimation of information-content statistics.

The central object is the information deviation of a sample X from a model
with density f and entropy h:

    dev(X) = -log f(X) - h

All experiments reduce to statistics of a large batch of such deviations:
tail probabilities at scaled thresholds, exponential moments, coverage of
the entropy-typical set, and the variance.  Sampling is split into fixed
blocks of ``BLOCK_SIZE`` draws, each sourced from its own counter offset of
the Philox stream, so the result is byte-identical for any worker count.

Proportions get Wilson score intervals, which behave sensibly at zero
observed exceedances; means get the usual normal approximation.  Exponential
moments are accumulated in log space so large deviations cannot overflow.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtri

from . import bounds
from .distributions import ModelND, RngStream, model_id
from .numerics import DomainError
from .serialize import write_csv

__all__ = [
    "BLOCK_SIZE",
    "McEstimate",
    "InfoSampleBatch",
    "TailRow",
    "MgfRow",
    "BandResult",
    "sample_information",
    "empirical_tail",
    "empirical_mgf",
    "entropy_power_band",
    "typical_set_fraction",
    "deviation_variance",
    "deviation_mean",
]

# Draws per RNG block.  Fixed by design: changing it changes which Philox
# counter produces which sample, hence the byte-level output.
BLOCK_SIZE = 65536

DEFAULT_CONFIDENCE = 0.999


def _z_value(confidence: float) -> float:
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence!r}")
    return float(ndtri(0.5 * (1.0 + confidence)))


@dataclass(frozen=True)
class McEstimate:
    """A point estimate with its standard error and confidence interval."""

    value: float
    std_error: float
    ci_low: float
    ci_high: float
    m: int
    confidence_level: float

    @staticmethod
    def from_proportion(successes: int, m: int,
                        confidence: float = DEFAULT_CONFIDENCE) -> "McEstimate":
        """Wilson score interval for a binomial proportion."""
        if m <= 0:
            raise DomainError(f"sample count must be positive, got {m!r}")
        if not 0 <= successes <= m:
            raise DomainError(f"successes {successes!r} outside [0, {m}]")
        z = _z_value(confidence)
        phat = successes / m
        denom = 1.0 + z * z / m
        center = (phat + z * z / (2.0 * m)) / denom
        half = z * math.sqrt(phat * (1.0 - phat) / m + z * z / (4.0 * m * m)) / denom
        # at the extremes the Wilson endpoint is exactly the trivial one;
        # snap it there rather than keep the last-ulp residue
        lo = 0.0 if successes == 0 else max(0.0, center - half)
        hi = 1.0 if successes == m else min(1.0, center + half)
        return McEstimate(
            value=phat,
            std_error=math.sqrt(phat * (1.0 - phat) / m),
            ci_low=lo,
            ci_high=hi,
            m=m,
            confidence_level=confidence,
        )

    @staticmethod
    def from_values(values: np.ndarray,
                    confidence: float = DEFAULT_CONFIDENCE) -> "McEstimate":
        """Normal-approximation interval for a sample mean."""
        values = np.asarray(values, dtype=float)
        m = values.size
        if m <= 1:
            raise DomainError("need at least two values for a mean estimate")
        mean = float(values.mean())
        se = float(values.std(ddof=1)) / math.sqrt(m)
        return McEstimate.from_mean_se(mean, se, m, confidence)

    @staticmethod
    def from_mean_se(mean: float, std_error: float, m: int,
                     confidence: float = DEFAULT_CONFIDENCE) -> "McEstimate":
        z = _z_value(confidence)
        return McEstimate(
            value=float(mean),
            std_error=float(std_error),
            ci_low=float(mean - z * std_error),
            ci_high=float(mean + z * std_error),
            m=int(m),
            confidence_level=confidence,
        )

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "m": self.m,
            "confidence_level": self.confidence_level,
        }


@dataclass(frozen=True)
class InfoSampleBatch:
    """A batch of information deviations from one model and one stream."""

    model_id: str
    dim: int
    m: int
    deviations: np.ndarray
    seed: int
    stream_id: int
    block_size: int = BLOCK_SIZE

    def halves(self) -> tuple:
        """Split into two disjoint sub-batches for consistency checks."""
        k = self.m // 2
        return (
            replace(self, m=k, deviations=self.deviations[:k]),
            replace(self, m=self.m - k, deviations=self.deviations[k:]),
        )

    def to_csv(self, path) -> None:
        write_csv(path, ["index", "deviation_nats"],
                  ((i, d) for i, d in enumerate(self.deviations)))

    def describe(self) -> dict:
        return {
            "model_id": self.model_id,
            "dim": self.dim,
            "m": self.m,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "block_size": self.block_size,
        }


def sample_information(model: ModelND, m: int, rng: RngStream,
                       workers: int = 1) -> InfoSampleBatch:
    """Draw m samples and return their information deviations.

    Work is partitioned into fixed blocks of BLOCK_SIZE draws; block b uses
    the generator at counter offset b regardless of how many workers run, so
    the deviations array is identical for any ``workers`` value.
    """
    if m <= 0:
        raise DomainError(f"sample count must be positive, got {m!r}")
    if workers < 1:
        raise DomainError(f"worker count must be >= 1, got {workers!r}")
    h = model.entropy
    out = np.empty(m, dtype=float)
    n_blocks = (m + BLOCK_SIZE - 1) // BLOCK_SIZE

    def run_block(b: int) -> None:
        lo = b * BLOCK_SIZE
        hi = min(lo + BLOCK_SIZE, m)
        gen = rng.generator(block=b)
        x = model.sample(gen, hi - lo)
        out[lo:hi] = -model.log_density(x) - h

    if workers == 1 or n_blocks == 1:
        for b in range(n_blocks):
            run_block(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, range(n_blocks)))
    return InfoSampleBatch(
        model_id=model_id(model),
        dim=model.dim,
        m=m,
        deviations=out,
        seed=rng.seed,
        stream_id=rng.stream_id,
    )


@dataclass(frozen=True)
class TailRow:
    t: float
    threshold_nats: float
    exceedances: int
    estimate: McEstimate


def _check_grid(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise DomainError(f"{name} grid is empty")
    if arr.ndim != 1:
        raise DomainError(f"{name} grid must be one-dimensional")
    if np.any(np.diff(arr) <= 0.0):
        raise DomainError(f"{name} grid must be strictly increasing")
    if arr[0] < 0.0:
        raise DomainError(f"{name} grid must be nonnegative")
    return arr


def empirical_tail(batch: InfoSampleBatch, thresholds: Sequence[float],
                   scaling: str = "sqrt_n",
                   confidence: float = DEFAULT_CONFIDENCE) -> list:
    """Wilson estimates of P{|dev| >= scaled threshold} on a grid.

    scaling "sqrt_n" measures thresholds in units of sqrt(n) (the
    concentration normalization); "per_coordinate" in units of n.
    """
    ts = _check_grid(thresholds, "threshold")
    if scaling == "sqrt_n":
        unit = math.sqrt(batch.dim)
    elif scaling == "per_coordinate":
        unit = float(batch.dim)
    else:
        raise DomainError(f"unknown scaling {scaling!r}")
    absdev = np.abs(batch.deviations)
    rows = []
    for t in ts:
        thr = t * unit
        count = int(np.count_nonzero(absdev >= thr))
        rows.append(TailRow(
            t=float(t),
            threshold_nats=float(thr),
            exceedances=count,
            estimate=McEstimate.from_proportion(count, batch.m, confidence),
        ))
    return rows


@dataclass(frozen=True)
class MgfRow:
    alpha: float
    estimate: McEstimate
    in_window: bool


def _logsumexp(a: np.ndarray) -> float:
    peak = float(np.max(a))
    return peak + math.log(float(np.sum(np.exp(a - peak))))


def _safe_exp(x: float) -> float:
    # math.exp raises OverflowError past ~709.78; an infinite estimate is
    # the honest answer there
    return math.exp(x) if x < 709.0 else math.inf


def empirical_mgf(batch: InfoSampleBatch, alphas: Sequence[float],
                  form: str = "two_sided_abs",
                  window: str = "dimensional",
                  confidence: float = DEFAULT_CONFIDENCE) -> list:
    """Estimates of E exp(alpha |dev|/sqrt(n)) (or the one-sided version).

    Accumulation happens in log space: both the first and second empirical
    moments of exp(alpha y) are formed with a log-sum-exp, so no overflow
    occurs even when alpha y is large.  The window flag marks the validity
    range of the matching theoretical bound: alpha <= sqrt(n)/4 for the
    dimensional one, alpha < 1 for the one-dimensional one.
    """
    arr = np.asarray(alphas, dtype=float)
    if arr.size == 0:
        raise DomainError("alpha grid is empty")
    if form == "two_sided_abs":
        y = np.abs(batch.deviations) / math.sqrt(batch.dim)
        if np.any(arr < 0.0):
            raise DomainError("two-sided form needs nonnegative alpha")
    elif form == "one_sided":
        y = batch.deviations / math.sqrt(batch.dim)
    else:
        raise DomainError(f"unknown form {form!r}")
    if window == "dimensional":
        edge = 0.25 * math.sqrt(batch.dim)
    elif window == "one_dimensional":
        edge = 1.0
    else:
        raise DomainError(f"unknown window {window!r}")
    log_m = math.log(batch.m)
    rows = []
    for alpha in arr:
        if alpha == 0.0:
            est = McEstimate.from_mean_se(1.0, 0.0, batch.m, confidence)
        else:
            z = alpha * y
            l1 = _logsumexp(z) - log_m
            l2 = _logsumexp(2.0 * z) - log_m
            mean = _safe_exp(l1)
            if math.isfinite(mean):
                var = max(0.0, math.expm1(l2 - 2.0 * l1)) * math.exp(2.0 * l1)
                # sample variance correction m/(m-1) is negligible at these m
                se = math.sqrt(var / batch.m)
                est = McEstimate.from_mean_se(mean, se, batch.m, confidence)
            else:
                # overflowed estimate: no statistical claim either way
                est = McEstimate(math.inf, math.inf, 0.0, math.inf,
                                 batch.m, confidence)
        rows.append(MgfRow(
            alpha=float(alpha),
            estimate=est,
            in_window=bool(alpha <= edge + 1e-12) if window == "dimensional"
            else bool(alpha < edge),
        ))
    return rows


@dataclass(frozen=True)
class BandResult:
    s: float
    n: int
    estimate: McEstimate
    bound: float
    in_window: bool
    verdict: bounds.BoundVerdict


def entropy_power_band(batch: InfoSampleBatch, s: float = 1.0,
                       confidence: float = DEFAULT_CONFIDENCE) -> BandResult:
    """Coverage of the band f(X)^(-2/n) within e^(+-2s) of the entropy power.

    The band is exactly the event |dev| < s n, so its probability is floored
    by 1 - 3 e^(-s^2 n / 16) inside the window s <= 2.
    """
    if s <= 0.0:
        raise DomainError(f"band half-width must be positive, got {s!r}")
    n = batch.dim
    inside = int(np.count_nonzero(np.abs(batch.deviations) < s * n))
    est = McEstimate.from_proportion(inside, batch.m, confidence)
    tail = bounds.per_coordinate_tail_bound(s, n)
    floor = 1.0 - tail.value
    verdict = bounds.compare(est, floor, direction="lower", trivial=0.0)
    return BandResult(s=float(s), n=n, estimate=est, bound=floor,
                      in_window=tail.in_window, verdict=verdict)


def typical_set_fraction(batch: InfoSampleBatch, epsilon: float,
                         confidence: float = DEFAULT_CONFIDENCE) -> BandResult:
    """Coverage of the entropy-typical set {|dev| <= n epsilon}."""
    if epsilon <= 0.0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    n = batch.dim
    inside = int(np.count_nonzero(np.abs(batch.deviations) <= epsilon * n))
    est = McEstimate.from_proportion(inside, batch.m, confidence)
    tail = bounds.per_coordinate_tail_bound(epsilon, n)
    floor = 1.0 - tail.value
    verdict = bounds.compare(est, floor, direction="lower", trivial=0.0)
    return BandResult(s=float(epsilon), n=n, estimate=est, bound=floor,
                      in_window=tail.in_window, verdict=verdict)


def deviation_variance(batch: InfoSampleBatch,
                       confidence: float = DEFAULT_CONFIDENCE) -> McEstimate:
    """Sample variance of the deviations with a moment-based interval.

    The standard error uses Var(s^2) ~ (mu4 - sigma^4)/m, adequate at the
    batch sizes used here.
    """
    d = batch.deviations - batch.deviations.mean()
    m = batch.m
    s2 = float(np.dot(d, d)) / (m - 1)
    mu4 = float(np.mean(d**4))
    se = math.sqrt(max(0.0, mu4 - s2 * s2) / m)
    return McEstimate.from_mean_se(s2, se, m, confidence)


def deviation_mean(batch: InfoSampleBatch,
                   confidence: float = DEFAULT_CONFIDENCE) -> McEstimate:
    """Sample mean of the deviations (zero in expectation by definition)."""
    return McEstimate.from_values(batch.deviations, confidence)
