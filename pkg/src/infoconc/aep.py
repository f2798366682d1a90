"""Equipartition checks for stationary processes.

For a process X_1, X_2, ... with joint densities f_n, the per-coordinate
information -log f_n(X_1..X_n)/n converges to the entropy rate, and for the
log-concave processes here the per-coordinate tail bound

    P{ |log f_n(X) + h(f_n)| >= s n } <= 3 e^(-s^2 n / 16)

quantifies the speed.  Two families are implemented: products of a fixed
one-dimensional density, and the stationary Gaussian autoregression

    X_1 ~ N(0, sd^2/(1 - rho^2)),   X_k = rho X_{k-1} + sd Z_k.

The autoregression evaluates its joint density by the chain rule, one
conditional Gaussian per step, which is exact and O(n); the dense
covariance form Sigma_ij = sigma1^2 rho^|i-j| exists only in the tests as
an independent oracle.

Trajectories are simulated in fixed blocks of TRIAL_BLOCK trials, block b
drawing from counter offset b of the Philox stream, so reports are
byte-identical for any worker count (same discipline as the batch sampler).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import bounds
from .distributions import Density1D, LOG_2PI, ParameterError, RngStream, model_id
from .infotools import McEstimate
from .numerics import DomainError
from .serialize import write_csv

__all__ = [
    "TRIAL_BLOCK",
    "IIDProcess",
    "GaussAR1",
    "TrajectoryReport",
    "ExceedanceRow",
    "run_trajectories",
]

# Trials per RNG block; fixed so that reports do not depend on worker count.
TRIAL_BLOCK = 1024


class IIDProcess:
    """Independent copies of a fixed one-dimensional density."""

    def __init__(self, base: Density1D):
        self.base = base
        self.entropy_rate = float(base.entropy)
        self.spec = {"process": "iid", "base": base.spec}

    def joint_entropy(self, n: int) -> float:
        return n * self.entropy_rate

    def joint_log_density(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.sum(self.base.log_pdf(x), axis=1)

    def _neg_log_steps(self, gen: np.random.Generator, trials: int,
                       length: int) -> np.ndarray:
        x = self.base.sample(gen, trials * length).reshape(trials, length)
        return -self.base.log_pdf(x)


class GaussAR1:
    """Stationary Gaussian autoregression of order one."""

    def __init__(self, rho: float, sd: float = 1.0):
        if not -1.0 < rho < 1.0:
            raise ParameterError(f"autoregression needs |rho| < 1, got {rho!r}")
        if sd <= 0.0:
            raise ParameterError(f"innovation scale must be positive, got {sd!r}")
        self.rho = float(rho)
        self.sd = float(sd)
        self.sigma1_sq = sd * sd / (1.0 - rho * rho)
        self.entropy_rate = 0.5 * (LOG_2PI + 1.0 + math.log(sd * sd))
        self.spec = {"process": "gauss_ar1", "params": {"rho": self.rho, "sd": self.sd}}

    def joint_entropy(self, n: int) -> float:
        first = 0.5 * (LOG_2PI + 1.0 + math.log(self.sigma1_sq))
        return first + (n - 1) * self.entropy_rate

    def joint_log_density(self, x: np.ndarray) -> np.ndarray:
        """Chain-rule evaluation: one conditional Gaussian per step."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = -0.5 * (LOG_2PI + math.log(self.sigma1_sq)) \
            - 0.5 * x[:, 0] ** 2 / self.sigma1_sq
        if x.shape[1] > 1:
            resid = x[:, 1:] - self.rho * x[:, :-1]
            out = out - 0.5 * (x.shape[1] - 1) * (LOG_2PI + math.log(self.sd**2)) \
                - 0.5 * np.sum(resid * resid, axis=1) / (self.sd * self.sd)
        return out

    def _neg_log_steps(self, gen: np.random.Generator, trials: int,
                       length: int) -> np.ndarray:
        # the innovations are exactly the standardized conditionals, so the
        # per-step -log f is a constant plus z^2/2; no need to materialize x
        z = gen.standard_normal((trials, length))
        steps = 0.5 * z * z
        steps[:, 0] += 0.5 * (LOG_2PI + math.log(self.sigma1_sq))
        if length > 1:
            steps[:, 1:] += 0.5 * (LOG_2PI + math.log(self.sd * self.sd))
        return steps


@dataclass(frozen=True)
class ExceedanceRow:
    n: int
    s: float
    exceedances: int
    estimate: McEstimate
    bound: float
    in_window: bool
    verdict: bounds.BoundVerdict


@dataclass(frozen=True)
class TrajectoryReport:
    """Per-coordinate information of simulated trajectories at grid lengths."""

    process_id: str
    entropy_rate: float
    n_grid: np.ndarray
    joint_entropies: np.ndarray
    info: np.ndarray          # (trials, len(n_grid)), -log f_n / n
    trials: int
    seed: int
    stream_id: int

    def per_coord_deviations(self) -> np.ndarray:
        """info minus h_n/n, the centered per-coordinate deviations."""
        return self.info - self.joint_entropies / self.n_grid

    def sup_deviation_medians(self) -> np.ndarray:
        """Median over trials of sup_{n' >= n} |info - entropy rate|.

        The inner sup runs over the tail of the length grid, so the medians
        are non-increasing by construction; strict decrease is the
        convergence signal the equipartition property predicts.
        """
        gap = np.abs(self.info - self.entropy_rate)
        tail_sup = np.maximum.accumulate(gap[:, ::-1], axis=1)[:, ::-1]
        return np.median(tail_sup, axis=0)

    def exceedance_table(self, s_values: Sequence[float],
                         confidence: float = 0.999) -> list:
        """Tail of the centered deviations against 3 e^(-s^2 n/16) per length."""
        svals = np.asarray(s_values, dtype=float)
        if svals.size == 0:
            raise DomainError("s grid is empty")
        if np.any(svals <= 0.0):
            raise DomainError("tail levels s must be positive")
        dev = np.abs(self.per_coord_deviations())
        rows = []
        for j, n in enumerate(self.n_grid):
            for s in svals:
                count = int(np.count_nonzero(dev[:, j] >= s))
                est = McEstimate.from_proportion(count, self.trials, confidence)
                tail = bounds.per_coordinate_tail_bound(float(s), int(n))
                verdict = bounds.compare(est, tail.value, direction="upper",
                                         trivial=1.0)
                rows.append(ExceedanceRow(
                    n=int(n), s=float(s), exceedances=count, estimate=est,
                    bound=tail.value, in_window=tail.in_window, verdict=verdict,
                ))
        return rows

    def to_csv(self, path) -> None:
        devs = self.per_coord_deviations()
        def rows():
            for i in range(self.trials):
                for j, n in enumerate(self.n_grid):
                    yield (i, int(n), self.info[i, j], devs[i, j])
        write_csv(path, ["trial", "n", "per_coord_info", "deviation"], rows())

    def describe(self) -> dict:
        return {
            "process_id": self.process_id,
            "entropy_rate": self.entropy_rate,
            "n_grid": [int(n) for n in self.n_grid],
            "trials": self.trials,
            "seed": self.seed,
            "stream_id": self.stream_id,
        }


def _check_n_grid(n_grid: Sequence[int]) -> np.ndarray:
    arr = np.asarray(n_grid)
    if arr.size == 0:
        raise DomainError("length grid is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        raise DomainError("trajectory lengths must be integers")
    if arr[0] < 1 or np.any(np.diff(arr) <= 0):
        raise DomainError("length grid must be strictly increasing and >= 1")
    return arr.astype(np.int64)


def run_trajectories(process, n_grid: Sequence[int], trials: int,
                     rng: RngStream, workers: int = 1) -> TrajectoryReport:
    """Simulate ``trials`` trajectories and record -log f_n / n at each n.

    Each trajectory is generated once at the longest grid length; shorter
    lengths reuse its prefix through the cumulative sums, which is exactly
    the nesting a single growing sample path would produce.
    """
    grid = _check_n_grid(n_grid)
    if trials < 2:
        raise DomainError(f"need at least two trials, got {trials!r}")
    if workers < 1:
        raise DomainError(f"worker count must be >= 1, got {workers!r}")
    length = int(grid[-1])
    cols = grid - 1
    info = np.empty((trials, grid.size))
    n_blocks = (trials + TRIAL_BLOCK - 1) // TRIAL_BLOCK

    def run_block(b: int) -> None:
        lo = b * TRIAL_BLOCK
        hi = min(lo + TRIAL_BLOCK, trials)
        gen = rng.generator(block=b)
        steps = process._neg_log_steps(gen, hi - lo, length)
        cum = np.cumsum(steps, axis=1)
        info[lo:hi] = cum[:, cols] / grid

    if workers == 1 or n_blocks == 1:
        for b in range(n_blocks):
            run_block(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_block, range(n_blocks)))

    return TrajectoryReport(
        process_id=model_id(process),
        entropy_rate=process.entropy_rate,
        n_grid=grid,
        joint_entropies=np.array([process.joint_entropy(int(n)) for n in grid]),
        info=info,
        trials=trials,
        seed=rng.seed,
        stream_id=rng.stream_id,
    )
