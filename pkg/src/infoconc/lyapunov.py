"""Moment curves of nonnegative log-concave variables and their shape.

For a nonnegative random variable eta with log-concave density, three
curves in the moment order p are tracked:

    raw         L(p) = log E eta^p            (convex in p, classically)
    normalized  L(p) - log Gamma(p+1)         (concave: reverse Lyapunov)
    hat         L(p) - p log p                (concave: reverse Lyapunov)

The normalized curve is identically zero for the standard exponential,
which is the extremal density for both reversed inequalities.  Concavity
of the normalized and hat curves at the triple (p+1, p, p-1), applied to
the tilted measure of an order-p density, is exactly what produces the
variance caps Var(xi) <= (1/p) E[xi]^2 and Var(xi) <= (C_p - 1) E[xi]^2;
``order_p_variance_check`` verifies those caps directly by quadrature so
the two routes stay independent.

All moments are computed as log-integrals with peak shifting, so orders up
to P_MAX = 40 stay far from overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bounds import VarianceCaps, order_p_variance_caps
from .distributions import Density1D, quantile_density
from .numerics import DomainError, integrate, log_gamma, log_integral
from .serialize import write_csv

__all__ = [
    "P_MAX",
    "MomentCurve",
    "ConvexityReport",
    "TripleReport",
    "KhinchineReport",
    "OrderPVarianceReport",
    "moment_curve",
    "check_convexity_direction",
    "check_triple",
    "khinchine_check",
    "order_p_variance_check",
    "quantile_density_concavity",
]

# Largest moment order supported.  Gamma(41) ~ 3.3e49 is still comfortable
# in log space; past this the quadrature peaks get needlessly extreme.
P_MAX = 40.0

_KINDS = ("raw", "normalized", "hat")


@dataclass(frozen=True)
class MomentCurve:
    density_name: str
    kind: str
    grid: np.ndarray
    log_values: np.ndarray
    quad_errors: np.ndarray

    def value_at(self, p: float) -> float:
        idx = np.nonzero(np.abs(self.grid - p) <= 1e-12)[0]
        if idx.size != 1:
            raise DomainError(f"order {p!r} is not a grid point of this curve")
        return float(self.log_values[idx[0]])

    def to_csv(self, path) -> None:
        write_csv(path, ["p", "log_value", "quad_error"],
                  zip(self.grid, self.log_values, self.quad_errors))


def _check_orders(grid: Sequence[float]) -> np.ndarray:
    arr = np.asarray(grid, dtype=float)
    if arr.size == 0:
        raise DomainError("order grid is empty")
    if np.any(np.diff(arr) <= 0.0):
        raise DomainError("order grid must be strictly increasing")
    if arr[0] <= 0.0:
        raise DomainError("moment orders must be positive")
    if arr[-1] > P_MAX:
        raise DomainError(f"moment orders above {P_MAX} are not supported")
    return arr


def moment_curve(density: Density1D, kind: str,
                 grid: Sequence[float]) -> MomentCurve:
    """Log-moment curve of a nonnegative density on a grid of orders."""
    if kind not in _KINDS:
        raise DomainError(f"unknown curve kind {kind!r}")
    lo, hi = density.support
    if lo < 0.0:
        raise DomainError(
            f"moment curves need a nonnegative variable, support starts at {lo!r}")
    arr = _check_orders(grid)
    log_vals = np.empty(arr.size)
    errors = np.empty(arr.size)
    for i, p in enumerate(arr):
        log_v, log_err = log_integral(
            lambda x, _p=p: _p * np.log(x) + density.log_pdf(x),
            density.support,
        )
        if kind == "normalized":
            log_v -= log_gamma(p + 1.0)
        elif kind == "hat":
            log_v -= p * math.log(p)
        log_vals[i] = log_v
        # log_err already bounds the absolute error of the log-value
        errors[i] = log_err
    return MomentCurve(density_name=density.name, kind=kind, grid=arr,
                       log_values=log_vals, quad_errors=errors)


@dataclass(frozen=True)
class ConvexityReport:
    name: str
    direction: str
    ok: bool
    worst_defect: float
    worst_at: float
    tol: float


def _midpoint_defects(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Chord value minus curve value at each interior grid point.

    Positive defects mean the curve sits below its chords (convex side).
    """
    w = (xs[2:] - xs[1:-1]) / (xs[2:] - xs[:-2])
    chord = w * ys[:-2] + (1.0 - w) * ys[2:]
    return chord - ys[1:-1]


def check_convexity_direction(curve: MomentCurve, direction: str,
                              tol: float = 1e-7) -> ConvexityReport:
    """Check every interior grid point against the chord of its neighbors."""
    if direction not in ("convex", "concave"):
        raise DomainError(f"unknown direction {direction!r}")
    if curve.grid.size < 3:
        raise DomainError("need at least three grid points")
    defects = _midpoint_defects(curve.grid, curve.log_values)
    signed = defects if direction == "convex" else -defects
    worst = int(np.argmin(signed))
    return ConvexityReport(
        name=f"{curve.density_name}:{curve.kind}",
        direction=direction,
        ok=bool(signed[worst] >= -tol),
        worst_defect=float(signed[worst]),
        worst_at=float(curve.grid[worst + 1]),
        tol=tol,
    )


@dataclass(frozen=True)
class TripleReport:
    name: str
    a: float
    b: float
    c: float
    margin: float
    ok: bool
    tol: float


def check_triple(curve: MomentCurve, a: float, b: float, c: float,
                 tol: float = 1e-7) -> TripleReport:
    """Three-point convexity test at grid orders a > b > c.

    The combination (a-c) L(b) - (b-c) L(a) - (a-b) L(c) is nonnegative
    exactly when the curve is concave across the triple.  Normalized and
    hat curves expect margin >= -tol; the raw curve is convex, so there
    the margin must be <= tol.
    """
    if not a > b > c:
        raise DomainError(f"triple must be decreasing, got {(a, b, c)!r}")
    va, vb, vc = (curve.value_at(q) for q in (a, b, c))
    margin = (a - c) * vb - (b - c) * va - (a - b) * vc
    if curve.kind == "raw":
        ok = margin <= tol
    else:
        ok = margin >= -tol
    return TripleReport(name=f"{curve.density_name}:{curve.kind}",
                        a=a, b=b, c=c, margin=float(margin), ok=bool(ok), tol=tol)


@dataclass(frozen=True)
class KhinchineReport:
    density_name: str
    grid: np.ndarray
    margins: np.ndarray
    ok: bool
    tol: float


def khinchine_check(density: Density1D, grid: Sequence[float],
                    tol: float = 1e-7) -> KhinchineReport:
    """Moment comparison E eta^p <= Gamma(p+1) (E eta)^p on a grid.

    In terms of the normalized curve L this is L(p) <= p L(1); margins are
    p L(1) - L(p), with equality for the standard exponential.  The
    comparison needs p >= 1: (lambda_p)^(1/p) is decreasing in p, so below
    the first moment the inequality runs the other way.
    """
    arr = _check_orders(grid)
    if arr[0] < 1.0:
        raise DomainError("moment comparison requires orders p >= 1")
    curve = moment_curve(density, "normalized", arr)
    l1 = moment_curve(density, "normalized", [1.0]).log_values[0]
    margins = arr * l1 - curve.log_values
    return KhinchineReport(
        density_name=density.name,
        grid=arr,
        margins=margins,
        ok=bool(np.min(margins) >= -tol),
        tol=tol,
    )


@dataclass(frozen=True)
class OrderPVarianceReport:
    density_name: str
    p: float
    mean: float
    variance: float
    ratio: float
    mean_log: float
    var_log: float
    caps: VarianceCaps
    margins: dict
    ok: bool
    tol: float


def order_p_variance_check(density: Density1D,
                           tol: float = 1e-7) -> OrderPVarianceReport:
    """Quadrature moments of an order-p density against every variance cap.

    Caps come from the closed forms; the moments are computed here by
    direct integration, so equality cases (the gamma family for both the
    ratio cap and the trigamma cap) land on the boundary within quadrature
    error.
    """
    p = density.order_p
    if p is None:
        raise DomainError(f"density {density.name!r} has no declared order")
    mean = math.exp(log_integral(
        lambda x: np.log(x) + density.log_pdf(x), density.support)[0])
    second = math.exp(log_integral(
        lambda x: 2.0 * np.log(x) + density.log_pdf(x), density.support)[0])
    mean_log = integrate(
        lambda x: math.log(x) * density.pdf(x), density.support).value
    second_log = integrate(
        lambda x: math.log(x) ** 2 * density.pdf(x), density.support).value
    variance = second - mean * mean
    ratio = variance / (mean * mean)
    var_log = second_log - mean_log * mean_log
    caps = order_p_variance_caps(p)
    margins = {
        "ratio": caps.ratio_cap - ratio,
        "cp": (caps.cp_cap - ratio) if caps.cp_cap is not None else None,
        "trigamma": caps.trigamma - var_log,
        "log_simple": (caps.log_cap - var_log) if caps.log_cap is not None else None,
    }
    ok = all(v >= -tol for v in margins.values() if v is not None)
    return OrderPVarianceReport(
        density_name=density.name, p=p, mean=mean, variance=variance,
        ratio=ratio, mean_log=mean_log, var_log=var_log, caps=caps,
        margins=margins, ok=bool(ok), tol=tol,
    )


def quantile_density_concavity(density: Density1D, ts: Sequence[float],
                               tol: float = 1e-9) -> ConvexityReport:
    """Concavity of I(t) = f(F^-1(t)) on a grid of probability levels.

    This function is concave on (0, 1) precisely for log-concave f, so the
    check doubles as a structural test of any density added to the zoo.
    """
    arr = np.asarray(ts, dtype=float)
    if arr.size < 3:
        raise DomainError("need at least three probability levels")
    if np.any(np.diff(arr) <= 0.0):
        raise DomainError("probability levels must be strictly increasing")
    if arr[0] <= 0.0 or arr[-1] >= 1.0:
        raise DomainError("probability levels must lie strictly inside (0, 1)")
    vals = np.array([quantile_density(density, t) for t in arr])
    defects = -_midpoint_defects(arr, vals)
    worst = int(np.argmin(defects))
    return ConvexityReport(
        name=f"{density.name}:quantile_density",
        direction="concave",
        ok=bool(defects[worst] >= -tol),
        worst_defect=float(defects[worst]),
        worst_at=float(arr[worst + 1]),
        tol=tol,
    )
