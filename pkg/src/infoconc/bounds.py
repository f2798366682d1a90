"""Closed-form concentration and moment bounds, plus the verdict comparator.

Every bound certified by the experiment layer is evaluated here, in one
place, with its validity window.  Bounds whose window depends on the
arguments return a ``BoundValue`` carrying an ``in_window`` flag; evaluation
outside the window is permitted (the curves are still defined) but flagged
so reports can exclude those points from certification.

The ``compare`` function turns an empirical confidence interval and a bound
value into one of three verdicts:

HOLDS         the whole interval sits on the right side of the bound
VIOLATED      the whole interval sits on the wrong side
INCONCLUSIVE  the interval straddles the bound

A bound weaker than the trivial one (probability above 1, or a lower bound
below 0) is tagged vacuous; for lower bounds that also forces INCONCLUSIVE,
since such a comparison certifies nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import NamedTuple, Optional

from .numerics import DomainError, trigamma

__all__ = [
    "BoundValue",
    "BoundVerdict",
    "VarianceCaps",
    "FixedScaleMgf",
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
    "exp_tail_bound",
    "gaussian_tail_bound",
    "per_coordinate_tail_bound",
    "mgf_bound_1d",
    "chebyshev_tail_1d",
    "order_p_mgf_bound",
    "order_p_variance_caps",
    "mgf_bound_nd",
    "fixed_scale_mgf_bound",
    "variance_cap_nd",
    "log_cp",
    "tail_crossover",
    "compare",
    "catalog",
]

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
INCONCLUSIVE = "INCONCLUSIVE"


class BoundValue(NamedTuple):
    value: float
    in_window: bool


@dataclass(frozen=True)
class BoundVerdict:
    verdict: str
    bound: float
    ci_low: float
    ci_high: float
    margin: float
    vacuous: bool
    direction: str


@dataclass(frozen=True)
class VarianceCaps:
    """Variance caps for an order-p random variable xi (all in one place).

    ratio_cap and cp_cap bound Var(xi)/E[xi]^2; trigamma and log_cap bound
    Var(log xi).  Caps whose validity window excludes p are None.
    """

    p: float
    trigamma: float
    ratio_cap: float
    cp_cap: Optional[float]
    log_cap: Optional[float]


class FixedScaleMgf(NamedTuple):
    scale: float
    bound: float


def exp_tail_bound(t: float) -> float:
    """Two-sided tail bound 2 e^(-t/16) for |h~ - h| >= t sqrt(n), any n."""
    if t < 0.0:
        raise DomainError(f"tail threshold must be nonnegative, got {t!r}")
    return 2.0 * math.exp(-t / 16.0)


def gaussian_tail_bound(t: float, n: int) -> BoundValue:
    """Gaussian-form tail bound 3 e^(-t^2/16), valid for 0 <= t <= 2 sqrt(n)."""
    if t < 0.0:
        raise DomainError(f"tail threshold must be nonnegative, got {t!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    return BoundValue(3.0 * math.exp(-t * t / 16.0), t <= 2.0 * math.sqrt(n) + 1e-12)


def per_coordinate_tail_bound(s: float, n: int) -> BoundValue:
    """Per-coordinate tail bound 3 e^(-s^2 n/16), valid for 0 <= s <= 2.

    Same curve as the gaussian form at t = s sqrt(n); stated separately
    because the asymptotic-equipartition checks work per coordinate.
    """
    if s < 0.0:
        raise DomainError(f"tail threshold must be nonnegative, got {s!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    return BoundValue(3.0 * math.exp(-s * s * n / 16.0), s <= 2.0 + 1e-12)


def mgf_bound_1d(alpha: float) -> float:
    """One-dimensional bound 2^(1+alpha) / ((1-alpha)(2-alpha)) on
    E exp(alpha |log f(X) - E log f(X)|), for 0 <= alpha < 1."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha!r}")
    return 2.0 ** (1.0 + alpha) / ((1.0 - alpha) * (2.0 - alpha))


def chebyshev_tail_1d(t: float) -> float:
    """Tail bound 4 e^(-t/2) implied by the alpha = 1/2 moment bound."""
    if t < 0.0:
        raise DomainError(f"tail threshold must be nonnegative, got {t!r}")
    return 4.0 * math.exp(-t / 2.0)


def order_p_mgf_bound(alpha: float, p: float, form: str = "two_sided") -> BoundValue:
    """Moment-generating bounds for log xi of an order-p variable.

    two_sided: E exp(alpha |log xi - E log xi|) <= 2 e^(2 alpha^2/(p-1)),
    valid for 0 <= alpha <= p-1.  one_sided drops the factor 2 and allows
    |alpha| <= p-1.
    """
    if p <= 1.0:
        raise DomainError(f"order must satisfy p > 1, got {p!r}")
    w = 2.0 * alpha * alpha / (p - 1.0)
    if form == "two_sided":
        if alpha < 0.0:
            raise DomainError(f"two-sided form needs alpha >= 0, got {alpha!r}")
        return BoundValue(2.0 * math.exp(w), alpha <= p - 1.0 + 1e-12)
    if form == "one_sided":
        return BoundValue(math.exp(w), abs(alpha) <= p - 1.0 + 1e-12)
    raise DomainError(f"unknown form {form!r}")


def log_cp(p: float) -> float:
    """log C_p with C_p = (p+1)^(p+1) (p-1)^(p-1) / p^(2p), for p > 1."""
    if p <= 1.0:
        raise DomainError(f"log_cp requires p > 1, got {p!r}")
    return (p + 1.0) * math.log(p + 1.0) + (p - 1.0) * math.log(p - 1.0) - 2.0 * p * math.log(p)


def order_p_variance_caps(p: float) -> VarianceCaps:
    """All variance caps available for an order-p variable, p >= 1."""
    if p < 1.0:
        raise DomainError(f"variance caps require p >= 1, got {p!r}")
    return VarianceCaps(
        p=p,
        trigamma=trigamma(p),
        ratio_cap=1.0 / p,
        cp_cap=(math.expm1(log_cp(p)) if p > 1.0 else None),
        log_cap=(1.0 / (p - 1.0) if p > 1.0 else None),
    )


def mgf_bound_nd(alpha: float, n: int) -> BoundValue:
    """Dimensional bound 3 e^(4 alpha^2) on E exp((alpha/sqrt(n)) |h~ - h|),
    valid for 0 <= alpha <= sqrt(n)/4."""
    if alpha < 0.0:
        raise DomainError(f"alpha must be nonnegative, got {alpha!r}")
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    return BoundValue(3.0 * math.exp(4.0 * alpha * alpha), alpha <= 0.25 * math.sqrt(n) + 1e-12)


def fixed_scale_mgf_bound() -> FixedScaleMgf:
    """Fixed-scale form: E exp(|h~ - h| / (16 sqrt(n))) <= 2 for every n."""
    return FixedScaleMgf(scale=1.0 / 16.0, bound=2.0)


def variance_cap_nd(n: int) -> float:
    """Reference cap on Var(h~) derived from the dimensional MGF bound.

    With beta = alpha/sqrt(n) and A = 3 e^(4 alpha^2) at alpha =
    min(1/2, sqrt(n)/4), the pointwise inequality y^2 <= 4/(e beta)^2 e^(beta y)
    for y >= 0 gives E (h~-h)^2 <= 4 A / (e beta)^2; equals (48/e) n for n >= 4.
    """
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n!r}")
    alpha = min(0.5, 0.25 * math.sqrt(n))
    beta = alpha / math.sqrt(n)
    a = 3.0 * math.exp(4.0 * alpha * alpha)
    return 4.0 * a / (math.e * beta) ** 2


def tail_crossover() -> float:
    """Threshold where the gaussian-form tail bound overtakes the
    exponential form: the positive root of t^2 - t = 16 log(3/2)."""
    return 0.5 * (1.0 + math.sqrt(1.0 + 64.0 * math.log(1.5)))


def compare(
    estimate,
    bound: float,
    direction: str = "upper",
    trivial: Optional[float] = None,
) -> BoundVerdict:
    """Turn an empirical confidence interval into a verdict against a bound.

    Parameters
    ----------
    estimate : object with ci_low / ci_high attributes (e.g. McEstimate).
    bound : float
        Theoretical bound the estimate is compared against.
    direction : "upper" | "lower"
        Whether the bound caps the quantity from above or floors it from
        below.
    trivial : float or None
        The trivial extreme of the quantity (1 for probabilities compared
        from above, 0 for probabilities compared from below).  Bounds beyond
        it are tagged vacuous; a vacuous lower bound is also forced to
        INCONCLUSIVE because it cannot certify anything.
    """
    lo, hi = float(estimate.ci_low), float(estimate.ci_high)
    if direction == "upper":
        vacuous = trivial is not None and bound > trivial
        if hi <= bound:
            verdict = HOLDS
        elif lo > bound:
            verdict = VIOLATED
        else:
            verdict = INCONCLUSIVE
        margin = bound - hi
    elif direction == "lower":
        vacuous = trivial is not None and bound < trivial
        if vacuous:
            verdict = INCONCLUSIVE
        elif lo >= bound:
            verdict = HOLDS
        elif hi < bound:
            verdict = VIOLATED
        else:
            verdict = INCONCLUSIVE
        margin = lo - bound
    else:
        raise DomainError(f"unknown direction {direction!r}")
    return BoundVerdict(
        verdict=verdict,
        bound=float(bound),
        ci_low=lo,
        ci_high=hi,
        margin=float(margin),
        vacuous=vacuous,
        direction=direction,
    )


@dataclass(frozen=True)
class BoundInfo:
    name: str
    formula: str
    validity: str
    statement: str

    def as_dict(self) -> dict:
        return asdict(self)


_CATALOG = [
    BoundInfo(
        "information_tail_exp",
        "2*exp(-t/16)",
        "t >= 0, any dimension n",
        "two-sided tail of the normalized information deviation: P{|h~ - h| >= t*sqrt(n)} for log-concave X",
    ),
    BoundInfo(
        "information_tail_gaussian",
        "3*exp(-t^2/16)",
        "0 <= t <= 2*sqrt(n)",
        "gaussian-form tail of the normalized information deviation, sharper than the exponential form beyond the crossover",
    ),
    BoundInfo(
        "per_coordinate_tail",
        "3*exp(-s^2*n/16)",
        "0 <= s <= 2",
        "tail of the per-coordinate information deviation: P{|h~ - h| >= s*n}; drives the equipartition checks",
    ),
    BoundInfo(
        "information_mgf_1d",
        "2^(1+alpha)/((1-alpha)*(2-alpha))",
        "0 <= alpha < 1, dimension 1",
        "moment bound on E exp(alpha*|log f(X) - E log f(X)|) for one-dimensional log-concave X",
    ),
    BoundInfo(
        "information_mgf_1d_half",
        "(8/3)*sqrt(2) < 4",
        "alpha = 1/2, dimension 1",
        "fixed-scale instance of the one-dimensional moment bound",
    ),
    BoundInfo(
        "information_tail_cheb_1d",
        "4*exp(-t/2)",
        "t >= 0, dimension 1",
        "Chebyshev-style tail implied by the alpha = 1/2 moment bound",
    ),
    BoundInfo(
        "order_p_mgf_two_sided",
        "2*exp(2*alpha^2/(p-1))",
        "0 <= alpha <= p-1, order p > 1",
        "two-sided exponential moment of log xi - E log xi for an order-p variable",
    ),
    BoundInfo(
        "order_p_mgf_one_sided",
        "exp(2*alpha^2/(p-1))",
        "|alpha| <= p-1, order p > 1",
        "one-sided exponential moment of log xi - E log xi for an order-p variable",
    ),
    BoundInfo(
        "order_p_mgf_fixed",
        "E exp((sqrt(p)/6)*|log xi - E log xi|) < 3",
        "order p >= 1",
        "fixed-constant exponential moment; via 2*exp(1/9) < 3 for p >= 2 and the one-dimensional route below p = 2",
    ),
    BoundInfo(
        "order_p_var_ratio",
        "Var(xi) <= (1/p)*E[xi]^2",
        "order p >= 1",
        "variance-to-mean-square cap for order-p variables; tight for the gamma family",
    ),
    BoundInfo(
        "order_p_var_cp",
        "Var(xi) <= (C_p - 1)*E[xi]^2, C_p = (p+1)^(p+1)*(p-1)^(p-1)/p^(2*p)",
        "order p > 1",
        "variance cap from log-concavity of the normalized moment curve at the triple (p+1, p, p-1)",
    ),
    BoundInfo(
        "order_p_var_log_trigamma",
        "Var(log xi) <= psi1(p)",
        "order p >= 1",
        "variance of the logarithm capped by the trigamma function; equality for gamma(p)",
    ),
    BoundInfo(
        "order_p_var_log_simple",
        "Var(log xi) <= 1/(p-1)",
        "order p > 1",
        "coarse variance cap for the logarithm of an order-p variable",
    ),
    BoundInfo(
        "information_mgf_nd",
        "3*exp(4*alpha^2)",
        "0 <= alpha <= sqrt(n)/4",
        "dimensional moment bound on E exp((alpha/sqrt(n))*|h~ - h|) for log-concave X in R^n",
    ),
    BoundInfo(
        "information_mgf_nd_fixed",
        "E exp(|h~ - h|/(16*sqrt(n))) <= 2",
        "any dimension n",
        "fixed-scale dimensional moment bound (scale 1/16, constant 2); source of the exponential tail",
    ),
    BoundInfo(
        "khinchine_moment",
        "E xi^p <= Gamma(p+1)*(E xi)^p",
        "p >= 1, xi log-concave on (0, inf)",
        "Khinchine-type moment comparison; extremal for the standard exponential",
    ),
    BoundInfo(
        "entropy_power_band",
        "P{f(X)^(-2/n) within e^(+-2s) of N(X)} >= 1 - 3*exp(-s^2*n/16)",
        "0 <= s <= 2",
        "effective-support band for the density value in terms of the entropy power N(X) = exp(2 h(X)/n)",
    ),
    BoundInfo(
        "information_variance_nd",
        "Var(h~) <= (48/e)*n",
        "n >= 4 (smaller n: 4*A/(e*beta)^2 at alpha = sqrt(n)/4)",
        "reference variance cap derived here from the dimensional moment bound; the sharp constant is open, so runs report the empirical ratio",
    ),
]


def catalog() -> list:
    """Metadata for every certified bound (name, formula, validity, statement)."""
    return list(_CATALOG)
