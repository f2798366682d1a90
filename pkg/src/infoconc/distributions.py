"""Log-concave distribution zoo and n-dimensional sample models.

Two layers live here.  ``Density1D`` wraps a one-dimensional log-concave
density together with everything the experiments need from it: normalized
log-density, exact sampler, differential entropy in nats, quantiles, and
the optional order-p factorization f(x) = x^(p-1) g(x).  ``ModelND`` builds
n-dimensional models from those pieces (independent products, Gaussians
with a covariance factor, affine pushforwards, uniform balls).

Sampling is exact everywhere: inverse-CDF where the quantile has a closed
form, otherwise acceptance-rejection under the universal envelope for
log-concave densities (flat cap of height f(mode) with exponential tails,
anchored at the mode).  Randomness comes from counter-based Philox streams
keyed by (seed, stream_id), so any partition of the work across workers
reproduces the same values.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammainc, gammaincinv, digamma, ndtr, ndtri

from .numerics import (
    DomainError,
    find_root_increasing,
    golden_section_min,
    integrate,
    log_gamma,
    log_integral,
)

__all__ = [
    "ParameterError",
    "RngStream",
    "Density1D",
    "ModelND",
    "Product",
    "GaussianModel",
    "AffineMap",
    "BallUniform",
    "exponential",
    "gamma",
    "gaussian1d",
    "laplace",
    "uniform",
    "half_normal",
    "from_log_density",
    "make_standard",
    "standard_zoo",
    "positive_zoo",
    "sample",
    "log_density",
    "entropy",
    "quantile_density",
    "density_from_spec",
    "model_from_spec",
    "model_id",
]

LOG_2PI = math.log(2.0 * math.pi)

_U64 = 2**64


class ParameterError(ValueError):
    """Invalid family parameters or malformed model specification."""


# ---------------------------------------------------------------------------
# random streams
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RngStream:
    """Counter-based splittable random stream.

    A (seed, stream_id) pair names one logical stream; ``generator(block)``
    opens a view at counter offset block * 2**128, so disjoint blocks never
    overlap and a batch partitioned into fixed-size blocks is reproduced
    bit-for-bit regardless of how blocks are scheduled across workers.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.seed < _U64):
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not (0 <= self.stream_id < _U64):
            raise ParameterError(f"stream_id must be a 64-bit unsigned integer, got {self.stream_id!r}")

    def generator(self, block: int = 0) -> np.random.Generator:
        if block < 0:
            raise ParameterError(f"block index must be nonnegative, got {block!r}")
        key = self.seed + (self.stream_id << 64)
        return np.random.Generator(np.random.Philox(key=key, counter=block << 128))

    def derive(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


# ---------------------------------------------------------------------------
# one-dimensional densities
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Density1D:
    """Normalized one-dimensional density with exact sampling.

    Fields
    ------
    name : str
        Human-readable identifier, also used in reports.
    support : (a, b)
        Open interval carrying the mass; log_pdf is -inf outside.
    entropy : float
        Differential entropy in nats.
    mode : float
        A maximizer of the density (needed by the rejection sampler).
    order_p : float or None
        When set, the density factors as x^(order_p - 1) * g(x) on positive
        support with g log-concave; ``log_g`` evaluates log g.
    """

    name: str
    support: Tuple[float, float]
    entropy: float
    mode: float
    spec: dict = field(repr=False)
    order_p: Optional[float] = None
    _log_pdf: Callable = field(repr=False, default=None)
    _sampler: Callable = field(repr=False, default=None)
    _quantile: Callable = field(repr=False, default=None)
    _cdf: Callable = field(repr=False, default=None)
    _log_g: Callable = field(repr=False, default=None)

    def log_pdf(self, x) -> np.ndarray:
        return self._log_pdf(np.asarray(x, dtype=np.float64))

    def pdf(self, x) -> np.ndarray:
        return np.exp(self.log_pdf(x))

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        return self._sampler(gen, int(size))

    def quantile(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if np.any((t <= 0.0) | (t >= 1.0)):
            raise DomainError("quantile level must lie strictly inside (0, 1)")
        return self._quantile(t)

    def cdf(self, x) -> np.ndarray:
        return self._cdf(np.asarray(x, dtype=np.float64))

    def log_g(self, x) -> np.ndarray:
        if self._log_g is None:
            raise ParameterError(f"{self.name} does not declare an order-p factorization")
        return self._log_g(np.asarray(x, dtype=np.float64))


def _support_mask(x: np.ndarray, support: Tuple[float, float]) -> np.ndarray:
    a, b = support
    return (x > a) & (x < b)


def _masked_log(x, support, inside: Callable) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.full(x.shape, -np.inf)
    m = _support_mask(x, support)
    if np.any(m):
        out[m] = inside(x[m])
    return out


_TINY = np.finfo(np.float64).tiny


def _inverse_cdf_sampler(quantile: Callable) -> Callable:
    def draw(gen: np.random.Generator, size: int) -> np.ndarray:
        # generator uniforms live in [0, 1); keep 0 out of quantiles with
        # infinite left tails (shifts 2^-53 of mass by a subnormal amount)
        return quantile(np.maximum(gen.random(size), _TINY))

    return draw


def _rejection_sampler(log_pdf: Callable, mode: float) -> Callable:
    """Acceptance-rejection under the universal log-concave envelope.

    After rescaling u = (x - mode) * f(mode), any normalized log-concave
    density with its mode at u = 0 and peak 1 sits below
    min(1, e^(1 - |u|)), whose total mass is 4, so the acceptance rate is
    1/4.  A relative headroom of 1e-9 absorbs quadrature/mode-location
    round-off in the peak height; material excursions above the envelope
    mean the density is not log-concave and are reported.
    """
    peak = float(log_pdf(np.asarray([mode]))[0])
    if not math.isfinite(peak):
        raise ParameterError("density mode has non-finite log-density; cannot build envelope")
    scale = math.exp(peak)
    log_headroom = 1e-9

    def draw(gen: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty(size)
        have = 0
        while have < size:
            k = max(4 * (size - have) + (size - have) // 2, 256)
            region = gen.random(k)
            w = gen.random(k)
            v = gen.random(k)
            u = np.where(
                region < 0.5,
                2.0 * w - 1.0,
                np.where(region < 0.75, 1.0 - np.log1p(-w), -1.0 + np.log1p(-w)),
            )
            x = mode + u / scale
            log_ratio = (log_pdf(x) - peak) - np.minimum(0.0, 1.0 - np.abs(u))
            if np.any(log_ratio > 1e-6):
                raise ParameterError("density exceeds the log-concave envelope; is it log-concave?")
            acc = np.log(v) < log_ratio - log_headroom
            taken = x[acc]
            n = min(taken.size, size - have)
            out[have : have + n] = taken[:n]
            have += n
        return out

    return draw


# --- standard families -----------------------------------------------------

def exponential() -> Density1D:
    """Standard exponential: f(x) = e^-x on (0, inf)."""
    quantile = lambda t: -np.log1p(-t)
    return Density1D(
        name="exponential",
        support=(0.0, math.inf),
        entropy=1.0,
        mode=0.0,
        spec={"family": "exponential"},
        order_p=1.0,
        _log_pdf=lambda x: _masked_log(x, (0.0, math.inf), lambda y: -y),
        _sampler=_inverse_cdf_sampler(quantile),
        _quantile=quantile,
        _cdf=lambda x: np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0)), 0.0),
        _log_g=lambda x: -x,
    )


def gamma(p: float) -> Density1D:
    """Gamma with shape p >= 1 and unit rate: f(x) = x^(p-1) e^-x / Gamma(p)."""
    p = float(p)
    if not p >= 1.0:
        raise ParameterError(f"gamma shape must satisfy p >= 1, got {p!r}")
    if p == 1.0:
        d = exponential()
        return Density1D(
            name="gamma(1)",
            support=d.support,
            entropy=d.entropy,
            mode=d.mode,
            spec={"family": "gamma", "params": {"p": 1.0}},
            order_p=1.0,
            _log_pdf=d._log_pdf,
            _sampler=d._sampler,
            _quantile=d._quantile,
            _cdf=d._cdf,
            _log_g=d._log_g,
        )
    lgp = log_gamma(p)
    ent = p + lgp + (1.0 - p) * float(digamma(p))
    log_pdf = lambda x: _masked_log(
        x, (0.0, math.inf), lambda y: (p - 1.0) * np.log(y) - y - lgp
    )
    return Density1D(
        name=f"gamma({p:g})",
        support=(0.0, math.inf),
        entropy=ent,
        mode=p - 1.0,
        spec={"family": "gamma", "params": {"p": p}},
        order_p=p,
        _log_pdf=log_pdf,
        _sampler=_rejection_sampler(log_pdf, p - 1.0),
        _quantile=lambda t: gammaincinv(p, t),
        _cdf=lambda x: gammainc(p, np.maximum(x, 0.0)),
        _log_g=lambda x: -x - lgp,
    )


def gaussian1d(mu: float = 0.0, sigma: float = 1.0) -> Density1D:
    """Normal with mean mu and standard deviation sigma."""
    mu, sigma = float(mu), float(sigma)
    if not sigma > 0.0:
        raise ParameterError(f"gaussian sigma must be positive, got {sigma!r}")
    c = -0.5 * LOG_2PI - math.log(sigma)
    quantile = lambda t: mu + sigma * ndtri(t)
    return Density1D(
        name=f"gaussian1d({mu:g},{sigma:g})",
        support=(-math.inf, math.inf),
        entropy=0.5 * math.log(2.0 * math.pi * math.e * sigma**2),
        mode=mu,
        spec={"family": "gaussian1d", "params": {"mu": mu, "sigma": sigma}},
        _log_pdf=lambda x: c - 0.5 * ((np.asarray(x, dtype=np.float64) - mu) / sigma) ** 2,
        _sampler=_inverse_cdf_sampler(quantile),
        _quantile=quantile,
        _cdf=lambda x: ndtr((x - mu) / sigma),
    )


def laplace() -> Density1D:
    """Standard Laplace: f(x) = e^-|x| / 2."""
    def quantile(t):
        t = np.asarray(t, dtype=np.float64)
        return np.where(t < 0.5, np.log(2.0 * t), -np.log(2.0 * (1.0 - t)))

    return Density1D(
        name="laplace",
        support=(-math.inf, math.inf),
        entropy=1.0 + math.log(2.0),
        mode=0.0,
        spec={"family": "laplace"},
        _log_pdf=lambda x: -np.abs(np.asarray(x, dtype=np.float64)) - math.log(2.0),
        _sampler=_inverse_cdf_sampler(quantile),
        _quantile=quantile,
        _cdf=lambda x: np.where(x < 0.0, 0.5 * np.exp(np.minimum(x, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(x, 0.0))),
    )


def uniform(a: float = 0.0, b: float = 1.0) -> Density1D:
    """Uniform on (a, b)."""
    a, b = float(a), float(b)
    if not a < b:
        raise ParameterError(f"uniform requires a < b, got a={a!r}, b={b!r}")
    width = b - a
    logw = math.log(width)
    return Density1D(
        name=f"uniform({a:g},{b:g})",
        support=(a, b),
        entropy=logw,
        mode=0.5 * (a + b),
        spec={"family": "uniform", "params": {"a": a, "b": b}},
        order_p=1.0 if a >= 0.0 else None,
        _log_pdf=lambda x: _masked_log(x, (a, b), lambda y: np.full(y.shape, -logw)),
        _sampler=lambda gen, size: a + width * gen.random(size),
        _quantile=lambda t: a + width * np.asarray(t, dtype=np.float64),
        _cdf=lambda x: np.clip((x - a) / width, 0.0, 1.0),
        _log_g=(lambda x: _masked_log(x, (a, b), lambda y: np.full(y.shape, -logw))) if a >= 0.0 else None,
    )


def half_normal() -> Density1D:
    """Half-normal: f(x) = sqrt(2/pi) e^(-x^2/2) on (0, inf)."""
    c = 0.5 * math.log(2.0 / math.pi)
    log_pdf = lambda x: _masked_log(x, (0.0, math.inf), lambda y: c - 0.5 * y * y)
    quantile = lambda t: ndtri(0.5 * (1.0 + np.asarray(t, dtype=np.float64)))
    return Density1D(
        name="half_normal",
        support=(0.0, math.inf),
        entropy=0.5 * math.log(math.pi * math.e / 2.0),
        mode=0.0,
        spec={"family": "half_normal"},
        order_p=1.0,
        _log_pdf=log_pdf,
        _sampler=_inverse_cdf_sampler(quantile),
        _quantile=quantile,
        _cdf=lambda x: 2.0 * ndtr(np.maximum(x, 0.0)) - 1.0,
        _log_g=log_pdf,
    )


def from_log_density(
    name: str,
    log_density_fn: Callable,
    support: Tuple[float, float],
    order_p: Optional[float] = None,
) -> Density1D:
    """Build a Density1D from an unnormalized log-density.

    Normalization, entropy, mode, CDF and quantile all come from the shared
    quadrature/root-finding kernels; sampling uses the log-concave rejection
    envelope.  The caller is responsible for log-concavity (the sampler
    detects material violations).
    """
    a, b = support
    if not a < b:
        raise ParameterError(f"invalid support {support!r}")
    if order_p is not None and a < 0.0:
        raise ParameterError("order-p densities must have nonnegative support")

    raw = lambda x: np.asarray(log_density_fn(np.asarray(x, dtype=np.float64)), dtype=np.float64)
    log_z, _ = log_integral(lambda x: float(raw(np.asarray([x]))[0]), support)
    log_pdf = lambda x: _masked_log(x, (a, b), lambda y: raw(y) - log_z)

    scalar_logpdf = lambda x: float(log_pdf(np.asarray([x]))[0])
    mode = _locate_mode(scalar_logpdf, support)

    def ent_integrand(x: float) -> float:
        t = scalar_logpdf(x)
        return 0.0 if t < -700.0 else -t * math.exp(t)

    ent = integrate(ent_integrand, support, tol=1e-11).value

    def cdf_scalar(x: float) -> float:
        if x <= a:
            return 0.0
        if x >= b:
            return 1.0
        lo = a if not math.isinf(a) else -math.inf
        return min(1.0, integrate(lambda t: math.exp(scalar_logpdf(t)), (lo, x), tol=1e-12).value)

    def cdf(x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        flat = np.atleast_1d(x)
        out = np.array([cdf_scalar(float(t)) for t in flat])
        return out.reshape(x.shape)

    def quantile(t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        flat = np.atleast_1d(t)
        out = np.empty(flat.shape)
        for i, ti in enumerate(flat):
            lo, hi = _quantile_bracket(cdf_scalar, float(ti), mode, support)
            out[i] = find_root_increasing(cdf_scalar, float(ti), (lo, hi), tol=1e-12)
        return out.reshape(t.shape)

    return Density1D(
        name=name,
        support=support,
        entropy=float(ent),
        mode=mode,
        spec={"family": "custom", "params": {"name": name}},
        order_p=order_p,
        _log_pdf=log_pdf,
        _sampler=_rejection_sampler(log_pdf, mode),
        _quantile=quantile,
        _cdf=cdf,
        _log_g=None
        if order_p is None
        else (lambda x: log_pdf(x) - (order_p - 1.0) * np.log(np.asarray(x, dtype=np.float64))),
    )


def _locate_mode(scalar_logpdf: Callable, support: Tuple[float, float]) -> float:
    a, b = support
    if math.isinf(b) and not math.isinf(a):
        xs = [a + 2.0**k for k in range(-40, 41)]
    elif math.isinf(a) and math.isinf(b):
        xs = [-(2.0**k) for k in range(40, -41, -1)] + [0.0] + [2.0**k for k in range(-40, 41)]
    elif math.isinf(a):
        xs = [b - 2.0**k for k in range(40, -41, -1)]
    else:
        xs = [a + (b - a) * i / 128.0 for i in range(1, 128)]
    vals = [scalar_logpdf(x) for x in xs]
    k = max(range(len(xs)), key=lambda i: vals[i] if not math.isnan(vals[i]) else -math.inf)
    lo = xs[k - 1] if k > 0 else (a if not math.isinf(a) else xs[0] - 1.0)
    hi = xs[k + 1] if k + 1 < len(xs) else (b if not math.isinf(b) else xs[-1] + 1.0)
    return golden_section_min(lambda x: -scalar_logpdf(x), lo, hi)


def _quantile_bracket(cdf_scalar, t: float, mode: float, support: Tuple[float, float]):
    a, b = support
    lo = a if not math.isinf(a) else mode - 1.0
    hi = b if not math.isinf(b) else mode + 1.0
    while math.isinf(a) and cdf_scalar(lo) > t:
        lo = mode - 2.0 * (mode - lo) - 1.0
    while math.isinf(b) and cdf_scalar(hi) < t:
        hi = mode + 2.0 * (hi - mode) + 1.0
    return lo, hi


def make_standard(family: str, **params) -> Density1D:
    """Construct a zoo member by family name (see the JSON model schema)."""
    try:
        builder = _FAMILIES[family]
    except KeyError:
        raise ParameterError(f"unknown 1-D family {family!r}") from None
    return builder(**params)


_FAMILIES = {
    "exponential": exponential,
    "gamma": gamma,
    "gaussian1d": gaussian1d,
    "laplace": laplace,
    "uniform": uniform,
    "half_normal": half_normal,
}


def standard_zoo() -> list:
    """Canonical instances exercised by the cross-family test sweeps."""
    return [
        exponential(),
        gamma(2.0),
        gamma(5.0),
        gaussian1d(),
        laplace(),
        uniform(0.0, 1.0),
        half_normal(),
    ]


def positive_zoo() -> list:
    """Zoo members supported on (0, inf) (or a positive interval)."""
    return [
        exponential(),
        gamma(1.5),
        gamma(2.0),
        gamma(5.0),
        half_normal(),
        uniform(0.0, 1.0),
        uniform(0.5, 2.5),
    ]


# ---------------------------------------------------------------------------
# n-dimensional models
# ---------------------------------------------------------------------------

class ModelND:
    """Base class for n-dimensional sample models."""

    dim: int
    entropy: float
    spec: dict

    def log_density(self, x) -> np.ndarray:
        raise NotImplementedError

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: model has dim {self.dim}, point has shape {x.shape}")
        return x


class Product(ModelND):
    """Independent product of one-dimensional densities."""

    def __init__(self, components: Sequence[Density1D]):
        components = list(components)
        if not components:
            raise ParameterError("product model needs at least one component")
        self.components = components
        self.dim = len(components)
        self.entropy = float(sum(c.entropy for c in components))
        self.spec = {"family": "product", "params": {"components": [c.spec for c in components]}}

    def log_density(self, x) -> np.ndarray:
        x = self._check(x)
        parts = [c.log_pdf(x[..., i]) for i, c in enumerate(self.components)]
        return np.sum(np.stack(parts, axis=-1), axis=-1)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty((size, self.dim))
        for i, c in enumerate(self.components):  # fixed column order keeps streams reproducible
            out[:, i] = c.sample(gen, size)
        return out


class GaussianModel(ModelND):
    """Gaussian with mean vector and covariance factor T (cov = T T')."""

    def __init__(self, dim: int = None, mean=None, cov_factor=None):
        if mean is None and cov_factor is None and dim is None:
            raise ParameterError("GaussianModel needs dim or mean/cov_factor")
        if mean is not None:
            mean = np.asarray(mean, dtype=np.float64)
            dim = mean.shape[0] if dim is None else dim
        if cov_factor is not None:
            cov_factor = np.asarray(cov_factor, dtype=np.float64)
            dim = cov_factor.shape[0] if dim is None else dim
        self.dim = int(dim)
        self.mean = np.zeros(self.dim) if mean is None else mean
        if self.mean.shape != (self.dim,):
            raise ParameterError("mean shape does not match dim")
        self._standard = cov_factor is None
        if self._standard:
            self.cov_factor = np.eye(self.dim)
            self._logabsdet = 0.0
        else:
            if cov_factor.shape != (self.dim, self.dim):
                raise ParameterError("cov_factor must be a square matrix matching dim")
            self.cov_factor = cov_factor
            sign, logdet = np.linalg.slogdet(cov_factor)
            if sign == 0 or not math.isfinite(logdet):
                raise ParameterError("cov_factor must be invertible")
            self._logabsdet = float(logdet)
        self.entropy = 0.5 * self.dim * math.log(2.0 * math.pi * math.e) + self._logabsdet
        self.spec = {"family": "gaussian", "params": {"dim": self.dim}}
        if not self._standard or np.any(self.mean != 0.0):
            self.spec["params"]["mean"] = self.mean.tolist()
            self.spec["params"]["cov_factor"] = self.cov_factor.tolist()

    def log_density(self, x) -> np.ndarray:
        x = self._check(x)
        centered = x - self.mean
        if not self._standard:
            centered = np.linalg.solve(self.cov_factor, centered[..., np.newaxis])[..., 0]
        q = np.sum(centered * centered, axis=-1)
        return -0.5 * self.dim * LOG_2PI - self._logabsdet - 0.5 * q

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        z = gen.standard_normal((size, self.dim))
        if self._standard:
            x = z
        else:
            x = z @ self.cov_factor.T
        return x + self.mean


class AffineMap(ModelND):
    """Pushforward T X + shift of a base model under an invertible matrix."""

    def __init__(self, base: ModelND, matrix, shift=None):
        self.base = base
        self.matrix = np.asarray(matrix, dtype=np.float64)
        n = base.dim
        if self.matrix.shape != (n, n):
            raise ParameterError(f"matrix must be {n}x{n} to match the base model")
        sign, logdet = np.linalg.slogdet(self.matrix)
        if sign == 0 or not math.isfinite(logdet):
            raise ParameterError("affine map matrix must be invertible")
        self.shift = np.zeros(n) if shift is None else np.asarray(shift, dtype=np.float64)
        if self.shift.shape != (n,):
            raise ParameterError("shift shape does not match the base model dimension")
        self.dim = n
        self._logabsdet = float(logdet)
        self.entropy = base.entropy + self._logabsdet
        self.spec = {
            "family": "affine",
            "params": {
                "base": base.spec,
                "matrix": self.matrix.tolist(),
                "shift": self.shift.tolist(),
            },
        }

    def log_density(self, y) -> np.ndarray:
        y = self._check(y)
        pre = np.linalg.solve(self.matrix, (y - self.shift)[..., np.newaxis])[..., 0]
        return self.base.log_density(pre) - self._logabsdet

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        # same draws as the base model, pushed through the map (coupling used
        # by the affine-invariance checks)
        x = self.base.sample(gen, size)
        return x @ self.matrix.T + self.shift


class BallUniform(ModelND):
    """Uniform distribution on the centered Euclidean ball of given radius."""

    def __init__(self, dim: int, radius: float = 1.0):
        dim = int(dim)
        radius = float(radius)
        if dim < 1:
            raise ParameterError(f"ball dimension must be >= 1, got {dim!r}")
        if not radius > 0.0:
            raise ParameterError(f"ball radius must be positive, got {radius!r}")
        self.dim = dim
        self.radius = radius
        self._log_vol = 0.5 * dim * math.log(math.pi) - log_gamma(0.5 * dim + 1.0) + dim * math.log(radius)
        self.entropy = self._log_vol
        self.spec = {"family": "ball_uniform", "params": {"dim": dim, "radius": radius}}

    def log_density(self, x) -> np.ndarray:
        x = self._check(x)
        r = np.sqrt(np.sum(x * x, axis=-1))
        return np.where(r <= self.radius, -self._log_vol, -np.inf)

    def sample(self, gen: np.random.Generator, size: int) -> np.ndarray:
        # Gaussian direction, then radius with density prop. to r^(n-1)
        z = gen.standard_normal((size, self.dim))
        norms = np.sqrt(np.sum(z * z, axis=1))
        u = gen.random(size)
        r = self.radius * u ** (1.0 / self.dim)
        return z * (r / norms)[:, np.newaxis]


# ---------------------------------------------------------------------------
# module-level operations
# ---------------------------------------------------------------------------

def sample(model, rng, size: Optional[int] = None) -> np.ndarray:
    """Draw from a Density1D or ModelND using a stream or generator."""
    gen = _as_generator(rng)
    if size is None:
        return model.sample(gen, 1)[0]
    return model.sample(gen, size)


def log_density(model, x) -> np.ndarray:
    if isinstance(model, Density1D):
        return model.log_pdf(x)
    return model.log_density(x)


def entropy(model) -> float:
    return float(model.entropy)


def quantile_density(d: Density1D, t) -> np.ndarray:
    """Density of the quantile transform, I(t) = f(F^-1(t)), t in (0, 1).

    For log-concave f this function is positive and concave; the experiment
    layer certifies that on grids.
    """
    q = d.quantile(t)
    return np.exp(d.log_pdf(q))


# ---------------------------------------------------------------------------
# JSON model specifications
# ---------------------------------------------------------------------------

def density_from_spec(spec: dict) -> Density1D:
    """Build a 1-D density from {"family": ..., "params": {...}}."""
    family, params = _split_spec(spec)
    if family not in _FAMILIES:
        raise ParameterError(f"not a 1-D density family: {family!r}")
    try:
        return make_standard(family, **params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for family {family!r}: {params!r}") from exc


def model_from_spec(spec: dict) -> ModelND:
    """Build an n-dimensional model from a (possibly nested) specification.

    1-D families are promoted to one-component product models so that every
    spec yields a ModelND.
    """
    family, params = _split_spec(spec)
    if family in _FAMILIES:
        return Product([density_from_spec(spec)])
    if family == "product":
        if "components" in params:
            comps = [density_from_spec(s) for s in params["components"]]
        elif "component" in params and "copies" in params:
            copies = int(params["copies"])
            if copies < 1:
                raise ParameterError("product copies must be >= 1")
            comps = [density_from_spec(params["component"]) for _ in range(copies)]
        else:
            raise ParameterError("product spec needs 'components' or ('component', 'copies')")
        return Product(comps)
    if family == "gaussian":
        return GaussianModel(
            dim=params.get("dim"),
            mean=params.get("mean"),
            cov_factor=params.get("cov_factor"),
        )
    if family == "ball_uniform":
        return BallUniform(dim=params["dim"], radius=params.get("radius", 1.0))
    if family == "affine":
        base = model_from_spec(params["base"])
        return AffineMap(base, params["matrix"], params.get("shift"))
    raise ParameterError(f"unknown model family {family!r}")


def _split_spec(spec: dict):
    if not isinstance(spec, dict) or "family" not in spec:
        raise ParameterError(f"model spec must be a dict with a 'family' key, got {spec!r}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ParameterError(f"'params' must be a dict, got {params!r}")
    return spec["family"], params


def model_id(model_or_spec) -> str:
    """Canonical compact JSON identifier of a model specification."""
    spec = model_or_spec.spec if hasattr(model_or_spec, "spec") else model_or_spec
    return json.dumps(spec, sort_keys=True, separators=(",", ":"))
