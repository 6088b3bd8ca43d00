"""Cumulant generating functions, Legendre transforms, and empirical rate
estimation for iid sample means.

Convention: lambda(theta) = ln E[exp(theta X)], so that lambda'(0) = E[X],
lambda''(0) = Var[X], and the convex conjugate

    u*(x) = sup_theta { x theta - lambda(theta) }

is the nonnegative rate function of the sample mean, with u*(E[X]) = 0.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from .simulate import _MASK64

_SAMPLE_CHUNK = 4096


@dataclass(frozen=True)
class GaussianSource:
    mu: float
    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be > 0")

    @property
    def mean(self):
        return self.mu


@dataclass(frozen=True)
class BernoulliSource:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")

    @property
    def mean(self):
        return self.p


@dataclass(frozen=True)
class SampleSource:
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())
        if self.values.size < 1000:
            raise ValueError("empirical CGF needs at least 1000 samples")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite samples")

    @property
    def mean(self):
        return float(np.mean(self.values))


@dataclass
class CgfTable:
    """lambda sampled on a uniform theta grid symmetric about 0."""

    theta: np.ndarray
    lam: np.ndarray
    source: str

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        th = self.theta
        if th.ndim != 1 or th.size < 5 or th.size % 2 == 0:
            raise ValueError("theta grid must be 1-D with odd length >= 5")
        steps = np.diff(th)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
            raise ValueError("theta grid must be uniform")
        if abs(th[0] + th[-1]) > 1e-9 * max(1.0, abs(th[-1])):
            raise ValueError("theta grid must be symmetric about 0")
        i0 = th.size // 2
        if abs(self.lam[i0]) > 1e-12:
            raise ValueError("lambda(0) must vanish")
        second = np.diff(self.lam, 2)
        if np.any(second < -1e-9 * max(1.0, float(np.max(np.abs(self.lam))))):
            raise ValueError("lambda is not convex on the grid")

    @property
    def h(self) -> float:
        return float(self.theta[1] - self.theta[0])

    @property
    def i_zero(self) -> int:
        return self.theta.size // 2


def cgf(source, theta_grid) -> CgfTable:
    """Tabulate lambda(theta) = ln E[exp(theta X)] for the given source."""
    theta = np.asarray(theta_grid, dtype=float)
    if isinstance(source, GaussianSource):
        lam = source.mu * theta + 0.5 * source.sigma2 * theta ** 2
        tag = f"gaussian({source.mu},{source.sigma2})"
    elif isinstance(source, BernoulliSource):
        p = source.p
        lam = np.log1p(p * np.expm1(theta))
        tag = f"bernoulli({p})"
    elif isinstance(source, SampleSource):
        xs = source.values
        lam = logsumexp(np.multiply.outer(theta, xs), axis=1) - np.log(xs.size)
        if not np.all(np.isfinite(lam)):
            raise OverflowError("empirical CGF overflowed; shrink the theta range")
        tag = f"samples(n={xs.size})"
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    return CgfTable(theta=theta, lam=lam, source=tag)


class LegendreValue(NamedTuple):
    value: float
    theta_star: float
    boundary: bool            # sup attained at the grid edge: unreliable


def legendre(table: CgfTable, x: float) -> LegendreValue:
    """u*(x) = sup_theta (x theta - lambda) with parabolic refinement."""
    obj = x * table.theta - table.lam
    i = int(np.argmax(obj))
    if i == 0 or i == table.theta.size - 1:
        return LegendreValue(float(obj[i]), float(table.theta[i]), True)
    ym, y0, yp = obj[i - 1], obj[i], obj[i + 1]
    denom = ym - 2.0 * y0 + yp
    if denom >= 0:
        return LegendreValue(float(y0), float(table.theta[i]), False)
    delta = 0.5 * (ym - yp) / denom
    val = y0 - (ym - yp) ** 2 / (8.0 * denom)
    return LegendreValue(float(val), float(table.theta[i] + delta * table.h), False)


class RateProperties(NamedTuple):
    argmin: float
    minimum: float
    curvature: float


def rate_properties(table: CgfTable) -> RateProperties:
    """Location, value, and curvature of the rate-function minimum.

    argmin = lambda'(0), minimum = -lambda(0) = 0, curvature = 1/lambda''(0),
    all by central differences at theta = 0.
    """
    i = table.i_zero
    h = table.h
    d1 = (table.lam[i + 1] - table.lam[i - 1]) / (2.0 * h)
    d2 = (table.lam[i + 1] - 2.0 * table.lam[i] + table.lam[i - 1]) / h ** 2
    if d2 <= 0:
        raise ValueError("degenerate source: lambda''(0) <= 0")
    return RateProperties(argmin=float(d1), minimum=0.0, curvature=float(1.0 / d2))


def _draw_means(source, n: int, m: int, seed: int, batch: int) -> np.ndarray:
    """m sample means of n iid draws, keyed by (seed, batch)."""
    key = np.array([seed & _MASK64, batch & _MASK64], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    if isinstance(source, GaussianSource):
        draws = gen.standard_normal((m, n)) * np.sqrt(source.sigma2) + source.mu
    elif isinstance(source, BernoulliSource):
        draws = (gen.random((m, n)) < source.p).astype(float)
    elif isinstance(source, SampleSource):
        draws = gen.choice(source.values, size=(m, n), replace=True)
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    return draws.mean(axis=1)


@dataclass
class EmpiricalRate:
    """Histogram-based estimates -(1/n) ln density of the sample mean."""

    x: np.ndarray                 # bin centers
    n_list: list
    values: dict                  # n -> array, NaN where the bin was empty
    counts: dict                  # n -> raw bin counts
    batches: int


def sample_mean_rate(source, n_list, x_grid, M: int, seed: int) -> EmpiricalRate:
    """Empirical rate of the mean of n draws, per histogram bin.

    Bins are centered on x_grid with its uniform spacing; empty bins yield
    NaN and are left to the caller to mask.
    """
    if M < 10_000:
        raise ValueError("need at least 1e4 batches per n")
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("x_grid must be 1-D with at least 2 points")
    w = float(x[1] - x[0])
    edges = np.concatenate([x - 0.5 * w, [x[-1] + 0.5 * w]])
    values = {}
    counts = {}
    for idx, n in enumerate(n_list):
        hist = np.zeros(x.size, dtype=np.int64)
        done = 0
        batch = 0
        while done < M:
            m = min(_SAMPLE_CHUNK, M - done)
            means = _draw_means(source, int(n), m, seed, idx * 1_000_003 + batch)
            hist += np.histogram(means, bins=edges)[0]
            done += m
            batch += 1
        dens = hist / (M * w)
        with np.errstate(divide="ignore"):
            vals = np.where(hist > 0, -np.log(np.maximum(dens, 1e-300)) / n, np.nan)
        values[int(n)] = vals
        counts[int(n)] = hist
    return EmpiricalRate(x=x, n_list=[int(n) for n in n_list], values=values,
                         counts=counts, batches=M)
