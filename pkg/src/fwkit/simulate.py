"""Trajectory sampling and rare-event Monte Carlo.

Noise is drawn from a Philox counter-based generator so that the normal
increment used by run r at step k is a pure function of (seed, r, k): run
streams never overlap and Monte Carlo aggregation is reproducible regardless
of execution order or chunking.
"""

from dataclasses import dataclass, field as _dcfield

import numpy as np
from scipy.special import ndtri

from .errors import BlowUpError
from .fields import DriftField, _point

_MASK64 = (1 << 64) - 1
_MAX_STEPS = 10 ** 8


def step_normals(seed: int, run: int, n_steps: int, dim: int) -> np.ndarray:
    """(n_steps, dim) standard normals addressable by (seed, run, step).

    Each Philox counter block yields four 64-bit words; step k consumes words
    of block k, so entry [k, :] depends only on (seed, run, k).  dim <= 4.
    """
    if dim > 4:
        raise ValueError("at most 4 noise components per step")
    key = np.array([seed & _MASK64, run & _MASK64], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(4 * n_steps)
    raw = raw.reshape(n_steps, 4)[:, :dim]
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53 + 2.0 ** -54
    return ndtri(u)


def _steps(dt: float, T: float):
    """Number of uniform steps and the snapped step T/n that ends at T."""
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    n = int(round(T / dt))
    if n < 1 or n > _MAX_STEPS:
        raise ValueError(f"T/dt = {T / dt:g} outside [1, {_MAX_STEPS:g}]")
    return n, T / n


@dataclass
class PathSample:
    """Uniformly sampled trajectory, states indexed as (step, component)."""

    times: np.ndarray
    states: np.ndarray
    momenta: np.ndarray | None = None
    energy: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim == 1:
            self.states = self.states[:, None]
        if len(self.times) != len(self.states):
            raise ValueError("times and states length mismatch")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def dim(self) -> int:
        return self.states.shape[1]


def rk4_step(f, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def euler_maruyama(field: DriftField, x0, eps: float, dt: float, T: float,
                   seed: int, run: int = 0) -> PathSample:
    """Euler-Maruyama path X_{k+1} = X_k + b(X_k) dt + sqrt(2 eps dt) xi_k.

    eps = 0 degenerates to the deterministic Euler scheme (no generator
    consumed).  Circle states are wrapped mod 1.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    n, dt = _steps(dt, T)
    x = _point(x0, field.dim)
    out = np.empty((n + 1, field.dim))
    out[0] = x
    noise = None
    if eps > 0:
        noise = np.sqrt(2.0 * eps * dt) * step_normals(seed, run, n, field.dim)
    wrap = field.domain == "circle"
    for k in range(n):
        x = x + field.b(x) * dt
        if noise is not None:
            x = x + noise[k]
        if wrap:
            x = np.mod(x, 1.0)
        if not np.all(np.isfinite(x)):
            raise BlowUpError(k + 1)
        out[k + 1] = x
    return PathSample(times=np.arange(n + 1) * dt, states=out)


def ode_solve(field: DriftField, x0, dt: float, T: float) -> PathSample:
    """Classical RK4 integration of dx/dt = b(x)."""
    n, dt = _steps(dt, T)
    x = _point(x0, field.dim)
    out = np.empty((n + 1, field.dim))
    out[0] = x
    wrap = field.domain == "circle"
    for k in range(n):
        x = rk4_step(field.b, x, dt)
        if wrap:
            x = np.mod(x, 1.0)
        if not np.all(np.isfinite(x)):
            raise BlowUpError(k + 1)
        out[k + 1] = x
    return PathSample(times=np.arange(n + 1) * dt, states=out)


@dataclass(frozen=True)
class Region:
    """Terminal-event region: axis-aligned box or euclidean ball."""

    kind: str
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    center: np.ndarray | None = None
    radius: float = 0.0

    @classmethod
    def box(cls, lo, hi) -> "Region":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        return cls(kind="box", lo=lo, hi=hi)

    @classmethod
    def ball(cls, center, radius: float) -> "Region":
        return cls(kind="ball", center=np.atleast_1d(np.asarray(center, dtype=float)),
                   radius=float(radius))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        if self.kind == "box":
            return np.all((pts >= self.lo) & (pts <= self.hi), axis=-1)
        d2 = np.sum((pts - self.center) ** 2, axis=-1)
        return d2 <= self.radius ** 2

    def describe(self) -> str:
        if self.kind == "box":
            return f"box lo={self.lo.tolist()} hi={self.hi.tolist()}"
        return f"ball center={self.center.tolist()} radius={self.radius}"


@dataclass(frozen=True)
class RateRow:
    eps: float
    n_runs: int
    p_hat: float
    stderr: float
    rate: float | None        # -eps ln p_hat; None when p_hat = 0
    underflow: bool


@dataclass
class RateReport:
    event: str
    rows: list
    reference_action: float | None = None


_CHUNK = 8192


def _terminal_states(field: DriftField, x0, eps, dt, n, seed, run_lo, run_hi):
    m = run_hi - run_lo
    x = np.tile(_point(x0, field.dim), (m, 1))
    sig = np.sqrt(2.0 * eps * dt)
    noise = np.empty((m, n, field.dim))
    for j in range(m):
        noise[j] = step_normals(seed, run_lo + j, n, field.dim)
    wrap = field.domain == "circle"
    for k in range(n):
        x += field.b(x) * dt + sig * noise[:, k]
        if wrap:
            np.mod(x, 1.0, out=x)
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0])
            raise BlowUpError(k + 1, f"run {run_lo + bad} became non-finite at step {k + 1}")
    return x


def rare_event_probability(field: DriftField, x0, eps: float, T: float, event,
                           n_runs: int, seed: int, dt: float = 0.01) -> RateRow:
    """Terminal-event probability estimate over n_runs independent paths.

    Run r consumes the noise stream keyed by (seed, r), so the estimate is
    independent of chunking and may be sharded across workers.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    n, dt = _steps(dt, T)
    contains = event.contains if isinstance(event, Region) else event
    hits = 0
    for lo in range(0, n_runs, _CHUNK):
        hi = min(lo + _CHUNK, n_runs)
        xT = _terminal_states(field, x0, eps, dt, n, seed, lo, hi)
        hits += int(np.count_nonzero(contains(xT)))
    p = hits / n_runs
    stderr = float(np.sqrt(p * (1.0 - p) / n_runs))
    if p == 0.0:
        return RateRow(eps, n_runs, 0.0, stderr, None, True)
    return RateRow(eps, n_runs, p, stderr, float(-eps * np.log(p)), False)


def rate_sweep(field: DriftField, x0, eps_list, T: float, event, n_runs: int,
               seed: int, dt: float = 0.01,
               reference_action: float | None = None) -> RateReport:
    """Rare-event sweep over a strictly decreasing list of noise levels."""
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    desc = event.describe() if isinstance(event, Region) else "predicate"
    rows = [rare_event_probability(field, x0, e, T, event, n_runs, seed, dt)
            for e in eps_list]
    return RateReport(event=desc, rows=rows, reference_action=reference_action)


def path_weight_exponent(field: DriftField, path: PathSample, eps: float) -> float:
    """Exponent S_eps of the discrete path weight A exp(-S_eps / eps).

    S_eps = sum_k |dx_k/dt - b(x_k)|^2 dt/4  +  (eps/2) sum_k div b(x_k) dt,
    with forward differences over the n-1 increments.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if len(path.times) < 2:
        raise ValueError("path needs at least 2 points")
    dt = path.dt
    x = path.states
    v = np.diff(x, axis=0) / dt
    bleft = field.b(x[:-1])
    kinetic = float(np.sum((v - bleft) ** 2) * dt / 4.0)
    divterm = float(0.5 * eps * np.sum(field.div(x[:-1])) * dt)
    return kinetic + divterm
