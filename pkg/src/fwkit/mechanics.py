"""Fictitious analytical mechanics of a drift field.

The Hamiltonian H(q, p) = |p|^2 + b(q) . p generates the characteristic flow

    dq/dt = 2 p + b(q),      dp/dt = -J_b(q)^T p,

whose H = 0 orbits contain the noiseless dynamics dq/dt = b(q) (at p = 0).
The conjugate Lagrangian L = |qdot - b(q)|^2 / 4 integrates to the path cost
used throughout the toolkit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError
from .fields import DriftField, _point
from .simulate import PathSample, rk4_step

ENERGY_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "p", np.atleast_1d(np.asarray(self.p, dtype=float)))
        if self.q.shape != self.p.shape:
            raise ValueError("q and p must have the same dimension")
        if not (np.all(np.isfinite(self.q)) and np.all(np.isfinite(self.p))):
            raise ValueError("non-finite phase point")


@dataclass
class HamiltonianTrajectory:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    H: np.ndarray
    u: np.ndarray              # accumulated action integral of p . qdot - H
    energy_warning: bool

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def hamiltonian(field: DriftField, q, p) -> float:
    q = _point(q, field.dim)
    p = _point(p, field.dim)
    return float(p @ p + field.b(q) @ p)


def lagrangian(field: DriftField, q, qdot) -> float:
    q = _point(q, field.dim)
    qdot = _point(qdot, field.dim)
    r = qdot - field.b(q)
    return float(r @ r) / 4.0


def action(field: DriftField, path: PathSample) -> float:
    """Discrete path cost: forward-difference velocities, trapezoidal drift.

    Per interval k the velocity v_k = (x_{k+1} - x_k)/dt is a midpoint
    velocity, and the drift is averaged over the interval ends, so the sum
    converges at second order on smooth paths while agreeing exactly with
    the kinetic term of the discrete path weight on constant-drift paths.
    """
    if len(path.times) < 2:
        raise ValueError("path needs at least 2 points")
    dt = path.dt
    x = path.states
    v = np.diff(x, axis=0) / dt
    b0 = field.b(x[:-1])
    b1 = field.b(x[1:])
    return float(np.sum((v - b0) ** 2 + (v - b1) ** 2) * dt / 8.0)


def integrate_hamiltonian(field: DriftField, start: PhasePoint, dt: float,
                          T: float) -> HamiltonianTrajectory:
    """RK4 integration of the characteristic system, tracking H and action."""
    d = field.dim
    q0 = _point(start.q, d)
    p0 = _point(start.p, d)
    n = int(round(T / dt))
    if n < 1:
        raise ValueError("T must exceed dt")

    def rhs(y):
        q, p = y[:d], y[d:2 * d]
        bq = field.b(q)
        return np.concatenate([2.0 * p + bq, -field.jac(q).T @ p, [p @ p]])

    y = np.concatenate([q0, p0, [0.0]])
    qs = np.empty((n + 1, d))
    ps = np.empty((n + 1, d))
    us = np.empty(n + 1)
    qs[0], ps[0], us[0] = q0, p0, 0.0
    for k in range(n):
        y = rk4_step(rhs, y, dt)
        if not np.all(np.isfinite(y)):
            raise BlowUpError(k + 1)
        qs[k + 1], ps[k + 1], us[k + 1] = y[:d], y[d:2 * d], y[2 * d]
    H = np.einsum("ij,ij->i", ps, ps) + np.einsum("ij,ij->i", field.b(qs), ps)
    drift = float(np.max(np.abs(H - H[0])))
    warn = drift > ENERGY_DRIFT_TOL * max(1.0, abs(float(H[0])))
    return HamiltonianTrajectory(times=np.arange(n + 1) * dt, q=qs, p=ps, H=H,
                                 u=us, energy_warning=warn)


@dataclass
class CharacteristicTrajectory:
    """One-dimensional characteristic strip (x, z, u) with y = -H constant."""

    times: np.ndarray
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    y: float


def solve_characteristics(field: DriftField, x0: float, z0: float, u0: float,
                          dt: float, T: float) -> CharacteristicTrajectory:
    """Characteristic strip equations for the scalar Hamilton-Jacobi flow:

        xdot = 2 z + b(x),  zdot = -z b'(x),  udot = y + (2 z + b(x)) z,

    with y frozen at -(z0^2 + z0 b(x0)).
    """
    if field.dim != 1:
        raise ValueError("characteristic strip solver is 1-D only")
    y = -(z0 ** 2 + z0 * float(field.b1(x0)))
    n = int(round(T / dt))

    def rhs(s):
        x, z, u = s
        bx = float(field.b1(x))
        xdot = 2.0 * z + bx
        return np.array([xdot, -z * float(field.db1(x)), y + xdot * z])

    s = np.array([float(x0), float(z0), float(u0)])
    xs = np.empty(n + 1)
    zs = np.empty(n + 1)
    us = np.empty(n + 1)
    xs[0], zs[0], us[0] = s
    for k in range(n):
        s = rk4_step(rhs, s, dt)
        if not np.all(np.isfinite(s)):
            raise BlowUpError(k + 1)
        xs[k + 1], zs[k + 1], us[k + 1] = s
    return CharacteristicTrajectory(times=np.arange(n + 1) * dt, x=xs, z=zs,
                                    u=us, y=y)


@dataclass(frozen=True)
class Equilibrium:
    q: float
    p: float
    source: str        # "b-zero" (p* = 0) or "bprime-zero" (p* = -b/2)
    kind: str          # "saddle", "center" or "degenerate"
    lambda_sq: float   # squared eigenvalue of the linearized flow


def _bisect(f, a, b, tol=1e-12, maxit=200):
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a, True
    if fb == 0.0:
        return b, True
    if fa * fb > 0:
        return 0.5 * (a + b), False
    for _ in range(maxit):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) < tol:
            return m, True
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b), True


def _classify(field: DriftField, qstar: float, pstar: float, source: str) -> Equilibrium:
    # linearization [[b', 2], [-p b'', -b']]; eigenvalues solve l^2 = b'^2 - 2 p b''
    bp = float(field.db1(qstar))
    h = 1e-5 * max(1.0, abs(qstar))
    bpp = (float(field.db1(qstar + h)) - float(field.db1(qstar - h))) / (2.0 * h)
    lam2 = bp * bp - 2.0 * pstar * bpp
    scale = max(1.0, bp * bp, abs(2.0 * pstar * bpp))
    if abs(lam2) <= 1e-8 * scale:
        kind = "degenerate"
    elif lam2 > 0:
        kind = "saddle"
    else:
        kind = "center"
    return Equilibrium(q=qstar, p=pstar, source=source, kind=kind, lambda_sq=lam2)


def classify_equilibria(field: DriftField, q_range, n_scan: int = 1024) -> list:
    """Equilibria of the characteristic flow over a scan interval.

    The p-nullcline {p = 0 or b'(q) = 0} meets the q-nullcline {p = -b(q)/2}
    in two families: zeros of b with p* = 0, and critical points of b with
    p* = -b(q*)/2.  Each root is refined by bisection and classified by the
    eigenvalues of the linearized flow.
    """
    if field.dim != 1:
        raise ValueError("equilibrium scan is 1-D only")
    lo, hi = float(q_range[0]), float(q_range[1])
    grid = np.linspace(lo, hi, n_scan + 1)
    found = []

    def scan(f, source, pstar_of):
        vals = np.asarray(f(grid), dtype=float)
        for i in np.flatnonzero(vals == 0.0):
            q = float(grid[i])
            found.append(_classify(field, q, pstar_of(q), source))
        for i in range(n_scan):
            if vals[i] * vals[i + 1] < 0:
                root, ok = _bisect(lambda q: float(f(q)), grid[i], grid[i + 1])
                if ok:
                    found.append(_classify(field, float(root), pstar_of(float(root)), source))

    scan(field.b1, "b-zero", lambda q: 0.0)
    scan(field.db1, "bprime-zero", lambda q: -0.5 * float(field.b1(q)))
    found.sort(key=lambda e: (e.q, e.source))
    # drop duplicates from roots found by both scans (b = b' = 0)
    out = []
    for e in found:
        if out and abs(e.q - out[-1].q) < 1e-9 and abs(e.p - out[-1].p) < 1e-9:
            continue
        out.append(e)
    return out


def phase_contour(field: DriftField, E: float, q_grid):
    """Constant-energy momentum branches p(q) = (-b +- sqrt(b^2 + 4E)) / 2.

    Entries where b^2 + 4E < 0 are returned as NaN.
    """
    if field.dim != 1:
        raise ValueError("phase contour is 1-D only")
    q = np.asarray(q_grid, dtype=float)
    b = field.b1(q)
    disc = b * b + 4.0 * E
    root = np.sqrt(np.where(disc >= 0, disc, np.nan))
    return (-b + root) / 2.0, (-b - root) / 2.0
