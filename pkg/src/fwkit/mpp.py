"""Most probable paths between fixed endpoints in fixed travel time.

Two routes are implemented and cross-validate each other:

  * 1-D energy shooting.  On a monotone stretch the conserved energy E fixes
    the speed profile |qdot| = sqrt(b^2 + 4E), so the travel time

        tau(E) = integral dq / sqrt(b^2(q) + 4E)

    is strictly decreasing in E and the boundary-value problem reduces to a
    scalar bisection for tau(E) = T.

  * Direct minimization of the discrete path cost over interior knots with
    an analytic gradient (Barzilai-Borwein trial step, Armijo backtracking).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoMonotonePathError, QuadratureError
from .fields import DriftField
from .quadrature import adaptive_simpson
from .simulate import PathSample

ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
GRAD_TOL = 1e-8
MAX_ITER = 100_000


@dataclass
class MppResult:
    path: PathSample
    action: float
    energy: float
    energy_dev: float
    method: str                 # "shooting" or "minimization"
    converged: bool = True
    grad_norm: float = 0.0
    iterations: int = 0


def _travel_time(field: DriftField, qlo: float, qhi: float, E: float) -> float:
    """tau(E); near the singular floor E_min the integrand is steep, so the
    depth cap is read as an effectively unbounded travel time."""
    f = lambda q: 1.0 / np.sqrt(float(field.b1(q)) ** 2 + 4.0 * E)
    try:
        return adaptive_simpson(f, qlo, qhi, tol=1e-12)
    except QuadratureError:
        return np.inf


def mpp_shoot_1d(field: DriftField, q1: float, q2: float, T: float,
                 path_points: int = 2049) -> MppResult:
    """Monotone 1-D most probable path by bisection on the energy."""
    if field.dim != 1:
        raise ValueError("shooting is 1-D only")
    if q1 == q2:
        raise ValueError("endpoints must differ")
    if T <= 0:
        raise ValueError("T must be positive")
    qlo, qhi = min(q1, q2), max(q1, q2)
    s = 1.0 if q2 > q1 else -1.0

    scan = np.linspace(qlo, qhi, 8193)
    bsq = np.asarray(field.b1(scan), dtype=float) ** 2
    E_min = -0.25 * float(np.min(bsq))

    # upper bracket: expand the gap above E_min until the path is too fast
    E_hi = max(1.0, E_min + 1.0)
    for _ in range(200):
        if _travel_time(field, qlo, qhi, E_hi) < T:
            break
        E_hi = E_min + 2.0 * (E_hi - E_min)
    else:
        raise NoMonotonePathError("no monotone path: could not bracket above")

    # lower bracket: close in on E_min until the path is slow enough
    gap = E_hi - E_min
    E_lo = None
    for _ in range(200):
        gap *= 0.5
        cand = E_min + gap
        if _travel_time(field, qlo, qhi, cand) > T:
            E_lo = cand
            break
        if gap < 1e-15 * max(1.0, abs(E_min)) + 1e-300:
            break
    if E_lo is None:
        raise NoMonotonePathError(
            f"no monotone path from {q1} to {q2} in time {T}")

    for _ in range(400):
        E = 0.5 * (E_lo + E_hi)
        tau = _travel_time(field, qlo, qhi, E)
        if abs(tau - T) <= 1e-8 * T:
            break
        if tau > T:
            E_lo = E
        else:
            E_hi = E
    else:
        E = 0.5 * (E_lo + E_hi)

    def p_of(q):
        bq = float(field.b1(q))
        return 0.5 * (s * np.sqrt(bq * bq + 4.0 * E) - bq)

    S = adaptive_simpson(p_of, q1, q2, tol=1e-12) - E * T
    S = max(S, 0.0)

    n = path_points - 1
    dt = T / n
    qs = np.empty(path_points)
    qs[0] = q1

    def speed(q):
        return s * np.sqrt(float(field.b1(q)) ** 2 + 4.0 * E)

    q = q1
    for k in range(n):
        k1 = speed(q)
        k2 = speed(q + 0.5 * dt * k1)
        k3 = speed(q + 0.5 * dt * k2)
        k4 = speed(q + dt * k3)
        q = q + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        qs[k + 1] = q
    if abs(qs[-1] - q2) > max(1e-6 * abs(q2 - q1), 1e-9):
        raise NoMonotonePathError(
            f"shooting path missed endpoint: q(T) = {qs[-1]:g}, wanted {q2:g}")
    ps = np.array([p_of(q) for q in qs])
    path = PathSample(times=np.arange(path_points) * dt, states=qs,
                      momenta=ps[:, None], energy=np.full(path_points, E))
    return MppResult(path=path, action=float(S), energy=float(E),
                     energy_dev=0.0, method="shooting")


def _discrete_action_grad(field: DriftField, xs: np.ndarray, dt: float):
    """Cost and gradient of the trapezoidal discrete action over all knots."""
    v = np.diff(xs, axis=0) / dt
    b = field.b(xs)
    r0 = v - b[:-1]
    r1 = v - b[1:]
    S = float(np.sum(r0 ** 2 + r1 ** 2) * dt / 8.0)
    J = field.jac_batch(xs)
    g = np.zeros_like(xs)
    # interval k touches knots k (via v, b_k) and k+1 (via v, b_{k+1})
    g[1:] += (dt / 4.0) * ((r0 + r1) / dt - np.einsum("kji,kj->ki", J[1:], r1))
    g[:-1] += (dt / 4.0) * (-(r0 + r1) / dt - np.einsum("kji,kj->ki", J[:-1], r0))
    return S, g


def mpp_minimize(field: DriftField, q1, q2, T: float, K: int,
                 grad_tol: float = GRAD_TOL, max_iter: int = MAX_ITER) -> MppResult:
    """Action minimization over K interior knots from a straight-line guess."""
    if K < 8:
        raise ValueError("K must be >= 8")
    if T <= 0:
        raise ValueError("T must be positive")
    q1 = np.atleast_1d(np.asarray(q1, dtype=float))
    q2 = np.atleast_1d(np.asarray(q2, dtype=float))
    n = K + 2
    dt = T / (n - 1)
    xs = np.linspace(0.0, 1.0, n)[:, None] * (q2 - q1) + q1

    S, g_full = _discrete_action_grad(field, xs, dt)
    g = g_full[1:-1]
    step = dt
    x_prev = None
    g_prev = None
    it = 0
    for it in range(1, max_iter + 1):
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= grad_tol:
            break
        if x_prev is not None:
            dx = (xs[1:-1] - x_prev).ravel()
            dg = (g - g_prev).ravel()
            denom = float(dx @ dg)
            step = float(dx @ dx) / denom if denom > 1e-300 else dt
        x_prev = xs[1:-1].copy()
        g_prev = g.copy()
        gsq = float(np.sum(g * g))
        t_ls = step
        for _ in range(60):
            trial = xs.copy()
            trial[1:-1] = xs[1:-1] - t_ls * g
            S_new, g_full = _discrete_action_grad(field, trial, dt)
            if S_new <= S - ARMIJO_C * t_ls * gsq:
                break
            t_ls *= ARMIJO_SHRINK
        xs = trial
        S = S_new
        g = g_full[1:-1]
    gnorm = float(np.max(np.abs(g)))
    converged = gnorm <= grad_tol

    # node energy profile via p = (qdot - b)/2 with central interior velocities
    qdot = np.empty_like(xs)
    qdot[1:-1] = (xs[2:] - xs[:-2]) / (2.0 * dt)
    qdot[0] = (xs[1] - xs[0]) / dt
    qdot[-1] = (xs[-1] - xs[-2]) / dt
    b = field.b(xs)
    p = 0.5 * (qdot - b)
    H = np.einsum("ij,ij->i", p, p) + np.einsum("ij,ij->i", b, p)
    H_mean = float(np.mean(H))
    path = PathSample(times=np.arange(n) * dt, states=xs, momenta=p, energy=H)
    return MppResult(path=path, action=S, energy=H_mean,
                     energy_dev=float(np.max(np.abs(H - H_mean))),
                     method="minimization", converged=converged,
                     grad_norm=gnorm, iterations=it)


def uphill_action_1d(field: DriftField, a: float, c: float) -> float:
    """Quasipotential gap between a stable zero a of b and a point c.

    Equals the unconstrained-time limit of the most probable path cost and is
    computed as the oriented integral of -b from a to c (Simpson, tol 1e-10).
    """
    if field.dim != 1:
        raise ValueError("uphill action is 1-D only")
    ba = float(field.b1(a))
    if abs(ba) > 1e-8:
        raise ValueError(f"b({a}) = {ba:g}; not a zero of the drift")
    if float(field.db1(a)) >= 0:
        raise ValueError(f"point {a} is not a stable zero (b'(a) >= 0)")
    if a == c:
        return 0.0
    interior = np.linspace(a, c, 1025)[1:-1]
    bvals = np.asarray(field.b1(interior), dtype=float)
    if np.any(bvals == 0.0) or np.any(bvals[:-1] * bvals[1:] < 0):
        raise ValueError("drift vanishes strictly between the endpoints")
    return adaptive_simpson(lambda x: -float(field.b1(x)), a, c, tol=1e-10)
