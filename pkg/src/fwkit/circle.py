"""Minimum/curvature dynamics on the unit circle and torus fixed points.

The argmin x and curvature y of an evolving rate function on the circle obey

    dx/dt = b(x),        dy/dt = -2 (b'(x) + y) y.

For strictly positive drift the substitution v = y e^{2 phi}, with
phi(t) = ln b(x(t)) - ln b(x(0)), turns the curvature law into
dv/dt = -2 v^2 e^{-2 phi} <= 0, so v decays monotonically and the rate
function flattens along the cycle.
"""

from dataclasses import dataclass

import numpy as np

from .errors import BlowUpError
from .fields import DriftField
from .quadrature import adaptive_simpson
from .simulate import rk4_step

_SCAN = 4096


@dataclass
class CircleTrace:
    times: np.ndarray
    x: np.ndarray            # position, wrapped to [0, 1)
    y: np.ndarray            # curvature
    phi: np.ndarray | None   # ln b(x(t)) - ln b(x(0)), cyclic drift only
    v: np.ndarray | None     # y e^{2 phi}, cyclic drift only


def circle_flow(field: DriftField, x0: float, y0: float, dt: float,
                T: float) -> CircleTrace:
    """Integrate the minimum/curvature system; y0 must be nonnegative."""
    if field.domain != "circle":
        raise ValueError("circle_flow needs a circle field")
    if y0 < 0:
        raise ValueError("curvature must start nonnegative")
    n = int(round(T / dt))

    def rhs(s):
        x, y = s
        return np.array([float(field.b1(x)),
                         -2.0 * (float(field.db1(x)) + y) * y])

    s = np.array([float(x0), float(y0)])
    xs = np.empty(n + 1)
    ys = np.empty(n + 1)
    xs[0], ys[0] = s[0] % 1.0, s[1]
    for k in range(n):
        s = rk4_step(rhs, s, dt)
        if not np.all(np.isfinite(s)):
            raise BlowUpError(k + 1)
        xs[k + 1] = s[0] % 1.0
        ys[k + 1] = s[1]

    times = np.arange(n + 1) * dt
    theta = np.linspace(0.0, 1.0, _SCAN, endpoint=False)
    positive = bool(np.min(field.b1(theta)) > 0.0)
    phi = v = None
    if positive:
        bx = np.asarray(field.b1(xs), dtype=float)
        phi = np.log(bx) - np.log(bx[0])
        v = ys * np.exp(2.0 * phi)
    return CircleTrace(times=times, x=xs, y=ys, phi=phi, v=v)


def limit_cycle_period(field: DriftField) -> float | None:
    """Cycle period int_0^1 dtheta / |b|, or None when b has zeros."""
    if field.domain != "circle":
        raise ValueError("period needs a circle field")
    theta = np.linspace(0.0, 1.0, _SCAN, endpoint=False)
    bvals = np.asarray(field.b1(theta), dtype=float)
    if np.min(np.abs(bvals)) == 0.0 or np.min(bvals) < 0.0 < np.max(bvals):
        return None
    return adaptive_simpson(lambda th: 1.0 / abs(float(field.b1(th))),
                            0.0, 1.0, tol=1e-12)


@dataclass(frozen=True)
class CurvatureDecayReport:
    monotone: bool
    max_increase: float
    final_y: float
    tol: float


def curvature_decay_check(trace: CircleTrace, tol: float = 1e-8) -> CurvatureDecayReport:
    """Verify v = y e^{2 phi} never increases beyond integrator tolerance."""
    if trace.v is None:
        raise ValueError("trace lacks v; drift must be positive on the cycle")
    inc = float(np.max(np.diff(trace.v), initial=0.0))
    return CurvatureDecayReport(monotone=inc <= tol, max_increase=max(inc, 0.0),
                                final_y=float(trace.y[-1]), tol=tol)


@dataclass(frozen=True)
class TorusFixedPoint:
    theta: float
    omega: float
    kind: int            # 1: omega = 0, U' = b0;  2: U'' = 0, omega = (U' - b0)/2


def _fourier_u(u_coeffs: dict):
    a = np.asarray(u_coeffs.get("a", []), dtype=float)
    c = np.asarray(u_coeffs.get("c", []), dtype=float)
    nk = max(a.size, c.size)
    if nk == 0:
        raise ValueError("potential needs at least one Fourier coefficient")
    a = np.pad(a, (0, nk - a.size))
    c = np.pad(c, (0, nk - c.size))
    ks = 2.0 * np.pi * np.arange(1, nk + 1)

    def du(th):
        th = np.asarray(th, dtype=float)
        ang = np.multiply.outer(th, ks)
        return -np.sin(ang) @ (ks * a) + np.cos(ang) @ (ks * c)

    def d2u(th):
        th = np.asarray(th, dtype=float)
        ang = np.multiply.outer(th, ks)
        return -np.cos(ang) @ (ks ** 2 * a) - np.sin(ang) @ (ks ** 2 * c)

    return du, d2u


def _scan_roots(f, tol=1e-10):
    grid = np.linspace(0.0, 1.0, _SCAN + 1)
    vals = np.asarray(f(grid), dtype=float)
    roots = [float(grid[i]) for i in np.flatnonzero(vals[:-1] == 0.0)]
    for i in np.flatnonzero(vals[:-1] * vals[1:] < 0.0):
        a, b = float(grid[i]), float(grid[i + 1])
        fa = vals[i]
        while b - a > tol:
            m = 0.5 * (a + b)
            fm = float(f(m))
            if fm == 0.0:
                a = b = m
                break
            if fa * fm < 0:
                b = m
            else:
                a, fa = m, fm
        roots.append(0.5 * (a + b))
    return sorted(roots)


def torus_fixed_points(b0: float, u_coeffs: dict) -> list:
    """Fixed points of the torus characteristic flow for b = b0 - U'.

    Type 1 sits on the zero-momentum circle where U'(theta) = b0; type 2 at
    inflection points of U with omega = (U'(theta) - b0) / 2.
    """
    du, d2u = _fourier_u(u_coeffs)
    out = [TorusFixedPoint(theta=th, omega=0.0, kind=1)
           for th in _scan_roots(lambda th: du(th) - b0)]
    out += [TorusFixedPoint(theta=th, omega=0.5 * (float(du(th)) - b0), kind=2)
            for th in _scan_roots(d2u)]
    return sorted(out, key=lambda fp: (fp.theta, fp.kind))
