"""Nonequilibrium diagnostics: entropy production, time reversal, and the
momentum/landscape relation.

For catalog fields with a known stationary law pi the entropy production

    e_p = (1/eps) E_pi | b - eps grad ln pi |^2

vanishes exactly for gradient (reversible) drifts and equals the stationary
average (1/eps) E|ell|^2 otherwise.  Time reversal flips the rotational part:
b~ = 2 eps grad ln pi - b, which for every reversible catalog kind returns
the field itself and for the rotational kinds flips omega (resp. gamma).
"""

from dataclasses import dataclass

import numpy as np

from .fields import DriftField, FieldSpec, build_field, _point
from .mechanics import HamiltonianTrajectory
from .simulate import _MASK64, rk4_step, step_normals


def _stationary_info(field: DriftField, eps: float):
    """(grad_log_pi, direct_sampler | None) for the known stationary laws."""
    kind = field.spec.kind
    if kind == "ou":
        k = field.spec.params["b_coef"]

        def grad_log_pi(pts):
            return -(k / eps) * np.asarray(pts, dtype=float)

        def sample(n, seed):
            gen = np.random.Generator(np.random.Philox(
                key=np.array([seed & _MASK64, 0], dtype=np.uint64)))
            return gen.standard_normal((n, 1)) * np.sqrt(eps / k)

        return grad_log_pi, sample
    if kind == "rot_ou":
        def grad_log_pi(pts):
            return -np.asarray(pts, dtype=float) / eps

        def sample(n, seed):
            gen = np.random.Generator(np.random.Philox(
                key=np.array([seed & _MASK64, 0], dtype=np.uint64)))
            return gen.standard_normal((n, 2)) * np.sqrt(eps)

        return grad_log_pi, sample
    if kind == "poly1d":
        # 1-D drift is a gradient; pi ~ exp(int b / eps)
        def grad_log_pi(pts):
            return field.b(np.asarray(pts, dtype=float)) / eps

        return grad_log_pi, None
    if kind == "decomposed2d":
        def grad_log_pi(pts):
            return -field.grad_potential(np.asarray(pts, dtype=float)) / eps

        return grad_log_pi, None
    raise ValueError(f"no analytic stationary law for field kind {kind!r}")


def sample_stationary(field: DriftField, eps: float, n: int, seed: int,
                      dt: float = 0.01, burn_in: float = 20.0,
                      thin: int = 10) -> np.ndarray:
    """Stationary samples from one long Euler-Maruyama chain.

    Discards the burn-in window, then keeps every thin-th step.
    """
    n_burn = int(round(burn_in / dt))
    total = n_burn + n * thin
    noise = np.sqrt(2.0 * eps * dt) * step_normals(seed, 0, total, field.dim)
    x = np.zeros(field.dim)
    out = np.empty((n, field.dim))
    got = 0
    for k in range(total):
        x = x + field.b(x) * dt + noise[k]
        if k >= n_burn and (k - n_burn) % thin == thin - 1:
            out[got] = x
            got += 1
    return out


@dataclass(frozen=True)
class EpEstimate:
    eps: float
    method: str              # "analytic" or "sampled"
    value: float
    stderr: float
    n: int


def entropy_production(field: DriftField, eps: float, pi_source: str,
                       n: int, seed: int, dt: float = 0.01) -> EpEstimate:
    """Monte Carlo estimate of e_p over stationary samples.

    pi_source "analytic" draws from the closed-form Gaussian law (ou,
    rot_ou); "simulate" runs a long chain.  Either way the log-density
    gradient is analytic.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    grad_log_pi, sampler = _stationary_info(field, eps)
    if pi_source == "analytic":
        if sampler is None:
            raise ValueError(
                f"field kind {field.spec.kind!r} has no direct stationary sampler")
        pts = sampler(n, seed)
        method = "analytic"
    elif pi_source == "simulate":
        pts = sample_stationary(field, eps, n, seed, dt=dt)
        method = "sampled"
    else:
        raise ValueError("pi_source must be 'analytic' or 'simulate'")
    resid = field.b(pts) - eps * grad_log_pi(pts)
    g = np.sum(resid ** 2, axis=-1) / eps
    value = float(np.mean(g))
    stderr = float(np.std(g, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EpEstimate(eps=eps, method=method, value=value, stderr=stderr, n=n)


@dataclass
class TimeReversal:
    original: DriftField
    reversed: DriftField
    ell: object                    # callable: rotational part b - eps grad ln pi
    max_identity_residual: float   # max |b + b~ - 2 eps grad ln pi| on probes


_REVERSED_SPEC = {
    "ou": lambda p: FieldSpec("ou", dict(p)),
    "poly1d": lambda p: FieldSpec("poly1d", dict(p)),
    "rot_ou": lambda p: FieldSpec("rot_ou", {"omega": -p["omega"]}),
    "decomposed2d": lambda p: FieldSpec(
        "decomposed2d", {"u_coeffs": p["u_coeffs"], "gamma": -p["gamma"]}),
}


def time_reversed_drift(field: DriftField, eps: float) -> TimeReversal:
    """Drift of the time-reversed stationary process, b~ = 2 eps grad ln pi - b.

    Catalog closure: reversible kinds map to themselves, rotational kinds
    flip their rotation parameter, so reversing twice is exact.
    """
    grad_log_pi, _ = _stationary_info(field, eps)
    kind = field.spec.kind
    if kind not in _REVERSED_SPEC:
        raise ValueError(f"time reversal unsupported for kind {kind!r}")
    rev = build_field(_REVERSED_SPEC[kind](field.spec.params))

    def ell(pts):
        return field.b(pts) - eps * grad_log_pi(pts)

    probes = np.stack(np.meshgrid(*[np.linspace(lo, hi, 7) for lo, hi in field.box],
                                  indexing="ij"), axis=-1).reshape(-1, field.dim)
    resid = field.b(probes) + rev.b(probes) - 2.0 * eps * grad_log_pi(probes)
    return TimeReversal(original=field, reversed=rev, ell=ell,
                        max_identity_residual=float(np.max(np.abs(resid))))


@dataclass
class MomentumLandscapeReport:
    times: np.ndarray
    states: np.ndarray
    potential: np.ndarray          # U along the uphill flow
    max_h_residual: float          # max |H(q, p)| with p = grad U
    max_p_dot_ell: float
    degenerate: bool


def momentum_landscape_check(field: DriftField, start, dt: float,
                             T: float) -> MomentumLandscapeReport:
    """Integrate the uphill flow dx/dt = grad U + ell and test the
    zero-Hamiltonian, momentum-orthogonality relations along it."""
    if not field.has_decomposition:
        raise ValueError("field does not declare a potential/rotational split")
    x0 = _point(start, field.dim)
    degenerate = bool(np.linalg.norm(field.grad_potential(x0) + field.rotational(x0)) < 1e-12)
    n = int(round(T / dt))

    def rhs(x):
        return field.grad_potential(x) + field.rotational(x)

    xs = np.empty((n + 1, field.dim))
    xs[0] = x0
    x = x0
    for k in range(n):
        x = rk4_step(rhs, x, dt)
        xs[k + 1] = x
    p = field.grad_potential(xs)
    b = field.b(xs)
    H = np.einsum("ij,ij->i", p, p) + np.einsum("ij,ij->i", b, p)
    pdl = np.einsum("ij,ij->i", p, field.rotational(xs))
    return MomentumLandscapeReport(
        times=np.arange(n + 1) * dt, states=xs, potential=field.potential(xs),
        max_h_residual=float(np.max(np.abs(H))),
        max_p_dot_ell=float(np.max(np.abs(pdl))), degenerate=degenerate)


def lorentz_residual(field: DriftField, traj: HamiltonianTrajectory) -> float:
    """Max interior defect of qddot = (curl b) x qdot + grad |b|^2 / 2.

    Uses central differences of the stored trajectory; the curl term is the
    general-dimension contraction sum_j (db_i/dq_j - db_j/dq_i) qdot_j.
    """
    q = traj.q
    if len(q) < 3:
        raise ValueError("trajectory too short for central differences")
    dt = traj.dt
    qdd = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / dt ** 2
    qd = (q[2:] - q[:-2]) / (2.0 * dt)
    inner = q[1:-1]
    J = field.jac_batch(inner)
    b = field.b(inner)
    curl_term = np.einsum("kij,kj->ki", J - np.swapaxes(J, 1, 2), qd)
    grad_half_b2 = np.einsum("kji,kj->ki", J, b)
    resid = qdd - curl_term - grad_half_b2
    return float(np.max(np.linalg.norm(resid, axis=1)))
