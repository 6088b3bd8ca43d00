"""Closed-form linear-drift (Ornstein-Uhlenbeck) ground truth.

With drift -k x the quadratic ansatz u = a(t) + (x - mu(t))^2 / (2 s2(t))
propagates exactly:

    s2(t) = 1/k + (s2(0) - 1/k) e^{-2kt}
    mu(t) = mu(0) e^{-kt}
    a(t)  = a(0) + (eps/2) ln(s2(t) / s2(0))

A flat start (s2 = inf, i.e. u = 0) maps to s2(t) = (1/k) / (1 - e^{-2kt}).
The transition kernel of dX = c X dt + sqrt(2 eps) dW over a step is Gaussian
with mean x e^{c dt} and variance (eps/c)(e^{2 c dt} - 1)  ->  2 eps dt as
c -> 0.
"""

import math
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class OuState:
    b_coef: float
    mu: float
    sigma2: float            # may be math.inf for the flat state
    a: float = 0.0
    eps: float = 0.0

    def __post_init__(self):
        if self.b_coef <= 0:
            raise ValueError("b_coef must be > 0")
        if not (self.sigma2 > 0):
            raise ValueError("sigma2 must be > 0 (or inf for the flat state)")

    @property
    def flat(self) -> bool:
        return math.isinf(self.sigma2)


def ou_params(state0: OuState, t: float) -> OuState:
    """Propagate (sigma2, mu, a) for time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    k = state0.b_coef
    decay = math.exp(-k * t)
    mu = state0.mu * decay
    if state0.flat:
        if t == 0.0:
            return replace(state0, mu=mu)
        s2 = (1.0 / k) / (1.0 - decay ** 2)
        # the additive offset is not tracked from a flat (u = 0) start
        return replace(state0, mu=mu, sigma2=s2)
    s2 = 1.0 / k + (state0.sigma2 - 1.0 / k) * decay ** 2
    a = state0.a + 0.5 * state0.eps * math.log(s2 / state0.sigma2)
    return replace(state0, mu=mu, sigma2=s2, a=a)


def ou_rate(state0: OuState, x, t: float):
    """Min-normalized rate (x - mu(t))^2 / (2 sigma2(t)); offset excluded."""
    st = ou_params(state0, t)
    x = np.asarray(x, dtype=float)
    if st.flat:
        return np.zeros_like(x)
    return (x - st.mu) ** 2 / (2.0 * st.sigma2)


@dataclass(frozen=True)
class KernelMoments:
    mean: float
    variance: float


def ou_transition_kernel(b_lin: float, eps: float, x_prev: float,
                         dt: float) -> KernelMoments:
    """Gaussian one-step kernel of the linear-drift SDE dX = b_lin X dt + ..."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if abs(b_lin) < 1e-12:
        return KernelMoments(mean=float(x_prev), variance=2.0 * eps * dt)
    growth = math.exp(b_lin * dt)
    var = (eps / b_lin) * (growth ** 2 - 1.0)
    return KernelMoments(mean=float(x_prev) * growth, variance=var)
