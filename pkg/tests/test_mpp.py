import numpy as np
import pytest

from fwkit import (NoMonotonePathError, build_field, mpp_minimize, mpp_shoot_1d,
                   uphill_action_1d)
from fwkit.mpp import _discrete_action_grad

from conftest import CATALOG


@pytest.fixture(scope="module")
def const1():
    return build_field({"kind": "poly1d", "coeffs": [1.0]})


@pytest.fixture(scope="module")
def ou():
    return build_field({"kind": "ou", "b_coef": 1.0})


@pytest.fixture(scope="module")
def dwell():
    return build_field(CATALOG["double_well"])


def test_shoot_constant_drift_free_motion(const1):
    res = mpp_shoot_1d(const1, 0.0, 1.0, 1.0)
    assert res.energy == pytest.approx(0.0, abs=1e-9)
    assert res.action == pytest.approx(0.0, abs=1e-9)


def test_shoot_constant_drift_fast(const1):
    res = mpp_shoot_1d(const1, 0.0, 1.0, 0.5)
    assert res.energy == pytest.approx(0.75, abs=1e-8)
    assert res.action == pytest.approx(0.125, abs=1e-8)
    assert res.path.states[-1, 0] == pytest.approx(1.0, abs=1e-7)


def test_shoot_constant_drift_slow(const1):
    res = mpp_shoot_1d(const1, 0.0, 1.0, 2.0)
    assert res.energy == pytest.approx(-3.0 / 16.0, abs=1e-8)
    assert res.action == pytest.approx(0.125, abs=1e-8)


def test_shoot_energy_monotone_in_time(ou):
    energies = [mpp_shoot_1d(ou, 0.1, 1.0, T).energy for T in (0.5, 1.0, 2.0)]
    assert energies[0] > energies[1] > energies[2]


def test_shoot_rejects_unreachable_time():
    f = build_field({"kind": "poly1d", "coeffs": [1.0, 1.0]})   # b = 1 + x
    # achievable times are below int_0^1 dx / sqrt((1+x)^2 - 1) = log(2 + sqrt 3)
    with pytest.raises(NoMonotonePathError):
        mpp_shoot_1d(f, 0.0, 1.0, 2.0)


def test_shoot_validation(ou):
    with pytest.raises(ValueError):
        mpp_shoot_1d(ou, 0.5, 0.5, 1.0)
    with pytest.raises(ValueError):
        mpp_shoot_1d(ou, 0.0, 1.0, -1.0)


def test_discrete_action_gradient_matches_fd():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    rng = np.random.Generator(np.random.Philox(key=np.uint64(8)))
    xs = np.linspace([0.0, 0.0], [1.0, -0.5], 12) + 0.05 * rng.standard_normal((12, 2))
    dt = 0.1
    _, g = _discrete_action_grad(f, xs, dt)
    for trial in range(5):
        i = rng.integers(1, 11)
        a = rng.integers(0, 2)
        e = np.zeros_like(xs)
        e[i, a] = 1e-7
        sp, _ = _discrete_action_grad(f, xs + e, dt)
        sm, _ = _discrete_action_grad(f, xs - e, dt)
        assert (sp - sm) / 2e-7 == pytest.approx(g[i, a], abs=1e-6)


def test_minimize_noiseless_target(ou):
    from fwkit import ode_solve
    end = ode_solve(ou, [1.0], 1e-3, 1.0).states[-1, 0]
    res = mpp_minimize(ou, [1.0], [end], 1.0, K=32)
    assert res.converged
    assert res.action <= 1e-6


def test_minimize_constant_drift(const1):
    res = mpp_minimize(const1, [0.0], [1.0], 0.5, K=64)
    assert res.converged
    assert res.action == pytest.approx(0.125, abs=1e-4)
    assert np.max(np.abs(res.path.energy - 0.75)) <= 1e-3


def test_minimize_matches_shooting_ou(ou):
    shoot = mpp_shoot_1d(ou, 0.0, 1.0, 2.0)
    mini = mpp_minimize(ou, [0.0], [1.0], 2.0, K=128)
    assert mini.converged
    assert abs(mini.action - shoot.action) <= 1e-3 * max(1.0, shoot.action)


def test_minimize_2d_smoke():
    f = build_field(CATALOG["rot_ou"])
    res = mpp_minimize(f, [0.2, 0.0], [0.0, 0.6], 1.0, K=24)
    assert res.converged
    assert res.action >= 0.0
    assert res.energy_dev <= 1e-2 * (1.0 + abs(res.energy))


def test_minimize_validation(ou):
    with pytest.raises(ValueError):
        mpp_minimize(ou, [0.0], [1.0], 1.0, K=4)


def test_uphill_trivial_and_values(ou, dwell):
    assert uphill_action_1d(ou, 0.0, 0.0) == 0.0
    assert uphill_action_1d(ou, 0.0, 2.0) == pytest.approx(2.0, abs=1e-10)
    assert uphill_action_1d(dwell, -1.0, 0.0) == pytest.approx(0.25, abs=1e-10)
    assert uphill_action_1d(dwell, 1.0, 0.0) == pytest.approx(0.25, abs=1e-10)


def test_uphill_is_long_time_action_limit(dwell):
    # finite-horizon cost decreases toward the quasipotential gap
    costs = [mpp_shoot_1d(dwell, -1.0 + 1e-3, -0.05, T).action for T in (4.0, 8.0)]
    gap = uphill_action_1d(dwell, -1.0, -0.05)
    assert costs[0] > costs[1] > gap
    assert costs[1] - gap <= 0.02


def test_uphill_validation(dwell):
    with pytest.raises(ValueError):
        uphill_action_1d(dwell, 0.0, 0.5)       # unstable zero
    with pytest.raises(ValueError):
        uphill_action_1d(dwell, 0.3, 0.5)       # not a zero at all
    with pytest.raises(ValueError):
        uphill_action_1d(dwell, -1.0, 0.5)      # crosses the barrier zero
