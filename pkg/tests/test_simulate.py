import numpy as np
import pytest

from fwkit import (BlowUpError, Region, build_field, euler_maruyama, ode_solve,
                   ou_transition_kernel, path_weight_exponent,
                   rare_event_probability, rate_sweep, step_normals)


@pytest.fixture(scope="module")
def ou():
    return build_field({"kind": "ou", "b_coef": 1.0})


def test_step_normals_counter_addressable():
    full = step_normals(123, 5, 50, 2)
    assert full.shape == (50, 2)
    # any prefix reproduces the same entries: value depends only on (seed, run, k)
    np.testing.assert_array_equal(step_normals(123, 5, 7, 2), full[:7])
    # distinct runs give distinct streams
    assert not np.allclose(step_normals(123, 6, 50, 2), full)


def test_step_normals_distribution_sane():
    xs = step_normals(7, 0, 200_000, 1).ravel()
    assert abs(xs.mean()) < 0.01
    assert abs(xs.std() - 1.0) < 0.01


def test_euler_deterministic_limit(ou):
    path = euler_maruyama(ou, [1.0], 0.0, 1e-3, 1.0, seed=0)
    assert abs(path.states[-1, 0] - np.exp(-1.0)) < 5e-3


def test_euler_zero_drift_constant():
    f = build_field({"kind": "poly1d", "coeffs": [0.0]})
    path = euler_maruyama(f, [0.7], 0.0, 0.01, 1.0, seed=0)
    np.testing.assert_array_equal(path.states[:, 0], np.full(101, 0.7))


def test_euler_bit_identical_reruns(ou):
    a = euler_maruyama(ou, [1.0], 0.3, 1e-2, 2.0, seed=42)
    b = euler_maruyama(ou, [1.0], 0.3, 1e-2, 2.0, seed=42)
    np.testing.assert_array_equal(a.states, b.states)
    c = euler_maruyama(ou, [1.0], 0.3, 1e-2, 2.0, seed=43)
    assert not np.array_equal(a.states, c.states)


def test_euler_circle_wraps():
    f = build_field({"kind": "circle", "b0": 2.0, "c": [np.sqrt(3.0)]})
    path = euler_maruyama(f, [0.9], 0.05, 1e-2, 3.0, seed=4)
    assert np.all(path.states >= 0.0) and np.all(path.states < 1.0)


def test_euler_blow_up_reports_step():
    f = build_field({"kind": "poly1d", "coeffs": [0.0, 0.0, 0.0, 1.0]})
    with pytest.raises(BlowUpError) as exc:
        euler_maruyama(f, [2.0], 0.0, 0.5, 40.0, seed=0)
    assert exc.value.step >= 1


def test_ode_rk4_accuracy(ou):
    path = ode_solve(ou, [1.0], 1e-2, 1.0)
    assert abs(path.states[-1, 0] - np.exp(-1.0)) < 1e-8


def test_ode_fixed_point_constant():
    f = build_field({"kind": "poly1d", "coeffs": [0.0, 1.0, 0.0, -1.0]})
    path = ode_solve(f, [1.0], 1e-2, 2.0)
    np.testing.assert_allclose(path.states[:, 0], 1.0, atol=1e-14)


def test_ode_rot_ou_spiral():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    path = ode_solve(f, [1.0, 0.0], 1e-3, float(np.pi))
    r = np.linalg.norm(path.states[-1])
    assert abs(r - np.exp(-np.pi)) < 1e-6


def test_rare_event_whole_space(ou):
    row = rare_event_probability(ou, [0.0], 0.5, 1.0, Region.box([-np.inf], [np.inf]),
                                 n_runs=500, seed=1)
    assert row.p_hat == 1.0
    assert row.rate == 0.0


def test_rare_event_symmetric_half_line(ou):
    row = rare_event_probability(ou, [0.0], 0.5, 3.0, Region.box([0.0], [np.inf]),
                                 n_runs=20_000, seed=11, dt=0.01)
    assert abs(row.p_hat - 0.5) <= 3.0 * row.stderr + 1e-12


def test_rare_event_underflow_flagged(ou):
    row = rare_event_probability(ou, [0.0], 0.01, 1.0, Region.box([50.0], [np.inf]),
                                 n_runs=200, seed=3)
    assert row.underflow and row.p_hat == 0.0 and row.rate is None


def test_rate_sweep_requires_decreasing(ou):
    with pytest.raises(ValueError):
        rate_sweep(ou, [0.0], [0.1, 0.2], 1.0, Region.box([0], [1]), 10, 0)


def test_rate_sweep_rows(ou):
    rep = rate_sweep(ou, [0.0], [0.5, 0.25], 1.0, Region.box([0.0], [np.inf]),
                     n_runs=2000, seed=5, dt=0.02)
    assert [r.eps for r in rep.rows] == [0.5, 0.25]
    for r in rep.rows:
        assert r.stderr == pytest.approx(np.sqrt(r.p_hat * (1 - r.p_hat) / r.n_runs))


def test_path_weight_zero_drift_constant_path():
    f = build_field({"kind": "poly1d", "coeffs": [0.0]})
    path = euler_maruyama(f, [0.2], 0.0, 0.1, 1.0, seed=0)
    assert path_weight_exponent(f, path, 0.5) == 0.0


def test_path_weight_constant_drift_straight_path():
    from fwkit import PathSample
    f = build_field({"kind": "poly1d", "coeffs": [1.0]})
    n = 51
    times = np.linspace(0.0, 0.5, n)
    states = np.linspace(0.0, 1.0, n)
    s = path_weight_exponent(f, PathSample(times=times, states=states), eps=0.3)
    # velocity 2 against drift 1 over T = 0.5; divergence term vanishes
    assert s == pytest.approx(0.125, abs=1e-12)


def test_path_weight_divergence_free_noiseless_path():
    f = build_field({"kind": "decomposed2d",
                     "u_coeffs": [[0.0, 0.0, -0.5], [0.0], [0.5]], "gamma": 0.0})
    assert np.max(np.abs(f.div(np.array([[0.3, 0.4], [1.0, -1.0]])))) == 0.0
    path = ode_solve(f, [0.5, 0.2], 1e-3, 1.0)
    s = path_weight_exponent(f, path, eps=0.7)
    assert s <= 1e-4


def test_path_weight_validation(ou):
    from fwkit import PathSample
    p = PathSample(times=[0.0], states=[[1.0]])
    with pytest.raises(ValueError):
        path_weight_exponent(ou, p, 0.5)
    good = euler_maruyama(ou, [1.0], 0.1, 0.1, 1.0, seed=0)
    with pytest.raises(ValueError):
        path_weight_exponent(ou, good, 0.0)


def test_weak_convergence_against_kernel(ou):
    # terminal mean/variance of the OU chain against the exact kernel
    eps, T, dt, N = 0.1, 2.0, 0.01, 100_000
    from fwkit.simulate import _terminal_states
    xs = np.concatenate([
        _terminal_states(ou, [1.0], eps, dt, int(T / dt), 99, lo, min(lo + 8192, N))[:, 0]
        for lo in range(0, N, 8192)])
    mom = ou_transition_kernel(-1.0, eps, 1.0, T)
    se_mean = np.sqrt(mom.variance / N)
    assert abs(xs.mean() - mom.mean) <= 4 * se_mean + 2e-3
    se_var = mom.variance * np.sqrt(2.0 / N)
    assert abs(xs.var(ddof=1) - mom.variance) <= 4 * se_var + 1e-3
