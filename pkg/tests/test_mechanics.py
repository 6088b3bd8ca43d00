import numpy as np
import pytest

from fwkit import (PathSample, PhasePoint, action, build_field,
                   classify_equilibria, hamiltonian, integrate_hamiltonian,
                   lagrangian, ode_solve, phase_contour, solve_characteristics)

from conftest import CATALOG


@pytest.fixture(scope="module")
def ou():
    return build_field({"kind": "ou", "b_coef": 1.0})


@pytest.fixture(scope="module")
def const1():
    return build_field({"kind": "poly1d", "coeffs": [1.0]})


@pytest.fixture(scope="module")
def dwell():
    return build_field(CATALOG["double_well"])


def test_hamiltonian_values(ou):
    assert hamiltonian(ou, [2.0], [0.0]) == 0.0
    q = [1.3]
    assert hamiltonian(ou, q, -ou.b(np.asarray(q))) == pytest.approx(0.0, abs=1e-15)
    assert hamiltonian(ou, [2.0], [1.0]) == pytest.approx(-1.0)


def test_hamiltonian_nd():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    q, p = [1.0, 0.0], [0.5, -0.5]
    expected = 0.5 + np.dot([-1.0, -1.0], p)
    assert hamiltonian(f, q, p) == pytest.approx(expected)


def test_lagrangian_values(ou, const1):
    assert lagrangian(ou, [0.7], ou.b(np.array([0.7]))) == 0.0
    assert lagrangian(const1, [0.0], [2.0]) == pytest.approx(0.25)
    # L(q, b + 2v) = |v|^2
    v = 0.83
    q = [0.4]
    qdot = const1.b(np.asarray(q)) + 2 * v
    assert lagrangian(const1, q, qdot) == pytest.approx(v * v)


def test_action_noiseless_path_vanishes(ou):
    path = ode_solve(ou, [2.0], 1e-3, 2.0)
    assert action(ou, path) <= 1e-4


def test_action_constant_drift_exact(const1):
    n = 41
    path = PathSample(times=np.linspace(0, 0.5, n), states=np.linspace(0, 1, n))
    assert action(const1, path) == pytest.approx(0.125, abs=1e-14)


def test_action_time_reversed_ou(ou):
    T = 4.0
    times = np.arange(0, int(T / 1e-3) + 1) * 1e-3
    path = PathSample(times=times, states=np.exp(times - T))
    expected = 0.5 * (1.0 - np.exp(-2 * T))
    assert action(ou, path) == pytest.approx(expected, abs=1e-5)


def test_hamilton_zero_momentum_matches_flow(ou):
    traj = integrate_hamiltonian(ou, PhasePoint([1.5], [0.0]), 1e-3, 2.0)
    ref = ode_solve(ou, [1.5], 1e-3, 2.0)
    np.testing.assert_allclose(traj.q, ref.states, atol=1e-12)
    np.testing.assert_allclose(traj.H, 0.0, atol=1e-14)
    assert not traj.energy_warning


def test_hamilton_constant_drift(const1):
    traj = integrate_hamiltonian(const1, PhasePoint([0.0], [0.5]), 1e-3, 1.0)
    np.testing.assert_allclose(traj.H, 0.75, atol=1e-12)
    np.testing.assert_allclose(traj.q[:, 0], 2.0 * traj.times, atol=1e-10)


def test_hamilton_ou_energy_conserved(ou):
    traj = integrate_hamiltonian(ou, PhasePoint([2.0], [0.3]), 1e-3, 5.0)
    assert np.max(np.abs(traj.H - traj.H[0])) <= 1e-8


def test_hamilton_excess_kinetic_energy(dwell):
    traj = integrate_hamiltonian(dwell, PhasePoint([0.5], [-0.1]), 1e-3, 5.0)
    qdot = 2.0 * traj.p + dwell.b(traj.q)
    lhs = np.einsum("ij,ij->i", qdot, qdot) - np.einsum("ij,ij->i", dwell.b(traj.q), dwell.b(traj.q))
    np.testing.assert_allclose(lhs, 4.0 * traj.H[0], atol=1e-6)


def test_hamilton_action_channel(const1):
    traj = integrate_hamiltonian(const1, PhasePoint([0.0], [0.5]), 1e-3, 1.0)
    # L = |p|^2 = 0.25 along this orbit
    assert traj.u[-1] == pytest.approx(0.25, abs=1e-10)


def test_characteristics_zero_slope(ou):
    tr = solve_characteristics(ou, 1.0, 0.0, 0.3, 1e-3, 2.0)
    ref = ode_solve(ou, [1.0], 1e-3, 2.0)
    np.testing.assert_allclose(tr.x, ref.states[:, 0], atol=1e-12)
    np.testing.assert_allclose(tr.u, 0.3, atol=1e-14)
    assert tr.y == 0.0


def test_characteristics_energy_consistency(dwell):
    # z0 in (-b(x0), 0) keeps H < 0 and the orbit bounded inside one well
    tr = solve_characteristics(dwell, 0.7, -0.2, 0.0, 1e-3, 5.0)
    H = tr.z ** 2 + dwell.b1(tr.x) * tr.z
    np.testing.assert_allclose(tr.y + H, 0.0, atol=1e-8)


def test_characteristics_action_cross_check(ou):
    tr = solve_characteristics(ou, 1.0, 1.0, 0.0, 1e-3, 1.5)
    assert tr.y == pytest.approx(0.0, abs=1e-15)   # H = 1 - 1 = 0
    path = PathSample(times=tr.times, states=tr.x)
    assert tr.u[-1] == pytest.approx(action(ou, path), abs=1e-6)


def test_classify_ou_saddle(ou):
    eqs = classify_equilibria(ou, (-2.0, 2.0))
    assert len(eqs) == 1
    e = eqs[0]
    assert e.q == pytest.approx(0.0, abs=1e-9)
    assert e.p == 0.0
    assert e.kind == "saddle"
    assert e.lambda_sq == pytest.approx(1.0)


def test_classify_double_well(dwell):
    eqs = classify_equilibria(dwell, (-2.0, 2.0))
    type_a = [e for e in eqs if e.source == "b-zero"]
    type_b = [e for e in eqs if e.source == "bprime-zero"]
    np.testing.assert_allclose(sorted(e.q for e in type_a), [-1.0, 0.0, 1.0], atol=1e-9)
    assert all(e.kind == "saddle" for e in type_a)
    qb = 1.0 / np.sqrt(3.0)
    np.testing.assert_allclose(sorted(e.q for e in type_b), [-qb, qb], atol=1e-9)
    pb = 1.0 / (3.0 * np.sqrt(3.0))
    got = {round(e.q, 6): e for e in type_b}
    assert got[round(qb, 6)].p == pytest.approx(-pb, abs=1e-9)
    assert got[round(-qb, 6)].p == pytest.approx(pb, abs=1e-9)
    assert all(e.kind == "center" for e in type_b)


def test_phase_contour_zero_energy(const1):
    q = np.linspace(-1, 1, 11)
    pp, pm = phase_contour(const1, 0.0, q)
    np.testing.assert_allclose(pp, 0.0, atol=1e-15)
    np.testing.assert_allclose(pm, -1.0, atol=1e-15)


def test_phase_contour_values_and_mask(const1):
    pp, pm = phase_contour(const1, 0.75, np.array([0.0]))
    assert pp[0] == pytest.approx(0.5)
    assert pm[0] == pytest.approx(-1.5)
    pp, pm = phase_contour(const1, -1.0, np.linspace(-1, 1, 5))
    assert np.all(np.isnan(pp)) and np.all(np.isnan(pm))


def test_energy_warning_flag(ou):
    traj = integrate_hamiltonian(ou, PhasePoint([2.0], [1.5]), 0.25, 5.0)
    assert traj.energy_warning
