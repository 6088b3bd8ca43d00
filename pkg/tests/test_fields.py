import numpy as np
import pytest

from fwkit import (ConfigError, FieldSpec, build_field, check_decomposition,
                   curl_component, eval_jacobian, fd_jacobian)

from conftest import CATALOG, sample_points


def test_ou_drift_value():
    f = build_field({"kind": "ou", "b_coef": 1.0})
    assert f.b(np.array([2.0]))[0] == -2.0
    assert f.domain == "line" and f.dim == 1


def test_poly_drift_value():
    f = build_field({"kind": "poly1d", "coeffs": [0, 1, 0, -1]})
    assert f.b1(0.5) == pytest.approx(0.375, abs=1e-15)


def test_rot_ou_drift_value():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    np.testing.assert_allclose(f.b(np.array([1.0, 0.0])), [-1.0, -1.0])


@pytest.mark.parametrize("bad", [
    {"kind": "nope"},
    {"kind": "poly1d", "coeffs": []},
    {"kind": "ou", "b_coef": float("nan")},
    {"kind": "rot_ou", "omega": float("inf")},
    {"kind": "decomposed2d", "u_coeffs": [[]], "gamma": 0.0},
    {"kind": "decomposed2d", "u_coeffs": [[0, 0, 0, 0, 0, 1]], "gamma": 0.0},
])
def test_build_rejects_bad_specs(bad):
    with pytest.raises(ConfigError):
        build_field(bad)


def test_ou_jacobian():
    f = build_field({"kind": "ou", "b_coef": 1.0})
    np.testing.assert_allclose(eval_jacobian(f, [5.0]), [[-1.0]])


def test_poly_jacobian_by_hand():
    f = build_field({"kind": "poly1d", "coeffs": [0, 1, 0, -1]})
    np.testing.assert_allclose(eval_jacobian(f, [1.0]), [[-2.0]])


def test_rot_ou_jacobian_constant():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    expected = [[-1.0, 1.0], [-1.0, -1.0]]
    np.testing.assert_allclose(eval_jacobian(f, [0.3, -2.0]), expected)
    np.testing.assert_allclose(eval_jacobian(f, [5.0, 7.0]), expected)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_analytic_jacobian_matches_finite_differences(name):
    field = build_field(CATALOG[name])
    pts = sample_points(field, 100, seed=11)
    worst = 0.0
    for x in pts:
        worst = max(worst, np.max(np.abs(eval_jacobian(field, x) - fd_jacobian(field, x))))
    assert worst <= 1e-6


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_jac_batch_agrees_with_single_point(name):
    field = build_field(CATALOG[name])
    pts = sample_points(field, 7, seed=3)
    batch = field.jac_batch(pts)
    for i, x in enumerate(pts):
        np.testing.assert_allclose(batch[i], field.jac(x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_divergence_is_jacobian_trace(name):
    field = build_field(CATALOG[name])
    pts = sample_points(field, 20, seed=5)
    expected = np.trace(field.jac_batch(pts), axis1=-2, axis2=-1)
    np.testing.assert_allclose(field.div(pts), expected, rtol=1e-12, atol=1e-12)


def test_circle_exact_periodicity():
    f = build_field(CATALOG["circle_pos"])
    # dyadic angles keep th + 1 exactly representable
    th = np.arange(64) / 64.0
    np.testing.assert_array_equal(f.b1(th), f.b1(th + 1.0))
    np.testing.assert_array_equal(f.b1(th), f.b1(th - 2.0))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(1)))
    ths = rng.uniform(0, 1, 100)
    assert np.max(np.abs(f.b1(ths) - f.b1(ths + 1.0))) <= 1e-9


def test_curl_gradient_field_vanishes():
    f = build_field({"kind": "decomposed2d",
                     "u_coeffs": [[0.0, 0.0, 0.5, 0.0, 0.1], [0.0],
                                  [0.5, 0.0, 0.05], [0.0], [0.1]],
                     "gamma": 0.0})
    for x in sample_points(f, 10, seed=2):
        assert abs(curl_component(f, x, 1, 0)) <= 1e-12


def test_curl_rot_ou():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    assert curl_component(f, [0.4, -1.2], 1, 0) == pytest.approx(-2.0)
    f0 = build_field({"kind": "rot_ou", "omega": 0.0})
    assert curl_component(f0, [0.4, -1.2], 1, 0) == 0.0


def test_curl_errors():
    f1 = build_field({"kind": "ou", "b_coef": 1.0})
    with pytest.raises(ValueError):
        curl_component(f1, [0.0], 0, 1)
    f2 = build_field({"kind": "rot_ou", "omega": 1.0})
    with pytest.raises(IndexError):
        curl_component(f2, [0.0, 0.0], 0, 2)


def test_decomposition_ou_trivial():
    f = build_field({"kind": "ou", "b_coef": 1.0})
    rep = check_decomposition(f, [[0.7], [-2.0], [1.3]])
    assert rep.max_recompose_residual == 0.0
    assert rep.max_orthogonality_residual == 0.0
    assert rep.passed


def test_decomposition_rot_ou_orthogonal():
    f = build_field({"kind": "rot_ou", "omega": 1.0})
    rep = check_decomposition(f, sample_points(f, 50, seed=9))
    assert rep.max_orthogonality_residual == 0.0
    assert rep.max_recompose_residual <= 1e-14


@pytest.mark.parametrize("gamma", [-1.5, 0.0, 0.4, 2.0])
def test_decomposition_split2d_machine_precision(gamma):
    spec = dict(CATALOG["quartic_split"])
    spec["gamma"] = gamma
    f = build_field(spec)
    rep = check_decomposition(f, sample_points(f, 60, seed=13), tol=1e-12)
    assert rep.max_recompose_residual <= 1e-12
    assert rep.max_orthogonality_residual <= 1e-12


def test_decomposition_requires_split():
    f = build_field({"kind": "poly1d", "coeffs": [0, 1]})
    with pytest.raises(ValueError):
        check_decomposition(f, [[0.0]])


def test_field_spec_config_round_trip():
    spec = FieldSpec.from_config({"kind": "rot_ou", "omega": 2.0})
    assert spec.to_config() == {"kind": "rot_ou", "omega": 2.0}
    built = build_field(spec)
    assert built.spec.kind == "rot_ou"
