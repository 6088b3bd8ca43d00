"""Drift-field catalog.

Five field kinds cover the dynamics this toolkit works with:

  ou            b(x) = -k x on the line
  poly1d        b(x) = sum_j c_j x^j on the line
  circle        b(th) = b0 + sum_k (a_k cos 2pi k th + c_k sin 2pi k th), 1-periodic
  rot_ou        b(x, y) = (-x + w y, -y - w x) on the plane
  decomposed2d  b = -grad U + gamma * R grad U with R(u, v) = (v, -u) and U a
                polynomial potential of degree <= 4

Every field carries analytic Jacobian and divergence evaluators.  Kinds built
from a potential also expose U, grad U and the rotational remainder
ell = b + grad U, which satisfies ell . grad U = 0 identically.

Evaluator conventions: ``b`` and ``div`` take arrays of points with the last
axis of length ``dim``; ``jac`` takes a single point; 1-D fields additionally
provide ``b1``/``db1`` acting elementwise on bare arrays.
"""

import math
from dataclasses import dataclass, field as _dcfield
from typing import Callable

import numpy as np

from .errors import ConfigError

KINDS = ("ou", "poly1d", "circle", "rot_ou", "decomposed2d")

# Half-width of the default line/plane domain box.
DEFAULT_HALFWIDTH = 3.0


@dataclass(frozen=True)
class FieldSpec:
    """Declarative description of a drift field (JSON-friendly)."""

    kind: str
    params: dict = _dcfield(default_factory=dict)

    @classmethod
    def from_config(cls, obj) -> "FieldSpec":
        if isinstance(obj, FieldSpec):
            return obj
        if not isinstance(obj, dict):
            raise ConfigError("config: field: must be an object")
        if "kind" not in obj:
            raise ConfigError("config: field.kind: missing")
        params = {k: v for k, v in obj.items() if k != "kind"}
        return cls(kind=obj["kind"], params=params)

    def to_config(self) -> dict:
        return {"kind": self.kind, **self.params}


@dataclass(frozen=True)
class DriftField:
    """A drift field with analytic derivatives.

    Attributes
    ----------
    dim : 1 or 2
    domain : "line", "plane" or "circle"
    b : points (..., dim) -> (..., dim)
    jac : point (dim,) -> (dim, dim)
    jac_batch : points (m, dim) -> (m, dim, dim)
    div : points (..., dim) -> (...)
    b1, db1 : elementwise drift / derivative, 1-D fields only
    potential, grad_potential, rotational : U, grad U and ell when the field
        declares the split b = -grad U + ell (kinds ou, rot_ou, decomposed2d)
    """

    dim: int
    domain: str
    spec: FieldSpec
    b: Callable
    jac: Callable
    jac_batch: Callable
    div: Callable
    b1: Callable | None = None
    db1: Callable | None = None
    potential: Callable | None = None
    grad_potential: Callable | None = None
    rotational: Callable | None = None

    @property
    def has_decomposition(self) -> bool:
        return self.potential is not None

    @property
    def box(self) -> tuple:
        """Default bounding box, one (lo, hi) pair per axis."""
        L = DEFAULT_HALFWIDTH
        if self.domain == "circle":
            return ((0.0, 1.0),)
        return tuple((-L, L) for _ in range(self.dim))


def _require_finite(name: str, value) -> None:
    if not np.all(np.isfinite(value)):
        raise ConfigError(f"config: field.{name}: non-finite value")


def _point(x, dim: int) -> np.ndarray:
    p = np.atleast_1d(np.asarray(x, dtype=float))
    if p.shape != (dim,):
        raise ValueError(f"expected point of dimension {dim}, got shape {p.shape}")
    return p


def _build_ou(params: dict) -> DriftField:
    k = float(params.get("b_coef", 1.0))
    _require_finite("b_coef", k)
    if k <= 0:
        raise ConfigError("config: field.b_coef: must be > 0")

    def b1(x):
        if type(x) is float or type(x) is int:
            return -k * x
        return -k * np.asarray(x, dtype=float)

    def db1(x):
        if type(x) is float or type(x) is int:
            return -k
        return np.full_like(np.asarray(x, dtype=float), -k)

    return _wrap_1d("line", FieldSpec("ou", {"b_coef": k}), b1, db1,
                    potential1=lambda x: 0.5 * k * np.asarray(x, dtype=float) ** 2)


def _build_poly1d(params: dict) -> DriftField:
    coeffs = np.asarray(params.get("coeffs", []), dtype=float)
    if coeffs.size == 0:
        raise ConfigError("config: field.coeffs: empty coefficient list")
    _require_finite("coeffs", coeffs)
    dcoeffs = coeffs[1:] * np.arange(1, coeffs.size)
    rev = coeffs[::-1].tolist()
    drev = dcoeffs[::-1].tolist() or [0.0]

    def b1(x):
        if type(x) is float or type(x) is int:     # Horner, quadrature hot path
            acc = 0.0
            for cj in rev:
                acc = acc * x + cj
            return acc
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs)

    def db1(x):
        if type(x) is float or type(x) is int:
            acc = 0.0
            for cj in drev:
                acc = acc * x + cj
            return acc
        x = np.asarray(x, dtype=float)
        if dcoeffs.size == 0:
            return np.zeros_like(x)
        return np.polynomial.polynomial.polyval(x, dcoeffs)

    return _wrap_1d("line", FieldSpec("poly1d", {"coeffs": coeffs.tolist()}), b1, db1)


def _build_circle(params: dict) -> DriftField:
    b0 = float(params.get("b0", 0.0))
    a = np.asarray(params.get("a", []), dtype=float)
    c = np.asarray(params.get("c", []), dtype=float)
    _require_finite("b0", b0)
    _require_finite("a", a)
    _require_finite("c", c)
    nk = max(a.size, c.size)
    a = np.pad(a, (0, nk - a.size))
    c = np.pad(c, (0, nk - c.size))
    ks = 2.0 * np.pi * np.arange(1, nk + 1)

    a_l, c_l, ks_l = a.tolist(), c.tolist(), ks.tolist()

    # reduce mod 1 before the trig so periodicity is exact on representable
    # arguments and the series stays accurate far from [0, 1)
    def b1(th):
        if type(th) is float or type(th) is int:
            th = th % 1.0
            return b0 + math.fsum(ak * math.cos(k * th) + ck * math.sin(k * th)
                                  for ak, ck, k in zip(a_l, c_l, ks_l))
        th = np.mod(np.asarray(th, dtype=float), 1.0)
        ang = np.multiply.outer(th, ks)
        return b0 + np.cos(ang) @ a + np.sin(ang) @ c

    def db1(th):
        if type(th) is float or type(th) is int:
            th = th % 1.0
            return math.fsum(k * (ck * math.cos(k * th) - ak * math.sin(k * th))
                             for ak, ck, k in zip(a_l, c_l, ks_l))
        th = np.mod(np.asarray(th, dtype=float), 1.0)
        ang = np.multiply.outer(th, ks)
        return -np.sin(ang) @ (ks * a) + np.cos(ang) @ (ks * c)

    spec = FieldSpec("circle", {"b0": b0, "a": a.tolist(), "c": c.tolist()})
    return _wrap_1d("circle", spec, b1, db1)


def _wrap_1d(domain, spec, b1, db1, potential1=None) -> DriftField:
    def b(x):
        x = np.asarray(x, dtype=float)
        return b1(x[..., 0])[..., None]

    def jac(x):
        x = _point(x, 1)
        return np.array([[float(db1(x[0]))]])

    def jac_batch(pts):
        pts = np.asarray(pts, dtype=float)
        return db1(pts[..., 0])[..., None, None]

    def div(pts):
        pts = np.asarray(pts, dtype=float)
        return db1(pts[..., 0])

    extra = {}
    if potential1 is not None:
        extra = {
            "potential": lambda pts: potential1(np.asarray(pts, dtype=float)[..., 0]),
            "grad_potential": lambda pts: -b(pts),
            "rotational": lambda pts: np.zeros_like(np.asarray(pts, dtype=float)),
        }
    return DriftField(dim=1, domain=domain, spec=spec, b=b, jac=jac,
                      jac_batch=jac_batch, div=div, b1=b1, db1=db1, **extra)


def _build_rot_ou(params: dict) -> DriftField:
    w = float(params.get("omega", 0.0))
    _require_finite("omega", w)
    J = np.array([[-1.0, w], [-w, -1.0]])

    def b(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([-x + w * y, -y - w * x], axis=-1)

    def jac(x):
        _point(x, 2)
        return J.copy()

    def jac_batch(pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(J, pts.shape[:-1] + (2, 2)).copy()

    def div(pts):
        pts = np.asarray(pts, dtype=float)
        return np.full(pts.shape[:-1], -2.0)

    def potential(pts):
        pts = np.asarray(pts, dtype=float)
        return 0.5 * (pts[..., 0] ** 2 + pts[..., 1] ** 2)

    def grad_potential(pts):
        return np.asarray(pts, dtype=float).copy()

    def rotational(pts):
        pts = np.asarray(pts, dtype=float)
        return w * np.stack([pts[..., 1], -pts[..., 0]], axis=-1)

    return DriftField(dim=2, domain="plane", spec=FieldSpec("rot_ou", {"omega": w}),
                      b=b, jac=jac, jac_batch=jac_batch, div=div,
                      potential=potential, grad_potential=grad_potential,
                      rotational=rotational)


class _Poly2:
    """Bivariate polynomial sum c[i][j] x^i y^j with derivative helpers."""

    def __init__(self, table):
        rows = [np.asarray(r, dtype=float) for r in table]
        if not rows or all(r.size == 0 for r in rows):
            raise ConfigError("config: field.u_coeffs: empty coefficient table")
        deg = max(len(rows) - 1, max(r.size - 1 for r in rows))
        if deg > 4 or any(i + (r.size - 1) > 4 for i, r in enumerate(rows) if r.size):
            raise ConfigError("config: field.u_coeffs: degree above 4")
        self.c = np.zeros((5, 5))
        for i, r in enumerate(rows):
            _require_finite("u_coeffs", r)
            self.c[i, : r.size] = r

    def _eval(self, coef, x, y):
        out = np.zeros(np.broadcast(x, y).shape)
        for i in range(coef.shape[0]):
            for j in range(coef.shape[1]):
                if coef[i, j] != 0.0:
                    out = out + coef[i, j] * x ** i * y ** j
        return out

    def _dx(self, coef):
        out = np.zeros_like(coef)
        out[: coef.shape[0] - 1, :] = coef[1:, :] * np.arange(1, coef.shape[0])[:, None]
        return out

    def _dy(self, coef):
        return self._dx(coef.T).T

    def derivatives(self):
        c = self.c
        cx, cy = self._dx(c), self._dy(c)
        return {
            "u": c, "ux": cx, "uy": cy,
            "uxx": self._dx(cx), "uxy": self._dy(cx), "uyy": self._dy(cy),
        }

    def make_eval(self, coef):
        return lambda x, y: self._eval(coef, x, y)


def _build_decomposed2d(params: dict) -> DriftField:
    if "u_coeffs" not in params:
        raise ConfigError("config: field.u_coeffs: missing")
    gamma = float(params.get("gamma", 0.0))
    _require_finite("gamma", gamma)
    poly = _Poly2(params["u_coeffs"])
    d = poly.derivatives()
    U = poly.make_eval(d["u"])
    Ux, Uy = poly.make_eval(d["ux"]), poly.make_eval(d["uy"])
    Uxx, Uxy, Uyy = (poly.make_eval(d["uxx"]), poly.make_eval(d["uxy"]),
                     poly.make_eval(d["uyy"]))

    def b(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        ux, uy = Ux(x, y), Uy(x, y)
        return np.stack([-ux + gamma * uy, -uy - gamma * ux], axis=-1)

    def jac_batch(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        uxx, uxy, uyy = Uxx(x, y), Uxy(x, y), Uyy(x, y)
        row0 = np.stack([-uxx + gamma * uxy, -uxy + gamma * uyy], axis=-1)
        row1 = np.stack([-uxy - gamma * uxx, -uyy - gamma * uxy], axis=-1)
        return np.stack([row0, row1], axis=-2)

    def jac(x):
        return jac_batch(_point(x, 2)[None, :])[0]

    def div(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return -(Uxx(x, y) + Uyy(x, y))

    def potential(pts):
        pts = np.asarray(pts, dtype=float)
        return U(pts[..., 0], pts[..., 1])

    def grad_potential(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return np.stack([Ux(x, y), Uy(x, y)], axis=-1)

    def rotational(pts):
        pts = np.asarray(pts, dtype=float)
        x, y = pts[..., 0], pts[..., 1]
        return gamma * np.stack([Uy(x, y), -Ux(x, y)], axis=-1)

    spec = FieldSpec("decomposed2d", {
        "u_coeffs": [list(map(float, r)) for r in params["u_coeffs"]],
        "gamma": gamma,
    })
    return DriftField(dim=2, domain="plane", spec=spec, b=b, jac=jac,
                      jac_batch=jac_batch, div=div, potential=potential,
                      grad_potential=grad_potential, rotational=rotational)


_BUILDERS = {
    "ou": _build_ou,
    "poly1d": _build_poly1d,
    "circle": _build_circle,
    "rot_ou": _build_rot_ou,
    "decomposed2d": _build_decomposed2d,
}


def build_field(spec) -> DriftField:
    """Construct a DriftField from a FieldSpec or a plain config dict."""
    spec = FieldSpec.from_config(spec)
    if spec.kind not in _BUILDERS:
        raise ConfigError(f"config: field.kind: unknown kind {spec.kind!r}")
    return _BUILDERS[spec.kind](spec.params)


def fd_jacobian(field: DriftField, x) -> np.ndarray:
    """Central-difference Jacobian with step h_j = max(1e-6, 1e-6 |x_j|)."""
    x = _point(x, field.dim)
    J = np.empty((field.dim, field.dim))
    for j in range(field.dim):
        h = max(1e-6, 1e-6 * abs(x[j]))
        e = np.zeros(field.dim)
        e[j] = h
        J[:, j] = (field.b(x + e) - field.b(x - e)) / (2.0 * h)
    return J


def eval_jacobian(field: DriftField, x) -> np.ndarray:
    """Jacobian d b_i / d x_j at a point, analytic when available."""
    x = _point(x, field.dim)
    J = field.jac(x) if field.jac is not None else fd_jacobian(field, x)
    if not np.all(np.isfinite(J)):
        raise ValueError(f"non-finite Jacobian at {x}")
    return J


def curl_component(field: DriftField, x, i: int, j: int) -> float:
    """Antisymmetric derivative d b_i / d x_j - d b_j / d x_i."""
    if field.dim < 2:
        raise ValueError("curl needs dim >= 2")
    if not (0 <= i < field.dim and 0 <= j < field.dim):
        raise IndexError(f"component indices ({i}, {j}) out of range")
    J = eval_jacobian(field, x)
    return float(J[i, j] - J[j, i])


@dataclass(frozen=True)
class DecompositionReport:
    n_samples: int
    max_recompose_residual: float
    max_orthogonality_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.max_recompose_residual <= self.tol
                and self.max_orthogonality_residual <= self.tol)


def check_decomposition(field: DriftField, samples, tol: float = 1e-10) -> DecompositionReport:
    """Verify b = -grad U + ell and ell . grad U = 0 at the given points."""
    if not field.has_decomposition:
        raise ValueError("field does not declare a potential/rotational split")
    pts = np.asarray(samples, dtype=float).reshape(-1, field.dim)
    if not np.all(np.isfinite(pts)):
        raise ValueError("non-finite sample points")
    b = field.b(pts)
    gu = field.grad_potential(pts)
    ell = field.rotational(pts)
    recompose = np.max(np.abs(b - (-gu + ell))) if pts.size else 0.0
    orth = np.max(np.abs(np.sum(ell * gu, axis=-1))) if pts.size else 0.0
    return DecompositionReport(n_samples=pts.shape[0],
                               max_recompose_residual=float(recompose),
                               max_orthogonality_residual=float(orth), tol=tol)
