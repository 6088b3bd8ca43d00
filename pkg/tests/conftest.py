import numpy as np
import pytest

from fwkit import build_field

# representative instances of every field kind
CATALOG = {
    "ou": {"kind": "ou", "b_coef": 1.0},
    "ou_stiff": {"kind": "ou", "b_coef": 2.5},
    "double_well": {"kind": "poly1d", "coeffs": [0.0, 1.0, 0.0, -1.0]},
    "cubic_mix": {"kind": "poly1d", "coeffs": [0.2, -1.1, 0.0, -0.5]},
    "circle_pos": {"kind": "circle", "b0": 2.0, "c": [np.sqrt(3.0)]},
    "circle_grad": {"kind": "circle", "b0": 0.0, "c": [-1.0]},
    "rot_ou": {"kind": "rot_ou", "omega": 1.0},
    "rot_ou2": {"kind": "rot_ou", "omega": 2.0},
    "quad_split": {"kind": "decomposed2d",
                   "u_coeffs": [[0.0, 0.0, 0.5], [0.0], [0.5]], "gamma": 0.7},
    "quartic_split": {"kind": "decomposed2d",
                      "u_coeffs": [[0.0, 0.0, 0.5, 0.0, 0.1], [0.0],
                                   [0.5, 0.0, 0.05], [0.0], [0.1]],
                      "gamma": 0.3},
}


@pytest.fixture(scope="session")
def catalog():
    return {name: build_field(spec) for name, spec in CATALOG.items()}


def sample_points(field, m, seed):
    """Deterministic probe points inside the field's default box."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    box = field.box
    pts = np.empty((m, field.dim))
    for a, (lo, hi) in enumerate(box):
        pts[:, a] = rng.uniform(lo, hi, m)
    return pts
