"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Every run writes a manifest.json holding the fully resolved config, the
package version and the list of artifacts; feeding a manifest back through
--config reproduces the run byte for byte.

Exit codes: 0 success, 1 I/O failure, 2 config error, 3 numerical failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import BlowUpError, ConfigError, FwkitError, NoMonotonePathError, QuadratureError
from .fields import build_field
from .hje import GridAxis, GridFn, hje_evolve, stationary_rate_1d
from .mechanics import PhasePoint, integrate_hamiltonian, phase_contour
from .mpp import mpp_minimize, mpp_shoot_1d
from .neq import entropy_production, lorentz_residual, time_reversed_drift
from .oracle import OuState, ou_params, ou_rate, ou_transition_kernel
from .ratefn import (BernoulliSource, GaussianSource, SampleSource, cgf,
                     legendre, sample_mean_rate)
from .circle import circle_flow, limit_cycle_period, torus_fixed_points
from .simulate import Region, euler_maruyama, rate_sweep

_REQUIRED = object()


def _get(cfg: dict, path: str, default=_REQUIRED):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is _REQUIRED:
                raise ConfigError(f"config: {path}: missing")
            return default
        node = node[part]
    return node


def _num(cfg, path, default=_REQUIRED, positive=False):
    v = _get(cfg, path, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config: {path}: expected a number")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"config: {path}: non-finite")
    if positive and v <= 0:
        raise ConfigError(f"config: {path}: must be > 0")
    return v


def _int(cfg, path, default=_REQUIRED, minimum=None):
    v = _get(cfg, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config: {path}: expected an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"config: {path}: must be >= {minimum}")
    return v


def _field_of(cfg):
    if "field" not in cfg:
        raise ConfigError("config: field: missing")
    return build_field(cfg["field"])


def _axis_of(cfg, path) -> GridAxis:
    obj = _get(cfg, path)
    try:
        return GridAxis(lo=_num(obj, "min"), hi=_num(obj, "max"),
                        n=_int(obj, "n", minimum=16))
    except ValueError as e:
        raise ConfigError(f"config: {path}: {e}") from None


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(out_dir, name, header, rows):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return name


def _write_json(out_dir, name, obj):
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")
    return name


def _event_of(cfg):
    ev = _get(cfg, "event")
    kind = _get(ev, "kind")
    if kind == "box":
        lo = [(-math.inf if v is None else float(v)) for v in _get(ev, "lo")]
        hi = [(math.inf if v is None else float(v)) for v in _get(ev, "hi")]
        return Region.box(lo, hi)
    if kind == "ball":
        return Region.ball(_get(ev, "center"), _num(ev, "radius", positive=True))
    raise ConfigError("config: event.kind: must be 'box' or 'ball'")


def _source_of(cfg, path):
    src = _get(cfg, path)
    typ = _get(src, "type")
    if typ == "gaussian":
        return GaussianSource(mu=_num(src, "mu", 0.0), sigma2=_num(src, "sigma2", 1.0))
    if typ == "bernoulli":
        return BernoulliSource(p=_num(src, "p"))
    if typ == "samples":
        return SampleSource(values=np.asarray(_get(src, "values"), dtype=float))
    raise ConfigError(f"config: {path}.type: unknown source {typ!r}")


def _path_rows(path_sample, with_momentum=False):
    rows = []
    for i, t in enumerate(path_sample.times):
        row = [t, *path_sample.states[i]]
        if with_momentum and path_sample.momenta is not None:
            row += list(path_sample.momenta[i])
        if with_momentum and path_sample.energy is not None:
            row.append(path_sample.energy[i])
        rows.append(row)
    return rows


# ---------------------------------------------------------------- commands

def _cmd_simulate(cfg, out):
    field = _field_of(cfg)
    path = euler_maruyama(field, _get(cfg, "sim.x0"), _num(cfg, "sim.eps", 0.0),
                          _num(cfg, "sim.dt", positive=True),
                          _num(cfg, "sim.T", positive=True), _int(cfg, "sim.seed"))
    hdr = ["t"] + [f"x_{i + 1}" for i in range(field.dim)]
    return [_write_csv(out, "path.csv", hdr, _path_rows(path))], {}


def _cmd_rate_mc(cfg, out):
    field = _field_of(cfg)
    report = rate_sweep(field, _get(cfg, "sim.x0"), _get(cfg, "eps_sweep"),
                        _num(cfg, "sim.T", positive=True), _event_of(cfg),
                        _int(cfg, "sim.N", minimum=1), _int(cfg, "sim.seed"),
                        dt=_num(cfg, "sim.dt", 0.01, positive=True),
                        reference_action=_get(cfg, "reference_action", None))
    rows = [[r.eps, r.n_runs, r.p_hat, r.stderr,
             float("nan") if r.rate is None else r.rate, r.underflow]
            for r in report.rows]
    files = [_write_csv(out, "rate.csv",
                        ["eps", "n", "p_hat", "stderr", "rate", "underflow"], rows)]
    return files, {"event": report.event, "reference_action": report.reference_action}


def _cmd_hamilton(cfg, out):
    field = _field_of(cfg)
    traj = integrate_hamiltonian(
        field, PhasePoint(_get(cfg, "hamilton.q0"), _get(cfg, "hamilton.p0")),
        _num(cfg, "hamilton.dt", positive=True), _num(cfg, "hamilton.T", positive=True))
    hdr = (["t"] + [f"q_{i + 1}" for i in range(field.dim)]
           + [f"p_{i + 1}" for i in range(field.dim)] + ["H"])
    rows = [[traj.times[i], *traj.q[i], *traj.p[i], traj.H[i]]
            for i in range(len(traj.times))]
    files = [_write_csv(out, "hamilton.csv", hdr, rows)]
    return files, {"energy_warning": bool(traj.energy_warning)}


def _cmd_phase_portrait(cfg, out):
    field = _field_of(cfg)
    if field.dim != 1:
        raise ConfigError("config: field: phase portraits need a 1-D field")
    axis = _axis_of(cfg, "grid")
    energies = _get(cfg, "phase.E")
    q = axis.coords()
    rows = []
    for E in energies:
        pp, pm = phase_contour(field, float(E), q)
        rows += [[q[i], pp[i], pm[i], float(E)] for i in range(len(q))]
    return [_write_csv(out, "phase.csv", ["q", "p_plus", "p_minus", "E"], rows)], {}


def _cmd_mpp(cfg, out):
    field = _field_of(cfg)
    method = _get(cfg, "mpp.method", "both")
    T = _num(cfg, "mpp.T", positive=True)
    q1, q2 = _get(cfg, "mpp.q1"), _get(cfg, "mpp.q2")
    files = []
    summary = {}
    failed = False
    if method in ("both", "shoot"):
        if field.dim != 1:
            raise ConfigError("config: mpp.method: shooting needs a 1-D field")
        res = mpp_shoot_1d(field, float(q1), float(q2), T)
        hdr = ["t", "q_1", "p_1", "H"]
        files.append(_write_csv(out, "mpp_shoot.csv", hdr, _path_rows(res.path, True)))
        summary["shooting"] = {"action": res.action, "energy": res.energy,
                               "converged": res.converged}
    if method in ("both", "minimize"):
        res = mpp_minimize(field, q1, q2, T, _int(cfg, "mpp.K", minimum=8))
        hdr = (["t"] + [f"q_{i + 1}" for i in range(field.dim)]
               + [f"p_{i + 1}" for i in range(field.dim)] + ["H"])
        files.append(_write_csv(out, "mpp_min.csv", hdr, _path_rows(res.path, True)))
        summary["minimization"] = {
            "action": res.action, "energy": res.energy, "converged": res.converged,
            "energy_dev": res.energy_dev, "grad_norm": res.grad_norm,
            "iterations": res.iterations}
        failed = failed or not res.converged
    if method not in ("both", "shoot", "minimize"):
        raise ConfigError("config: mpp.method: must be shoot, minimize or both")
    files.append(_write_json(out, "summary.json", summary))
    if failed:
        raise FwkitError("mpp minimization did not converge")
    return files, {"summary": summary}


def _grid_u0(cfg, field, axes):
    spec = _get(cfg, "hje.u0")
    typ = _get(spec, "type")
    grid = GridFn(axes, np.zeros(tuple(ax.n for ax in axes)))
    if typ == "zero":
        return grid
    if typ == "quadratic":
        mu = np.atleast_1d(np.asarray(_get(spec, "mu"), dtype=float))
        s2 = _num(spec, "sigma2", positive=True)
        pts = grid.points()
        vals = np.sum((pts - mu) ** 2, axis=-1) / (2.0 * s2)
        return GridFn(axes, vals)
    if typ == "stationary":
        if field.dim == 1:
            return stationary_rate_1d(field, axes[0])
        if not field.has_decomposition:
            raise ConfigError("config: hje.u0: stationary u0 needs a potential")
        pts = grid.points()
        vals = field.potential(pts)
        return GridFn(axes, vals - vals.min())
    if typ == "table":
        return GridFn(axes, np.asarray(_get(spec, "values"), dtype=float))
    raise ConfigError(f"config: hje.u0.type: unknown type {typ!r}")


def _cmd_hje(cfg, out):
    field = _field_of(cfg)
    axes_cfg = _get(cfg, "grid.axes")
    if not isinstance(axes_cfg, list) or not axes_cfg:
        raise ConfigError("config: grid.axes: must be a non-empty list")
    axes = tuple(_axis_of({"a": ax}, "a") for ax in axes_cfg)
    if len(axes) != field.dim:
        raise ConfigError("config: grid.axes: dimension mismatch with field")
    u0 = _grid_u0(cfg, field, axes)
    result = hje_evolve(field, u0, _num(cfg, "hje.T", positive=True),
                        eps_viscous=_num(cfg, "hje.eps_viscous", 0.0),
                        snapshots=_int(cfg, "hje.snapshots", 2, minimum=2))
    files = []
    for k, g in enumerate(result.snapshots):
        if field.dim == 1:
            hdr = ["x", "u"]
            xs = axes[0].coords()
            rows = [[xs[i], g.values[i]] for i in range(axes[0].n)]
        else:
            hdr = ["x", "y", "u"]
            pts = g.points()
            vals = g.values.ravel()
            rows = [[pts[i, 0], pts[i, 1], vals[i]] for i in range(len(vals))]
        files.append(_write_csv(out, f"snapshot_{k:03d}.csv", hdr, rows))
    extras = {"snapshot_times": [float(t) for t in result.times],
              "dts": [float(d) for d in result.dts],
              "alphas": [float(a) for a in result.alphas]}
    return files, extras


def _cmd_stationary(cfg, out):
    field = _field_of(cfg)
    if field.dim != 1:
        raise ConfigError("config: field: stationary grids need a 1-D field")
    axis = _axis_of(cfg, "grid")
    g = stationary_rate_1d(field, axis, x_ref=_num(cfg, "stationary.x_ref", 0.0))
    xs = axis.coords()
    rows = [[xs[i], g.values[i]] for i in range(axis.n)]
    return [_write_csv(out, "stationary.csv", ["x", "u"], rows)], {}


def _cmd_oracle(cfg, out):
    o = _get(cfg, "oracle")
    s2 = _get(o, "sigma20")
    s2 = math.inf if s2 in ("inf", None) else float(s2)
    state = OuState(b_coef=_num(o, "b_coef", 1.0), mu=_num(o, "mu0", 0.0),
                    sigma2=s2, a=_num(o, "a0", 0.0), eps=_num(o, "eps", 0.0))
    payload = {"b_coef": state.b_coef, "states": []}
    for t in _get(o, "times"):
        st = ou_params(state, float(t))
        entry = {"t": float(t), "mu": st.mu,
                 "sigma2": ("inf" if st.flat else st.sigma2), "a": st.a}
        if "x" in o:
            entry["rate"] = [float(v) for v in
                             np.atleast_1d(ou_rate(state, o["x"], float(t)))]
        payload["states"].append(entry)
    if "kernel" in o:
        kn = o["kernel"]
        mom = ou_transition_kernel(_num(kn, "b_lin"), _num(kn, "eps"),
                                   _num(kn, "x_prev"), _num(kn, "dt", positive=True))
        payload["kernel"] = {"mean": mom.mean, "variance": mom.variance}
    return [_write_json(out, "oracle.json", payload)], {}


def _theta_grid(cfg, path):
    g = _get(cfg, path)
    n = _int(g, "n", minimum=5)
    if n % 2 == 0:
        raise ConfigError(f"config: {path}.n: must be odd")
    half = _num(g, "half_width", positive=True)
    return np.linspace(-half, half, n)


def _cmd_legendre(cfg, out):
    source = _source_of(cfg, "cgf")
    table = cgf(source, _theta_grid(cfg, "theta_grid"))
    axis = _axis_of(cfg, "x_grid")
    rows = []
    for x in axis.coords():
        lv = legendre(table, float(x))
        rows.append([x, lv.value, lv.theta_star, lv.boundary])
    files = [_write_csv(out, "legendre.csv",
                        ["x", "u_star", "theta_star", "boundary"], rows)]
    return files, {"source": table.source}


def _cmd_lln(cfg, out):
    source = _source_of(cfg, "cgf")
    n_list = _get(cfg, "n_list")
    axis = _axis_of(cfg, "x_grid")
    emp = sample_mean_rate(source, n_list, axis.coords(),
                           _int(cfg, "M", minimum=10_000), _int(cfg, "seed"))
    hdr = ["x"] + [f"u_n_{n}" for n in emp.n_list]
    rows = []
    for i, x in enumerate(emp.x):
        rows.append([x] + [emp.values[n][i] for n in emp.n_list])
    return [_write_csv(out, "lln.csv", hdr, rows)], {}


def _cmd_circle(cfg, out):
    field = _field_of(cfg)
    trace = circle_flow(field, _num(cfg, "circle.x0"), _num(cfg, "circle.y0"),
                        _num(cfg, "circle.dt", positive=True),
                        _num(cfg, "circle.T", positive=True))
    rows = []
    for i, t in enumerate(trace.times):
        v = trace.v[i] if trace.v is not None else float("nan")
        rows.append([t, trace.x[i], trace.y[i], v])
    files = [_write_csv(out, "circle.csv", ["t", "x", "y", "v"], rows)]
    period = limit_cycle_period(field)
    return files, {"period": period}


def _cmd_torus(cfg, out):
    pts = torus_fixed_points(_num(cfg, "torus.b0"), _get(cfg, "torus.u"))
    rows = [[fp.theta, fp.omega, fp.kind] for fp in pts]
    return [_write_csv(out, "torus.csv", ["theta", "omega", "type"], rows)], {}


def _cmd_entropy(cfg, out):
    field = _field_of(cfg)
    est = entropy_production(field, _num(cfg, "entropy.eps", positive=True),
                             _get(cfg, "entropy.pi", "analytic"),
                             _int(cfg, "entropy.N", minimum=1),
                             _int(cfg, "entropy.seed", 0),
                             dt=_num(cfg, "entropy.dt", 0.01, positive=True))
    payload = {"eps": est.eps, "method": est.method, "value": est.value,
               "stderr": est.stderr, "n": est.n}
    return [_write_json(out, "entropy.json", payload)], {}


def _cmd_reverse(cfg, out):
    field = _field_of(cfg)
    rev = time_reversed_drift(field, _num(cfg, "reverse.eps", positive=True))
    payload = {"reversed_field": rev.reversed.spec.to_config(),
               "max_identity_residual": rev.max_identity_residual}
    return [_write_json(out, "reverse.json", payload)], {}


def _cmd_lorentz(cfg, out):
    field = _field_of(cfg)
    traj = integrate_hamiltonian(
        field, PhasePoint(_get(cfg, "lorentz.q0"), _get(cfg, "lorentz.p0")),
        _num(cfg, "lorentz.dt", positive=True), _num(cfg, "lorentz.T", positive=True))
    resid = lorentz_residual(field, traj)
    payload = {"residual": resid, "energy_warning": bool(traj.energy_warning)}
    return [_write_json(out, "lorentz.json", payload)], {}


_COMMANDS = {
    "simulate": _cmd_simulate,
    "rate-mc": _cmd_rate_mc,
    "hamilton": _cmd_hamilton,
    "phase-portrait": _cmd_phase_portrait,
    "mpp": _cmd_mpp,
    "hje": _cmd_hje,
    "stationary": _cmd_stationary,
    "oracle": _cmd_oracle,
    "legendre": _cmd_legendre,
    "lln": _cmd_lln,
    "circle": _cmd_circle,
    "torus": _cmd_torus,
    "entropy": _cmd_entropy,
    "reverse": _cmd_reverse,
    "lorentz": _cmd_lorentz,
}

_SEED_PATHS = {
    "simulate": "sim", "rate-mc": "sim", "lln": None, "entropy": "entropy",
}


def _apply_seed_override(cmd, cfg, seed):
    if seed is None:
        return
    block = _SEED_PATHS.get(cmd)
    if cmd == "lln":
        cfg["seed"] = seed
    elif block is not None:
        cfg.setdefault(block, {})["seed"] = seed


def run(argv) -> int:
    parser = argparse.ArgumentParser(prog="fwkit", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default="out")
    parser.add_argument("--seed", type=int, default=None)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0

    threads = os.environ.get("FWKIT_THREADS")
    if threads is not None and (not threads.isdigit() or int(threads) < 1):
        print("error: FWKIT_THREADS must be a positive integer", file=sys.stderr)
        return 2

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as e:
        print(f"error: config: invalid JSON ({e})", file=sys.stderr)
        return 2

    if isinstance(cfg, dict) and "config" in cfg and "command" in cfg:
        cfg = cfg["config"]           # manifest round-trip
    if not isinstance(cfg, dict):
        print("error: config: top level must be an object", file=sys.stderr)
        return 2

    _apply_seed_override(args.command, cfg, args.seed)
    try:
        os.makedirs(args.out, exist_ok=True)
        files, extras = _COMMANDS[args.command](cfg, args.out)
        manifest = {"command": args.command, "fwkit_version": __version__,
                    "config": cfg, "outputs": files, **extras}
        _write_json(args.out, "manifest.json", manifest)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (BlowUpError, NoMonotonePathError, QuadratureError) as e:
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return 3
    except FwkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OverflowError) as e:
        print(f"error: numerical failure: {e}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
