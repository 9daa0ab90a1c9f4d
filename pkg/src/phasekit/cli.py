"""Command-line driver: configuration, pipeline orchestration, emission.

One directory per run; every CSV starts with a single ``#``-prefixed JSON
header line carrying the toolkit version, the sha256 of the resolved
configuration, and file-specific metadata (the orbit file carries omega, T,
and the Floquet multipliers there). Bodies are RFC-4180 with full
double-precision round-trip formatting, so identical configurations produce
byte-identical files. ``run.json`` echoes the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, fourier
from .entrainment import (InputWaveform, coupling_function, coupling_sensitivity,
                          locking_points, locking_sensitivity,
                          simulate_entrainment)
from .errors import ConfigError, PhasekitError
from .model import ModelDefinition, ParameterVector, resolve_parameters
from .models import get_model
from .orbit import OrbitOptions, PeriodicOrbit, find_periodic_orbit
from .prc import compute_finite_prc, compute_iprc
from .robustness import (dominant_characteristic, measure, normalize,
                         rank_and_partition)
from .sensitivity import compute_bundle, finite_difference_oracle

_INPUT_KEYS = {"kind", "epsilon", "detuning", "duty", "steepness", "amplitude",
               "cos", "sin", "mean"}
_TOL_KEYS = {"orbit", "integration", "fd_step"}
_TOP_KEYS = {"model", "grid", "format", "out", "jobs", "relative", "threshold",
             "params", "groups", "tolerances", "input"}


@dataclass
class RunConfig:
    """Fully resolved run configuration (defaults documented in README)."""

    model: str = "goodwin"
    params: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)
    grid: int = 256
    format: str = "csv"
    out: str | None = None
    jobs: int = 1
    relative: bool = True
    threshold: float = 0.1
    orbit_tol: float = 1e-9
    integration_tol: float = 1e-12
    fd_step: float = 1e-4
    input_kind: str = "sine"
    epsilon: float = 0.05
    detuning: float = 0.0
    duty: float = 0.5
    steepness: float = 50.0
    amplitude: float = 1.0
    cos: list = field(default_factory=list)
    sin: list = field(default_factory=list)
    mean: float = 0.0

    def resolved(self) -> dict:
        return {
            "model": self.model,
            "params": {k: float(v) for k, v in sorted(self.params.items())},
            "groups": {k: str(v) for k, v in sorted(self.groups.items())},
            "grid": self.grid,
            "format": self.format,
            "jobs": self.jobs,
            "relative": self.relative,
            "threshold": self.threshold,
            "tolerances": {"orbit": self.orbit_tol,
                           "integration": self.integration_tol,
                           "fd_step": self.fd_step},
            "input": {"kind": self.input_kind, "epsilon": self.epsilon,
                      "detuning": self.detuning, "duty": self.duty,
                      "steepness": self.steepness, "amplitude": self.amplitude,
                      "cos": [float(c) for c in self.cos],
                      "sin": [float(c) for c in self.sin], "mean": self.mean},
        }

    def sha256(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _load_config_file(path: str) -> dict:
    text = Path(path).read_bytes()
    if path.endswith(".json"):
        return json.loads(text)
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text.decode())


def _parse_set_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _apply_mapping(cfg: RunConfig, data: dict, model_hint: str | None = None):
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "model" in data:
        cfg.model = str(data["model"])
    if "params" in data:
        cfg.params.update({str(k): float(v) for k, v in data["params"].items()})
    if "groups" in data:
        cfg.groups.update({str(k): str(v) for k, v in data["groups"].items()})
    for key, attr, cast in (("grid", "grid", int), ("format", "format", str),
                            ("out", "out", str), ("jobs", "jobs", int),
                            ("relative", "relative", bool),
                            ("threshold", "threshold", float)):
        if key in data:
            setattr(cfg, attr, cast(data[key]))
    tols = data.get("tolerances", {})
    bad = set(tols) - _TOL_KEYS
    if bad:
        raise ConfigError(f"unknown tolerance keys: {', '.join(sorted(bad))}")
    cfg.orbit_tol = float(tols.get("orbit", cfg.orbit_tol))
    cfg.integration_tol = float(tols.get("integration", cfg.integration_tol))
    cfg.fd_step = float(tols.get("fd_step", cfg.fd_step))
    inp = data.get("input", {})
    bad = set(inp) - _INPUT_KEYS
    if bad:
        raise ConfigError(f"unknown input keys: {', '.join(sorted(bad))}")
    cfg.input_kind = str(inp.get("kind", cfg.input_kind))
    cfg.epsilon = float(inp.get("epsilon", cfg.epsilon))
    cfg.detuning = float(inp.get("detuning", cfg.detuning))
    cfg.duty = float(inp.get("duty", cfg.duty))
    cfg.steepness = float(inp.get("steepness", cfg.steepness))
    cfg.amplitude = float(inp.get("amplitude", cfg.amplitude))
    cfg.cos = list(inp.get("cos", cfg.cos))
    cfg.sin = list(inp.get("sin", cfg.sin))
    cfg.mean = float(inp.get("mean", cfg.mean))


def _apply_set(cfg: RunConfig, assignments: list[str], model: ModelDefinition):
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, raw = item.split("=", 1)
        value = _parse_set_value(raw)
        if "." not in key and key in model.defaults.names:
            key = f"params.{key}"
        parts = key.split(".")
        if parts[0] == "params" and len(parts) == 2:
            cfg.params[parts[1]] = float(value)
        elif parts[0] == "groups" and len(parts) == 2:
            cfg.groups[parts[1]] = str(value)
        elif parts[0] == "tolerances" and len(parts) == 2:
            _apply_mapping(cfg, {"tolerances": {parts[1]: value}})
        elif parts[0] == "input" and len(parts) == 2:
            _apply_mapping(cfg, {"input": {parts[1]: value}})
        elif len(parts) == 1:
            _apply_mapping(cfg, {parts[0]: value})
        else:
            raise ConfigError(f"cannot interpret --set key {key!r}")


def build_config(args) -> tuple[RunConfig, ModelDefinition, ParameterVector]:
    cfg = RunConfig()
    if args.config:
        _apply_mapping(cfg, _load_config_file(args.config))
    if args.model:
        cfg.model = args.model
    model = get_model(cfg.model)
    if args.set:
        _apply_set(cfg, args.set, model)
    if getattr(args, "grid", None):
        cfg.grid = args.grid
    if getattr(args, "tol", None):
        cfg.integration_tol = args.tol
    if getattr(args, "jobs", None):
        cfg.jobs = args.jobs
    if getattr(args, "format", None):
        cfg.format = args.format
    if getattr(args, "out", None):
        cfg.out = args.out
    if getattr(args, "threshold", None) is not None:
        cfg.threshold = args.threshold
    if getattr(args, "relative", None) is not None:
        cfg.relative = args.relative
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown output format {cfg.format!r}")
    if cfg.grid < 8 or cfg.grid % 2:
        raise ConfigError("grid size must be even and at least 8")
    params = resolve_parameters(model, cfg.params)
    return cfg, model, params


def _out_dir(cfg: RunConfig, subcommand: str) -> Path:
    if cfg.out:
        return Path(cfg.out)
    root = os.environ.get("PHASEKIT_OUT", "phasekit_runs")
    return Path(root) / f"{cfg.model}_{subcommand}"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Emitter:
    """Writes one run directory: CSV or JSON tables plus run.json."""

    def __init__(self, cfg: RunConfig, directory: Path):
        self.cfg = cfg
        self.dir = directory
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def _meta(self, extra: dict | None) -> dict:
        meta = {"phasekit": __version__, "config_sha256": self.cfg.sha256()}
        if extra:
            meta.update(extra)
        return meta

    def table(self, name: str, header: list[str], rows: list[list],
              meta: dict | None = None):
        meta_blob = json.dumps(self._meta(meta), sort_keys=True)
        if self.cfg.format == "json":
            path = self.dir / f"{name}.json"
            payload = {"meta": json.loads(meta_blob),
                       "columns": header,
                       "rows": [[_json_cell(c) for c in row] for row in rows]}
            path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        else:
            path = self.dir / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                fh.write(f"# {meta_blob}\r\n")
                writer = csv.writer(fh)
                writer.writerow(header)
                for row in rows:
                    writer.writerow([_fmt(c) for c in row])
        self.written.append(path.name)

    def run_json(self):
        payload = {"phasekit": __version__, "config_sha256": self.cfg.sha256(),
                   "config": self.cfg.resolved(), "files": sorted(self.written)}
        (self.dir / "run.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _json_cell(c):
    if isinstance(c, (np.integer,)):
        return int(c)
    if isinstance(c, (np.floating,)):
        return float(c)
    if isinstance(c, (np.bool_,)):
        return bool(c)
    return c


def _orbit_options(cfg: RunConfig) -> OrbitOptions:
    return OrbitOptions(grid_size=cfg.grid, ode_tol=cfg.integration_tol,
                        residual_tol=cfg.orbit_tol)


def _solve_orbit(cfg, model, params) -> PeriodicOrbit:
    return find_periodic_orbit(model, params, options=_orbit_options(cfg))


def _waveform(cfg: RunConfig, omega: float) -> InputWaveform:
    omega_u = omega - cfg.detuning
    if cfg.input_kind == "sine":
        return InputWaveform.sine(omega_u)
    if cfg.input_kind == "square":
        return InputWaveform.square(omega_u, duty=cfg.duty,
                                    steepness=cfg.steepness,
                                    amplitude=cfg.amplitude)
    if cfg.input_kind == "fourier":
        return InputWaveform(kind="fourier", omega_u=omega_u, mean=cfg.mean,
                             cos_coeffs=tuple(cfg.cos), sin_coeffs=tuple(cfg.sin))
    raise ConfigError(f"unknown input kind {cfg.input_kind!r}")


def _emit_orbit(emitter, orbit):
    header = ["theta"] + [f"x{i + 1}" for i in range(orbit.dim)]
    rows = [[orbit.theta[j]] + list(orbit.states[:, j])
            for j in range(orbit.grid_size)]
    meta = {"omega": float(orbit.omega), "T": float(orbit.period),
            "multipliers_real": [float(m.real) for m in orbit.multipliers],
            "multipliers_imag": [float(m.imag) for m in orbit.multipliers],
            "hyperbolic": bool(orbit.hyperbolic),
            "section": [orbit.section.index, orbit.section.level,
                        orbit.section.direction]}
    emitter.table("orbit", header, rows, meta)


def _emit_prc(emitter, orbit, resp):
    header = ["theta", "q"] + [f"q_x{i + 1}" for i in range(orbit.dim)]
    rows = [[resp.theta[j], resp.q[j]] + list(resp.q_x[:, j])
            for j in range(orbit.grid_size)]
    emitter.table("prc", header, rows, {"omega": float(orbit.omega)})


def _compute_bundles(cfg, model, params, orbit, resp, names):
    indices = [params.index(n) for n in names]

    def work(k):
        return compute_bundle(orbit, resp, model, params, k,
                              ode_tol=cfg.integration_tol,
                              relative=cfg.relative)

    if cfg.jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            return list(pool.map(work, indices))
    return [work(k) for k in indices]


def _locking_chain(cfg, model, params, orbit, resp, bundles):
    waveform = _waveform(cfg, orbit.omega)
    gamma = coupling_function(resp, waveform)
    report = locking_points(gamma, detuning=orbit.omega - waveform.omega_u,
                            eps=cfg.epsilon)
    sens = {}
    for b in bundles:
        lam = float(params.values[b.k])
        z_q_abs = b.z_q / lam if b.relative else b.z_q
        s_omega_abs = b.s_omega / lam if b.relative else b.s_omega
        s_gamma = coupling_sensitivity(z_q_abs, waveform)
        s_chi, s_w, s_g = locking_sensitivity(report, gamma, s_omega_abs, s_gamma)
        if b.relative:
            s_chi, s_w, s_g = lam * s_chi, lam * s_w, lam * s_g
        sens[b.name] = (s_chi, s_w, s_g)
    return waveform, gamma, report, sens


def _emit_gamma(emitter, gamma):
    rows = [[gamma.chi[j], gamma.values[j], gamma.deriv[j]]
            for j in range(gamma.chi.size)]
    emitter.table("gamma", ["chi", "Gamma", "dGamma"], rows,
                  {"omega_u": float(gamma.omega_u)})


def _emit_locking(emitter, report, gamma):
    rows = [[r.chi,
             report.detuning + report.eps * float(gamma.gamma(r.chi)),
             r.v_prime, r.stable,
             report.selected is not None and abs(r.chi - report.selected) < 1e-12]
            for r in report.roots]
    emitter.table("locking", ["chi", "V", "dV", "stable", "selected"], rows,
                  {"detuning": report.detuning, "eps": report.eps,
                   "drift": report.drift})


def _emit_sens(emitter, cfg, bundles, fd_rows=None):
    curve_rows = []
    for b in bundles:
        for j in range(b.grid_size):
            curve_rows.append([b.name, b.theta[j], b.z_q[j]])
    emitter.table("sens_curves", ["param", "theta", "Z_q"], curve_rows,
                  {"relative": cfg.relative})

    summary_header = ["param", "S_omega", "S_T", "R_omega", "R_q"]
    if fd_rows:
        summary_header += ["S_omega_fd", "Z_q_fd_relerr"]
    rows = []
    for b in bundles:
        r_q = float(np.sqrt(fourier.periodic_integral(b.z_q ** 2)))
        row = [b.name, b.s_omega, b.s_period, abs(b.s_omega), r_q]
        if fd_rows:
            row += fd_rows[b.name]
        rows.append(row)
    emitter.table("sens_summary", summary_header, rows,
                  {"relative": cfg.relative})


def _robustness_tables(emitter, cfg, report_norm, ordered, subset):
    rows = [[r.name, r.group, r.r_omega, r.r_period, r.r_q, r.r_chi,
             r.s_chi, r.s_chi_omega, r.s_chi_gamma,
             r.rbar_omega, r.rbar_period, r.rbar_q, r.rbar_chi]
            for r in report_norm.rows]
    emitter.table("robustness",
                  ["param", "group", "R_omega", "R_T", "R_q", "R_chi",
                   "S_chi", "S_chi_omega", "S_chi_gamma",
                   "Rbar_omega", "Rbar_T", "Rbar_q", "Rbar_chi"],
                  rows, {"relative": report_norm.relative,
                         "threshold": cfg.threshold})
    scatter = [[r.name, r.group, r.rbar_omega, r.rbar_q,
                dominant_characteristic(r.rbar_omega, r.rbar_q)]
               for r in report_norm.rows]
    emitter.table("scatter", ["param", "group", "Rbar_omega", "Rbar_q",
                              "dominant"], scatter)
    bars = [[r.name, r.group, r.sbar_chi, r.sbar_chi_omega, r.sbar_chi_gamma]
            for r in subset]
    emitter.table("bars", ["param", "group", "Sbar_chi", "Sbar_chi_omega",
                           "Sbar_chi_gamma"], bars,
                  {"threshold": cfg.threshold, "kept": len(subset)})


def cmd_orbit(args) -> int:
    cfg, model, params = build_config(args)
    orbit = _solve_orbit(cfg, model, params)
    emitter = Emitter(cfg, _out_dir(cfg, "orbit"))
    _emit_orbit(emitter, orbit)
    emitter.run_json()
    return 0


def cmd_prc(args) -> int:
    cfg, model, params = build_config(args)
    orbit = _solve_orbit(cfg, model, params)
    emitter = Emitter(cfg, _out_dir(cfg, "prc"))
    if args.method in ("adjoint", "both"):
        resp = compute_iprc(orbit, model, params, ode_tol=cfg.integration_tol)
        _emit_prc(emitter, orbit, resp)
    if args.method in ("direct", "both"):
        thetas = _parse_phases(args.phases)
        eps = args.epsilon if args.epsilon is not None else cfg.epsilon
        samples = compute_finite_prc(orbit, model, params, eps=eps,
                                     thetas=thetas,
                                     ode_tol=cfg.integration_tol)
        rows = [[s.theta, s.eps, s.delta_theta, s.periods, s.residual_distance]
                for s in samples]
        emitter.table("prc_direct",
                      ["theta", "eps", "dtheta", "periods", "distance"], rows)
    emitter.run_json()
    return 0


def _parse_phases(spec: str):
    if "," in spec or "." in spec:
        return np.array([float(tok) for tok in spec.split(",") if tok])
    return fourier.grid(int(spec))


def _param_names(args, params: ParameterVector) -> list[str]:
    if args.params in (None, "all"):
        return list(params.names)
    names = [tok for tok in args.params.split(",") if tok]
    for name in names:
        params.index(name)
    return names


def cmd_sens(args) -> int:
    cfg, model, params = build_config(args)
    orbit = _solve_orbit(cfg, model, params)
    resp = compute_iprc(orbit, model, params, ode_tol=cfg.integration_tol)
    names = _param_names(args, params)
    bundles = _compute_bundles(cfg, model, params, orbit, resp, names)
    fd_rows = None
    if args.check_fd:
        fd_rows = {}
        for b in bundles:
            k = b.k
            lam = float(params.values[k])
            h = cfg.fd_step * max(abs(lam), 1.0)
            fd = finite_difference_oracle(model, params, k, h,
                                          grid_size=cfg.grid,
                                          seed=(tuple(orbit.anchor), orbit.period),
                                          ode_tol=cfg.integration_tol)
            s_fd = fd.s_omega * lam if cfg.relative else fd.s_omega
            z_fd = fd.z_q * lam if cfg.relative else fd.z_q
            scale = max(np.abs(z_fd).max(), 1e-15)
            fd_rows[b.name] = [s_fd, float(np.abs(b.z_q - z_fd).max() / scale)]
    emitter = Emitter(cfg, _out_dir(cfg, "sens"))
    _emit_sens(emitter, cfg, bundles, fd_rows)
    emitter.run_json()
    return 0


def cmd_entrain(args) -> int:
    cfg, model, params = build_config(args)
    if args.input:
        cfg.input_kind = args.input
    if args.eps is not None:
        cfg.epsilon = args.eps
    if args.detune is not None:
        cfg.detuning = args.detune
    orbit = _solve_orbit(cfg, model, params)
    resp = compute_iprc(orbit, model, params, ode_tol=cfg.integration_tol)
    bundles = _compute_bundles(cfg, model, params, orbit, resp,
                               list(params.names))
    waveform, gamma, report, sens = _locking_chain(cfg, model, params, orbit,
                                                   resp, bundles)
    emitter = Emitter(cfg, _out_dir(cfg, "entrain"))
    _emit_gamma(emitter, gamma)
    _emit_locking(emitter, report, gamma)
    rows = [[name, *sens[name]] for name in params.names if name in sens]
    emitter.table("entrain_sens",
                  ["param", "S_chi", "S_chi_omega", "S_chi_gamma"], rows,
                  {"relative": cfg.relative, "eps": cfg.epsilon,
                   "detuning": cfg.detuning})
    if args.validate:
        sim = simulate_entrainment(orbit, model, params, waveform=waveform,
                                   eps=cfg.epsilon, horizon_periods=60,
                                   ode_tol=max(cfg.integration_tol, 1e-11))
        vrows = [[k, sim.boundary_times[k], sim.chi[k]]
                 for k in range(len(sim.chi))]
        emitter.table("validate", ["k", "t", "chi"], vrows,
                      {"converged": sim.converged,
                       "chi_locked": sim.chi_locked, "slips": sim.slips})
    emitter.run_json()
    return 0


def cmd_robust(args) -> int:
    cfg, model, params = build_config(args)
    emitter, *_ = _full_chain(cfg, model, params, subcommand="robust",
                              robust_only=True)
    emitter.run_json()
    return 0


def cmd_pipeline(args) -> int:
    cfg, model, params = build_config(args)
    emitter, *_ = _full_chain(cfg, model, params, subcommand="pipeline",
                              robust_only=False)
    emitter.run_json()
    return 0


def _full_chain(cfg, model, params, subcommand: str, robust_only: bool):
    orbit = _solve_orbit(cfg, model, params)
    resp = compute_iprc(orbit, model, params, ode_tol=cfg.integration_tol)
    bundles = _compute_bundles(cfg, model, params, orbit, resp,
                               list(params.names))
    waveform, gamma, report, sens = _locking_chain(cfg, model, params, orbit,
                                                   resp, bundles)
    groups = dict(model.param_groups)
    groups.update(cfg.groups)
    rob = measure(bundles, sens, groups)
    rob_norm = normalize(rob)
    ordered, subset = rank_and_partition(rob_norm, cfg.threshold)

    emitter = Emitter(cfg, _out_dir(cfg, subcommand))
    if not robust_only:
        _emit_orbit(emitter, orbit)
        _emit_prc(emitter, orbit, resp)
        _emit_sens(emitter, cfg, bundles)
        _emit_gamma(emitter, gamma)
        _emit_locking(emitter, report, gamma)
    _robustness_tables(emitter, cfg, rob_norm, ordered, subset)
    return emitter, orbit, resp, bundles, rob_norm


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasekit",
        description="periodic orbits, phase response curves, and entrainment "
                    "sensitivity for ODE oscillator models")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", help="registered model name")
        p.add_argument("--config", help="TOML or JSON configuration file")
        p.add_argument("--set", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a config entry (repeatable); bare keys "
                            "matching model parameters set params.KEY")
        p.add_argument("--grid", type=int, help="phase grid size N")
        p.add_argument("--tol", type=float, help="integration tolerance")
        p.add_argument("--jobs", type=int, help="parallel workers for the "
                                                "per-parameter loop")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--out", help="output directory (default "
                                     "$PHASEKIT_OUT/<model>_<cmd>)")

    p_orbit = sub.add_parser("orbit", help="solve the periodic orbit")
    common(p_orbit)
    p_orbit.set_defaults(func=cmd_orbit)

    p_prc = sub.add_parser("prc", help="phase response curves")
    common(p_prc)
    p_prc.add_argument("--method", choices=("adjoint", "direct", "both"),
                       default="adjoint")
    p_prc.add_argument("--epsilon", type=float,
                       help="impulse amplitude for the direct method")
    p_prc.add_argument("--phases", default="16",
                       help="N equispaced phases or a comma list")
    p_prc.set_defaults(func=cmd_prc)

    p_sens = sub.add_parser("sens", help="parameter sensitivity curves")
    common(p_sens)
    p_sens.add_argument("--params", help="'all' or a comma list of names")
    p_sens.add_argument("--relative", dest="relative", action="store_true",
                        default=None)
    p_sens.add_argument("--absolute", dest="relative", action="store_false")
    p_sens.add_argument("--check-fd", action="store_true",
                        help="validate against the finite-difference oracle")
    p_sens.set_defaults(func=cmd_sens)

    p_ent = sub.add_parser("entrain", help="coupling function and locking")
    common(p_ent)
    p_ent.add_argument("--input", choices=("sine", "square"))
    p_ent.add_argument("--eps", type=float)
    p_ent.add_argument("--detune", type=float)
    p_ent.add_argument("--validate", action="store_true",
                       help="run the forced full-model simulation")
    p_ent.set_defaults(func=cmd_entrain)

    p_rob = sub.add_parser("robust", help="scalar robustness rankings")
    common(p_rob)
    p_rob.add_argument("--threshold", type=float)
    p_rob.add_argument("--relative", dest="relative", action="store_true",
                       default=None)
    p_rob.add_argument("--absolute", dest="relative", action="store_false")
    p_rob.set_defaults(func=cmd_robust)

    p_pipe = sub.add_parser("pipeline", help="full chain, every table")
    common(p_pipe)
    p_pipe.add_argument("--threshold", type=float)
    p_pipe.add_argument("--relative", dest="relative", action="store_true",
                        default=None)
    p_pipe.add_argument("--absolute", dest="relative", action="store_false")
    p_pipe.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2
    except PhasekitError as exc:
        record = {"error": type(exc).__name__,
                  "module": type(exc).__module__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
