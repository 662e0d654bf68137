"""Command-line front end: parse a run configuration, compute, write CSV/JSON.

Every physical input is in units of the guided decay rate Gamma.  Settings
come from (highest priority first) command-line flags, an optional flat
``key = value`` config file and the built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (critical_chain_length, eit_optimal_transmission, g2_zero_values,
                       optimal_chain_length, resolve_method, sweep)
from .cascade import g2_cascade, propagate_chain_history
from .eigenstates import continuum_state, find_bound_state
from .errors import ChiralChainError
from .model import ModelParams, derive_coefficients, two_photon_transmission
from .propagation import g2_spectral, output_wavefunction

COMMANDS = ("g2", "transmission", "eigenstate", "decompose", "critical-n", "optimal-n",
            "eit-sweep", "sweep")
PARAM_KEYS = {"omega": "rabi", "delta": "delta", "delta_bar": "delta_bar",
              "gamma": "gamma_loss", "energy": "total_energy"}
DEFAULTS = {
    "omega": 0.5, "delta": 0.25, "delta_bar": -0.25, "gamma": 0.0, "energy": 0.0,
    "method": "auto", "n": 10, "n_max": None, "threshold": 0.1, "nu_max": 40.0,
    "r_min": -10.0, "r_max": 0.0, "r_points": 400, "nu": 0.3, "family": "I",
    "axis": "omega", "values": None, "observables": "g2_zero,transmission",
    "output": None, "format": "csv",
}
UNITS = "units: rates and detunings in Gamma, r in 1/Gamma, group velocity 1"


@dataclass
class RunConfig:
    """Fully resolved settings of one CLI run."""

    command: str
    params: dict
    method: str = "auto"
    numeric: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"

    def model_params(self) -> ModelParams:
        return ModelParams(**self.params)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(**data)


class UsageError(Exception):
    pass


# -- parsing -----------------------------------------------------------------

def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment.  Unknown keys are rejected."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key '{key}'")
        out[key] = value
    return out


def _float_list(text):
    return [float(x) for x in str(text).replace(",", " ").split()]


_CASTS = {
    "omega": float, "delta": float, "delta_bar": float, "gamma": float, "energy": float,
    "n": int, "n_max": int, "threshold": float, "nu_max": float, "r_min": float,
    "r_max": float, "r_points": int, "nu": float,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralchain",
        description="Two-photon transport through a chiral chain of three-level emitters. " + UNITS + ".")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    common = argparse.ArgumentParser(add_help=False)
    sup = argparse.SUPPRESS
    common.add_argument("--omega", type=float, default=sup, help="control Rabi frequency")
    common.add_argument("--delta", type=float, default=sup, help="single-photon detuning")
    common.add_argument("--delta-bar", type=float, default=sup, help="two-photon detuning")
    common.add_argument("--gamma", type=float, default=sup, help="loss rate into non-guided modes")
    common.add_argument("--energy", type=float, default=sup, help="total two-photon energy E")
    common.add_argument("--method", choices=("spectral", "cascade", "auto"), default=sup)
    common.add_argument("--config", default=None, help="flat key = value settings file")
    common.add_argument("--output", "-o", default=sup, help="output path (default: <command>.<format>)")
    common.add_argument("--format", choices=("csv", "json"), default=sup)
    common.add_argument("--nu-max", type=float, default=sup, help="nu truncation of the spectral integral")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--r-min", type=float, default=sup)
    grid.add_argument("--r-max", type=float, default=sup)
    grid.add_argument("--r-points", type=int, default=sup)

    def add(name, help_, parents, *extra):
        p = sub.add_parser(name, help=help_, parents=parents)
        for args, kwargs in extra:
            p.add_argument(*args, default=sup, **kwargs)
        return p

    n_opt = (("--n",), {"type": int, "help": "number of emitters"})
    add("g2", "g2(r) after N emitters", [common, grid], n_opt)
    add("transmission", "|T_j|^2 for j = 0..N", [common], n_opt)
    add("eigenstate", "sample one S-matrix eigenstate", [common, grid],
        (("--nu",), {"type": float, "help": "relative momentum (continuum states)"}),
        (("--family",), {"choices": ("D0", "C0", "I", "II", "bound")}))
    add("decompose", "output split into bound, localized and plane-wave parts", [common, grid], n_opt)
    add("critical-n", "critical chain length N*", [common],
        (("--n-max",), {"type": int}))
    add("optimal-n", "smallest N with g2(0) <= threshold", [common],
        (("--n-max",), {"type": int}), (("--threshold",), {"type": float}))
    add("eit-sweep", "N_opt and |T_opt|^2 along an Omega sweep", [common],
        (("--values",), {"help": "Omega values, comma separated"}),
        (("--n-max",), {"type": int}), (("--threshold",), {"type": float}))
    add("sweep", "observables along one parameter axis", [common, grid], n_opt,
        (("--axis",), {"choices": ("omega", "gamma_loss", "n")}),
        (("--values",), {"help": "axis values, comma separated"}),
        (("--observables",), {"help": "comma separated subset of g2_zero,transmission,g2_curve"}))
    return parser


def parse_config(argv) -> RunConfig:
    """Resolve CLI flags over config-file keys over defaults."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError(parser.format_usage().strip())
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    settings = dict(DEFAULTS)
    if ns.config:
        for key, value in read_config_file(ns.config).items():
            try:
                settings[key] = _CASTS.get(key, str)(value)
            except ValueError as exc:
                raise UsageError(f"config key '{key}': {exc}") from exc
    settings.update(given)

    params = {PARAM_KEYS[k]: float(settings[k]) for k in PARAM_KEYS}
    try:
        ModelParams(**params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    method = settings["method"]
    if method not in ("auto", "spectral", "cascade"):
        raise UsageError(f"unknown method '{method}'")
    if method == "spectral" and params["gamma_loss"] > 0:
        raise UsageError("--method spectral requires --gamma 0 (use cascade for lossy chains)")
    if settings["format"] not in ("csv", "json"):
        raise UsageError(f"unknown format '{settings['format']}'")
    for key in ("nu_max", "threshold", "r_points"):
        if settings[key] is not None and settings[key] <= 0:
            raise UsageError(f"{key} must be positive")
    if not settings["threshold"] < 1:
        raise UsageError("threshold must be below 1")
    if settings["n"] < 0:
        raise UsageError("n must be non-negative")

    numeric = {k: settings[k] for k in ("n", "n_max", "threshold", "nu_max", "r_min", "r_max",
                                        "r_points", "nu", "family", "axis", "values",
                                        "observables")}
    return RunConfig(ns.command, params, method, numeric, settings["output"], settings["format"])


# -- output ------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def emit_results(columns: list, rows, meta: dict, config: RunConfig) -> list:
    """Write the table and metadata; return the written paths."""
    path = Path(config.output or f"{config.command}.{config.format}")
    meta = dict(meta)
    meta.update({"tool": "chiralchain", "version": __version__, "command": config.command,
                 "config": config.to_dict(), "units": UNITS, "columns": columns})
    try:
        if config.format == "json":
            payload = {"meta": _jsonable(meta),
                       "data": {c: [_jsonable(row[i]) for row in rows] for i, c in enumerate(columns)}}
            path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")
            return [path]
        lines = [f"# chiralchain {__version__} {config.command}", f"# {UNITS}", ",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        path.write_text("\n".join(lines) + "\n")
        side = path.with_name(path.stem + ".meta.json")
        side.write_text(json.dumps(_jsonable(meta), sort_keys=True, indent=1) + "\n")
        return [path, side]
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def load_meta(path) -> tuple[dict, RunConfig]:
    """Read a metadata sidecar (or JSON result) and rebuild its RunConfig."""
    data = json.loads(Path(path).read_text())
    meta = data.get("meta", data)
    return meta, RunConfig.from_dict(meta["config"])


# -- commands ----------------------------------------------------------------

def _r_grid(num):
    return np.linspace(num["r_min"], num["r_max"], num["r_points"])


def _ri(z):
    return [float(np.real(z)), float(np.imag(z))]


def run_g2(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    r, n = _r_grid(num), num["n"]
    method = resolve_method(p, cfg.method)
    if method == "spectral":
        curve = g2_spectral(p, n, r, nu_max=num["nu_max"])
        cols = ["r", "g2", "ReBound", "ImBound", "ReLoc", "ImLoc", "RePlane", "ImPlane"]
        c = curve.contributions
        rows = [[r[i], curve.g2[i], *_ri(c["bound"][i]), *_ri(c["localized"][i]), *_ri(c["plane"][i])]
                for i in range(len(r))]
    else:
        curve = g2_cascade(p, n, r, max_emitters=max(n, 100))
        cols = ["r", "g2", "ReF", "ImF"]
        rows = [[r[i], curve.g2[i], *_ri(curve.amplitude[i])] for i in range(len(r))]
    meta = dict(curve.meta, method=method, T_N_sq=two_photon_transmission(p, n))
    return cols, rows, meta


def run_transmission(cfg: RunConfig):
    p, n = cfg.model_params(), cfg.numeric["n"]
    rows = [[j, two_photon_transmission(p, j)] for j in range(n + 1)]
    meta = {"params": p.as_dict(), "n_emitters": n}
    if cfg.method != "spectral":
        hist = propagate_chain_history(p, n, max_emitters=max(n, 100))
        meta["T_N_recursion"] = hist[-1].t_flat
    return ["n", "transmission"], rows, meta


def run_eigenstate(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    c = derive_coefficients(p)
    state = find_bound_state(c) if num["family"] == "bound" else continuum_state(c, num["nu"], num["family"])
    r = _r_grid(num)
    f = state(r)
    rows = [[r[i], *_ri(f[i])] for i in range(len(r))]
    meta = {"params": p.as_dict(), "class": state.state_class.value, "family": state.family,
            "nu": state.nu_pair.nu, "nu_tilde": state.nu_pair.nu_tilde,
            "eigenvalue": state.eigenvalue, "norm": state.norm,
            "coefficients": state.amplitudes, "notes": list(state.notes)}
    return ["r", "ReF", "ImF"], rows, meta


def run_decompose(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    if cfg.method == "cascade":
        raise UsageError("decompose needs the spectral method")
    r = _r_grid(num)
    total, parts = output_wavefunction(p, num["n"], r)
    cols = ["r", "ReTotal", "ImTotal", "ReBound", "ImBound", "ReLoc", "ImLoc", "RePlane", "ImPlane"]
    rows = [[r[i], *_ri(total[i]), *_ri(parts["bound"][i]), *_ri(parts["localized"][i]),
             *_ri(parts["plane"][i])] for i in range(len(r))]
    return cols, rows, {"params": p.as_dict(), "n_emitters": num["n"], "method": "spectral"}


def run_critical(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    n_max = num["n_max"] if num["n_max"] is not None else 30
    method = resolve_method(p, cfg.method)
    g = g2_zero_values(p, n_max, method)
    n_star = critical_chain_length(p, n_max, method) if n_max >= 1 else None
    rows = [[j, g[j]] for j in range(len(g))]
    return ["n", "g2_zero"], rows, {"params": p.as_dict(), "critical_n": n_star, "n_max": n_max,
                                     "method": method}


def run_optimal(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    n_max = num["n_max"] if num["n_max"] is not None else 100
    method = "cascade" if cfg.method == "auto" else cfg.method
    n_opt = optimal_chain_length(p, num["threshold"], n_max, method)
    g = g2_zero_values(p, n_max, method, stop_below=num["threshold"])
    rows = [[j, g[j]] for j in range(len(g))]
    meta = {"params": p.as_dict(), "n_opt": n_opt, "threshold": num["threshold"], "n_max": n_max,
            "method": method,
            "T_opt_sq": None if n_opt is None else two_photon_transmission(p, n_opt)}
    return ["n", "g2_zero"], rows, meta


def _sweep_rows(res):
    n_opt = res.n_opt or [None] * len(res)
    rows = [[res.axis_values[i], res.g2_zero[i], res.transmission[i], n_opt[i]] for i in range(len(res))]
    meta = dict(res.meta, warnings={str(k): v for k, v in res.errors.items()})
    return [res.axis_name, "g2_zero", "transmission", "n_opt"], rows, meta


def run_eit(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    if not num["values"]:
        raise UsageError("eit-sweep needs --values")
    n_max = num["n_max"] if num["n_max"] is not None else 1000
    method = "cascade" if cfg.method == "auto" else cfg.method
    res = eit_optimal_transmission(p, _float_list(num["values"]), p.gamma_loss,
                                   num["threshold"], n_max, method)
    return _sweep_rows(res)


def run_sweep(cfg: RunConfig):
    p, num = cfg.model_params(), cfg.numeric
    if not num["values"]:
        raise UsageError("sweep needs --values")
    values = _float_list(num["values"])
    obs = [o.strip() for o in str(num["observables"]).split(",") if o.strip()]
    res = sweep(p, num["axis"], values, obs, n_emitters=num["n"], method=cfg.method,
                r_grid=_r_grid(num))
    return _sweep_rows(res)


RUNNERS = {"g2": run_g2, "transmission": run_transmission, "eigenstate": run_eigenstate,
           "decompose": run_decompose, "critical-n": run_critical, "optimal-n": run_optimal,
           "eit-sweep": run_eit, "sweep": run_sweep}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if not argv:
            raise UsageError(build_parser().format_usage().strip())
        cfg = parse_config(argv)
        cols, rows, meta = RUNNERS[cfg.command](cfg)
        paths = emit_results(cols, rows, meta, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ChiralChainError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
