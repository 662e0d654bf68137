"""Experiment drivers: critical and optimal chain lengths, EIT optimization, sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .cascade import g2_cascade, g2_zero_series
from .errors import ChiralChainError
from .model import ModelParams, two_photon_transmission
from .propagation import default_r_grid, g2_spectral, g2_zero_spectral
from .results import SweepResult

AXES = {"omega": "rabi", "gamma_loss": "gamma_loss", "n": None}
OBSERVABLES = {"g2_zero", "transmission", "g2_curve"}


def resolve_method(params: ModelParams, method: str = "auto") -> str:
    """'auto' means spectral for a lossless chain and cascade otherwise."""
    if method not in ("auto", "spectral", "cascade"):
        raise ValueError(f"unknown method {method!r}")
    if method == "auto":
        return "spectral" if params.gamma_loss == 0 else "cascade"
    if method == "spectral" and params.gamma_loss != 0:
        raise ValueError("the spectral method requires gamma = 0")
    return method


def max_workers() -> int:
    """Worker cap from CHIRALCHAIN_THREADS (default: CPU count)."""
    env = os.environ.get("CHIRALCHAIN_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def g2_zero_values(params: ModelParams, n_max: int, method: str = "auto",
                   stop_below: float | None = None) -> np.ndarray:
    """g2(0) for N = 0, 1, ..., n_max (shorter if stopped early by ``stop_below``)."""
    method = resolve_method(params, method)
    if method == "cascade":
        return g2_zero_series(params, n_max, max_emitters=max(n_max, 1), stop_below=stop_below)
    values = [1.0]
    for n in range(1, n_max + 1):
        values.append(float(g2_zero_spectral(params, [n])[0]))
        if stop_below is not None and values[-1] <= stop_below:
            break
    return np.array(values)


def critical_chain_length(params: ModelParams, n_max: int = 30, method: str = "auto"):
    """Smallest N* with g2(0) < 1 for every N in [N*, n_max], or None."""
    if n_max < 1:
        return None
    g = g2_zero_values(params, n_max, method)
    if g[n_max] >= 1:
        return None
    n_star = n_max
    while n_star > 1 and g[n_star - 1] < 1:
        n_star -= 1
    return n_star


def optimal_chain_length(params: ModelParams, threshold: float = 0.1, n_max: int = 100,
                         method: str = "cascade"):
    """Smallest N >= 1 with g2(0) <= threshold, or None if no N <= n_max qualifies."""
    return _first_below(params, threshold, n_max, method)[0]


def _first_below(params, threshold, n_max, method):
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    if n_max < 1:
        return None, math.nan
    g = g2_zero_values(params, n_max, method, stop_below=threshold)
    hits = np.nonzero(g[1:] <= threshold)[0]
    if not len(hits):
        return None, math.nan
    n_opt = int(hits[0]) + 1
    return n_opt, float(g[n_opt])


def _map(fn, items, workers=None):
    """Ordered parallel map that records exceptions instead of raising."""
    def safe(item):
        try:
            return fn(item), None
        except (ChiralChainError, ArithmeticError, ValueError) as exc:
            return None, f"{type(exc).__name__}: {exc}"

    items = list(items)
    workers = min(workers or max_workers(), max(len(items), 1))
    if workers <= 1:
        return [safe(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(safe, items))


def eit_optimal_transmission(params_base: ModelParams, omega_values, gamma: float,
                             threshold: float = 0.1, n_max: int = 1000,
                             method: str = "cascade", workers=None) -> SweepResult:
    """N_opt and |T_opt|**2 = |T_{N_opt}|**2 along an Omega sweep at loss rate ``gamma``.

    Points where no N <= n_max reaches the threshold get n_opt None and NaN
    observables.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    omegas = [float(x) for x in omega_values]

    def point(omega):
        p = params_base.replace(rabi=omega, gamma_loss=gamma)
        n_opt, g = _first_below(p, threshold, n_max, method)
        if n_opt is None:
            return None, math.nan, math.nan
        return n_opt, g, two_photon_transmission(p, n_opt)

    results = _map(point, omegas, workers)
    n_opt, g2z, trans, errors = [], [], [], {}
    for i, (res, err) in enumerate(results):
        if err is not None:
            errors[i] = err
            res = (None, math.nan, math.nan)
        n_opt.append(res[0])
        g2z.append(res[1])
        trans.append(res[2])
    return SweepResult("omega", omegas, g2z, trans, n_opt=n_opt, errors=errors,
                       meta={"params": params_base.as_dict(), "gamma_loss": gamma,
                             "threshold": threshold, "n_max": n_max, "method": method})


def sweep(params_base: ModelParams, axis: str, values, observables=("g2_zero", "transmission"),
          n_emitters: int = 10, method: str = "auto", r_grid=None, workers=None) -> SweepResult:
    """Evaluate observables along one parameter axis ("omega", "gamma_loss" or "n").

    Failing points are recorded in ``errors`` and carry NaN.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {sorted(AXES)}")
    observables = set(observables)
    if not observables <= OBSERVABLES:
        raise ValueError(f"unknown observables {sorted(observables - OBSERVABLES)}")
    values = list(values)
    if axis == "n" and any(int(v) != v or v < 0 for v in values):
        raise ValueError("N-axis values must be non-negative integers")
    if r_grid is None:
        r_grid = default_r_grid()
    need_curve = "g2_curve" in observables

    def point(value):
        if axis == "n":
            p, n = params_base, int(value)
        else:
            p, n = params_base.replace(**{AXES[axis]: float(value)}), n_emitters
        m = resolve_method(p, method)
        g0, curve = math.nan, None
        if need_curve:
            grid = np.unique(np.concatenate([np.asarray(r_grid, dtype=float), [0.0]]))
            curve = (g2_spectral(p, n, grid) if m == "spectral" else g2_cascade(p, n, grid,
                                                                                max_emitters=max(n, 100)))
            g0 = float(curve.g2[grid == 0.0][0])
        elif "g2_zero" in observables:
            if m == "spectral":
                g0 = float(g2_zero_spectral(p, [n])[0]) if n > 0 else 1.0
            else:
                g0 = float(g2_cascade(p, n, [0.0], max_emitters=max(n, 100)).g2[0])
        t = two_photon_transmission(p, n) if "transmission" in observables else math.nan
        return g0, t, curve

    results = _map(point, values, workers)
    g2z, trans, curves, errors = [], [], [], {}
    for i, (res, err) in enumerate(results):
        if err is not None:
            errors[i] = err
            res = (math.nan, math.nan, None)
        g2z.append(res[0])
        trans.append(res[1])
        curves.append(res[2])
    return SweepResult(axis, np.asarray(values, dtype=float), g2z, trans,
                       curves=curves if need_curve else None, errors=errors,
                       meta={"params": params_base.as_dict(), "axis": axis,
                             "n_emitters": n_emitters, "method": method,
                             "observables": sorted(observables)})
