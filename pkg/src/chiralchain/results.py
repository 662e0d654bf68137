"""Result containers shared by the solvers and the analysis drivers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CorrelationCurve:
    """Sampled g2(r) of the transmitted photon pair.

    ``r_grid`` holds the requested separations; g2 is even in r and is always
    evaluated at -|r|. ``contributions`` maps a state class ("bound",
    "localized", "plane") to its complex share of the output wavefunction.
    """

    r_grid: np.ndarray
    g2: np.ndarray
    contributions: dict | None = None
    amplitude: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.g2 = np.asarray(self.g2, dtype=float)
        if self.g2.shape != self.r_grid.shape:
            raise ValueError("g2 and r_grid must have the same shape")
        if np.any(self.g2 < 0):
            raise ValueError("g2 must be non-negative")

    def mirrored(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (r, g2) on the symmetric grid -|r| ... +|r|, sorted by r."""
        r = np.abs(self.r_grid)
        full_r = np.concatenate([-r, r])
        full_g2 = np.concatenate([self.g2, self.g2])
        order = np.argsort(full_r, kind="stable")
        full_r, full_g2 = full_r[order], full_g2[order]
        keep = np.concatenate([[True], np.diff(full_r) > 0])
        return full_r[keep], full_g2[keep]


@dataclass
class SweepResult:
    """Observables along one swept parameter axis.

    Points that failed carry NaN (or ``None`` for n_opt) and an entry in
    ``errors`` keyed by point index.
    """

    axis_name: str
    axis_values: np.ndarray
    g2_zero: np.ndarray
    transmission: np.ndarray
    n_opt: list | None = None
    curves: list | None = None
    errors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_values = np.asarray(self.axis_values, dtype=float)
        self.g2_zero = np.asarray(self.g2_zero, dtype=float)
        self.transmission = np.asarray(self.transmission, dtype=float)
        n = len(self.axis_values)
        if len(self.g2_zero) != n or len(self.transmission) != n:
            raise ValueError("observable arrays must match the axis length")
        if self.n_opt is not None and len(self.n_opt) != n:
            raise ValueError("n_opt must match the axis length")

    def __len__(self):
        return len(self.axis_values)
