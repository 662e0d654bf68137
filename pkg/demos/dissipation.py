"""Loss into non-guided modes at N = 10 for the antibunching detunings.

|T_N|^2 falls with gamma only up to gamma* = sqrt(1 + 4 b**2 / Delta_bar**2),
b = Omega**2 - Delta*Delta_bar, and rises again beyond it.
"""

import math

import numpy as np

from _plot import save
from chiralchain import REFERENCE_PARAMS, sweep

gammas = np.concatenate([[0.0, 0.01, 0.05, 0.1, 0.2, 0.5], np.linspace(1.0, 10.0, 10)])
res = sweep(REFERENCE_PARAMS, "gamma_loss", gammas, n_emitters=10, method="cascade")
print(f"{'gamma':>7} {'g2(0)':>10} {'|T_10|^2':>12}")
for g, g0, t in zip(res.axis_values, res.g2_zero, res.transmission):
    print(f"{g:7.2f} {g0:10.4f} {t:12.4e}")

p = REFERENCE_PARAMS
b = p.rabi**2 - p.delta * p.delta_bar
print(f"\ntransmission minimum at gamma* = {math.sqrt(1 + 4 * b**2 / p.delta_bar**2):.3f}")
bunched = res.axis_values[np.asarray(res.g2_zero) > 1]
if len(bunched):
    print(f"bunching (g2(0) > 1) from gamma = {bunched.min():.2f}")


def draw(ax):
    ax.semilogy(res.axis_values, res.g2_zero, "o-", label="g2(0)")
    ax.semilogy(res.axis_values, res.transmission, "s-", label="|T_10|^2")
    ax.set_xlabel("gamma  [Gamma]")
    ax.legend()


path = save("dissipation.png", draw)
if path:
    print(f"figure written to {path}")
