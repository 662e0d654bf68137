"""Antibunching after a lossless chain (Omega = Gamma/2, Delta = Gamma/4, Delta_bar = -Gamma/4).

Prints g2(r) after ten emitters from both solvers, then the N sweep of g2(0)
that locates the critical chain length.
"""

import numpy as np

from _plot import save
from chiralchain import REFERENCE_PARAMS, critical_chain_length, g2_cascade, g2_spectral
from chiralchain.analysis import g2_zero_values

r = np.linspace(-8.0, 0.0, 17)
spec = g2_spectral(REFERENCE_PARAMS, 10, r)
casc = g2_cascade(REFERENCE_PARAMS, 10, r)
print("g2(r) after N = 10 emitters")
print(f"{'r':>6} {'spectral':>12} {'cascade':>12}")
for x, a, b in zip(r, spec.g2, casc.g2):
    print(f"{x:6.2f} {a:12.6f} {b:12.6f}")
print(f"max |spectral - cascade| = {np.max(np.abs(spec.g2 - casc.g2)):.1e}\n")

g0 = g2_zero_values(REFERENCE_PARAMS, 30, method="cascade")
n_star = critical_chain_length(REFERENCE_PARAMS, 30)
print("g2(0) versus chain length")
for n in range(0, 31, 2):
    print(f"  N = {n:2d}  g2(0) = {g0[n]:.4f}")
print(f"critical chain length N* = {n_star}")

fine = np.linspace(-10.0, 10.0, 201)
curves = {n: g2_cascade(REFERENCE_PARAMS, n, fine) for n in (1, 3, 10)}


def draw(ax):
    for n, c in curves.items():
        ax.plot(fine, c.g2, label=f"N = {n}")
    ax.set_xlabel("r  [1/Gamma]")
    ax.set_ylabel("g2(r)")
    ax.legend()


path = save("antibunching.png", draw)
if path:
    print(f"figure written to {path}")
