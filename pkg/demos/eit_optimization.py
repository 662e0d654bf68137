"""Optimal chain length and transmission along an Omega sweep (Delta = 0.4, Delta_bar = -0.2).

Stronger control fields widen the transparency window, so more emitters are
needed for g2(0) <= 0.1 but the antibunched pair is transmitted better.
"""

from chiralchain import ModelParams, eit_optimal_transmission

base = ModelParams(1.0, 0.4, -0.2)
omegas = [1.0, 1.25, 1.5, 1.75, 2.0]
for gamma in (0.0, 0.1):
    res = eit_optimal_transmission(base, omegas, gamma=gamma)
    print(f"gamma = {gamma}")
    print(f"{'Omega':>7} {'N_opt':>6} {'g2(0)':>8} {'|T_opt|^2':>10}")
    for om, n, g0, t in zip(res.axis_values, res.n_opt, res.g2_zero, res.transmission):
        print(f"{om:7.2f} {n!s:>6} {g0:8.4f} {t:10.4f}")
    print()
