"""Split of the output wavefunction at r = 0 into bound, localized and plane-wave parts.

The bound state has |lambda| = 1 and a single eigenvalue, so its share keeps
its modulus; the continuum parts dephase as the chain grows.
"""

from chiralchain import REFERENCE_PARAMS, derive_coefficients, find_bound_state, output_wavefunction

state = find_bound_state(derive_coefficients(REFERENCE_PARAMS))
print(f"bound state: nu = {state.nu_pair.nu:.6f}, nu_tilde = {state.nu_pair.nu_tilde:.6f}, "
      f"lambda = {state.eigenvalue:.6f}\n")
print(f"{'N':>3} {'|bound|':>10} {'|localized|':>12} {'|plane|':>10} {'|loc+plane|':>12} {'|total|':>10}")
for n in (0, 1, 5, 10, 20, 50):
    total, parts = output_wavefunction(REFERENCE_PARAMS, n, 0.0)
    cont = parts["localized"] + parts["plane"]
    print(f"{n:3d} {abs(parts['bound']):10.6f} {abs(parts['localized']):12.6f} "
          f"{abs(parts['plane']):10.6f} {abs(cont):12.6f} {abs(total):10.6f}")
