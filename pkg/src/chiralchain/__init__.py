"""Correlated two-photon transport through a chiral chain of Lambda-type emitters.

Two solution routes are provided: the S-matrix eigenstate expansion for a
lossless chain (:mod:`.eigenstates`, :mod:`.propagation`) and the
emitter-by-emitter cascade recursion valid with losses (:mod:`.cascade`).
"""

__version__ = "0.1.0"

from .analysis import (critical_chain_length, eit_optimal_transmission, optimal_chain_length,
                       sweep)
from .cascade import (BarCoeffs, CascadeCoeffs, advance_one_emitter, cascade_init, evaluate_F,
                      g2_cascade, propagate_chain)
from .eigenstates import (Eigenstate, NuPair, StateClass, continuum_state, eigenvalue,
                          find_bound_state, nu_tilde_of)
from .errors import *  # noqa: F401,F403
from .model import (REFERENCE_PARAMS, DerivedCoeffs, ModelParams, coupling_efficiency,
                    derive_coefficients, single_photon_transmission, two_photon_transmission)
from .propagation import (NuDomainSplit, g2_spectral, g2_zero_spectral, output_wavefunction,
                          split_nu_axis)
from .results import CorrelationCurve, SweepResult
