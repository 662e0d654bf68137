"""Physical parameters and the complex constants every equation is written in.

Units: all rates and detunings are measured in units of the guided decay rate
Gamma, lengths and times in units of 1/Gamma, and the waveguide group velocity
is one.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

from .errors import DegenerateAlpha, DegenerateKappa

TOL_ALPHA = 1e-9
TOL_KAPPA = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one Lambda-type emitter of the (homogeneous) chain.

    Attributes:
        rabi: control-field Rabi frequency Omega.
        delta: single-photon detuning omega_e - omega.
        delta_bar: two-photon detuning omega_b - (omega - omega_bar).
        gamma_loss: decay rate into non-guided modes.
        total_energy: two-photon energy E; only sets the centre-of-mass phase.
        gamma_guided: decay rate into the guided mode (the unit, keep at 1).
    """

    rabi: float
    delta: float
    delta_bar: float
    gamma_loss: float = 0.0
    total_energy: float = 0.0
    gamma_guided: float = 1.0

    def __post_init__(self):
        for name in ("rabi", "delta", "delta_bar", "gamma_loss", "total_energy", "gamma_guided"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite real number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.gamma_guided <= 0:
            raise ValueError("gamma_guided must be positive")
        if self.gamma_loss < 0:
            raise ValueError("gamma_loss must be non-negative")
        if self.rabi < 0:
            raise ValueError("rabi must be non-negative")

    @property
    def lossless(self) -> bool:
        return self.gamma_loss == 0.0

    def replace(self, **changes) -> "ModelParams":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return ModelParams(**values)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


#: Lossless reference set with strong antibunching after ten emitters.
REFERENCE_PARAMS = ModelParams(rabi=0.5, delta=0.25, delta_bar=-0.25)


@dataclass(frozen=True)
class DerivedCoeffs:
    """Complex constants alpha, eta, mu and the roots kappa1, kappa2.

    kappa1 and kappa2 solve kappa**2 - eta*kappa + alpha = 0 and are ordered
    by descending imaginary part.
    """

    alpha: complex
    eta: complex
    mu: complex
    kappa1: complex
    kappa2: complex
    params: ModelParams = field(compare=False)

    @property
    def gamma(self) -> float:
        """Guided decay rate Gamma."""
        return self.params.gamma_guided


def _alpha_eta_mu(params: ModelParams, tol_alpha: float = TOL_ALPHA):
    G = params.gamma_guided
    half_width = (params.gamma_loss + G) / 2
    alpha = params.rabi**2 + 1j * params.delta_bar * (1j * params.delta + half_width)
    eta = 1j * (params.delta + params.delta_bar) + half_width
    mu = -1j * G * params.delta_bar
    if abs(alpha) < tol_alpha * G**2:
        raise DegenerateAlpha(f"|alpha| = {abs(alpha):.3e} below tolerance for {params}")
    return alpha, eta, mu


def derive_coefficients(params: ModelParams, tol_alpha: float = TOL_ALPHA,
                        tol_kappa: float = TOL_KAPPA) -> DerivedCoeffs:
    """Compute alpha, eta, mu and the kappa roots for ``params``.

    Raises:
        DegenerateAlpha: if |alpha| < tol_alpha * Gamma**2.
        DegenerateKappa: if |kappa1 - kappa2| < tol_kappa * Gamma.
    """
    G = params.gamma_guided
    alpha, eta, mu = _alpha_eta_mu(params, tol_alpha)
    root = cmath.sqrt(eta * eta - 4 * alpha)
    k_a, k_b = (eta + root) / 2, (eta - root) / 2
    if abs(k_a - k_b) < tol_kappa * G:
        raise DegenerateKappa(f"kappa roots coincide ({k_a}) for {params}")
    kappa1, kappa2 = (k_a, k_b) if k_a.imag >= k_b.imag else (k_b, k_a)
    return DerivedCoeffs(alpha=alpha, eta=eta, mu=mu, kappa1=kappa1, kappa2=kappa2,
                         params=params)


def single_photon_transmission(params: ModelParams) -> complex:
    """Transmission amplitude t = (alpha + mu) / alpha of one photon past one emitter.

    Raises:
        DegenerateAlpha: if alpha vanishes.  Coinciding kappa roots are fine here.
    """
    alpha, _, mu = _alpha_eta_mu(params)
    t = (alpha + mu) / alpha

    G, g = params.gamma_guided, params.gamma_loss
    base = params.rabi**2 - params.delta * params.delta_bar
    explicit = (base + 0.5j * (g - G) * params.delta_bar) / (base + 0.5j * (g + G) * params.delta_bar)
    if abs(t - explicit) > 1e-12 * max(abs(t), 1.0):
        raise ArithmeticError(f"transmission self-check failed: {t} vs {explicit}")
    return t


def two_photon_transmission(params: ModelParams, n_emitters: int) -> float:
    """Probability |T_N|**2 = |t|**(4N) that two uncorrelated photons pass N emitters."""
    if n_emitters < 0:
        raise ValueError("n_emitters must be non-negative")
    if n_emitters == 0:
        return 1.0
    return abs(single_photon_transmission(params)) ** (4 * n_emitters)


def coupling_efficiency(params: ModelParams) -> float:
    """beta = Gamma / (gamma + Gamma)."""
    return params.gamma_guided / (params.gamma_loss + params.gamma_guided)
