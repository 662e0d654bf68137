"""Two-photon eigenstates of the single-emitter S-matrix for the lossless chain.

A transmitted pair with total energy E and relative coordinate r = x - x' < 0
is an eigenstate when

    F(r) = A exp(-i nu r) + B exp(i nu r) + C exp(-i nut r) + D exp(i nut r),

where nut (the partner momentum) is fixed by nu through a Moebius map in
nu**2.  Continuum states have real nu; the bound state has complex nu and
decays for r -> -inf.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cascade import ExponentialSum
from .errors import (DivergentState, MultipleRoots, NoRootFound, PoleAtNu, TieBreak,
                     UnsupportedRegime)
from .model import DerivedCoeffs

TOL_POLE = 1e-12
TOL_TIE = 1e-12
TOL_ROOT = 1e-10


class StateClass(enum.Enum):
    PLANE_WAVES_I = "PlaneWavesOnly_I"
    PLANE_WAVES_II = "PlaneWavesOnly_II"
    PLANE_WAVES_LOCALIZED = "PlaneWavesPlusLocalized"
    BOUND = "Bound"


@dataclass(frozen=True)
class NuPair:
    """Relative momentum nu and its partner nu_tilde with 0 <= arg(nu_tilde) < pi."""

    nu: complex
    nu_tilde: complex


@dataclass(frozen=True)
class Eigenstate:
    """Normalized eigenstate F_{E,nu}(r) for r <= 0, extended to r > 0 by symmetry.

    Attributes:
        state_class: which of the three classes of states this is.
        family: construction used: "D0", "C0", "I", "II" or "bound".
        coeff_*: amplitudes of exp(-i nu r), exp(i nu r), exp(-i nut r), exp(i nut r).
        norm: normalization factor (xi or xi_b), already divided out.
        eigenvalue: lambda(E, nu).
    """

    state_class: StateClass
    family: str
    nu_pair: NuPair
    coeff_minus_nu: complex
    coeff_plus_nu: complex
    coeff_minus_nutilde: complex
    coeff_plus_nutilde: complex
    norm: float
    eigenvalue: complex
    notes: tuple = field(default=(), compare=False)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([self.coeff_minus_nu, self.coeff_plus_nu,
                         self.coeff_minus_nutilde, self.coeff_plus_nutilde])

    @property
    def exponents(self) -> np.ndarray:
        """Exponents s of exp(s r) matching :attr:`amplitudes`."""
        nu, nt = self.nu_pair.nu, self.nu_pair.nu_tilde
        return np.array([-1j * nu, 1j * nu, -1j * nt, 1j * nt])

    def as_exponential_sum(self) -> ExponentialSum:
        return ExponentialSum(self.amplitudes, self.exponents)

    def __call__(self, r):
        r = -np.abs(np.asarray(r, dtype=float))
        return self.as_exponential_sum()(r)


# -- building blocks ---------------------------------------------------------

def _km(c: DerivedCoeffs):
    G = c.gamma
    return G * (2 * c.eta - G) + 2 * c.mu, c.mu * (2 * c.alpha + c.mu)


def _prefactor(c: DerivedCoeffs):
    G = c.gamma
    return G * (G * c.alpha + c.eta * c.mu) + c.mu**2


def _u(c: DerivedCoeffs, nu, nup):
    G, eta, mu = c.gamma, c.eta, c.mu
    _, M = _km(c)
    bracket = (2 * (2 * eta - G) * nu * nup * (nu + nup)
               + 2j * mu * (nu * nu + nu * nup + nup * nup)
               - 1j * G * (2 * eta - G) * nu * nup
               + G * mu * (nu + nup)
               - 1j * M)
    return _prefactor(c) * (nu - nup) * bracket


def _h(c: DerivedCoeffs, nu):
    return nu**4 + (c.eta**2 - 2 * c.alpha) * nu**2 + c.alpha**2


def _numerator(c: DerivedCoeffs, nu):
    s = c.alpha + c.mu
    return nu**4 + ((c.gamma - c.eta) ** 2 - 2 * s) * nu**2 + s**2


def _xi(c: DerivedCoeffs, nu, nt):
    K, M = _km(c)
    third = (4 * _prefactor(c) ** 2 * nt.real
             * abs(nu * (K * nt**2 - M) * (K * nu**2 - M)))
    inner = abs(_u(c, nt, -nu)) ** 2 + abs(_u(c, nu, nt)) ** 2 + third
    return 2 * math.pi * abs(_h(c, nu)) * cmath.sqrt(inner)


def _xi_bound(c: DerivedCoeffs, nu, nt):
    a = _u(c, nt, -nu) * _h(c, nu)
    b = _u(c, nu, -nu) * _h(c, nt)
    cross = (np.conj(_u(c, nt, -nu)) * _u(c, nu, -nu) * np.conj(_h(c, nu)) * _h(c, nt)
             / (np.conj(nu) - nt))
    inner = abs(a) ** 2 / (2 * nu.imag) + abs(b) ** 2 / (2 * nt.imag) - 2 * cross.imag
    return 2 * math.sqrt(math.pi) * math.sqrt(inner)


# -- public API --------------------------------------------------------------

def nu_tilde_sq(coeffs: DerivedCoeffs, nu: complex, tol_pole: float = TOL_POLE) -> complex:
    """Right-hand side of the nu -> nu_tilde**2 map.

    Raises:
        PoleAtNu: if the denominator K nu**2 - M vanishes (nu_tilde diverges).
        UnsupportedRegime: K = M = 0 (Delta = Delta_bar = 0), where the map is undefined.
    """
    K, M = _km(coeffs)
    if K == 0 and M == 0:
        raise UnsupportedRegime("nu_tilde map undefined for Delta = Delta_bar = 0")
    denom = K * nu * nu - M
    if abs(denom) < tol_pole * (abs(K) * abs(nu) ** 2 + abs(M)):
        raise PoleAtNu(f"nu_tilde diverges at nu = {nu}")
    return (M * nu * nu + coeffs.alpha**2 * K + (coeffs.eta**2 - 2 * coeffs.alpha) * M) / denom


def _branch(nt2: complex) -> complex:
    nt = cmath.sqrt(nt2)
    if math.atan2(nt.imag, nt.real) < 0:
        nt = -nt
    return nt


def nu_tilde_of(coeffs: DerivedCoeffs, nu: complex, tol_pole: float = TOL_POLE) -> complex:
    """Partner momentum nu_tilde with the phase convention 0 <= arg < pi."""
    return _branch(nu_tilde_sq(coeffs, nu, tol_pole))


def eigenvalue(coeffs: DerivedCoeffs, nu, tol_pole: float = TOL_POLE):
    """S-matrix eigenvalue lambda(E, nu) (vectorized over nu)."""
    den = _h(coeffs, np.asarray(nu, dtype=complex))
    scale = np.abs(nu) ** 4 + abs(coeffs.alpha) ** 2
    if np.any(np.abs(den) < tol_pole * scale):
        raise PoleAtNu("lambda has a pole at the requested nu")
    out = _numerator(coeffs, np.asarray(nu, dtype=complex)) / den
    return complex(out) if np.ndim(out) == 0 else out


def _require_lossless(coeffs: DerivedCoeffs):
    if coeffs.params.gamma_loss != 0:
        raise UnsupportedRegime("S-matrix eigenstates are only defined for gamma = 0")


def real_nu_pair(coeffs: DerivedCoeffs, nu: float, tol_pole: float = TOL_POLE) -> NuPair:
    """NuPair for real nu at gamma = 0 with nu_tilde**2 snapped onto the real axis."""
    nt2 = nu_tilde_sq(coeffs, nu, tol_pole)
    nt2 = complex(nt2.real, 0.0)
    return NuPair(complex(nu), _branch(nt2))


def _d0(c, nu, nt, xi):
    return (_u(c, nt, -nu) * _h(c, nu) / xi, _u(c, nu, nt) * _h(c, nu) / xi,
            -_u(c, nu, -nu) * _h(c, nt) / xi, 0j)


def _c0(c, nu, nt, xi):
    return (_u(c, -nt, -nu) * _h(c, nu) / xi, _u(c, nu, -nt) * _h(c, nu) / xi,
            0j, -_u(c, nu, -nu) * _h(c, nt) / xi)


def continuum_state(coeffs: DerivedCoeffs, nu: float, family: str = "I") -> Eigenstate:
    """Normalized continuum eigenstate for real nu > 0.

    Args:
        family: "D0" (D = 0), "C0" (C = 0) or the orthogonalized
            combinations "I" and "II".

    Raises:
        DivergentState: C = 0 type state requested while nu_tilde is not real.
        TieBreak: the sign selecting the I/II combination is undetermined.
    """
    _require_lossless(coeffs)
    if family not in ("D0", "C0", "I", "II"):
        raise ValueError(f"unknown family {family!r}")
    nu = float(nu)
    if nu == 0.0:
        raise ValueError("nu must be nonzero")
    pair = real_nu_pair(coeffs, abs(nu))
    nu_c, nt = pair.nu, pair.nu_tilde
    localized = nt.imag > 0
    xi = _xi(coeffs, nu_c, nt)

    choice = family
    if family in ("I", "II"):
        if localized:
            if family == "II":
                raise DivergentState("family II needs a real nu_tilde")
            choice = "D0"
        else:
            K, M = _km(coeffs)
            ratio = ((K * nt**2 - M) / (K * nu_c**2 - M)).real
            if abs(ratio) < TOL_TIE:
                raise TieBreak(f"zeta undetermined at nu = {nu}")
            zeta = 1 if ratio > 0 else -1
            larger = nu_c.real**2 > nt.real**2
            if family == "I":
                choice = "D0" if (zeta < 0 or larger) else "C0"
            else:
                choice = "C0" if (zeta < 0 or larger) else "D0"
    if choice == "C0" and localized:
        raise DivergentState("C = 0 state diverges for r -> -inf when nu_tilde is not real")

    coeffs4 = _d0(coeffs, nu_c, nt, xi) if choice == "D0" else _c0(coeffs, nu_c, nt, xi)
    if localized:
        cls = StateClass.PLANE_WAVES_LOCALIZED
    elif family in ("I", "D0"):
        cls = StateClass.PLANE_WAVES_I
    else:
        cls = StateClass.PLANE_WAVES_II
    return Eigenstate(cls, family, pair, *coeffs4, norm=float(abs(xi)),
                      eigenvalue=eigenvalue(coeffs, nu_c), notes=(f"built from {choice}",))


# -- bound state -------------------------------------------------------------

def _boundary_matrix(c: DerivedCoeffs, nu, nt):
    """Columns: boundary conditions for exp(-i nu r) and exp(-i nut r), denominators cleared."""
    G = c.gamma
    L, H = _numerator(c, nu), _h(c, nu)
    cols = []
    for k in (nu, nt):
        s = -1j * k
        d = s * s + c.eta * s + c.alpha
        n1 = s * s + (c.eta - G) * s + c.alpha + c.mu
        cols.append(((L + H) * d - 2 * n1 * H, s * (L - H) * d - G * (n1 - d) * H))
    return np.array(cols).T


def _reduced_det(c, nu):
    # det vanishes trivially at nu = nut; dividing it out keeps Newton away from that root
    nt = nu_tilde_of(c, nu)
    m = _boundary_matrix(c, nu, nt)
    return (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) / (nu - nt)


def boundary_residual(coeffs: DerivedCoeffs, nu: complex) -> float:
    """Scale-free residual |det| / (|col1| |col2|) of the bound-state boundary system."""
    nt = nu_tilde_of(coeffs, nu)
    m = _boundary_matrix(coeffs, nu, nt)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return float(abs(det) / (np.linalg.norm(m[:, 0]) * np.linalg.norm(m[:, 1])))


def _newton(f, z, maxit=100):
    for _ in range(maxit):
        fz = f(z)
        h = 1e-7 * max(1.0, abs(z))
        d = (f(z + h) - f(z - h)) / (2 * h)
        if d == 0:
            break
        step = fz / d
        if abs(step) > 0.5 * abs(z):
            step *= 0.5 * abs(z) / abs(step)
        z = z - step
        if abs(step) < 1e-14 * max(1.0, abs(z)):
            break
    return z


def find_bound_state(coeffs: DerivedCoeffs, grid: int = 7, box: float = 5.0,
                     tol: float = TOL_ROOT) -> Eigenstate:
    """Locate the bound state (B = D = 0, Im nu > 0, Im nu_tilde > 0).

    Newton iteration on the boundary-condition determinant is started from a
    grid x grid lattice of seeds in (0, box) x (0, box).  The pair (nu, nut)
    and its mirror (-conj(nu), ...) describe the same state; the
    representative with Re nu >= 0 is returned.

    Raises:
        NoRootFound: no seed converged to an admissible root.
    """
    _require_lossless(coeffs)
    seeds = np.linspace(0.3, box - 0.3, grid)
    roots, best = [], math.inf
    for x in seeds:
        for y in seeds:
            try:
                with np.errstate(all="ignore"):
                    z = _newton(lambda v: _reduced_det(coeffs, v), complex(x, y))
                nt = nu_tilde_of(coeffs, z)
                res = boundary_residual(coeffs, z)
            except (PoleAtNu, ZeroDivisionError, OverflowError, ValueError):
                continue
            if not np.isfinite(res):
                continue
            best = min(best, res)
            if res > tol or z.imag <= 1e-9 or nt.imag <= 1e-9:
                continue
            if abs(z - nt) < 1e-6 * max(1.0, abs(z)):
                continue
            if z.real < 0:
                z, nt = nt, z
                if z.real < 0:
                    continue
            if not any(abs(z - q) < 1e-6 * max(1.0, abs(z)) for q in roots):
                roots.append(z)
    if not roots:
        raise NoRootFound("no bound-state root found on the seed grid", min_residual=best)

    roots.sort(key=abs)
    notes = ()
    if len(roots) > 1:
        warnings.warn(f"{len(roots)} bound-state roots found, using the smallest |nu|",
                      MultipleRoots, stacklevel=2)
        notes = tuple(f"other root {q}" for q in roots[1:])
    nu = roots[0]
    nt = nu_tilde_of(coeffs, nu)
    xib = _xi_bound(coeffs, nu, nt)
    return Eigenstate(StateClass.BOUND, "bound", NuPair(nu, nt),
                      _u(coeffs, nt, -nu) * _h(coeffs, nu) / xib, 0j,
                      -_u(coeffs, nu, -nu) * _h(coeffs, nt) / xib, 0j,
                      norm=xib, eigenvalue=eigenvalue(coeffs, nu), notes=notes)
