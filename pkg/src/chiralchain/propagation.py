"""Transmitted two-photon wavefunction from the S-matrix eigenstate expansion (gamma = 0).

The uncorrelated input sqrt(2)/(2 pi) is expanded in the bound state and the
continuum states; passing N emitters multiplies each component by lambda**N.
The nu integral is split where nu_tilde**2 changes sign (zeros and poles of
the nu -> nu_tilde**2 map), further cut into panels of limited accumulated
phase N arg(lambda), and integrated adaptively.  Beyond nu_max only the plane
waves exp(-+i nu r) carry weight; their coefficients are smooth in
w = nu_max / nu, so that tail is integrated analytically with generalized
exponential integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import exp1

from .eigenstates import (_h, _km, _u, _xi, _xi_bound, eigenvalue, find_bound_state,
                          real_nu_pair)
from .errors import PoleAtNu, QuadratureFailure, TailTooLarge, UnsupportedRegime
from .model import DerivedCoeffs, ModelParams, derive_coefficients
from .results import CorrelationCurve

NU_MAX = 40.0
EPS_ABS = 1e-8
TAIL_DEGREE = 12
PANEL_PHASE = math.pi / 4
PSI_IN = math.sqrt(2) / (2 * math.pi)
CLASSES = ("bound", "localized", "plane")

NEGATIVE = "NutildeNegative"
NONNEG = "NutildeNonneg"


@dataclass(frozen=True)
class NuDomainSplit:
    """Partition of [0, nu_max] by the sign of nu_tilde**2.

    ``singular[i]`` marks boundaries that are zeros or poles of the map, where
    the integrand has inverse square-root behaviour.  ``tail_estimate`` is the
    estimated error of the analytic nu > nu_max tail at r = 0.
    """

    boundaries: tuple
    labels: tuple
    nu_max: float
    tail_estimate: float
    singular: tuple = ()

    def intervals(self):
        return list(zip(self.boundaries[:-1], self.boundaries[1:], self.labels))


# -- generalized exponential integral ----------------------------------------

def expn_complex(n_max: int, z) -> np.ndarray:
    """E_1(z) ... E_n_max(z) for complex z off the negative real axis.

    Row n of the result holds E_n (row 0 is unused).  Small |z| uses upward
    recursion from E_1; large |z| uses the continued fraction, since the
    recursion is unstable there.
    """
    z = np.asarray(z, dtype=complex)
    out = np.full((n_max + 1,) + z.shape, np.nan + 0j)
    small = np.abs(z) <= 2.0
    zs = z[small]
    e = exp1(zs)
    out[1][small] = e
    for n in range(2, n_max + 1):
        e = (np.exp(-zs) - zs * e) / (n - 1)
        out[n][small] = e

    zl = z[~small]
    for n in range(1, n_max + 1):
        # modified Lentz evaluation of the continued fraction
        b = zl + n
        c = np.full_like(zl, 1e300)
        d = 1 / b
        h = d.copy()
        for i in range(1, 5000):
            a = -i * (n - 1 + i)
            b = b + 2
            d = 1 / (a * d + b)
            c = b + a / c
            delta = c * d
            h = h * delta
            if np.all(np.abs(delta - 1) < 1e-16):
                break
        out[n][~small] = h * np.exp(-zl)
    return out


# -- domain split ------------------------------------------------------------

def _check_lossless(coeffs: DerivedCoeffs):
    if coeffs.params.gamma_loss != 0:
        raise UnsupportedRegime("the spectral method requires gamma = 0; use the cascade method")


def _check_map(coeffs: DerivedCoeffs):
    K, M = _km(coeffs)
    if abs(K) < 1e-10 or abs(M) < 1e-10:
        raise UnsupportedRegime("nu_tilde map is degenerate (Delta = 0, Delta_bar = 0 or Omega**2 = Delta*Delta_bar)")


def _constant_map(coeffs: DerivedCoeffs) -> bool:
    """True when nu_tilde**2 does not depend on nu (the two-level limit Omega = 0)."""
    K, M = _km(coeffs)
    b = coeffs.alpha**2 * K + (coeffs.eta**2 - 2 * coeffs.alpha) * M
    return abs(-M * M - K * b) < 1e-10 * (abs(M) ** 2 + abs(K * b))


def _check_regime(coeffs: DerivedCoeffs):
    _check_lossless(coeffs)
    _check_map(coeffs)
    if _constant_map(coeffs):
        raise UnsupportedRegime("nu_tilde is independent of nu (two-level limit Omega = 0)")


def _special_points(coeffs: DerivedCoeffs, nu_max: float):
    """Real positive zeros and poles of nu_tilde**2 inside (0, nu_max)."""
    K, M = _km(coeffs)
    zero_sq = -(coeffs.alpha**2 * K + (coeffs.eta**2 - 2 * coeffs.alpha) * M) / M
    pole_sq = M / K
    pts = []
    for x in (zero_sq, pole_sq):
        if abs(x.imag) <= 1e-10 * max(1.0, abs(x)) and 0 < x.real < nu_max**2:
            pts.append(math.sqrt(x.real))
    return sorted(pts)


def _label(coeffs, nu):
    return NONNEG if real_nu_pair(coeffs, nu).nu_tilde.imag == 0 else NEGATIVE


def split_nu_axis(coeffs: DerivedCoeffs, nu_max: float = NU_MAX, tol: float = 1e-6,
                  n_emitters: int = 0) -> NuDomainSplit:
    """Partition [0, nu_max] into intervals of constant sign of nu_tilde**2.

    In the two-level limit (Omega = 0) the map is constant and the split is a
    single interval with ``tail_estimate`` NaN.

    Raises:
        UnsupportedRegime: gamma > 0, or K or M vanishes.
        TailTooLarge: the tail error estimate exceeds ``tol``.
    """
    _check_lossless(coeffs)
    _check_map(coeffs)
    if nu_max <= 0:
        raise ValueError("nu_max must be positive")
    if _constant_map(coeffs):
        # nu_tilde**2 = M/K everywhere; the zero and pole cancel
        K, M = _km(coeffs)
        special = []
        bounds = [0.0, float(nu_max)]
        labels = (NEGATIVE if (M / K).real < 0 else NONNEG,)
    else:
        special = _special_points(coeffs, nu_max)
        bounds = [0.0] + special + [float(nu_max)]
        labels = tuple(_label(coeffs, 0.5 * (a + b)) for a, b in zip(bounds[:-1], bounds[1:]))
    singular = tuple([False] + [True] * len(special) + [False])
    # with a constant map the eigenstate normalization vanishes, so no tail exists to estimate
    tail_err = math.nan if not special and _constant_map(coeffs) else _tail_error(
        coeffs, nu_max, n_emitters, labels[-1])
    if tail_err > tol:
        raise TailTooLarge(f"tail error estimate {tail_err:.2e} exceeds {tol:.2e}; raise nu_max")
    return NuDomainSplit(tuple(bounds), labels, float(nu_max), tail_err, singular)


# -- integrand ---------------------------------------------------------------

def _projection_d0(c, nu, nt):
    return np.conj((_u(c, nu, nt) - _u(c, nt, -nu)) / nu * _h(c, nu)
                   + _u(c, nu, -nu) / nt * _h(c, nt))


def _projection_c0(c, nu, nt):
    return np.conj((_u(c, nu, -nt) - _u(c, -nt, -nu)) / nu * _h(c, nu)
                   - _u(c, nu, -nu) / nt * _h(c, nt))


def _continuum_terms(c: DerivedCoeffs, nu: float, n: int):
    """Amplitudes and exponents of the nu integrand (prefactor included).

    Returns (amplitudes, exponents) for the terms exp(s r).
    """
    try:
        # nodes may sit arbitrarily close to the pole; the singularity there is integrable
        pair = real_nu_pair(c, nu, tol_pole=0.0)
    except (PoleAtNu, ZeroDivisionError):
        return np.zeros(4, dtype=complex), np.zeros(4, dtype=complex)
    nu_c, nt = pair.nu, pair.nu_tilde
    x = _xi(c, nu_c, nt)
    scale = 2 * math.sqrt(2) * 1j * eigenvalue(c, nu_c) ** n / (x * x)
    hn, hnt, unn = _h(c, nu_c), _h(c, nt), _u(c, nu_c, -nu_c)
    pd = _projection_d0(c, nu_c, nt)
    amps_d = pd * np.array([_u(c, nt, -nu_c) * hn, _u(c, nu_c, nt) * hn, -unn * hnt, 0])
    if nt.imag > 0:
        amps = amps_d
    else:
        pc = _projection_c0(c, nu_c, nt)
        amps_c = pc * np.array([_u(c, -nt, -nu_c) * hn, _u(c, nu_c, -nt) * hn, 0, -unn * hnt])
        amps = 0.5 * (amps_d + amps_c)
    exps = np.array([-1j * nu_c, 1j * nu_c, -1j * nt, 1j * nt])
    return scale * amps, exps


def _eval_terms(amps, exps, r):
    keep = amps != 0
    return (amps[keep] * np.exp(np.multiply.outer(r, exps[keep]))).sum(axis=-1)


def _bound_term(c: DerivedCoeffs, bound, n: int, r):
    nu, nt = bound.nu_pair.nu, bound.nu_pair.nu_tilde
    xb = _xi_bound(c, nu, nt)
    proj = np.conj(_u(c, nu, -nu) * _h(c, nt) / nt - _u(c, nt, -nu) * _h(c, nu) / nu) / xb
    return 2 * math.sqrt(2) * 1j * bound.eigenvalue**n * proj * bound(r)


# -- tail beyond nu_max --------------------------------------------------------

def _tail_samples(c, nu_max, n, degree):
    k = np.arange(degree + 1)
    w = 0.5 * (1 + np.cos(np.pi * (k + 0.5) / (degree + 1)))
    vals = np.empty((degree + 1, 2), dtype=complex)
    for i, wi in enumerate(w):
        nu = nu_max / wi
        amps, _ = _continuum_terms(c, nu, n)
        vals[i] = amps[:2] * nu * nu
    return w, vals


def _tail_from_fit(w, vals, degree, nu_max, r):
    out = np.zeros(r.shape, dtype=complex)
    for j, sign in ((0, -1.0), (1, 1.0)):
        coef = np.polynomial.polynomial.polyfit(w, vals[:, j], degree)
        a = sign * r
        zero = a == 0
        en = np.empty((degree + 3,) + r.shape, dtype=complex)
        if np.any(~zero):
            en[:, ~zero] = expn_complex(degree + 2, -1j * a[~zero] * nu_max)
        for m in range(2, degree + 3):
            en[m][zero] = 1.0 / (m - 1)
        # int_{nu_max}^inf exp(i a nu) (nu_max/nu)**m nu**-2 dnu = E_{m+2}(-i a nu_max) / nu_max
        out += sum(coef[m] * en[m + 2] for m in range(degree + 1)) / nu_max
    return out


def _tail(c, nu_max, n, r, degree=TAIL_DEGREE):
    w, vals = _tail_samples(c, nu_max, n, degree)
    return _tail_from_fit(w, vals, degree, nu_max, r)


def _tail_error(c, nu_max, n, last_label, degree=TAIL_DEGREE):
    r0 = np.zeros(1)
    w, vals = _tail_samples(c, nu_max, n, degree)
    full = _tail_from_fit(w, vals, degree, nu_max, r0)[0]
    w2, vals2 = _tail_samples(c, nu_max, n, degree - 4)
    coarse = _tail_from_fit(w2, vals2, degree - 4, nu_max, r0)[0]
    # the neglected exp(+-i nut r) terms decay like nu**-5
    amps, _ = _continuum_terms(c, nu_max, n)
    rest = np.abs(amps[2:]).sum() * nu_max / 4
    return float(abs(full - coarse) + rest)


# -- quadrature ----------------------------------------------------------------

def _phase_cuts(c, a, b, n):
    if n == 0:
        return []
    grid = np.linspace(a, b, 2001)[1:-1]
    phase = n * np.unwrap(np.angle(eigenvalue(c, grid)))
    steps = np.floor((phase - phase[0]) / PANEL_PHASE)
    idx = np.nonzero(np.diff(steps) != 0)[0]
    return list(grid[idx + 1])


def _panels(c, split: NuDomainSplit, n: int):
    """Yield (a, b, label, singular_left, singular_right)."""
    sing = split.singular or (False,) * len(split.boundaries)
    for i, (a, b, label) in enumerate(split.intervals()):
        left, right = sing[i], sing[i + 1]
        cuts = [a] + _phase_cuts(c, a, b, n) + [b]
        if left and right and len(cuts) == 2:
            cuts = [a, 0.5 * (a + b), b]
        for k, (p, q) in enumerate(zip(cuts[:-1], cuts[1:])):
            yield p, q, label, left and k == 0, right and k == len(cuts) - 2


def _integrate_panel(c, a, b, sl, sr, n, r, epsabs, limit):
    def f(nu):
        amps, exps = _continuum_terms(c, nu, n)
        return _eval_terms(amps, exps, r)

    # nu = a + (b - a) w**2 removes an inverse square-root endpoint singularity
    if sl:
        g = lambda w: f(a + (b - a) * w * w) * 2 * (b - a) * w
    elif sr:
        g = lambda w: f(b - (b - a) * w * w) * 2 * (b - a) * w
    else:
        g = lambda w: f(a + (b - a) * w) * (b - a)
    val, err = quad_vec(g, 0.0, 1.0, epsabs=epsabs, epsrel=0.0, limit=limit)
    return val, err


def _wavefunction(params: ModelParams, n: int, r: np.ndarray, split=None, bound=None,
                  epsabs=EPS_ABS, limit=20000, fail_above=1e-5):
    c = derive_coefficients(params)
    _check_regime(c)
    if split is None:
        split = split_nu_axis(c, n_emitters=n)
    if bound is None:
        bound = find_bound_state(c)
    parts = {name: np.zeros(r.shape, dtype=complex) for name in CLASSES}
    parts["bound"] = _bound_term(c, bound, n, r)
    total_err = 0.0
    with np.errstate(all="ignore"):
        for a, b, label, sl, sr in _panels(c, split, n):
            val, err = _integrate_panel(c, a, b, sl, sr, n, r, epsabs, limit)
            parts["localized" if label == NEGATIVE else "plane"] += val
            total_err += err
        tail = _tail(c, split.nu_max, n, r)
    parts["plane" if split.labels[-1] == NONNEG else "localized"] += tail
    total_err += split.tail_estimate
    if not np.isfinite(total_err) or total_err > fail_above:
        raise QuadratureFailure(f"quadrature error estimate {total_err:.2e} too large",
                                error_estimate=total_err)
    total = parts["bound"] + parts["localized"] + parts["plane"]
    return total, parts, total_err


def output_wavefunction(params: ModelParams, n_emitters: int, r, split: NuDomainSplit | None = None):
    """psi_out at relative coordinate r (mapped to -|r|) after n_emitters emitters.

    The centre-of-mass phase exp(i E r_c) is dropped.  Returns
    ``(total, by_class)`` where by_class maps "bound", "localized" and
    "plane" to their contributions.
    """
    if n_emitters < 0:
        raise ValueError("n_emitters must be non-negative")
    scalar = np.ndim(r) == 0
    rr = -np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    total, parts, _ = _wavefunction(params, n_emitters, rr, split)
    if scalar:
        return complex(total[0]), {k: complex(v[0]) for k, v in parts.items()}
    return total, parts


def default_r_grid():
    return np.linspace(-10.0, 0.0, 400)


def g2_spectral(params: ModelParams, n_emitters: int, r_grid=None, nu_max: float = NU_MAX) -> CorrelationCurve:
    """g2(r) = 2 pi**2 |psi_out(r)|**2 from the eigenstate expansion."""
    if r_grid is None:
        r_grid = default_r_grid()
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    c = derive_coefficients(params)
    _check_regime(c)
    split = split_nu_axis(c, nu_max=nu_max, n_emitters=n_emitters)
    bound = find_bound_state(c)
    total, parts, err = _wavefunction(params, n_emitters, -np.abs(r_grid), split, bound)
    return CorrelationCurve(
        r_grid=r_grid,
        g2=2 * math.pi**2 * np.abs(total) ** 2,
        contributions=parts,
        amplitude=total,
        meta={"method": "spectral", "n_emitters": int(n_emitters), "params": params.as_dict(),
              "nu_max": float(nu_max), "quadrature_error": float(err),
              "tail_estimate": split.tail_estimate, "nu_bound": bound.nu_pair.nu},
    )


def g2_zero_spectral(params: ModelParams, n_values, nu_max: float = NU_MAX) -> np.ndarray:
    """g2(0) for several chain lengths sharing one bound-state search."""
    c = derive_coefficients(params)
    _check_regime(c)
    bound = find_bound_state(c)
    out = []
    for n in n_values:
        split = split_nu_axis(c, nu_max=nu_max, n_emitters=int(n))
        total, _, _ = _wavefunction(params, int(n), np.zeros(1), split, bound)
        out.append(2 * math.pi**2 * abs(total[0]) ** 2)
    return np.array(out)
