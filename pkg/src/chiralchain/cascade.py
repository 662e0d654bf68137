"""Emitter-by-emitter propagation of the two-photon amplitude (any loss rate).

After both photons have passed j emitters the relative-coordinate amplitude
(r < 0) has the closed form

    F_jj(r) = T_j + sum_n [A_jn exp(kappa1 r) + B_jn exp(kappa2 r)] r**n / n!

and one emitter maps the coefficient set {T, A, B} of order j to order j + 1
through an intermediate set for the state where only the leading photon has
passed.  The recurrences are triangular and are solved top-down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularBoundarySystem, StabilityError, ZeroTransmission
from .model import DerivedCoeffs, ModelParams, derive_coefficients
from .results import CorrelationCurve

MAX_EMITTERS = 100
TOL_BOUNDARY = 1e-6
_LOG_EVAL_THRESHOLD = 200.0
TOL_PRECISION = 1e-10


@dataclass(frozen=True)
class CascadeCoeffs:
    """Coefficients of F_jj: flat part T_j and the lists A_j, B_j (length j)."""

    order: int
    t_flat: complex
    a: np.ndarray
    b: np.ndarray
    coeffs: DerivedCoeffs
    extended: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.a) != self.order or len(self.b) != self.order:
            raise ValueError("coefficient lists must have length == order")

    def __call__(self, r):
        return evaluate_F(self, r)


@dataclass(frozen=True)
class BarCoeffs:
    """Coefficients of F_{j,j+1}, the state after the leading photon passed emitter j+1."""

    order: int
    t_flat: complex
    a: np.ndarray
    b: np.ndarray
    coeffs: DerivedCoeffs
    extended: tuple | None = field(default=None, compare=False, repr=False)

    def __call__(self, r):
        return evaluate_F(self, r)


# -- scalar core -------------------------------------------------------------
# Written with plain arithmetic so it also runs on mpmath numbers.

def _bar_list(x, kappa, eta, mu, G):
    j = len(x)
    out = [0 * kappa] * j
    diag = 2 * eta * kappa
    c0 = (2 * eta - G) * kappa + mu
    c1 = 2 * kappa + eta - G
    d1 = 2 * kappa + eta
    for n in range(j - 1, -1, -1):
        rhs = c0 * x[n]
        if n + 1 < j:
            rhs += c1 * x[n + 1] - d1 * out[n + 1]
        if n + 2 < j:
            rhs += x[n + 2] - out[n + 2]
        out[n] = rhs / diag
    return out


def _second_list(xbar, kappa, eta, mu, G):
    # Entries n = 1..j; entry 0 is fixed later by the boundary closure.
    j = len(xbar)
    out = [0 * kappa] * (j + 1)
    d = 2 * kappa - eta
    e0 = mu + G * kappa
    e1 = 2 * kappa - eta + G
    for m in range(j, 0, -1):
        rhs = e0 * xbar[m - 1]
        if m < j:
            rhs += e1 * xbar[m]
        if m + 1 < j:
            rhs += xbar[m + 1]
        if m + 1 <= j:
            rhs -= out[m + 1]
        out[m] = rhs / d
    return out


def _first_pass_scalar(T, A, B, alpha, eta, mu, G, k1, k2):
    Tb = (alpha + mu) / alpha * T
    return Tb, _bar_list(A, k1, eta, mu, G), _bar_list(B, k2, eta, mu, G)


def _second_pass_scalar(T, A, B, Tb, Ab, Bb, alpha, eta, mu, G, k1, k2):
    Tn = (alpha + mu) / alpha * Tb
    An = _second_list(Ab, k1, eta, mu, G)
    Bn = _second_list(Bb, k2, eta, mu, G)

    def at(x, i):
        return x[i] if i < len(x) else 0

    s = (-(mu / alpha) ** 2 * T + 2 * (at(Ab, 0) + at(Bb, 0)) - at(A, 0) - at(B, 0))
    d = (at(A, 1) + at(B, 1) - at(An, 1) - at(Bn, 1)
         + (k1 - G) * at(A, 0) + (k2 - G) * at(B, 0)
         + G * (at(Ab, 0) + at(Bb, 0)) + G * mu / alpha * T)
    An[0] = (d - k2 * s) / (k1 - k2)
    Bn[0] = (k1 * s - d) / (k1 - k2)
    return Tn, An, Bn


# -- precision control -------------------------------------------------------
# The coefficients grow roughly geometrically with the chain length while F
# itself stays O(1), so rounding errors are amplified.  Empirically the error
# of F/T_N behaves like eps * growth**3 (flattening to growth**2 at very large
# growth) with growth = max|A,B| / |T|.

def _error_estimate(growth: float, eps: float) -> float:
    return 10 * eps * max(growth, 1.0) ** 3


def _digits_for(log10_growth: float) -> int:
    return int(math.ceil(3 * max(log10_growth, 0.0))) + 20


class _Arith:
    """Number system for one recursion run: python complex or an mpmath context."""

    def __init__(self, dps=None):
        self.dps = dps
        if dps is None:
            self.ctx = None
            self.eps = np.finfo(float).eps
        else:
            import mpmath

            self.ctx = mpmath.MPContext()
            self.ctx.dps = dps
            self.eps = 10.0 ** (-dps)

    def consts(self, params: ModelParams):
        if self.ctx is None:
            c = derive_coefficients(params)
            return c.alpha, c.eta, c.mu, c.gamma, c.kappa1, c.kappa2
        x = self.ctx
        G = x.mpf(params.gamma_guided)
        half_width = (x.mpf(params.gamma_loss) + G) / 2
        delta, delta_bar = x.mpf(params.delta), x.mpf(params.delta_bar)
        alpha = x.mpf(params.rabi) ** 2 + x.mpc(0, 1) * delta_bar * (x.mpc(0, 1) * delta + half_width)
        eta = x.mpc(0, 1) * (delta + delta_bar) + half_width
        mu = x.mpc(0, -1) * G * delta_bar
        root = x.sqrt(eta * eta - 4 * alpha)
        k1, k2 = (eta + root) / 2, (eta - root) / 2
        if k1.imag < k2.imag:
            k1, k2 = k2, k1
        return alpha, eta, mu, G, k1, k2

    def one(self):
        return 1 + 0j if self.ctx is None else self.ctx.mpc(1)

    def growth(self, T, A, B) -> float:
        if not A:
            return 0.0
        if self.ctx is None:
            return max(max(abs(v) for v in A), max(abs(v) for v in B)) / abs(T)
        big = max(max(abs(v) for v in A), max(abs(v) for v in B)) / abs(T)
        return float(self.ctx.log10(big)) if big > 1e300 else float(big)


def _recursion(params, n_emitters, arith, tol, check_tol, on_step=None):
    """Run the triangular recursion; return raw (T, A, B) tuples or None if tol is exceeded.

    ``on_step(j, T, A, B)`` may return True to stop early.  Returns
    (history, log10 of the largest growth seen, first failing order or None).
    """
    alpha, eta, mu, G, k1, k2 = arith.consts(params)
    ratio = ((alpha + mu) / alpha) ** 2
    T, A, B = arith.one(), [], []
    history = [(T, A, B)]
    log_growth = 0.0
    for j in range(1, n_emitters + 1):
        Tb, Ab, Bb = _first_pass_scalar(T, A, B, alpha, eta, mu, G, k1, k2)
        T, A, B = _second_pass_scalar(T, A, B, Tb, Ab, Bb, alpha, eta, mu, G, k1, k2)
        closed = ratio**j
        if abs(T - closed) > check_tol * abs(closed):
            raise StabilityError(f"T_{j} recursion drifted from closed form: {complex(T)} vs {complex(closed)}")
        growth = arith.growth(T, A, B)
        if growth > 1e300:  # mpmath path reports log10 beyond float range
            log_g = growth
            est = math.inf
        else:
            log_g = math.log10(max(growth, 1.0))
            est = _error_estimate(growth, arith.eps)
        log_growth = max(log_growth, log_g)
        if est > tol:
            return history, log_growth, j
        history.append((T, A, B))
        if on_step is not None and on_step(j, T, A, B):
            break
    return history, log_growth, None


def _run_auto(params, n_emitters, precision, tol, check_tol, on_step=None):
    """Dispatch to double or extended precision; return (history, arith)."""
    if precision not in ("auto", "double", "extended"):
        raise ValueError(f"unknown precision {precision!r}")
    if precision in ("auto", "double"):
        arith = _Arith()
        history, log_g, failed = _recursion(params, n_emitters, arith, tol, check_tol, on_step)
        if failed is None:
            return history, arith
        if precision == "double":
            raise StabilityError(
                f"double-precision recursion unreliable beyond N={failed - 1} "
                f"(coefficient growth 10**{log_g:.1f}); use precision='auto' or 'extended'")
        # extrapolate the (roughly linear) growth in log scale to the target order
        predicted = log_g * n_emitters / max(failed, 1)
    else:
        predicted = 0.0
    dps = _digits_for(predicted)
    while True:
        arith = _Arith(dps)
        history, log_g, failed = _recursion(params, n_emitters, arith, tol, check_tol, on_step)
        if failed is None:
            return history, arith
        dps = max(int(dps * 1.5), _digits_for(log_g * n_emitters / failed))


def _wrap(raw, order, coeffs, arith, cls):
    T, A, B = raw
    extended = None if arith.ctx is None else (arith.ctx, T, list(A), list(B))
    with np.errstate(over="ignore"):
        a = np.array([complex(v) for v in A], dtype=complex)
        b = np.array([complex(v) for v in B], dtype=complex)
    return cls(order, complex(T), a, b, coeffs, extended)


# -- public API --------------------------------------------------------------

def cascade_init(coeffs: DerivedCoeffs, normalization: complex = 1.0) -> CascadeCoeffs:
    """Uncorrelated input pair: F_00(r) = normalization for all r."""
    empty = np.zeros(0, dtype=complex)
    return CascadeCoeffs(0, complex(normalization), empty, empty, coeffs)


def _consts(c: DerivedCoeffs):
    return c.alpha, c.eta, c.mu, c.gamma, c.kappa1, c.kappa2


def _raw(state):
    if state.extended is not None:
        _, T, A, B = state.extended
        return T, list(A), list(B)
    return state.t_flat, list(state.a), list(state.b)


def _arith_of(state):
    if state.extended is None:
        return _Arith(), _consts(state.coeffs)
    arith = _Arith(state.extended[0].dps)
    arith.ctx = state.extended[0]
    return arith, arith.consts(state.coeffs.params)


def first_photon_pass(state: CascadeCoeffs) -> BarCoeffs:
    """Leading photon passes the next emitter: F_jj -> F_{j,j+1}."""
    arith, consts = _arith_of(state)
    raw = _first_pass_scalar(*_raw(state), *consts)
    return _wrap(raw, state.order, state.coeffs, arith, BarCoeffs)


def second_photon_pass(state: CascadeCoeffs, bar: BarCoeffs) -> CascadeCoeffs:
    """Trailing photon passes the same emitter: F_{j,j+1} -> F_{j+1,j+1}."""
    c = state.coeffs
    if abs(c.kappa1 - c.kappa2) < TOL_BOUNDARY * c.gamma:
        raise SingularBoundarySystem("boundary system determinant kappa1 - kappa2 vanishes")
    arith, consts = _arith_of(state)
    raw = _second_pass_scalar(*_raw(state), *_raw(bar), *consts)
    return _wrap(raw, state.order + 1, c, arith, CascadeCoeffs)


def advance_one_emitter(state: CascadeCoeffs) -> CascadeCoeffs:
    """Propagate both photons through one more emitter."""
    return second_photon_pass(state, first_photon_pass(state))


def propagate_chain(params: ModelParams | DerivedCoeffs, n_emitters: int,
                    max_emitters: int = MAX_EMITTERS, check_tol: float = 1e-12,
                    precision: str = "auto", tol: float = TOL_PRECISION) -> CascadeCoeffs:
    """Coefficients of F_NN after ``n_emitters`` identical emitters (T_0 = 1).

    Args:
        precision: "double", "extended" (mpmath) or "auto", which switches to
            extended precision once the estimated rounding error of F/T_N
            exceeds ``tol``.  "double" raises StabilityError instead.
    """
    return propagate_chain_history(params, n_emitters, max_emitters, check_tol,
                                   precision, tol, keep="last")[-1]


def propagate_chain_history(params, n_emitters, max_emitters=MAX_EMITTERS, check_tol=1e-12,
                            precision="auto", tol=TOL_PRECISION, keep="all"):
    """Like :func:`propagate_chain` but return the states for j = 0..N."""
    if n_emitters < 0:
        raise ValueError("n_emitters must be non-negative")
    if n_emitters > max_emitters:
        raise ValueError(f"n_emitters={n_emitters} exceeds max_emitters={max_emitters}")
    coeffs = params if isinstance(params, DerivedCoeffs) else derive_coefficients(params)
    history, arith = _run_auto(coeffs.params, n_emitters, precision, tol, check_tol)
    if keep == "last":
        history = history[-1:]
        return [_wrap(history[0], n_emitters, coeffs, arith, CascadeCoeffs)]
    return [_wrap(raw, j, coeffs, arith, CascadeCoeffs) for j, raw in enumerate(history)]


def _series(r, x, kappa):
    """exp(kappa r) * sum_n x_n r**n / n! for r <= 0 (array)."""
    if len(x) == 0:
        return np.zeros_like(r, dtype=complex)
    # nested form x0 + r(x1 + r/2 (x2 + r/3 (...))) avoids factorials
    poly = np.full(r.shape, x[-1], dtype=complex)
    for n in range(len(x) - 2, -1, -1):
        poly = x[n] + poly * r / (n + 1)
    out = np.exp(kappa * r) * poly

    far = np.abs(r) > _LOG_EVAL_THRESHOLD
    if np.any(far):
        # term-wise in log space: avoids |r|**n overflow before the exponential damps it
        rf = r[far][:, None]
        n = np.arange(len(x))
        logmag = (kappa.real * rf + n * np.log(np.abs(rf))
                  - np.array([math.lgamma(k + 1) for k in n]))
        phase = np.exp(1j * (kappa.imag * rf + np.pi * n))
        with np.errstate(under="ignore", over="ignore"):
            out[far] = (np.asarray(x) * np.exp(logmag) * phase).sum(axis=1)
    return out


def _series_ext(ctx, r, x, kappa):
    if not x:
        return ctx.mpc(0)
    poly = x[-1]
    for n in range(len(x) - 2, -1, -1):
        poly = x[n] + poly * r / (n + 1)
    return ctx.exp(kappa * r) * poly


def _evaluate_ext(state, r, derivative=False):
    ctx, T, A, B = state.extended
    _, _, _, _, k1, k2 = _arith_of(state)[1]
    out = np.empty(r.shape, dtype=complex)
    for i, ri in enumerate(r):
        x = ctx.mpf(float(ri))
        if derivative:
            val = (_series_ext(ctx, x, [k1 * a + b for a, b in zip(A, A[1:] + [0])], k1)
                   + _series_ext(ctx, x, [k2 * a + b for a, b in zip(B, B[1:] + [0])], k2))
        else:
            val = T + _series_ext(ctx, x, A, k1) + _series_ext(ctx, x, B, k2)
        out[i] = complex(val)
    return out


def evaluate_F(state: CascadeCoeffs | BarCoeffs, r):
    """Evaluate the closed-form amplitude at ``r``; r > 0 is mapped to -r."""
    scalar = np.ndim(r) == 0
    r = -np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    if state.extended is not None:
        val = _evaluate_ext(state, r)
    else:
        c = state.coeffs
        val = state.t_flat + _series(r, state.a, c.kappa1) + _series(r, state.b, c.kappa2)
    return complex(val[0]) if scalar else val


def evaluate_dF(state: CascadeCoeffs | BarCoeffs, r=0.0):
    """Derivative dF/dr at r <= 0."""
    scalar = np.ndim(r) == 0
    r = -np.abs(np.atleast_1d(np.asarray(r, dtype=float)))
    if state.extended is not None:
        out = _evaluate_ext(state, r, derivative=True)
        return complex(out[0]) if scalar else out
    c = state.coeffs
    out = np.zeros(r.shape, dtype=complex)
    for x, kappa in ((np.asarray(state.a), c.kappa1), (np.asarray(state.b), c.kappa2)):
        if len(x):
            out += _series(r, kappa * x + np.append(x[1:], 0), kappa)
    return complex(out[0]) if scalar else out


def g2_cascade(params: ModelParams, n_emitters: int, r_grid, max_emitters: int = MAX_EMITTERS,
               precision: str = "auto") -> CorrelationCurve:
    """g2(r) = |F_NN(r)|**2 / |T_N|**2 from the cascade recursion."""
    state = propagate_chain(params, n_emitters, max_emitters=max_emitters, precision=precision)
    t2 = abs(state.t_flat) ** 2
    if t2 < 1e-300:
        raise ZeroTransmission("|T_N|^2 underflows; g2 is undefined")
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    amp = evaluate_F(state, r_grid)
    return CorrelationCurve(
        r_grid=r_grid,
        g2=np.abs(amp) ** 2 / t2,
        amplitude=amp,
        meta={"method": "cascade", "n_emitters": int(n_emitters), "params": params.as_dict(),
              "T_N": state.t_flat, "T_N_sq": t2,
              "precision_digits": 16 if state.extended is None else state.extended[0].dps},
    )


def g2_zero_series(params: ModelParams, n_max: int, max_emitters: int = MAX_EMITTERS,
                   stop_below: float | None = None, precision: str = "auto") -> np.ndarray:
    """g2(0) for N = 0..n_max from one recursion run.

    With ``stop_below`` the run ends at the first N whose g2(0) <= stop_below,
    so the returned array may be shorter than n_max + 1.
    """
    if n_max > max_emitters:
        raise ValueError(f"n_max={n_max} exceeds max_emitters={max_emitters}")
    values = [1.0]

    def record(j, T, A, B):
        # a double run that bails out restarts in extended precision from j = 1
        del values[j:]
        values.append(float(abs((T + A[0] + B[0]) / T) ** 2))
        return stop_below is not None and values[-1] <= stop_below

    _run_auto(params, n_max, precision, TOL_PRECISION, 1e-12, record)
    return np.array(values)


# -- single emitter acting on a sum of exponentials --------------------------

@dataclass(frozen=True)
class ExponentialSum:
    """f(r) = sum_k amplitudes[k] * exp(exponents[k] * r), evaluated as given (no mirroring)."""

    amplitudes: np.ndarray
    exponents: np.ndarray

    def __call__(self, r):
        r = np.asarray(r, dtype=complex)
        return (self.amplitudes * np.exp(np.multiply.outer(r, self.exponents))).sum(axis=-1)

    def derivative(self, r):
        r = np.asarray(r, dtype=complex)
        return (self.amplitudes * self.exponents
                * np.exp(np.multiply.outer(r, self.exponents))).sum(axis=-1)


def scatter_exponentials(coeffs: DerivedCoeffs, amplitudes, exponents):
    """Scatter an input amplitude sum_k c_k exp(s_k r) off one emitter.

    Returns ``(F_0, F_out)`` as :class:`ExponentialSum` objects: F_0 is the
    amplitude with only the leading photon scattered, F_out the output, whose
    exp(kappa r) part is fixed by the continuity conditions at r = 0.
    """
    c = coeffs
    G = c.gamma
    s = np.asarray(exponents, dtype=complex)
    a_in = np.asarray(amplitudes, dtype=complex)

    first = (s * s + (c.eta - G) * s + c.alpha + c.mu) / (s * s + c.eta * s + c.alpha)
    second = (s * s + (G - c.eta) * s + c.alpha + c.mu) / (s * s - c.eta * s + c.alpha)
    a0 = a_in * first
    a_part = a0 * second

    f_in0, df_in0 = a_in.sum(), (a_in * s).sum()
    f_00 = a0.sum()
    value = 2 * f_00 - f_in0 - a_part.sum()
    slope = df_in0 + G * (f_00 - f_in0) - (a_part * s).sum()
    k1, k2 = c.kappa1, c.kappa2
    h1 = (slope - k2 * value) / (k1 - k2)
    h2 = (k1 * value - slope) / (k1 - k2)

    f0 = ExponentialSum(a0, s)
    fout = ExponentialSum(np.concatenate([a_part, [h1, h2]]), np.concatenate([s, [k1, k2]]))
    return f0, fout
