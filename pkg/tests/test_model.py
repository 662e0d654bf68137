import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from chiralchain import (ModelParams, coupling_efficiency, derive_coefficients,
                         single_photon_transmission, two_photon_transmission)
from chiralchain.errors import ChiralChainError, DegenerateAlpha

box = dict(
    rabi=st.floats(0.0, 3.0),
    delta=st.floats(-2.0, 2.0),
    delta_bar=st.floats(-2.0, 2.0),
    gamma_loss=st.floats(0.0, 10.0),
)


def coeffs_or_skip(p):
    try:
        return derive_coefficients(p)
    except ChiralChainError:
        assume(False)


def test_reference_coefficients_by_hand():
    # alpha = 0.25 + i(-0.25)(0.25i + 0.5) = 0.25 + 0.0625 - 0.125i
    c = derive_coefficients(ModelParams(0.5, 0.25, -0.25))
    assert c.alpha == pytest.approx(0.3125 - 0.125j, abs=1e-15)
    assert c.eta == pytest.approx(0.5, abs=1e-15)
    assert c.mu == pytest.approx(0.25j, abs=1e-15)


def test_two_photon_resonance_kills_mu():
    c = derive_coefficients(ModelParams(0.5, 0.25, 0.0))
    assert c.mu == 0
    assert c.alpha == pytest.approx(0.25)


def test_kappa_ordering():
    c = derive_coefficients(ModelParams(0.5, 0.25, -0.25))
    assert c.kappa1.imag >= c.kappa2.imag


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.5, 0.1, 0.1, gamma_loss=-1)
    with pytest.raises(ValueError):
        ModelParams(-0.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        ModelParams(0.5, math.nan, 0.1)


def test_degenerate_alpha():
    # alpha = Omega**2 - Delta*Delta_bar + i Delta_bar/2 vanishes for Delta_bar = 0, Omega = 0
    with pytest.raises(DegenerateAlpha):
        derive_coefficients(ModelParams(0.0, 0.3, 0.0))


@settings(max_examples=300, deadline=None)
@given(**box)
def test_vieta(rabi, delta, delta_bar, gamma_loss):
    c = coeffs_or_skip(ModelParams(rabi, delta, delta_bar, gamma_loss=gamma_loss))
    scale = 1 + abs(c.eta) + abs(c.alpha)
    assert abs(c.kappa1 + c.kappa2 - c.eta) < 1e-13 * scale
    assert abs(c.kappa1 * c.kappa2 - c.alpha) < 1e-13 * scale**2


@settings(max_examples=300, deadline=None)
@given(rabi=st.floats(0.01, 3.0), delta=box["delta"], delta_bar=box["delta_bar"],
       gamma_loss=box["gamma_loss"])
def test_kappa_real_parts_positive(rabi, delta, delta_bar, gamma_loss):
    c = coeffs_or_skip(ModelParams(rabi, delta, delta_bar, gamma_loss=gamma_loss))
    assert c.kappa1.real > 0 and c.kappa2.real > 0


@settings(max_examples=100, deadline=None)
@given(delta=box["delta"], delta_bar=box["delta_bar"], gamma_loss=box["gamma_loss"])
def test_kappa_two_level_limit_is_marginal(delta, delta_bar, gamma_loss):
    # Omega = 0: one root is i*Delta_bar, on the imaginary axis
    c = coeffs_or_skip(ModelParams(0.0, delta, delta_bar, gamma_loss=gamma_loss))
    assert min(abs(c.kappa1 - 1j * delta_bar), abs(c.kappa2 - 1j * delta_bar)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(**box)
def test_transmission_modulus(rabi, delta, delta_bar, gamma_loss):
    p = ModelParams(rabi, delta, delta_bar, gamma_loss=gamma_loss)
    coeffs_or_skip(p)
    t = single_photon_transmission(p)
    if gamma_loss == 0:
        assert abs(abs(t) - 1) < 1e-12
    elif abs(delta_bar) > 1e-3 and gamma_loss > 1e-6:
        assert abs(t) < 1
    assert two_photon_transmission(p, 7) == pytest.approx(abs(t) ** 28, rel=1e-12, abs=1e-300)


def test_transmission_examples():
    assert single_photon_transmission(ModelParams(0.5, 0.25, 0.0, gamma_loss=3)) == pytest.approx(1)
    # resonant two-level limit
    t = single_photon_transmission(ModelParams(0.0, 0.0, -0.25))
    assert t == pytest.approx(-1, abs=1e-14)
    assert two_photon_transmission(ModelParams(0.3, 0.2, 0.4, gamma_loss=2), 0) == 1.0
    assert two_photon_transmission(ModelParams(0.5, 0.25, 0.0, gamma_loss=10), 10) == pytest.approx(1)
    assert two_photon_transmission(ModelParams(0.5, 0.25, -0.25), 13) == pytest.approx(1)


def test_coupling_efficiency():
    assert coupling_efficiency(ModelParams(0.5, 0.2, 0.1)) == 1
    assert coupling_efficiency(ModelParams(0.5, 0.2, 0.1, gamma_loss=1)) == 0.5
    # inverse check of a quoted beta ~ 0.98
    assert coupling_efficiency(ModelParams(0.5, 0.2, 0.1, gamma_loss=0.0204)) == pytest.approx(0.98, abs=1e-4)


def test_replace_and_dict():
    p = ModelParams(0.5, 0.25, -0.25)
    q = p.replace(gamma_loss=0.1)
    assert q.gamma_loss == 0.1 and p.gamma_loss == 0
    assert ModelParams(**p.as_dict()) == p


def test_transmission_at_degenerate_kappa():
    p = ModelParams(0.5, 0.5, 0.5, gamma_loss=1.0)
    with pytest.raises(ChiralChainError):
        derive_coefficients(p)
    # Omega**2 = Delta*Delta_bar and gamma = Gamma: the numerator of t vanishes
    assert abs(single_photon_transmission(p)) < 1e-15
