import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from etk.model import NoBoundStateError, ParameterError, VariationalCharacter
from etk.potentials import (
    Curvature,
    bV_curvature_sign,
    bV_second_derivative,
    classify_character,
    cubic,
    cubic_gauss,
    cubic_linear,
    cubic_log,
    exciton,
    gaussian,
    harmonic,
    linear,
    logarithmic,
    make_potential,
    nonrel,
    power,
    trunc_coulomb,
)

ALL = [
    power(-0.7),
    power(-1.5, G=2.0),
    harmonic(),
    linear(2.0),
    cubic(0.5),
    logarithmic(),
    gaussian(10.0),
    trunc_coulomb(0.8),
    exciton(1.3),
    cubic_linear(0.4),
    cubic_log(0.6),
    cubic_gauss(0.3),
]


@pytest.mark.parametrize("pot", ALL, ids=lambda p: f"{p.name}{dict(p.params)}")
def test_derivatives_match_finite_differences(pot):
    r = np.geomspace(0.05, 6.0, 40)
    h = 1e-5 * r
    d1 = (pot.eval(r + h) - pot.eval(r - h)) / (2 * h)
    d2 = (pot.deriv1(r + h) - pot.deriv1(r - h)) / (2 * h)
    np.testing.assert_allclose(pot.deriv1(r), d1, rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(pot.deriv2(r), d2, rtol=1e-7, atol=1e-9)


def _quad_average(V, c):
    f = lambda r: V(r) * 4 * math.pi * r * r * (c / math.pi) ** 1.5 * math.exp(-c * r * r)  # noqa: E731
    s = 1 / math.sqrt(c)
    pieces = [(0, s), (s, 4 * s), (4 * s, 12 * s)]
    return sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)[0] for a, b in pieces)


@pytest.mark.parametrize("pot", ALL, ids=lambda p: f"{p.name}{dict(p.params)}")
@pytest.mark.parametrize("c", [0.02, 0.7, 3.0, 90.0])
def test_pair_average_matches_quad(pot, c):
    ref = _quad_average(lambda r: float(pot.eval(r)), c)
    assert float(pot.pair_average(c)) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50.0), st.floats(1e-3, 1e3))
def test_trunc_coulomb_average_both_branches(d, c):
    pot = trunc_coulomb(d)
    ref = _quad_average(lambda r: float(pot.eval(r)), c)
    assert float(pot.pair_average(c)) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize(
    "pot, expected",
    [
        (power(-1.0), VariationalCharacter.UPPER_BOUND),
        (power(-0.3), VariationalCharacter.UPPER_BOUND),
        (harmonic(), VariationalCharacter.EXACT),
        (linear(), VariationalCharacter.UPPER_BOUND),
        (cubic(), VariationalCharacter.LOWER_BOUND),
        (logarithmic(), VariationalCharacter.UPPER_BOUND),
        (gaussian(10.0), VariationalCharacter.UPPER_BOUND),
        (trunc_coulomb(1.0), VariationalCharacter.UPPER_BOUND),
        (exciton(1.0), VariationalCharacter.UPPER_BOUND),
        (exciton(0.0), VariationalCharacter.UPPER_BOUND),
        (cubic_linear(0.0), VariationalCharacter.UPPER_BOUND),
        (cubic_linear(1.0), VariationalCharacter.LOWER_BOUND),
        (cubic_linear(0.5), VariationalCharacter.UNDEFINED),
        (cubic_log(0.5), VariationalCharacter.UNDEFINED),
        (cubic_gauss(0.5), VariationalCharacter.UNDEFINED),
    ],
    ids=lambda x: getattr(x, "name", str(x)),
)
def test_classify_character(pot, expected):
    assert classify_character(nonrel(1.0), pot) is expected


@pytest.mark.parametrize("pot", ALL, ids=lambda p: p.name)
def test_declared_curvature_matches_sampled(pot):
    assert bV_curvature_sign(pot) is pot.bV_curvature


def test_bV_second_derivative_power():
    # b(y) = y^{beta/2}; b'' = (beta/2)(beta/2 - 1) y^{beta/2 - 2}
    y = np.array([0.3, 1.0, 7.0])
    for beta in (-1.0, 1.0, 3.0):
        expected = (beta / 2) * (beta / 2 - 1) * y ** (beta / 2 - 2)
        np.testing.assert_allclose(bV_second_derivative(power(beta), y), np.sign(-1 if beta < 0 else 1) * expected)


def test_catalog_validation():
    with pytest.raises(ParameterError):
        power(-2.0)
    with pytest.raises(ParameterError):
        power(0.0)
    with pytest.raises(ParameterError):
        power(1.0, sign=-1)
    with pytest.raises(NoBoundStateError):
        gaussian(0.5)
    with pytest.raises(NoBoundStateError):
        cubic_gauss(0.0, beta=0.5)
    with pytest.raises(ParameterError):
        trunc_coulomb(0.0)
    with pytest.raises(ParameterError):
        exciton(-1.0)
    with pytest.raises(ParameterError):
        cubic_linear(1.2)


def test_make_potential():
    assert make_potential("power", beta=-1.0, G=1.0).params["beta"] == -1.0
    assert make_potential("cubic-gauss", C=0.3).params == {"alpha": 1.0, "beta": 10.0, "C": 0.3}
    with pytest.raises(ParameterError, match="unknown potential"):
        make_potential("yukawa")
    with pytest.raises(ParameterError, match="does not take"):
        make_potential("linear", d=1.0)
    with pytest.raises(ParameterError):
        make_potential("trunc-coulomb")


def test_blend_endpoints_are_pure_families():
    r = np.linspace(0.1, 3, 7)
    np.testing.assert_array_equal(cubic_linear(0.0).eval(r), linear().eval(r))
    np.testing.assert_array_equal(cubic_log(1.0).eval(r), cubic().eval(r))
    assert cubic_gauss(0.0).bV_curvature is Curvature.NEGATIVE
