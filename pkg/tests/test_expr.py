"""Pressure-law expression grammar: parsing, rejection, derivatives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsflab.expr import ExpressionError, parse_pressure_law


def test_identity_law():
    law = parse_pressure_law("Z")
    z = np.array([0.0, 1.0, 2.5])
    assert np.allclose(law.P(z), z)
    assert np.allclose(law.dP(z), 1.0)


def test_caret_power_and_rationals():
    law = parse_pressure_law("Z + Z^2/(1+Z)")
    assert law.P(np.asarray(2.0)) == pytest.approx(2 + 4 / 3, abs=1e-15)
    # d/dZ [Z + Z^2/(1+Z)] at Z=2: 1 + (2*2*3 - 4)/9 = 1 + 8/9
    assert law.dP(np.asarray(2.0)) == pytest.approx(1 + 8 / 9, abs=1e-14)


def test_fractional_power():
    law = parse_pressure_law("Z**(5/3)")
    assert law.P(np.asarray(8.0)) == pytest.approx(32.0, rel=1e-14)
    assert law.dP(np.asarray(1.0)) == pytest.approx(5 / 3, rel=1e-14)


def test_constant_broadcasts():
    law = parse_pressure_law("Z - Z")
    out = law.P(np.ones((3, 4)))
    assert out.shape == (3, 4)
    assert np.all(out == 0.0)


@pytest.mark.parametrize(
    "bad",
    ["sin(Z)", "Q + Z", "Z!", "import os", "Z + theta", "exp(Z)", "Z; Z", "1e3*Z"],
)
def test_rejects_outside_grammar(bad):
    with pytest.raises(ExpressionError):
        parse_pressure_law(bad)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=50.0))
def test_derivative_matches_finite_difference(z):
    law = parse_pressure_law("2*Z + Z^2/(1+Z) + Z**(5/3)/7")
    h = 1e-6 * max(z, 1.0)
    fd = (law.P(np.asarray(z + h)) - law.P(np.asarray(z - h))) / (2 * h)
    assert float(law.dP(np.asarray(z))) == pytest.approx(float(fd), rel=1e-7, abs=1e-9)
