import math

import numpy as np
import pytest

from nsflab import thermo
from nsflab.grid_fields import FluidState

# H7-normalizing entropy constant for the decaying law Z/(1+Z) + Z^(5/3):
# S(inf) - S(1) = -(3/2)[(2/3)log 2 + 1/2] = -(log 2 + 3/4), so S0 = log 2 + 3/4
# sends S(Z) -> 0 (hand-derived antiderivative, cross-checked by quadrature).
S0_STAR_B = math.log(2.0) + 0.75


@pytest.fixture(scope="session")
def ideal():
    return thermo.ideal_gas()


@pytest.fixture(scope="session")
def law_a():
    return thermo.gas_from_expression("lawA", "Z + Z^2/(1+Z)")


@pytest.fixture(scope="session")
def law_b():
    return thermo.gas_from_expression(
        "lawB", "Z/(1+Z) + Z**(5/3)", S0=S0_STAR_B, P_inf=1.0, asym_rtol=1e-4
    )


@pytest.fixture(scope="session")
def transport():
    return thermo.default_transport()


def make_state(gas, a, rho, theta, u, time=0.0):
    """Conservative FluidState from primitive fields (rho, theta, u)."""
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape == rho.shape:
        u = u[None]
    mom = rho * u
    etot = 0.5 * rho * np.sum(u * u, axis=0) + thermo.internal_energy_density(
        gas, a, rho, np.asarray(theta, dtype=float)
    )
    return FluidState(rho, mom, etot, time)
