import math

import numpy as np
import pytest
from scipy.special import ive

from pvspdc.entanglement import full_slice
from pvspdc.spdc import PumpSpec

RR = 3.53


def trapezoid_oracle(f, r_max, n=1_000_000):
    """Fixed-step trapezoid on [0, r_max]; independent of the adaptive path."""
    r = np.linspace(0.0, r_max, n + 1)
    return float(np.trapezoid(f(r), r))


def scipy_pv(ell, r, ring=RR, width=1.0):
    """Exact PV radial profile via scipy's ive, unnormalised."""
    return np.exp(-((r - ring) ** 2) / width**2) * ive(abs(ell), 2 * r * ring / width**2)


def oracle_norm(u, r_max, n=1_000_000):
    return 1.0 / math.sqrt(2 * math.pi * trapezoid_oracle(lambda r: r * u(r) ** 2, r_max, n))


@pytest.fixture(scope="session")
def pv_slice():
    return full_slice(PumpSpec.pv(0), 0)


@pytest.fixture(scope="session")
def gauss_slice():
    return full_slice(PumpSpec.gaussian(5.0), 0)
