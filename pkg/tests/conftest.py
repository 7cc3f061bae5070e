import math

import numpy as np
import pytest

from brillouin.coeffs import coeff_series
from brillouin.model import (
    FourierTailWeight,
    PlanetSpec,
    PowerCusp,
    QuadraticPeak,
    SmoothPowerWeight,
    TwoSidedCuspWeight,
    build_profile,
    homogeneous_ball,
    point_mass_planet,
)

THETA0 = 1.0


@pytest.fixture(scope="session")
def cusp_profile():
    spec = PlanetSpec(
        R=1.0, theta0=THETA0,
        peak=PowerCusp(alpha=0.5, a_minus=1.0, a_plus=1.0),
        weight=TwoSidedCuspWeight(k=1.0, g_plus=1.0, g_minus=1.0),
        delta=0.5, delta1=0.4,
    )
    return build_profile(spec)


@pytest.fixture(scope="session")
def cusp_series(cusp_profile):
    return coeff_series(cusp_profile, 0, 4000, tol=1e-10)


@pytest.fixture(scope="session")
def alpha1_profile():
    spec = PlanetSpec(
        R=1.0, theta0=THETA0,
        peak=PowerCusp(alpha=1.0, a_minus=1.0, a_plus=1.0),
        weight=SmoothPowerWeight(k=1, g_k=1.0),
        delta=0.5, delta1=0.4,
    )
    return build_profile(spec)


@pytest.fixture(scope="session")
def alpha1_series(alpha1_profile):
    return coeff_series(alpha1_profile, 0, 4000, tol=1e-10)


@pytest.fixture(scope="session")
def t1_profile():
    spec = PlanetSpec(
        R=1.0, theta0=THETA0,
        peak=QuadraticPeak(c=2.0),
        weight=FourierTailWeight(beta0=1.5, eps=0.25),
        delta=0.5, delta1=0.4,
    )
    return build_profile(spec)


@pytest.fixture(scope="session")
def t1_series(t1_profile):
    return coeff_series(t1_profile, 0, 1500, tol=1e-10)


@pytest.fixture(scope="session")
def point_mass():
    return point_mass_planet(0.9, math.acos(0.5), 1.0)


@pytest.fixture(scope="session")
def point_mass_series(point_mass):
    return coeff_series(point_mass, 0, 2000, tol=1e-12)


@pytest.fixture(scope="session")
def ball():
    return homogeneous_ball(1.0, 1.0)


def make_mollified(r0, theta_p, m, width, G=1.0):
    """Planet whose only mass is a separable Gaussian ring at (r0, theta_p);
    its coefficients factor into 1D integrals, giving an independent oracle
    for the general-density quadrature path."""
    Z = width * math.sqrt(2.0 * math.pi) * math.erf(4.0 / math.sqrt(2.0))

    def eta(u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) <= 4 * width, np.exp(-u * u / (2 * width**2)) / Z, 0.0)

    def v(r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        return -G * m * eta(r - r0) * eta(theta - theta_p) / (r * r * np.sin(theta))

    spec = PlanetSpec(R=1.0, theta0=THETA0, peak=QuadraticPeak(c=0.2), weight=None,
                      v=v, delta=0.5, delta1=0.04)
    return build_profile(spec), eta
