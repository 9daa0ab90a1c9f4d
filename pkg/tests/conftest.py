"""Shared fixtures: solved orbits and iPRCs are expensive, so build once."""

import numpy as np
import pytest

import phasekit as pk

VDP_PERIOD_ORACLE = 6.663286859323034  # long-integration crossing-time oracle


@pytest.fixture(scope="session")
def radial_orbit():
    return pk.find_periodic_orbit(pk.RADIAL)


@pytest.fixture(scope="session")
def radial_prc(radial_orbit):
    return pk.compute_iprc(radial_orbit, pk.RADIAL)


@pytest.fixture(scope="session")
def vdp_orbit():
    return pk.find_periodic_orbit(pk.VAN_DER_POL)


@pytest.fixture(scope="session")
def goodwin_orbit():
    return pk.find_periodic_orbit(pk.GOODWIN)


@pytest.fixture(scope="session")
def goodwin_prc(goodwin_orbit):
    return pk.compute_iprc(goodwin_orbit, pk.GOODWIN)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
