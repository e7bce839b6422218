import math

import pytest

from codt import BeamGeometry, Environment, TrapConfig, rubidium_87


def make_trap(depth_uK=657.0, waist_um=55.0, angle_deg=45.0, gravity=9.81, wavelength_nm=1064.0):
    return TrapConfig(
        geometry=BeamGeometry(
            waist=waist_um * 1e-6,
            wavelength=wavelength_nm * 1e-9,
            crossing_angle=math.radians(angle_deg),
        ),
        depth=depth_uK * 1e-6,
        species=rubidium_87(),
        environment=Environment(gravity=gravity, temperature=300.0, pressure=1.3e-9),
    )


@pytest.fixture(scope="session")
def trap_657():
    """Reference deep trap on the ground."""
    return make_trap()


@pytest.fixture(scope="session")
def trap_657_micro():
    """Same trap in microgravity."""
    return make_trap(gravity=0.0)


@pytest.fixture(scope="session")
def rb87():
    return rubidium_87()
