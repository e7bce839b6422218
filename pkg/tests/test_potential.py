import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from codt import (
    BeamGeometry,
    DomainError,
    Environment,
    K_B,
    TrapConfig,
    effective_depth,
    hessian_eigen,
    hessian_frequencies,
    potential,
    rubidium_87,
    single_beam_potential,
)
from codt.constants import RB87_MASS

from conftest import make_trap

W0 = 55e-6

# dense-scan oracle values for the reference 657 uK / 55 um / g = 9.81 trap
# (frozen from a 2e6-point scan of U(0,0,z); see test_effective_depth_scan_oracle)
UEFF_RATIO_657 = 0.9830682
ZSADDLE_WAISTS_657 = -1.8374597


def test_potential_at_origin_no_gravity(trap_657_micro):
    u = potential(0.0, 0.0, 0.0, trap_657_micro)
    assert u == pytest.approx(-K_B * trap_657_micro.depth, rel=1e-14)


def test_potential_axial_falloff(trap_657_micro):
    zr = trap_657_micro.geometry.rayleigh_length
    u = potential(10 * zr, 0.0, 0.0, trap_657_micro)
    assert abs(u) < 0.01 * K_B * trap_657_micro.depth


@settings(max_examples=60, deadline=None)
@given(
    x=st.floats(-3e-3, 3e-3),
    y=st.floats(-3e-3, 3e-3),
    z=st.floats(-3e-4, 3e-4),
)
def test_mirror_symmetries(x, y, z):
    cfg = make_trap()
    u0 = potential(x, y, z, cfg)
    assert potential(-x, y, z, cfg) == pytest.approx(u0, rel=1e-12, abs=1e-40)
    assert potential(x, -y, z, cfg) == pytest.approx(u0, rel=1e-12, abs=1e-40)


def test_global_minimum_at_origin_no_gravity(trap_657_micro):
    rng = np.random.default_rng(5)
    pts = rng.uniform(-1, 1, size=(4000, 3)) * np.array([3e-3, 3e-3, 2e-4])
    u = potential(pts[:, 0], pts[:, 1], pts[:, 2], trap_657_micro)
    assert np.all(u >= potential(0.0, 0.0, 0.0, trap_657_micro))


def test_effective_depth_no_gravity(trap_657_micro):
    rep = effective_depth(trap_657_micro)
    assert rep.u_eff == pytest.approx(trap_657_micro.depth, rel=1e-12)
    assert rep.u_arm == pytest.approx(trap_657_micro.depth / 2, rel=1e-12)
    assert rep.trapped_center and rep.trapped_arms
    assert rep.z_saddle is None


def test_arm_critical_depth_value(trap_657):
    # closed form exp(1/2) * m g w0 / k_B for 87Rb at 55 um
    assert rep_crit(trap_657) == pytest.approx(9.2984e-6, rel=1e-4)


def rep_crit(cfg):
    return effective_depth(cfg).critical_arm_depth


@pytest.mark.parametrize("depth_uK,expected", [(9.0, False), (10.0, True)])
def test_arm_trapping_flips_at_critical_depth(depth_uK, expected):
    cfg = make_trap(depth_uK=depth_uK)
    assert effective_depth(cfg).trapped_arms is expected


@pytest.mark.parametrize("waist_um", [25.0, 55.0, 100.0])
def test_arm_threshold_matches_closed_form(waist_um):
    # bisect the root-finder trapped_arms flag in depth and compare with
    # the closed-form critical depth
    closed = effective_depth(make_trap(depth_uK=50.0, waist_um=waist_um)).critical_arm_depth
    lo, hi = 0.2 * closed, 5.0 * closed
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if effective_depth(make_trap(depth_uK=mid * 1e6, waist_um=waist_um)).trapped_arms:
            hi = mid
        else:
            lo = mid
    threshold = 0.5 * (lo + hi)
    assert threshold == pytest.approx(closed, rel=1e-3)


def test_effective_depth_scan_oracle(trap_657):
    # independent oracle: dense 1D scan of U(0,0,z)
    z = np.linspace(-5 * W0, 5 * W0, 2_000_001)
    u = potential(0.0, 0.0, z, trap_657)
    imin = np.argmin(u)
    isad = np.argmax(u[: imin + 1])
    scan_ueff = (u[isad] - u[imin]) / K_B
    rep = effective_depth(trap_657)
    assert rep.u_eff == pytest.approx(scan_ueff, rel=1e-6)
    assert rep.u_eff / trap_657.depth == pytest.approx(UEFF_RATIO_657, rel=1e-5)
    assert rep.z_saddle / W0 == pytest.approx(ZSADDLE_WAISTS_657, rel=1e-5)
    assert rep.z_saddle < rep.z_min < 0
    assert 0 < rep.u_eff <= trap_657.depth
    assert rep.u_arm <= trap_657.depth / 2


def test_effective_depth_decreases_with_gravity():
    depths = [effective_depth(make_trap(gravity=g)).u_eff for g in (0.0, 1e-3, 0.1, 2.0, 9.81)]
    assert all(a >= b for a, b in zip(depths, depths[1:]))
    assert depths[0] == pytest.approx(657e-6, rel=1e-12)
    # continuity toward the untilted depth
    assert depths[1] == pytest.approx(depths[0], rel=1e-3)


def test_hessian_symmetric_crossing():
    cfg = make_trap(angle_deg=90.0, gravity=0.0)
    omegas, _ = hessian_frequencies(cfg)
    pair = np.sort(omegas)[:2]  # in-plane axes coincide at 90 deg; z is sqrt(2) stiffer
    assert abs(pair[1] - pair[0]) / pair[0] < 1e-6


def test_hessian_analytic_crossing_frequencies(trap_657_micro):
    # Taylor expansion of the summed beams at the origin
    w0 = W0
    zr = trap_657_micro.geometry.rayleigh_length
    c = math.cos(math.radians(22.5))
    s = math.sin(math.radians(22.5))
    u0 = K_B * trap_657_micro.depth / RB87_MASS
    expected = np.sort(
        np.sqrt(
            np.array(
                [
                    u0 * (4 * s**2 / w0**2 + 2 * c**2 / zr**2),
                    u0 * (4 * c**2 / w0**2 + 2 * s**2 / zr**2),
                    u0 * 4 / w0**2,
                ]
            )
        )
    )
    omegas, _ = hessian_frequencies(trap_657_micro)
    assert np.sort(omegas) == pytest.approx(expected, rel=1e-6)


def test_hessian_single_beam_radial_frequency():
    # drive a lone beam through the same machinery: radial curvature gives
    # omega_r = sqrt(4 k_B U / (m w0^2))
    depth_k = 300e-6
    zr = math.pi * W0**2 / 1064e-9

    def f(x, y, z):
        return single_beam_potential(x, y, z, W0, zr, depth_k)

    evals, _ = hessian_eigen(f, (0.0, 0.0, 0.0), 1e-4 * W0)
    omega_r = math.sqrt(np.max(evals) / RB87_MASS)
    expected = math.sqrt(4 * K_B * depth_k / (RB87_MASS * W0**2))
    assert omega_r == pytest.approx(expected, rel=1e-4)


def test_hessian_frequency_scaling_with_depth():
    om1, _ = hessian_frequencies(make_trap(depth_uK=200.0, gravity=0.0))
    om4, _ = hessian_frequencies(make_trap(depth_uK=800.0, gravity=0.0))
    assert np.sort(om4) == pytest.approx(2 * np.sort(om1), rel=1e-6)


def test_hessian_requires_trapped_center():
    with pytest.raises(DomainError):
        hessian_frequencies(make_trap(depth_uK=2.0))  # below center criticality


def test_geometry_validation():
    with pytest.raises(DomainError):
        BeamGeometry(waist=-1e-6, wavelength=1064e-9, crossing_angle=1.0)
    with pytest.raises(DomainError):
        BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=0.0)
    with pytest.raises(DomainError):
        BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=math.pi)
    with pytest.raises(DomainError):
        TrapConfig(
            geometry=BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=1.0),
            depth=0.0,
            species=rubidium_87(),
            environment=Environment(pressure=1.3e-9),
        )


def test_rayleigh_length_derived():
    geo = BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=1.0)
    assert geo.rayleigh_length == pytest.approx(math.pi * 55e-6**2 / 1064e-9, rel=1e-14)
