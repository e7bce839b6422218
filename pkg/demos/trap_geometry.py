"""Tour of the crossed-trap geometry: potential, tilted depths, frequencies.

Two 1064 nm beams with 55 um waists cross at 45 degrees.  Gravity tilts the
potential, moving the minimum slightly below the crossing and opening an
escape saddle underneath it; the usable depth is the climb from minimum to
saddle.  The arms (single-beam regions) are half as deep and spill first.
"""
import math

import numpy as np

from codt import (
    BeamGeometry,
    Environment,
    K_B,
    TrapConfig,
    effective_depth,
    hessian_frequencies,
    potential,
    rubidium_87,
)


def make_trap(depth_uK, gravity=9.81):
    return TrapConfig(
        geometry=BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=math.radians(45)),
        depth=depth_uK * 1e-6,
        species=rubidium_87(),
        environment=Environment(gravity=gravity, temperature=300.0, pressure=1.3e-9),
    )


cfg = make_trap(657.0)
w0 = cfg.geometry.waist

print("=== potential along the vertical line through the crossing ===")
print(f"{'z/w0':>6}  {'U/kB (uK)':>12}")
for zw in (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0):
    u = potential(0.0, 0.0, zw * w0, cfg)
    print(f"{zw:6.1f}  {u / K_B * 1e6:12.2f}")

print()
print("=== effective depths under gravity ===")
rep = effective_depth(cfg)
print(f"bare depth           : {cfg.depth * 1e6:8.1f} uK")
print(f"effective center depth: {rep.u_eff * 1e6:8.1f} uK "
      f"({rep.u_eff / cfg.depth:.1%} of bare)")
print(f"effective arm depth   : {rep.u_arm * 1e6:8.1f} uK (bare arm: {cfg.depth / 2 * 1e6:.1f})")
print(f"minimum sits at z = {rep.z_min * 1e6:+.3f} um, saddle at {rep.z_saddle * 1e6:+.2f} um")

print()
print("=== how the depths erode as the trap weakens ===")
crit = rep.critical_arm_depth
print(f"arm critical depth e^(1/2) m g w0 / kB = {crit * 1e6:.2f} uK")
print(f"{'U0 (uK)':>8}  {'U_eff (uK)':>10}  {'U_arm (uK)':>10}  {'arms trapped':>12}")
for depth_uK in (657, 100, 30, 12, 9.5, 9.0, 6.0):
    r = effective_depth(make_trap(depth_uK))
    print(f"{depth_uK:8.1f}  {r.u_eff * 1e6:10.2f}  {r.u_arm * 1e6:10.2f}  {str(r.trapped_arms):>12}")

print()
print("=== harmonic frequencies at the minimum ===")
omegas, axes = hessian_frequencies(cfg)
for i, om in enumerate(np.sort(omegas)):
    print(f"omega_{i + 1} / 2pi = {om / (2 * math.pi):8.1f} Hz")
print("softest axis runs along the bisector of the two beams (the long axis);")
print("the stiffest is vertical, where both beams confine at full curvature.")
