"""Boltzmann equilibrium of the trapped cloud: density, volume, fractions.

The cloud temperature tracks the trap depth (T ~ 0.475 U_eff here), so the
density is strongly peaked at the crossing but leaks visibly into the arms.
The effective volume V_eff = (int n)^2 / int n^2 condenses that shape into
the single number the two-body loss rate needs, and the center fraction
says how much of the cloud the imaging rectangle actually sees.
"""
import math

import numpy as np

from codt import (
    BeamGeometry,
    CloudState,
    Environment,
    Region,
    TrapConfig,
    boltzmann_density,
    center_fraction,
    effective_depth,
    effective_volume,
    mc_partition,
    partition,
    rubidium_87,
)

cfg = TrapConfig(
    geometry=BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=math.radians(45)),
    depth=657e-6,
    species=rubidium_87(),
    environment=Environment(gravity=9.81, temperature=300.0, pressure=1.3e-9),
)
w0 = cfg.geometry.waist
u_eff = effective_depth(cfg).u_eff
state = CloudState(time=0.0, n_center=1.41e6, n_total=2.14e6, temperature=0.475 * u_eff)
print(f"cloud: N = {state.n_total:.3g} atoms at T = {state.temperature * 1e6:.0f} uK "
      f"(0.475 x U_eff = {u_eff * 1e6:.0f} uK)")

print()
print("=== density along the long axis (through the arms) ===")
print(f"{'x/w0':>6}  {'n (atoms/cm^3)':>15}")
for xw in (0.0, 1.0, 2.0, 3.0, 6.0, 12.0):
    n, _ = boltzmann_density(np.array([xw * w0, 0.0, 0.0]), state, cfg)
    print(f"{xw:6.1f}  {float(n) / 1e6:15.3e}")

roi = Region.center_roi()  # the 6 w0 x 4.5 w0 imaging rectangle
full = Region.full_trap()

print()
print("=== partition integral: deterministic quadrature vs Monte Carlo ===")
quad = partition(state, cfg, full)
mc = mc_partition(state, cfg, full, n_samples=500_000, seed=1)
rel = abs(mc.i1 - quad.i1) / quad.i1
print(f"quadrature (converged: {quad.converged}): {quad.i1:.6e}")
print(f"Monte Carlo, 5e5 samples:  {mc.i1:.6e} +- {mc.se1:.1e}")
print(f"relative difference: {rel:.2e} ({rel / (mc.se1 / quad.i1):.1f} standard errors)")

print()
print("=== effective volume and center fraction ===")
v_roi = effective_volume(state, cfg, roi)
v_full = effective_volume(state, cfg, full)
alpha = center_fraction(state, cfg, roi, full)
print(f"V_eff over the imaging rectangle: {v_roi:.3e} m^3 "
      f"(~ ({v_roi ** (1 / 3) * 1e6:.0f} um)^3)")
print(f"V_eff over the whole bound domain: {v_full:.3e} m^3 (arms included)")
print(f"center fraction alpha: {alpha:.3f}")
print("(the imaged fraction is much larger in experiments, which integrate")
print(" the line-of-sight column; the model counts three-dimensional atoms)")

print()
print("=== the cloud contracts into the center as it cools ===")
print(f"{'T/U_eff':>8}  {'V_eff ROI (m^3)':>16}  {'alpha':>7}")
for frac in (0.6, 0.475, 0.3, 0.15):
    st = CloudState(time=0.0, n_center=1e6, n_total=2e6, temperature=frac * u_eff)
    print(f"{frac:8.3f}  {effective_volume(st, cfg, roi):16.3e}  "
          f"{center_fraction(st, cfg, roi, full):7.3f}")
