"""Regime map over trap depth and initial center number.

For each effective depth the cloud temperature, the two-body coefficient,
and the effective volume follow from the coefficient model; the tie line
R(0) = D(0) then splits the plane into loading-dominated (II) and
loss-dominated (I) territory.  Dense clouds in deep traps decay at once;
dilute clouds refill from the arms first.
"""
import math

import numpy as np

from codt import (
    BeamGeometry,
    Environment,
    TrapConfig,
    coefficients_at_depth,
    phase_diagram,
    rubidium_87,
)

cfg = TrapConfig(
    geometry=BeamGeometry(waist=55e-6, wavelength=1064e-9, crossing_angle=math.radians(45)),
    depth=657e-6,
    species=rubidium_87(),
    environment=Environment(gravity=9.81, temperature=300.0, pressure=1.3e-9),
)


def coeffs_at(u_eff):
    return coefficients_at_depth(
        cfg, u_eff, eta=0.475, gamma_bg=0.068, gamma_damp=0.979, alpha=0.658
    )


u_grid = np.linspace(300e-6, 1300e-6, 6)
n_grid = np.geomspace(3e5, 8e6, 12)
print("computing the regime grid (one equilibrium quadrature per depth)...")
diagram = phase_diagram(u_grid, n_grid, coeffs_at)

print()
print("=== regime map (rows: U_eff, columns: N_c0 rising to the right) ===")
header = "          " + " ".join(f"{n:8.1e}" for n in n_grid)
print(header)
for i, u in enumerate(u_grid):
    row = " ".join(f"{diagram.labels[i, j]:>8}" for j in range(n_grid.size))
    print(f"{u * 1e6:7.0f}uK {row}")

print()
print("=== tie line R(0) = D(0) ===")
print(f"{'U_eff (uK)':>10}  {'N_c0*':>10}")
for u, n_star in diagram.boundary:
    print(f"{u * 1e6:10.0f}  {n_star:10.3e}")

print()
print("=== the two reference observations ===")
for depth_uK, n_c0, seen in ((657.0, 1.41e6, "rise then decay"), (1249.0, 5.02e6, "monotone decay")):
    c = coeffs_at(depth_uK * 1e-6)
    from codt import classify

    d = classify(n_c0, n_c0 / 0.658, c)
    print(f"({depth_uK:.0f} uK, {n_c0:.3g} atoms): regime {d.regime}, "
          f"threshold {d.threshold:.3g}  [observed: {seen}]")
