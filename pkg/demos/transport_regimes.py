"""Loss vs loading in the trap center: the two evolutionary regimes.

The center population drains through background collisions (rate Gamma) and
two-body collisions (beta N_c^2) while the arms feed it at a rate scheduled
by the temperature damping (2 gamma N0 f e^-f).  Whichever wins at t = 0
decides the shape: monotone decay (I) or a rise to a single peak (II).
"""
import math

import numpy as np

from codt import (
    RateCoefficients,
    classify,
    loading_rate,
    loss_rate,
    peak_time,
    simulate,
)

ALPHA = 0.658
coeffs = RateCoefficients.from_beta0(
    gamma_bg=0.068, beta0=4e-18, v_eff=8.9e-12, gamma_damp=0.979, alpha=ALPHA
)
print(f"coefficients: Gamma = {coeffs.gamma_bg} 1/s, beta = {coeffs.beta:.2e} 1/s/atom, "
      f"gamma = {coeffs.gamma_damp} 1/s")

print()
print("=== the threshold between the regimes ===")
for n_c0 in (3e5, 1.41e6, 5.02e6):
    d = classify(n_c0, n_c0 / ALPHA, coeffs)
    print(f"N_c0 = {n_c0:9.3g}: regime {d.regime}  "
          f"(threshold {d.threshold:.3g}, initial rate {d.rate_at_zero:+.3g} atoms/s)")

print()
print("=== a dilute cloud loads before it decays (case II) ===")
n_c0 = 1.41e6
res = simulate(n_c0, n_c0 / ALPHA, coeffs)
t_m, n_m = peak_time(res)
print(f"peak: N_c = {n_m:.3e} at t = {t_m:.3f} s  (started at {n_c0:.3g})")
print(f"{'t (s)':>6}  {'N_c':>10}  {'loading':>10}  {'loss':>10}")
for t_probe in (0.0, 0.1, t_m, 1.0, 2.0, 4.0):
    n = float(res.interpolant(t_probe)[0])
    r = loading_rate(t_probe, coeffs.gamma_damp, res.n_total0)
    d = loss_rate(n, coeffs)
    print(f"{t_probe:6.2f}  {n:10.3e}  {r:10.3e}  {d:10.3e}")

print()
print("=== a dense cloud only decays (case I) ===")
n_c0 = 5.02e6
res1 = simulate(n_c0, n_c0 / ALPHA, coeffs)
print(f"regime {res1.regime}, peak: {peak_time(res1)}")
samples = res1.n_center[:: len(res1.n_center) // 8]
print("N_c samples:", "  ".join(f"{v:.2e}" for v in samples))
print("monotone:", bool(np.all(np.diff(res1.n_center) <= 0)))

print()
print("=== stronger two-body loss brings the peak earlier ===")
for beta0 in (2e-18, 4e-18, 8e-18):
    c = RateCoefficients.from_beta0(
        gamma_bg=0.068, beta0=beta0, v_eff=8.9e-12, gamma_damp=0.979, alpha=ALPHA
    )
    r = simulate(1.0e6, 1.0e6 / ALPHA, c)
    print(f"beta0 = {beta0:.0e} m^3/s: peak at {r.t_peak:.3f} s, N_peak = {r.n_peak:.3e}")
