"""Where the rate coefficients come from, and recovering them from data.

The background rate follows from vacuum parameters alone; the two-body
coefficient from the thermal collision rate times a loss probability; the
damping rate from the measured temperature decay.  Given a measured center
population N_c(t), the (damping, two-body) pair is recovered by a
deterministic least-squares fit of the full rate equation.
"""
import math

import numpy as np

from codt import (
    Environment,
    TimeSeries,
    beta0_collisional,
    eta_ratio,
    fit_transport,
    gamma_background,
    gamma_from_temperature,
    rubidium_87,
)
from codt.estimation import model_curve

rb = rubidium_87()

print("=== background loss from vacuum parameters ===")
env = Environment(gravity=9.81, temperature=300.0, pressure=1.3e-9)
print(f"P = {env.pressure:.2g} Pa at {env.temperature:.0f} K -> n_b = {env.density:.3e} m^-3")
print(f"Gamma = sigma n_b v_bar = {gamma_background(env, rb):.4f} 1/s")

print()
print("=== two-body coefficient from the collision rate ===")
for t_uK in (150, 312, 600):
    b0 = beta0_collisional(t_uK * 1e-6, rb)
    print(f"T = {t_uK:4d} uK: beta0 = {b0 * 1e6:.3e} cm^3/s")

print()
print("=== damping rate from a temperature decay ===")
times = np.linspace(0.0, 2.0, 41)
temp = 312e-6 * np.exp(-0.979 * times)
series = TimeSeries(times=tuple(times), values=tuple(temp), kind="T")
gammas, avg = gamma_from_temperature(series)
print(f"synthetic exponential cooling at 0.979 1/s -> recovered gamma = {avg:.4f} 1/s")

print()
print("=== temperature-to-depth slope ===")
depths = np.array([200e-6, 371e-6, 657e-6, 900e-6, 1249e-6])
rng = np.random.default_rng(4)
temps = 0.475 * depths * (1 + 0.01 * rng.standard_normal(depths.size))
eta, err, _ = eta_ratio(list(zip(temps, depths)))
print(f"slope through origin: eta = {eta:.3f} +- {err:.3f}")

print()
print("=== fitting the rate equation to a noisy trajectory ===")
truth = {"gamma": 0.979, "beta0": 4e-18}
fixed = {"gamma_bg": 0.068, "n_total0": 1.41e6 / 0.658, "n_c0": 1.41e6, "v_eff": 8.9e-12}
t_data = np.linspace(0.0, 5.0, 15)
clean = model_curve(truth["gamma"], truth["beta0"], fixed, t_data)
noisy = clean * (1 + 0.03 * np.random.default_rng(42).standard_normal(t_data.size))
fit = fit_transport(
    TimeSeries(times=tuple(t_data), values=tuple(noisy), kind="N_c"), fixed
)
print(f"truth : gamma = {truth['gamma']:.3f} 1/s, beta0 = {truth['beta0']:.2e} m^3/s")
print(f"fitted: gamma = {fit.gamma_damp:.3f} +- {fit.stderr_gamma:.3f}, "
      f"beta0 = {fit.beta0:.2e} +- {fit.stderr_beta0:.1e}")
print(f"residual norm {fit.residual_norm:.3g} after {fit.n_evaluations} model evaluations")
