"""Rate coefficients from physics inputs, and fits of them to measured decays.

The background loss rate follows from vacuum parameters, the two-body
coefficient from the thermal collision rate times a loss probability, the
damping rate from the measured temperature decay, and the (damping,
two-body) pair can be fit jointly to a measured center-population series.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize

from .constants import (
    DomainError,
    Environment,
    SpeciesConstants,
    mean_thermal_speed,
)
from .dynamics import RateCoefficients
from .equilibrium import Region, effective_volume, CloudState
from .potential import TrapConfig, effective_depth

#: Default single-collision loss probability, calibrated once so that the
#: two-body coefficient at T = 312 uK matches the literature value
#: 4e-12 cm^3/s for ground-state 87Rb in a far-detuned trap.
DEFAULT_LOSS_PROBABILITY = 0.015

#: Deterministic multi-start grid for the transport fit (s^-1, m^3/s).
#: The near-zero damping start keeps pure-decay data out of a spurious
#: finite-damping local minimum; ties rank earlier starts first.
FIT_START_GAMMAS = (0.3, 1.0, 3.0, 0.01)
FIT_START_BETA0S = (1e-18, 4e-18, 1.6e-17)


class FitConvergenceError(RuntimeError):
    """Optimizer failed to converge; carries the best result found so far."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class TimeSeries:
    """Sampled observable: times (s), values, optional 1-sigma uncertainties.

    ``kind`` is one of ``N_c`` (center number), ``N_a`` (total number),
    ``T`` (temperature, K).
    """

    times: tuple
    values: tuple
    uncertainties: tuple | None = None
    kind: str = "N_c"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise DomainError("times and values must be 1-d and the same length")
        if np.any(np.diff(t) <= 0):
            bad = int(np.nonzero(np.diff(t) <= 0)[0][0]) + 1
            raise DomainError(f"times must be strictly increasing (row {bad})")
        if self.kind not in ("N_c", "N_a", "T"):
            raise DomainError(f"unknown series kind {self.kind!r}")
        if np.any(v < 0) or (self.kind == "T" and np.any(v <= 0)):
            raise DomainError(f"invalid {self.kind} values")
        if self.uncertainties is not None:
            u = np.asarray(self.uncertainties, dtype=float)
            if u.shape != t.shape or np.any(u <= 0):
                raise DomainError("uncertainties must match times and be > 0")
        object.__setattr__(self, "times", tuple(float(x) for x in t))
        object.__setattr__(self, "values", tuple(float(x) for x in v))
        if self.uncertainties is not None:
            object.__setattr__(
                self, "uncertainties", tuple(float(x) for x in self.uncertainties)
            )


@dataclass(frozen=True)
class FitResult:
    """Best-fit (gamma_damp, beta0) with uncertainties and diagnostics."""

    gamma_damp: float
    beta0: float
    stderr_gamma: float
    stderr_beta0: float
    covariance: tuple
    residual_norm: float
    fixed: dict
    objective_log: tuple
    n_evaluations: int
    converged: bool


def gamma_background(env: Environment, species: SpeciesConstants) -> float:
    """Exponential loss rate from background collisions: sigma * n_b * v_bar (s^-1)."""
    return species.cross_section * env.density * mean_thermal_speed(
        env.temperature, species.mass
    )


def beta0_collisional(
    temperature: float,
    species: SpeciesConstants,
    loss_probability: float = DEFAULT_LOSS_PROBABILITY,
) -> float:
    """Two-body loss coefficient sqrt(2) * sigma * v_bar * P (m^3/s).

    ``loss_probability`` is the chance that one elastic collision expels a
    trapped atom; it must lie in [0, 1].
    """
    if not 0.0 <= loss_probability <= 1.0:
        raise DomainError(f"loss probability must be in [0, 1], got {loss_probability}")
    return (
        math.sqrt(2.0)
        * species.cross_section
        * mean_thermal_speed(temperature, species.mass)
        * loss_probability
    )


def gamma_from_temperature(series: TimeSeries):
    """Damping rate -(1/T) dT/dt from a temperature series.

    Central differences at interior samples, one-sided at the ends; the
    average weights each sample by the time interval it represents.

    Returns
    -------
    (gammas, average) : (np.ndarray, float)
    """
    if series.kind != "T":
        raise DomainError("need a temperature series")
    t = np.asarray(series.times)
    temp = np.asarray(series.values)
    if t.size < 3:
        raise DomainError("need at least 3 samples")
    dtemp = np.gradient(temp, t)  # central interior, one-sided ends
    gammas = -dtemp / temp
    w = np.empty_like(t)
    w[1:-1] = 0.5 * (t[2:] - t[:-2])
    w[0] = 0.5 * (t[1] - t[0])
    w[-1] = 0.5 * (t[-1] - t[-2])
    return gammas, float(np.sum(w * gammas) / np.sum(w))


def eta_ratio(pairs):
    """Least-squares slope T = eta * U_eff through the origin.

    Parameters
    ----------
    pairs : sequence of (temperature_K, u_eff_K)

    Returns
    -------
    (eta, stderr, residuals) : (float, float, np.ndarray)
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
        raise DomainError("need pairs of (T, U_eff)")
    temp, depth = arr[:, 0], arr[:, 1]
    denom = float(np.sum(depth * depth))
    if denom == 0:
        raise DomainError("degenerate fit: all depths are zero")
    eta = float(np.sum(depth * temp)) / denom
    residuals = temp - eta * depth
    if arr.shape[0] > 1:
        stderr = math.sqrt(float(np.sum(residuals**2)) / (arr.shape[0] - 1) / denom)
    else:
        stderr = float("nan")
    return eta, stderr, residuals


def depth_for_effective(cfg: TrapConfig, u_eff: float) -> TrapConfig:
    """Config whose gravity-tilted effective depth equals ``u_eff`` (K)."""
    if not u_eff > 0:
        raise DomainError(f"u_eff must be > 0, got {u_eff}")
    if cfg.environment.gravity == 0:
        return dataclasses.replace(cfg, depth=u_eff)

    def gap(depth):
        return effective_depth(dataclasses.replace(cfg, depth=depth)).u_eff - u_eff

    lo = u_eff
    hi = u_eff + 10.0 * cfg.tilt_scale
    while gap(hi) < 0:
        hi *= 2.0
        if hi > 1e6 * u_eff:
            raise DomainError("cannot invert effective depth for this geometry")
    depth = brentq(gap, lo, hi, xtol=1e-9 * u_eff)
    return dataclasses.replace(cfg, depth=depth)


def coefficients_at_depth(
    cfg: TrapConfig,
    u_eff: float,
    eta: float,
    gamma_bg: float,
    gamma_damp: float,
    alpha: float,
    loss_probability: float = DEFAULT_LOSS_PROBABILITY,
    roi: Region | None = None,
    beta0: float | None = None,
    v_eff: float | None = None,
) -> RateCoefficients:
    """Full coefficient set at one effective depth.

    The cloud temperature follows ``T = eta * u_eff``; the two-body
    coefficient uses the collisional model at that temperature (unless
    overridden) and is divided by the effective volume of the equilibrium
    cloud over the center region.
    """
    roi = roi if roi is not None else Region.center_roi()
    temperature = eta * u_eff
    at_depth = depth_for_effective(cfg, u_eff)
    if beta0 is None:
        beta0 = beta0_collisional(temperature, cfg.species, loss_probability)
    if v_eff is None:
        state = CloudState(time=0.0, n_center=0.0, n_total=1.0, temperature=temperature)
        v_eff = effective_volume(state, at_depth, roi)
    return RateCoefficients.from_beta0(
        gamma_bg=gamma_bg,
        beta0=beta0,
        v_eff=v_eff,
        gamma_damp=gamma_damp,
        alpha=alpha,
        eta=eta,
    )


def model_curve(gamma_damp, beta0, fixed, times, rtol=1e-8, atol=1e-3):
    """Center population at ``times`` for trial (gamma_damp, beta0)."""
    beta = beta0 / fixed["v_eff"]
    n0 = fixed["n_total0"]
    gbg = fixed["gamma_bg"]

    def rhs(t, n):
        u = 2.0 * gamma_damp * t
        f = math.exp(min(u, 700.0))
        return -gbg * n[0] - beta * n[0] * n[0] + 2.0 * gamma_damp * n0 * math.exp(u - f)

    sol = solve_ivp(
        rhs,
        (0.0, times[-1]),
        [fixed["n_c0"]],
        method="RK45",
        rtol=rtol,
        atol=atol,
        t_eval=times,
    )
    if not sol.success:
        return None
    return sol.y[0]


def fit_transport(
    series: TimeSeries,
    fixed: dict,
    rtol: float = 1e-8,
    coarse_maxiter: int = 80,
    polish_maxiter: int = 400,
) -> FitResult:
    """Fit (gamma_damp, beta0) to a center-number series by least squares.

    ``fixed`` must provide positive ``gamma_bg``, ``n_total0``, ``n_c0`` and
    ``v_eff``.  The optimizer is a derivative-free simplex descent over the
    log of both parameters, restarted from a fixed 3x3 grid; the coarse pass
    ranks the starts and a longer polish runs from the best one.  Ties keep
    the earliest start, so the result is deterministic.
    """
    for key in ("gamma_bg", "n_total0", "n_c0", "v_eff"):
        if key not in fixed:
            raise DomainError(f"fixed inputs must include {key}")
        if not fixed[key] > 0:
            if key == "gamma_bg" and fixed[key] == 0:
                continue
            raise DomainError(f"fixed input {key} must be positive")
    if series.kind != "N_c":
        raise DomainError("need a center-number series")
    times = np.asarray(series.times)
    values = np.asarray(series.values)
    if times.size < 5:
        raise DomainError(f"need at least 5 samples, got {times.size}")
    if times[0] < 0:
        raise DomainError("times must be >= 0")
    weights = (
        1.0 / np.asarray(series.uncertainties)
        if series.uncertainties is not None
        else np.ones_like(values)
    )
    if times[0] > 0:
        times = np.concatenate([[0.0], times])
        pad = True
    else:
        pad = False

    cache: dict[bytes, float] = {}
    evals = [0]

    def objective(p):
        key = np.asarray(p).tobytes()
        if key in cache:
            return cache[key]
        gamma_damp, beta0 = math.exp(p[0]), math.exp(p[1])
        curve = model_curve(gamma_damp, beta0, fixed, times, rtol=rtol)
        if curve is None:
            val = 1e300
        else:
            model = curve[1:] if pad else curve
            val = float(np.sum((weights * (model - values)) ** 2))
        cache[key] = val
        evals[0] += 1
        return val

    scale = float(np.sum((weights * values) ** 2))
    coarse = []
    for gi, g0 in enumerate(FIT_START_GAMMAS):
        for bi, b0 in enumerate(FIT_START_BETA0S):
            res = minimize(
                objective,
                np.log([g0, b0]),
                method="Nelder-Mead",
                options={
                    "maxiter": coarse_maxiter,
                    "xatol": 1e-6,
                    "fatol": 1e-12 * scale,
                },
            )
            coarse.append(((gi, bi), res))
    best_idx, best = min(coarse, key=lambda item: (item[1].fun, item[0]))

    log = []

    def track(xk):
        log.append(objective(xk))

    polish = minimize(
        objective,
        best.x,
        method="Nelder-Mead",
        callback=track,
        options={
            "maxiter": polish_maxiter,
            "xatol": 1e-9,
            "fatol": 1e-14 * scale,
        },
    )
    gamma_fit, beta0_fit = math.exp(polish.x[0]), math.exp(polish.x[1])
    stderr_g, stderr_b, cov = _fit_uncertainties(
        gamma_fit, beta0_fit, fixed, times, values, weights, pad, rtol
    )
    result = FitResult(
        gamma_damp=gamma_fit,
        beta0=beta0_fit,
        stderr_gamma=stderr_g,
        stderr_beta0=stderr_b,
        covariance=cov,
        residual_norm=math.sqrt(polish.fun),
        fixed=dict(fixed),
        objective_log=tuple(log),
        n_evaluations=evals[0],
        converged=bool(polish.success),
    )
    if not polish.success:
        raise FitConvergenceError(
            f"simplex did not converge within {polish_maxiter} iterations", result
        )
    return result


def _fit_uncertainties(gamma_fit, beta0_fit, fixed, times, values, weights, pad, rtol):
    """1-sigma errors from the residual variance and a numeric Jacobian."""

    def curve(g, b):
        c = model_curve(g, b, fixed, times, rtol=rtol)
        return (c[1:] if pad else c) if c is not None else np.full_like(values, np.nan)

    base = curve(gamma_fit, beta0_fit)
    jac = np.empty((values.size, 2))
    for k, (p, dp) in enumerate(((gamma_fit, 1e-5 * gamma_fit), (beta0_fit, 1e-5 * beta0_fit))):
        args = [gamma_fit, beta0_fit]
        args[k] = p + dp
        hi = curve(*args)
        args[k] = p - dp
        lo = curve(*args)
        jac[:, k] = (hi - lo) / (2 * dp)
    jac = jac * weights[:, None]
    resid = weights * (base - values)
    dof = max(values.size - 2, 1)
    s2 = float(resid @ resid) / dof
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
        return (
            math.sqrt(max(cov[0, 0], 0.0)),
            math.sqrt(max(cov[1, 1], 0.0)),
            tuple(map(tuple, cov)),
        )
    except np.linalg.LinAlgError:
        nan = float("nan")
        return nan, nan, ((nan, nan), (nan, nan))
