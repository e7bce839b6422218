"""Kinetics of the trap-center population: loss, loading, and their competition.

The center population ``N_c(t)`` obeys

    dN_c/dt = -Gamma N_c - beta N_c^2 + 2 gamma N0 f e^{-f},   f = exp(2 gamma t)

whose right side splits into a loss drain (background collisions plus
density-dependent two-body loss) and a loading flow from the trap arms,
scheduled by the temperature damping rate ``gamma``.  Depending on the sign
of the rate at t = 0 the population either decays monotonically (regime I)
or rises to a single interior maximum before decaying (regime II).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .constants import DomainError

#: exp(2*gamma*t) values beyond this make the loading term underflow to zero.
_LOAD_EXP_CAP = 700.0


class ModelViolationError(RuntimeError):
    """A structural assumption of the rate model failed numerically."""


@dataclass(frozen=True)
class RateCoefficients:
    """Rate coefficients driving the center-population equation.

    Attributes
    ----------
    gamma_bg : float
        Exponential loss rate from background-gas collisions (s^-1).
    beta : float
        Per-atom two-body loss rate, ``beta0 / v_eff`` (s^-1 per atom).
    gamma_damp : float
        Temperature damping rate scheduling the loading term (s^-1).
    beta0 : float, optional
        Two-body loss coefficient (m^3/s); derived from ``beta * v_eff``
        when both are available.
    v_eff : float, optional
        Effective cloud volume (m^3).
    alpha : float, optional
        Initial center fraction N_c0/N_0.
    eta : float, optional
        Temperature-to-depth ratio T/U_eff.
    """

    gamma_bg: float = 0.0
    beta: float = 0.0
    gamma_damp: float = 0.0
    beta0: float | None = None
    v_eff: float | None = None
    alpha: float | None = None
    eta: float | None = None

    def __post_init__(self):
        for name in ("gamma_bg", "beta", "gamma_damp"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        if self.v_eff is not None and not self.v_eff > 0:
            raise DomainError(f"v_eff must be > 0, got {self.v_eff}")
        if self.beta0 is None and self.v_eff is not None:
            object.__setattr__(self, "beta0", self.beta * self.v_eff)
        if self.beta0 is not None:
            if self.beta0 < 0:
                raise DomainError(f"beta0 must be >= 0, got {self.beta0}")
            if self.v_eff is not None:
                expect = self.beta * self.v_eff
                scale = max(abs(self.beta0), abs(expect), 1e-300)
                if abs(self.beta0 - expect) > 1e-9 * scale:
                    raise DomainError(
                        f"inconsistent beta0={self.beta0} vs beta*v_eff={expect}"
                    )
        if self.alpha is not None and not 0.0 < self.alpha <= 1.0:
            raise DomainError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.eta is not None and not self.eta > 0:
            raise DomainError(f"eta must be > 0, got {self.eta}")

    @staticmethod
    def from_beta0(
        gamma_bg: float,
        beta0: float,
        v_eff: float,
        gamma_damp: float,
        alpha: float | None = None,
        eta: float | None = None,
    ) -> "RateCoefficients":
        """Build coefficients from the volumetric two-body coefficient."""
        if not v_eff > 0:
            raise DomainError(f"v_eff must be > 0, got {v_eff}")
        return RateCoefficients(
            gamma_bg=gamma_bg,
            beta=beta0 / v_eff,
            gamma_damp=gamma_damp,
            beta0=beta0,
            v_eff=v_eff,
            alpha=alpha,
            eta=eta,
        )


@dataclass(frozen=True)
class Classification:
    """Regime decision for given initial numbers.

    ``threshold`` is the N_c0 below which loading wins at t = 0 (may be
    ``inf`` when two-body loss is absent and loading always wins).
    """

    regime: str  # "I" or "II"
    threshold: float
    rate_at_zero: float


@dataclass(eq=False, frozen=True)
class SimulationResult:
    """Integrated trajectory of the center population."""

    times: np.ndarray
    n_center: np.ndarray
    loading: np.ndarray
    loss: np.ndarray
    regime: str
    t_peak: float | None
    n_peak: float | None
    coeffs: RateCoefficients
    n_total0: float
    interpolant: object  # dense solution, callable t -> N_c


def loading_rate(t, gamma_damp: float, n_total0: float):
    """Loading flow from the arms into the trap center (atoms/s).

    ``R(t) = 2 gamma N0 f exp(-f)`` with ``f = exp(2 gamma t)``: the flow
    starts at ``2 gamma N0 / e`` and dies off superexponentially as the
    temperature decay runs out.  Accepts scalar or array ``t``.
    """
    if gamma_damp < 0:
        raise DomainError(f"gamma_damp must be >= 0, got {gamma_damp}")
    if n_total0 < 0:
        raise DomainError(f"n_total0 must be >= 0, got {n_total0}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("loading rate is defined for t >= 0")
    u = 2.0 * gamma_damp * t
    f = np.exp(np.minimum(u, _LOAD_EXP_CAP))
    out = 2.0 * gamma_damp * n_total0 * np.exp(u - f)
    return float(out) if out.ndim == 0 else out


def loss_rate(n_center, coeffs: RateCoefficients):
    """Center-population drain (atoms/s): linear background plus two-body term."""
    n = np.asarray(n_center, dtype=float)
    if np.any(n < 0):
        raise DomainError("atom number must be >= 0")
    out = coeffs.gamma_bg * n + coeffs.beta * n * n
    return float(out) if out.ndim == 0 else out


def center_rate(t, n_center, coeffs: RateCoefficients, n_total0: float):
    """Net rate dN_c/dt (atoms/s) at time ``t`` and population ``n_center``."""
    n = np.asarray(n_center, dtype=float)
    u = 2.0 * coeffs.gamma_damp * np.asarray(t, dtype=float)
    f = np.exp(np.minimum(u, _LOAD_EXP_CAP))
    out = (
        -coeffs.gamma_bg * n
        - coeffs.beta * n * n
        + 2.0 * coeffs.gamma_damp * n_total0 * np.exp(u - f)
    )
    return float(out) if out.ndim == 0 else out


def default_horizon(coeffs: RateCoefficients) -> float:
    """Simulation horizon: loading is spent beyond 6/gamma; at least 5 s."""
    if coeffs.gamma_damp > 0:
        return max(6.0 / coeffs.gamma_damp, 5.0)
    return 5.0


def classify(n_c0: float, n_total0: float, coeffs: RateCoefficients) -> Classification:
    """Regime decision from the sign of the t = 0 rate.

    Regime II (initial rise) holds iff ``N_c0`` is strictly below the
    threshold ``(2 gamma e^-1 - Gamma alpha) / (alpha beta)`` with
    ``alpha = N_c0/N_0``; ties are classified as regime I.
    """
    if n_c0 < 0 or n_total0 <= 0:
        raise DomainError("need n_c0 >= 0 and n_total0 > 0")
    if n_c0 > n_total0:
        raise DomainError(f"n_c0={n_c0} exceeds n_total0={n_total0}")
    rhs0 = center_rate(0.0, n_c0, coeffs, n_total0)
    gain = 2.0 * coeffs.gamma_damp * math.exp(-1.0)
    alpha = n_c0 / n_total0
    if n_c0 == 0:
        threshold = math.inf if gain > 0 else 0.0
    elif coeffs.beta == 0:
        # no two-body loss: the sign is independent of N_c0
        threshold = math.inf if gain > coeffs.gamma_bg * alpha else 0.0
    else:
        threshold = (gain - coeffs.gamma_bg * alpha) / (alpha * coeffs.beta)
    return Classification(
        regime="II" if rhs0 > 0 else "I",
        threshold=threshold,
        rate_at_zero=rhs0,
    )


def simulate(
    n_c0: float,
    n_total0: float,
    coeffs: RateCoefficients,
    horizon: float | None = None,
    rtol: float = 1e-8,
    atol: float = 1e-3,
    n_samples: int = 400,
) -> SimulationResult:
    """Integrate the center-population equation with an adaptive RK pair.

    The trajectory is sampled on ``n_samples`` uniform times over the horizon
    (default :func:`default_horizon`); the dense solution is kept for peak
    refinement.  Populations are clipped at zero against terminal round-off.
    """
    if n_c0 < 0 or n_total0 <= 0:
        raise DomainError("need n_c0 >= 0 and n_total0 > 0")
    if n_c0 > n_total0:
        raise DomainError(f"n_c0={n_c0} exceeds n_total0={n_total0}")
    span = horizon if horizon is not None else default_horizon(coeffs)
    if not span > 0:
        raise DomainError(f"horizon must be > 0, got {span}")
    # integrate past the requested window so the peak is always bracketable
    t_end = max(span, default_horizon(coeffs))
    sol = solve_ivp(
        lambda t, n: center_rate(t, n[0], coeffs, n_total0),
        (0.0, t_end),
        [float(n_c0)],
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not sol.success:
        raise ModelViolationError(f"integration failed: {sol.message}")
    times = np.linspace(0.0, span, n_samples)
    n_c = np.clip(sol.sol(times)[0], 0.0, None)
    regime = "II" if center_rate(0.0, n_c0, coeffs, n_total0) > 0 else "I"
    t_peak = n_peak = None
    if regime == "II":
        located = _locate_peak(sol.sol, coeffs, n_total0, t_end)
        if located is not None:
            t_peak, n_peak = located
    return SimulationResult(
        times=times,
        n_center=n_c,
        loading=loading_rate(times, coeffs.gamma_damp, n_total0),
        loss=loss_rate(n_c, coeffs),
        regime=regime,
        t_peak=t_peak,
        n_peak=n_peak,
        coeffs=coeffs,
        n_total0=n_total0,
        interpolant=sol.sol,
    )


def _locate_peak(sol, coeffs, n_total0, t_end, n_scan=2000):
    """Unique downward zero of the net rate along the dense solution, or None.

    None can only occur in the degenerate lossless case where the population
    grows monotonically toward its asymptote.
    """
    ts = np.linspace(0.0, t_end, n_scan)
    rate = center_rate(ts, np.clip(sol(ts)[0], 0.0, None), coeffs, n_total0)
    floor = 1e-12 * np.max(np.abs(rate))
    sign = np.sign(np.where(np.abs(rate) > floor, rate, 0.0))
    pos = np.nonzero(sign != 0)[0]
    changes = np.nonzero(np.diff(sign[pos]) != 0)[0]
    if changes.size > 1:
        raise ModelViolationError(
            f"{changes.size} sign changes of dN_c/dt; the model admits at most one"
        )
    if changes.size == 0:
        return None
    i0, i1 = pos[changes[0]], pos[changes[0] + 1]
    t_m = brentq(
        lambda t: center_rate(t, max(float(sol(t)[0]), 0.0), coeffs, n_total0),
        ts[i0],
        ts[i1],
        xtol=1e-12 * max(t_end, 1.0),
    )
    return float(t_m), float(max(sol(t_m)[0], 0.0))


def peak_time(result: SimulationResult) -> tuple[float, float] | None:
    """(t_peak, N_c(t_peak)) for a regime II trajectory, None for regime I."""
    if result.regime == "I":
        return None
    if result.t_peak is None:
        return None
    return result.t_peak, result.n_peak


@dataclass(eq=False, frozen=True)
class PhaseDiagram:
    """Regime labels over an (effective depth, initial center number) grid."""

    u_eff_grid: np.ndarray  # K
    n_c0_grid: np.ndarray  # atoms
    labels: np.ndarray  # shape (len(u_eff), len(n_c0)), "I"/"II"
    boundary: np.ndarray  # shape (k, 2): (u_eff, n_c0*) where the rates tie
    coefficients: tuple  # RateCoefficients per u_eff column


def phase_diagram(
    u_eff_grid,
    n_c0_grid,
    coeffs_at,
    boundary_rel_tol: float = 1e-9,
) -> PhaseDiagram:
    """Label every grid cell by regime and trace the tie line R(0) = D(0).

    Parameters
    ----------
    u_eff_grid : array of float
        Effective trap depths (K), each passed to ``coeffs_at``.
    n_c0_grid : array of float
        Initial center numbers; the total number follows from each column's
        ``alpha``.
    coeffs_at : callable
        ``coeffs_at(u_eff) -> RateCoefficients`` with ``alpha`` set.
    boundary_rel_tol : float
        Bisection stop on |R(0) - D(0)| / max(R(0), D(0)).
    """
    u_eff_grid = np.asarray(u_eff_grid, dtype=float)
    n_c0_grid = np.asarray(n_c0_grid, dtype=float)
    if u_eff_grid.size == 0 or n_c0_grid.size == 0:
        raise DomainError("phase diagram grid must be non-empty")
    if np.any(n_c0_grid <= 0):
        raise DomainError("n_c0 grid values must be > 0")
    labels = np.empty((u_eff_grid.size, n_c0_grid.size), dtype="<U2")
    boundary = []
    column_coeffs = []
    for i, u_eff in enumerate(u_eff_grid):
        coeffs = coeffs_at(float(u_eff))
        column_coeffs.append(coeffs)
        if coeffs.alpha is None:
            raise DomainError("coefficient model must set alpha")
        for j, n_c0 in enumerate(n_c0_grid):
            labels[i, j] = classify(n_c0, n_c0 / coeffs.alpha, coeffs).regime
        for n_star in _column_boundaries(coeffs, n_c0_grid, boundary_rel_tol):
            boundary.append((float(u_eff), n_star))
    return PhaseDiagram(
        u_eff_grid=u_eff_grid,
        n_c0_grid=n_c0_grid,
        labels=labels,
        boundary=np.asarray(boundary, dtype=float).reshape(-1, 2),
        coefficients=tuple(column_coeffs),
    )


def _column_boundaries(coeffs, n_c0_grid, rel_tol):
    """All R(0) = D(0) crossings along one depth column, by bisection."""

    def rate0(n):
        return center_rate(0.0, n, coeffs, n / coeffs.alpha)

    lo = float(np.min(n_c0_grid))
    hi = float(np.max(n_c0_grid))
    # expand beyond the grid so a threshold just outside still gets traced
    lo_ext = lo / 4.0
    hi_ext = hi * 4.0
    grid = np.geomspace(lo_ext, hi_ext, max(4 * n_c0_grid.size, 64))
    vals = np.array([rate0(n) for n in grid])
    out = []
    for k in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = grid[k], grid[k + 1]
        fa = rate0(a)
        for _ in range(200):
            midv = 0.5 * (a + b)
            fm = rate0(midv)
            gain = loading_rate(0.0, coeffs.gamma_damp, midv / coeffs.alpha)
            drain = loss_rate(midv, coeffs)
            if abs(gain - drain) <= rel_tol * max(gain, drain):
                break
            if fa * fm < 0:
                b = midv
            else:
                a, fa = midv, fm
        out.append(0.5 * (a + b))
    return out
