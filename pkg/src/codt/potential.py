"""Two-beam crossed dipole trap potential and its derived geometry.

The trap is formed by two identical Gaussian beams crossing at their waists
with full angle ``theta`` in the x-y plane; gravity acts along -z (the
potential carries a ``+ m g z`` term).  All energies are in Joules; trap
depths are reported in Kelvin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import K_B, DomainError, Environment, SpeciesConstants


@dataclass(frozen=True)
class BeamGeometry:
    """Geometry of the two crossing beams.

    Attributes
    ----------
    waist : float
        1/e^2 intensity waist radius of each beam (m).
    wavelength : float
        Beam wavelength (m).
    crossing_angle : float
        Full angle between the beam axes (rad), in (0, pi).
    """

    waist: float
    wavelength: float
    crossing_angle: float

    def __post_init__(self):
        if not self.waist > 0:
            raise DomainError(f"waist must be > 0, got {self.waist}")
        if not self.wavelength > 0:
            raise DomainError(f"wavelength must be > 0, got {self.wavelength}")
        if not 0.0 < self.crossing_angle < math.pi:
            raise DomainError(
                f"crossing angle must lie strictly between 0 and pi, got {self.crossing_angle}"
            )

    @property
    def rayleigh_length(self) -> float:
        """Rayleigh length pi * waist^2 / wavelength (m)."""
        return math.pi * self.waist**2 / self.wavelength


@dataclass(frozen=True)
class TrapConfig:
    """Full trap description: beams, depth, species, environment.

    ``depth`` is the trap depth at the crossing with gravity off, in Kelvin.
    """

    geometry: BeamGeometry
    depth: float
    species: SpeciesConstants
    environment: Environment

    def __post_init__(self):
        if not self.depth > 0:
            raise DomainError(f"trap depth must be > 0, got {self.depth}")

    @property
    def tilt_scale(self) -> float:
        """Gravitational tilt scale m*g*waist/k_B (K)."""
        return self.species.mass * self.environment.gravity * self.geometry.waist / K_B


@dataclass(frozen=True)
class DepthReport:
    """Escape-relevant depths of the tilted trap, all in Kelvin.

    ``z_min`` / ``z_saddle`` locate the center-line potential minimum and the
    escape saddle along gravity; both are None when gravity is off (the
    saddle is then at infinity) or when the center holds no minimum.
    """

    u_eff: float
    u_arm: float
    critical_arm_depth: float
    trapped_center: bool
    trapped_arms: bool
    z_min: float | None
    z_saddle: float | None


def single_beam_potential(x, y, z, waist: float, rayleigh_length: float, depth_k: float):
    """Potential energy (J) of one focused Gaussian beam of depth ``depth_k`` (K).

    The beam propagates along x with focus at the origin: the axial intensity
    falls off as 1/(1 + x^2/Z_R^2) and the transverse profile is Gaussian with
    the locally expanded waist.
    """
    q = 1.0 + (np.asarray(x) / rayleigh_length) ** 2
    rho2 = np.asarray(y) ** 2 + np.asarray(z) ** 2
    return -K_B * depth_k * np.exp(-2.0 * rho2 / (waist**2 * q)) / q


def beam_frames(x, y, crossing_angle: float):
    """Rotate lab (x, y) into the (axial, transverse) frames of both beams.

    Returns ``(x1, y1, x2, y2)`` where beam i propagates along x_i.  The beam
    axes lie at +-(crossing_angle / 2) from the x axis.
    """
    c = math.cos(crossing_angle / 2.0)
    s = math.sin(crossing_angle / 2.0)
    x = np.asarray(x)
    y = np.asarray(y)
    x1 = c * x + s * y
    y1 = -s * x + c * y
    x2 = c * x - s * y
    y2 = -s * x - c * y
    return x1, y1, x2, y2


def potential(x, y, z, cfg: TrapConfig):
    """Trap potential energy (J) at lab-frame position(s) ``(x, y, z)``.

    Sum of the two beams, each carrying half of the crossing depth, plus the
    gravitational term ``m g z``.  Accepts scalars or broadcastable arrays.
    """
    geo = cfg.geometry
    x1, y1, x2, y2 = beam_frames(x, y, geo.crossing_angle)
    v = single_beam_potential(x1, y1, z, geo.waist, geo.rayleigh_length, cfg.depth / 2.0)
    v = v + single_beam_potential(x2, y2, z, geo.waist, geo.rayleigh_length, cfg.depth / 2.0)
    return v + cfg.species.mass * cfg.environment.gravity * np.asarray(z)


def _line_profile_extrema(slope, z_lo, z_hi, waist, n_scan=2001):
    """Roots of ``slope`` on [z_lo, z_hi] by grid bracketing + brentq.

    Returns the sorted root list; ``slope`` must be vectorized.
    """
    zg = np.linspace(z_lo, z_hi, n_scan)
    sg = slope(zg)
    roots = []
    sign = np.sign(sg)
    idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    for i in idx:
        roots.append(brentq(slope, zg[i], zg[i + 1], xtol=1e-6 * waist))
    for i in np.nonzero(sg == 0.0)[0]:
        roots.append(zg[i])
    return sorted(roots)


def _well_depth_along_z(profile, slope, waist, grav_on: bool):
    """(depth_K, z_min, z_saddle) for a tilted 1D well ``profile`` (J).

    With gravity off the well is symmetric about 0 and unescapable along z:
    the depth is the full profile depth and no saddle exists.
    """
    if not grav_on:
        return float(-profile(0.0) / K_B), 0.0, None
    # tilted well: the saddle sits below the minimum (escape toward -z); for a
    # very weak tilt it can fall outside the default scan range, so widen.
    for span in (5.0, 10.0, 20.0, 40.0, 80.0):
        roots = _line_profile_extrema(slope, -span * waist, span * waist, waist)
        if len(roots) >= 2:
            break
        if slope(np.array(-waist / 2.0)) >= 0:
            break  # restoring force never beats gravity: no well
    if len(roots) < 2:
        return 0.0, None, None
    z_saddle, z_min = roots[0], roots[-1]
    depth = (profile(z_saddle) - profile(z_min)) / K_B
    if depth <= 0:
        return 0.0, None, None
    return float(depth), float(z_min), float(z_saddle)


def effective_depth(cfg: TrapConfig) -> DepthReport:
    """Effective center and arm depths of the gravity-tilted trap.

    The center depth is measured on the line x = y = 0 between the local
    minimum and the downstream escape saddle of the summed two-beam profile.
    The arm depth uses a single beam's transverse profile at its waist plane
    (the other beam is negligible a few waists from the crossing); it
    vanishes at the critical depth ``exp(1/2) * m g w0 / k_B``.
    """
    w0 = cfg.geometry.waist
    grav_on = cfg.environment.gravity > 0
    mg = cfg.species.mass * cfg.environment.gravity

    def center_profile(z):
        return potential(0.0, 0.0, z, cfg)

    def center_slope(z):
        z = np.asarray(z, dtype=float)
        return K_B * cfg.depth * (4.0 * z / w0**2) * np.exp(-2.0 * z**2 / w0**2) + mg

    def arm_profile(z):
        z = np.asarray(z, dtype=float)
        return -0.5 * K_B * cfg.depth * np.exp(-2.0 * z**2 / w0**2) + mg * z

    def arm_slope(z):
        z = np.asarray(z, dtype=float)
        return K_B * cfg.depth * (2.0 * z / w0**2) * np.exp(-2.0 * z**2 / w0**2) + mg

    u_eff, z_min, z_saddle = _well_depth_along_z(center_profile, center_slope, w0, grav_on)
    u_arm, _, _ = _well_depth_along_z(arm_profile, arm_slope, w0, grav_on)
    critical = math.exp(0.5) * cfg.tilt_scale
    return DepthReport(
        u_eff=u_eff,
        u_arm=u_arm,
        critical_arm_depth=critical,
        trapped_center=u_eff > 0,
        trapped_arms=u_arm > 0,
        z_min=z_min,
        z_saddle=z_saddle,
    )


def hessian_eigen(f, r0, h):
    """Eigenvalues and eigenvectors of the Hessian of ``f`` at point ``r0``.

    Central differences with step ``h``; ``f`` takes (x, y, z).  Returns
    ``(eigenvalues, eigenvectors)`` as from ``numpy.linalg.eigh``.
    """
    r0 = np.asarray(r0, dtype=float)
    hess = np.empty((3, 3))
    e = np.eye(3)
    f0 = f(*r0)
    for i in range(3):
        fp = f(*(r0 + h * e[i]))
        fm = f(*(r0 - h * e[i]))
        hess[i, i] = (fp - 2.0 * f0 + fm) / h**2
    for i in range(3):
        for j in range(i + 1, 3):
            fpp = f(*(r0 + h * e[i] + h * e[j]))
            fpm = f(*(r0 + h * e[i] - h * e[j]))
            fmp = f(*(r0 - h * e[i] + h * e[j]))
            fmm = f(*(r0 - h * e[i] - h * e[j]))
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h**2)
    return np.linalg.eigh(hess)


def hessian_frequencies(cfg: TrapConfig):
    """Angular oscillation frequencies (rad/s) and principal axes at the minimum.

    Numerically diagonalizes the second-derivative matrix of the potential at
    the trap minimum.  Raises ``DomainError`` if the center holds no minimum
    or a curvature comes out non-positive.
    """
    report = effective_depth(cfg)
    if not report.trapped_center:
        raise DomainError("trap center holds no minimum for this configuration")
    z0 = report.z_min if report.z_min is not None else 0.0
    h = 1e-4 * cfg.geometry.waist
    evals, evecs = hessian_eigen(lambda x, y, z: potential(x, y, z, cfg), (0.0, 0.0, z0), h)
    if np.any(evals <= 0):
        raise DomainError(f"not a minimum: Hessian eigenvalues {evals}")
    omegas = np.sqrt(evals / cfg.species.mass)
    return omegas, evecs
