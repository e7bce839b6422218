"""Physical constants, unit helpers, and the shared species / environment types.

Unit conventions used throughout the package:

* energies in Joules, potential depths reported in Kelvin (energy / k_B),
* lengths in meters, times in seconds, atom numbers dimensionless.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA 2018
K_B = 1.380649e-23  # Boltzmann constant, J/K (exact)
BOHR_RADIUS = 5.29177210903e-11  # m

#: Default gravitational acceleration, m/s^2.  Set to 0 for microgravity.
G_STANDARD = 9.81

#: 87Rb mass, kg (86.909180532 u).
RB87_MASS = 1.44316060e-25

#: Default 87Rb scattering cross-section, m^2: 8*pi*a^2 with a = 98 Bohr radii.
#: Literature value for indistinguishable ground-state 87Rb; adjust per species.
RB87_CROSS_SECTION = 8.0 * math.pi * (98.0 * BOHR_RADIUS) ** 2


class DomainError(ValueError):
    """An argument lies outside the physically meaningful domain."""


@dataclass(frozen=True)
class SpeciesConstants:
    """Atomic species parameters.

    Attributes
    ----------
    mass : float
        Atomic mass (kg).
    cross_section : float
        Elastic scattering cross-section (m^2).
    name : str
        Species label, informational only.
    """

    mass: float
    cross_section: float
    name: str = ""

    def __post_init__(self):
        if not self.mass > 0:
            raise DomainError(f"mass must be > 0, got {self.mass}")
        if not self.cross_section > 0:
            raise DomainError(f"cross_section must be > 0, got {self.cross_section}")


def rubidium_87() -> SpeciesConstants:
    """87Rb with the default literature cross-section."""
    return SpeciesConstants(mass=RB87_MASS, cross_section=RB87_CROSS_SECTION, name="87Rb")


@dataclass(frozen=True)
class Environment:
    """Gravity and residual background gas around the trap.

    Exactly one of ``pressure`` / ``density`` is given at construction; the
    other is derived through the ideal-gas law at ``temperature``.

    Attributes
    ----------
    gravity : float
        Gravitational acceleration (m/s^2, >= 0; 0 means microgravity).
    temperature : float
        Background gas temperature (K).
    pressure : float
        Background pressure (Pa).
    density : float
        Background number density (m^-3).
    """

    gravity: float = G_STANDARD
    temperature: float = 300.0
    pressure: float | None = None
    density: float | None = None

    def __post_init__(self):
        if self.gravity < 0:
            raise DomainError(f"gravity must be >= 0, got {self.gravity}")
        if not self.temperature > 0:
            raise DomainError(f"background temperature must be > 0, got {self.temperature}")
        if (self.pressure is None) == (self.density is None):
            raise DomainError("give exactly one of pressure / density")
        if self.pressure is not None:
            if self.pressure < 0:
                raise DomainError(f"pressure must be >= 0, got {self.pressure}")
            object.__setattr__(self, "density", background_density(self.pressure, self.temperature))
        else:
            if self.density < 0:
                raise DomainError(f"density must be >= 0, got {self.density}")
            object.__setattr__(self, "pressure", self.density * K_B * self.temperature)


def kelvin_to_joules(t: float) -> float:
    """Convert an energy expressed in Kelvin to Joules."""
    return t * K_B


def joules_to_kelvin(e: float) -> float:
    """Convert an energy in Joules to Kelvin."""
    return e / K_B


def mean_thermal_speed(temperature: float, mass: float) -> float:
    """Mean speed of a Maxwell-Boltzmann gas: sqrt(8 k_B T / (pi m)).

    Parameters
    ----------
    temperature : float
        Gas temperature (K), > 0.
    mass : float
        Particle mass (kg), > 0.

    Returns
    -------
    float
        Mean speed (m/s).
    """
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    if not mass > 0:
        raise DomainError(f"mass must be > 0, got {mass}")
    return math.sqrt(8.0 * K_B * temperature / (math.pi * mass))


def background_density(pressure: float, temperature: float) -> float:
    """Ideal-gas number density P / (k_B T).

    Parameters
    ----------
    pressure : float
        Pressure (Pa), >= 0.
    temperature : float
        Temperature (K), > 0.

    Returns
    -------
    float
        Number density (m^-3).
    """
    if pressure < 0:
        raise DomainError(f"pressure must be >= 0, got {pressure}")
    if not temperature > 0:
        raise DomainError(f"temperature must be > 0, got {temperature}")
    return pressure / (K_B * temperature)
