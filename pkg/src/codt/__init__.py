"""Atom transport kinetics in a crossed optical dipole trap.

A numpy/scipy library covering the trap potential and its effective depths
under gravity, truncated-Boltzmann equilibrium statistics of the trapped
cloud, the loss-versus-loading rate equation for the center population with
regime classification and phase diagrams, and least-squares estimation of
the rate coefficients from measured series.  Setting the gravitational
acceleration to zero switches every calculation to microgravity.
"""

from .constants import (
    BOHR_RADIUS,
    G_STANDARD,
    K_B,
    RB87_CROSS_SECTION,
    RB87_MASS,
    DomainError,
    Environment,
    SpeciesConstants,
    background_density,
    joules_to_kelvin,
    kelvin_to_joules,
    mean_thermal_speed,
    rubidium_87,
)
from .dynamics import (
    Classification,
    ModelViolationError,
    PhaseDiagram,
    RateCoefficients,
    SimulationResult,
    center_rate,
    classify,
    default_horizon,
    loading_rate,
    loss_rate,
    peak_time,
    phase_diagram,
    simulate,
)
from .equilibrium import (
    CloudState,
    EquilibriumReport,
    MCPartition,
    PartitionResult,
    Region,
    boltzmann_density,
    center_fraction,
    cloud_sigmas,
    effective_volume,
    equilibrium_report,
    mc_partition,
    partition,
)
from .estimation import (
    DEFAULT_LOSS_PROBABILITY,
    FitConvergenceError,
    FitResult,
    TimeSeries,
    beta0_collisional,
    coefficients_at_depth,
    depth_for_effective,
    eta_ratio,
    fit_transport,
    gamma_background,
    gamma_from_temperature,
)
from .potential import (
    BeamGeometry,
    DepthReport,
    TrapConfig,
    effective_depth,
    hessian_eigen,
    hessian_frequencies,
    potential,
    single_beam_potential,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
