"""Run configuration: TOML file with nested sections and units in key names.

Every key is optional; defaults reproduce the reference apparatus (55 um
waist, 1064 nm, 45 degree crossing, 87Rb, 1.3e-9 Pa at 300 K).  Unknown
sections or keys are rejected by name.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .constants import (
    G_STANDARD,
    RB87_CROSS_SECTION,
    RB87_MASS,
    Environment,
    SpeciesConstants,
)
from .equilibrium import Region
from .potential import BeamGeometry, TrapConfig

CONFIG_SCHEMA = "codt-config/1"


class ConfigError(ValueError):
    """Configuration file is malformed; the message names the offending key."""


_SCHEMA = {
    "trap": {
        "waist_um": float,
        "wavelength_nm": float,
        "crossing_angle_deg": float,
        "depth_uK": float,
    },
    "species": {
        "name": str,
        "mass_kg": float,
        "cross_section_m2": float,
    },
    "environment": {
        "gravity_m_s2": float,
        "background_temperature_K": float,
        "background_pressure_Pa": float,
        "background_density_m3": float,
    },
    "regions": {
        "roi_l1_waists": float,
        "roi_l2_waists": float,
        "molasses_x_m": float,
        "molasses_y_m": float,
    },
    "coefficients": {
        "eta": float,
        "alpha": float,
        "loss_probability": float,
        "gamma_bg_per_s": float,
        "gamma_damp_per_s": float,
        "beta0_m3_per_s": float,
        "v_eff_m3": float,
    },
    "run": {
        "horizon_s": float,
        "ode_rtol": float,
        "ode_atol_atoms": float,
        "quad_tol": float,
        "seed": int,
        "mc_samples": int,
        "ueff_min_uK": float,
        "ueff_max_uK": float,
        "ueff_points": int,
        "nc0_min": float,
        "nc0_max": float,
        "nc0_points": int,
    },
}


@dataclass
class RunConfig:
    """Validated configuration with all defaults resolved."""

    waist_um: float = 55.0
    wavelength_nm: float = 1064.0
    crossing_angle_deg: float = 45.0
    depth_uK: float = 657.0

    species_name: str = "87Rb"
    mass_kg: float = RB87_MASS
    cross_section_m2: float = RB87_CROSS_SECTION

    gravity_m_s2: float = G_STANDARD
    background_temperature_K: float = 300.0
    background_pressure_Pa: float | None = 1.3e-9
    background_density_m3: float | None = None

    roi_l1_waists: float = 6.0
    roi_l2_waists: float = 4.5
    molasses_x_m: float = 4e-3
    molasses_y_m: float = 4e-3

    eta: float = 0.475
    alpha: float = 0.658
    loss_probability: float = 0.015
    gamma_bg_per_s: float | None = None
    gamma_damp_per_s: float | None = 0.979
    beta0_m3_per_s: float | None = None
    v_eff_m3: float | None = None

    horizon_s: float | None = None
    ode_rtol: float = 1e-8
    ode_atol_atoms: float = 1e-3
    quad_tol: float = 1e-4
    seed: int = 0
    mc_samples: int = 200_000
    ueff_min_uK: float = 100.0
    ueff_max_uK: float = 1300.0
    ueff_points: int = 9
    nc0_min: float = 2e5
    nc0_max: float = 8e6
    nc0_points: int = 9

    raw: dict = field(default_factory=dict, repr=False)

    # ---- derived objects -------------------------------------------------

    def species(self) -> SpeciesConstants:
        return SpeciesConstants(
            mass=self.mass_kg, cross_section=self.cross_section_m2, name=self.species_name
        )

    def environment(self) -> Environment:
        return Environment(
            gravity=self.gravity_m_s2,
            temperature=self.background_temperature_K,
            pressure=self.background_pressure_Pa,
            density=self.background_density_m3,
        )

    def trap(self) -> TrapConfig:
        geometry = BeamGeometry(
            waist=self.waist_um * 1e-6,
            wavelength=self.wavelength_nm * 1e-9,
            crossing_angle=math.radians(self.crossing_angle_deg),
        )
        return TrapConfig(
            geometry=geometry,
            depth=self.depth_uK * 1e-6,
            species=self.species(),
            environment=self.environment(),
        )

    def roi(self) -> Region:
        return Region.center_roi(self.roi_l1_waists, self.roi_l2_waists)

    def full_region(self) -> Region:
        return Region.full_trap(self.molasses_x_m, self.molasses_y_m)


_FIELD_MAP = {
    ("trap", "waist_um"): "waist_um",
    ("trap", "wavelength_nm"): "wavelength_nm",
    ("trap", "crossing_angle_deg"): "crossing_angle_deg",
    ("trap", "depth_uK"): "depth_uK",
    ("species", "name"): "species_name",
    ("species", "mass_kg"): "mass_kg",
    ("species", "cross_section_m2"): "cross_section_m2",
    ("environment", "gravity_m_s2"): "gravity_m_s2",
    ("environment", "background_temperature_K"): "background_temperature_K",
    ("environment", "background_pressure_Pa"): "background_pressure_Pa",
    ("environment", "background_density_m3"): "background_density_m3",
    ("regions", "roi_l1_waists"): "roi_l1_waists",
    ("regions", "roi_l2_waists"): "roi_l2_waists",
    ("regions", "molasses_x_m"): "molasses_x_m",
    ("regions", "molasses_y_m"): "molasses_y_m",
    ("coefficients", "eta"): "eta",
    ("coefficients", "alpha"): "alpha",
    ("coefficients", "loss_probability"): "loss_probability",
    ("coefficients", "gamma_bg_per_s"): "gamma_bg_per_s",
    ("coefficients", "gamma_damp_per_s"): "gamma_damp_per_s",
    ("coefficients", "beta0_m3_per_s"): "beta0_m3_per_s",
    ("coefficients", "v_eff_m3"): "v_eff_m3",
    ("run", "horizon_s"): "horizon_s",
    ("run", "ode_rtol"): "ode_rtol",
    ("run", "ode_atol_atoms"): "ode_atol_atoms",
    ("run", "quad_tol"): "quad_tol",
    ("run", "seed"): "seed",
    ("run", "mc_samples"): "mc_samples",
    ("run", "ueff_min_uK"): "ueff_min_uK",
    ("run", "ueff_max_uK"): "ueff_max_uK",
    ("run", "ueff_points"): "ueff_points",
    ("run", "nc0_min"): "nc0_min",
    ("run", "nc0_max"): "nc0_max",
    ("run", "nc0_points"): "nc0_points",
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a TOML configuration string."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"TOML parse error: {err}") from err
    cfg = RunConfig(raw=data)
    pressure_given = False
    density_given = False
    for section, body in data.items():
        if section == "schema":
            if body != CONFIG_SCHEMA:
                raise ConfigError(f"unsupported schema {body!r}; expected {CONFIG_SCHEMA!r}")
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key, value in body.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")
            want = _SCHEMA[section][key]
            if want is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
                value = float(value)
            elif want is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
            elif want is str and not isinstance(value, str):
                raise ConfigError(f"{section}.{key} must be a string, got {value!r}")
            setattr(cfg, _FIELD_MAP[(section, key)], value)
            if (section, key) == ("environment", "background_pressure_Pa"):
                pressure_given = True
            if (section, key) == ("environment", "background_density_m3"):
                density_given = True
    if pressure_given and density_given:
        raise ConfigError(
            "give exactly one of environment.background_pressure_Pa / background_density_m3"
        )
    if density_given:
        cfg.background_pressure_Pa = None
    _validate(cfg)
    return cfg


def load_config(path: str | None) -> RunConfig:
    """Load a config file, or the built-in defaults when ``path`` is None."""
    if path is None:
        return RunConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err


def _validate(cfg: RunConfig):
    positive = [
        ("trap.waist_um", cfg.waist_um),
        ("trap.wavelength_nm", cfg.wavelength_nm),
        ("trap.depth_uK", cfg.depth_uK),
        ("species.mass_kg", cfg.mass_kg),
        ("species.cross_section_m2", cfg.cross_section_m2),
        ("environment.background_temperature_K", cfg.background_temperature_K),
        ("regions.roi_l1_waists", cfg.roi_l1_waists),
        ("regions.roi_l2_waists", cfg.roi_l2_waists),
        ("regions.molasses_x_m", cfg.molasses_x_m),
        ("regions.molasses_y_m", cfg.molasses_y_m),
        ("coefficients.eta", cfg.eta),
        ("run.ode_rtol", cfg.ode_rtol),
        ("run.quad_tol", cfg.quad_tol),
    ]
    for name, value in positive:
        if not value > 0:
            raise ConfigError(f"{name} must be > 0, got {value}")
    if not 0 < cfg.crossing_angle_deg < 180:
        raise ConfigError(
            f"trap.crossing_angle_deg must lie strictly between 0 and 180, got {cfg.crossing_angle_deg}"
        )
    if cfg.gravity_m_s2 < 0:
        raise ConfigError(f"environment.gravity_m_s2 must be >= 0, got {cfg.gravity_m_s2}")
    if not 0 < cfg.alpha <= 1:
        raise ConfigError(f"coefficients.alpha must be in (0, 1], got {cfg.alpha}")
    if not 0 <= cfg.loss_probability <= 1:
        raise ConfigError(
            f"coefficients.loss_probability must be in [0, 1], got {cfg.loss_probability}"
        )
    if cfg.mc_samples < 1000:
        raise ConfigError(f"run.mc_samples must be >= 1000, got {cfg.mc_samples}")
    for name, value in (("run.ueff_points", cfg.ueff_points), ("run.nc0_points", cfg.nc0_points)):
        if value < 1:
            raise ConfigError(f"{name} must be >= 1, got {value}")
    if cfg.ueff_min_uK > cfg.ueff_max_uK or cfg.nc0_min > cfg.nc0_max:
        raise ConfigError("grid minima must not exceed maxima")
    if not cfg.nc0_min > 0:
        raise ConfigError(f"run.nc0_min must be > 0, got {cfg.nc0_min}")
