import math

import pytest

from codt.config import CONFIG_SCHEMA, ConfigError, RunConfig, load_config, parse_config

FULL_EXAMPLE = """
schema = "codt-config/1"

[trap]
waist_um = 55.0
wavelength_nm = 1064.0
crossing_angle_deg = 45.0
depth_uK = 657.0

[species]
name = "87Rb"
mass_kg = 1.44316060e-25

[environment]
gravity_m_s2 = 9.81
background_temperature_K = 300.0
background_pressure_Pa = 1.3e-9

[regions]
roi_l1_waists = 6.0
roi_l2_waists = 4.5
molasses_x_m = 4e-3
molasses_y_m = 4e-3

[coefficients]
eta = 0.475
alpha = 0.658
loss_probability = 0.015
gamma_damp_per_s = 0.979

[run]
seed = 7
mc_samples = 50000
"""


def test_defaults_build_reference_trap():
    cfg = RunConfig()
    trap = cfg.trap()
    assert trap.geometry.waist == pytest.approx(55e-6)
    assert trap.geometry.crossing_angle == pytest.approx(math.radians(45))
    assert trap.depth == pytest.approx(657e-6)
    assert trap.environment.density == pytest.approx(3.1386e11, rel=1e-4)
    assert cfg.roi().kind == "center-roi"


def test_full_example_parses():
    cfg = parse_config(FULL_EXAMPLE)
    assert cfg.seed == 7
    assert cfg.mc_samples == 50000
    assert cfg.gamma_damp_per_s == 0.979


def test_unknown_key_rejected_by_name():
    with pytest.raises(ConfigError, match="trap.waist_mm"):
        parse_config("[trap]\nwaist_mm = 55.0\n")


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="beams"):
        parse_config("[beams]\nwaist_um = 55.0\n")


def test_wrong_type_rejected():
    with pytest.raises(ConfigError, match="trap.waist_um"):
        parse_config('[trap]\nwaist_um = "wide"\n')
    with pytest.raises(ConfigError, match="run.seed"):
        parse_config("[run]\nseed = 1.5\n")


def test_pressure_and_density_mutually_exclusive():
    text = "[environment]\nbackground_pressure_Pa = 1e-9\nbackground_density_m3 = 1e11\n"
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config(text)


def test_density_alone_accepted():
    cfg = parse_config("[environment]\nbackground_density_m3 = 2e11\n")
    env = cfg.environment()
    assert env.density == pytest.approx(2e11)
    assert env.pressure > 0


def test_schema_string_checked():
    assert parse_config(f'schema = "{CONFIG_SCHEMA}"\n').eta == 0.475
    with pytest.raises(ConfigError, match="schema"):
        parse_config('schema = "codt-config/999"\n')


def test_malformed_toml_reports_location():
    with pytest.raises(ConfigError, match="line"):
        parse_config("[trap\nwaist_um = 55\n")


def test_degenerate_crossing_angle_rejected():
    with pytest.raises(ConfigError, match="crossing_angle"):
        parse_config("[trap]\ncrossing_angle_deg = 0.0\n")
    with pytest.raises(ConfigError, match="crossing_angle"):
        parse_config("[trap]\ncrossing_angle_deg = 180.0\n")


def test_microgravity_accepted():
    cfg = parse_config("[environment]\ngravity_m_s2 = 0.0\n")
    assert cfg.trap().environment.gravity == 0.0


def test_validation_bounds():
    with pytest.raises(ConfigError, match="alpha"):
        parse_config("[coefficients]\nalpha = 1.5\n")
    with pytest.raises(ConfigError, match="loss_probability"):
        parse_config("[coefficients]\nloss_probability = -0.1\n")
    with pytest.raises(ConfigError, match="mc_samples"):
        parse_config("[run]\nmc_samples = 10\n")
    with pytest.raises(ConfigError, match="nc0_min"):
        parse_config("[run]\nnc0_min = 0.0\n")


def test_load_config_missing_file():
    with pytest.raises(ConfigError, match="no-such-file.toml"):
        load_config("no-such-file.toml")


def test_load_config_none_gives_defaults():
    assert load_config(None).depth_uK == 657.0
