"""Command-line surface.

Every command is deterministic given the config file and seed: repeated
invocations produce byte-identical output.  Exit status: 0 success, 1
validation problem, 2 numeric failure.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import dynamics, equilibrium, estimation
from .config import ConfigError, RunConfig, load_config
from .constants import DomainError
from .dynamics import ModelViolationError, RateCoefficients
from .equilibrium import CloudState
from .estimation import FitConvergenceError
from .potential import effective_depth
from .reports import CSV_HEADERS, read_timeseries_csv, schema_check, write_csv, write_json_doc

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad arguments; remap to validation
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _ArgumentError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="codt", description=__doc__)
    p.add_argument("--config", help="TOML config path (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="override run.seed")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("depth", help="effective trap and arm depths under gravity")
    sp.add_argument("--json", help="optional result document path")

    sp = sub.add_parser("equilibrium", help="partition volume, V_eff, center fraction")
    sp.add_argument("--json", default="-", help="result document path or - for stdout")

    sp = sub.add_parser("simulate", help="integrate the center-population equation")
    sp.add_argument("--nc0", type=float, required=True, help="initial center number")
    sp.add_argument("--ntotal", type=float, required=True, help="initial total number")
    sp.add_argument("--horizon", type=float, help="override horizon (s)")
    sp.add_argument("--csv", default="-", help="trajectory CSV path or -")
    sp.add_argument("--json", help="optional result document path")

    sp = sub.add_parser("classify", help="regime decision and threshold")
    sp.add_argument("--nc0", type=float, required=True)
    sp.add_argument("--ntotal", type=float, required=True)
    sp.add_argument("--json", default="-")

    sp = sub.add_parser("fit", help="fit damping and two-body coefficients to data")
    sp.add_argument("--data", required=True, help="CSV with header t_s,N_c[,sigma_N]")
    sp.add_argument("--json", default="-")
    sp.add_argument("--residuals-csv", help="optional residual table path")

    sp = sub.add_parser("phase-diagram", help="regime map over depth and center number")
    sp.add_argument("--grid-csv", default="-", help="grid CSV path or -")
    sp.add_argument("--boundary-csv", help="tie-line CSV path")
    sp.add_argument("--temperature-csv", help="cloud temperature vs depth table path")
    sp.add_argument("--json", help="optional result document path")

    sp = sub.add_parser("mc-check", help="Monte Carlo vs quadrature partition check")
    sp.add_argument("--samples", type=int, help="override run.mc_samples")
    sp.add_argument("--json", default="-")

    sp = sub.add_parser("schema-check", help="validate produced CSV/JSON files")
    sp.add_argument("files", nargs="+")
    return p


def _coefficients(cfg: RunConfig, u_eff: float) -> RateCoefficients:
    """Coefficient set at one effective depth, honoring config overrides."""
    trap = cfg.trap()
    gamma_bg = (
        cfg.gamma_bg_per_s
        if cfg.gamma_bg_per_s is not None
        else estimation.gamma_background(cfg.environment(), cfg.species())
    )
    gamma_damp = cfg.gamma_damp_per_s if cfg.gamma_damp_per_s is not None else 0.979
    return estimation.coefficients_at_depth(
        trap,
        u_eff,
        eta=cfg.eta,
        gamma_bg=gamma_bg,
        gamma_damp=gamma_damp,
        alpha=cfg.alpha,
        loss_probability=cfg.loss_probability,
        roi=cfg.roi(),
        beta0=cfg.beta0_m3_per_s,
        v_eff=cfg.v_eff_m3,
    )


def _current_u_eff(cfg: RunConfig) -> float:
    report = effective_depth(cfg.trap())
    return report.u_eff if report.trapped_center else 0.0


def _cmd_depth(cfg: RunConfig, args) -> int:
    report = effective_depth(cfg.trap())
    print(f"U_eff_uK = {report.u_eff * 1e6!r}")
    print(f"U_arm_uK = {report.u_arm * 1e6!r}")
    print(f"critical_arm_depth_uK = {report.critical_arm_depth * 1e6!r}")
    print(f"trapped_center = {report.trapped_center}")
    print(f"trapped_arms = {report.trapped_arms}")
    if report.z_saddle is not None:
        print(f"z_min_um = {report.z_min * 1e6!r}")
        print(f"z_saddle_um = {report.z_saddle * 1e6!r}")
    if args.json:
        write_json_doc(
            args.json,
            "depth",
            {
                "u_eff_uK": report.u_eff * 1e6,
                "u_arm_uK": report.u_arm * 1e6,
                "critical_arm_depth_uK": report.critical_arm_depth * 1e6,
                "trapped_center": report.trapped_center,
                "trapped_arms": report.trapped_arms,
                "z_min_m": report.z_min,
                "z_saddle_m": report.z_saddle,
            },
        )
    return EXIT_OK


def _cmd_equilibrium(cfg: RunConfig, args) -> int:
    trap = cfg.trap()
    u_eff = _current_u_eff(cfg)
    if u_eff <= 0:
        raise DomainError("trap is not trapping: no equilibrium cloud")
    temperature = cfg.eta * u_eff
    state = CloudState(time=0.0, n_center=0.0, n_total=1.0, temperature=temperature)
    report = equilibrium.equilibrium_report(state, trap, cfg.roi(), cfg.full_region())
    write_json_doc(
        args.json,
        "equilibrium",
        {
            "temperature_K": temperature,
            "partition_volume_m3": report.partition_volume,
            "v_eff_m3": report.effective_volume,
            "center_fraction": report.center_fraction,
            "peak_location_m": list(report.peak_location),
        },
    )
    return EXIT_OK


def _cmd_simulate(cfg: RunConfig, args) -> int:
    if args.nc0 > args.ntotal:
        raise DomainError(f"--nc0 {args.nc0} exceeds --ntotal {args.ntotal}")
    u_eff = _current_u_eff(cfg)
    if u_eff <= 0:
        raise DomainError("trap is not trapping")
    coeffs = _coefficients(cfg, u_eff)
    result = dynamics.simulate(
        args.nc0,
        args.ntotal,
        coeffs,
        horizon=args.horizon if args.horizon is not None else cfg.horizon_s,
        rtol=cfg.ode_rtol,
        atol=cfg.ode_atol_atoms,
    )
    rows = zip(result.times, result.n_center, result.loading, result.loss)
    write_csv(args.csv, CSV_HEADERS["trajectory"], rows)
    summary = {
        "regime": result.regime,
        "t_peak_s": result.t_peak,
        "n_peak": result.n_peak,
        "gamma_bg_per_s": coeffs.gamma_bg,
        "gamma_damp_per_s": coeffs.gamma_damp,
        "beta0_m3_per_s": coeffs.beta0,
        "v_eff_m3": coeffs.v_eff,
    }
    stream = sys.stderr if args.csv == "-" else sys.stdout
    peak_txt = "" if result.t_peak is None else f" t_peak_s={result.t_peak!r} n_peak={result.n_peak!r}"
    print(f"regime={result.regime}{peak_txt}", file=stream)
    if args.json:
        write_json_doc(args.json, "simulate", summary)
    return EXIT_OK


def _cmd_classify(cfg: RunConfig, args) -> int:
    u_eff = _current_u_eff(cfg)
    if u_eff <= 0:
        raise DomainError("trap is not trapping")
    coeffs = _coefficients(cfg, u_eff)
    decision = dynamics.classify(args.nc0, args.ntotal, coeffs)
    write_json_doc(
        args.json,
        "classify",
        {
            "regime": decision.regime,
            "threshold_n_c0": decision.threshold,
            "rate_at_zero_atoms_per_s": decision.rate_at_zero,
            "u_eff_uK": u_eff * 1e6,
            "beta_per_s": coeffs.beta,
        },
    )
    return EXIT_OK


def _cmd_fit(cfg: RunConfig, args) -> int:
    times, values, sigmas = read_timeseries_csv(args.data)
    series = estimation.TimeSeries(
        times=tuple(times),
        values=tuple(values),
        uncertainties=tuple(sigmas) if sigmas is not None else None,
        kind="N_c",
    )
    u_eff = _current_u_eff(cfg)
    if u_eff <= 0:
        raise DomainError("trap is not trapping")
    coeffs = _coefficients(cfg, u_eff)
    n_c0 = values[0]
    fixed = {
        "gamma_bg": coeffs.gamma_bg,
        "n_total0": n_c0 / cfg.alpha,
        "n_c0": n_c0,
        "v_eff": coeffs.v_eff,
    }
    result = estimation.fit_transport(series, fixed, rtol=cfg.ode_rtol)
    write_json_doc(
        args.json,
        "fit",
        {
            "gamma_damp_per_s": result.gamma_damp,
            "beta0_m3_per_s": result.beta0,
            "stderr_gamma_per_s": result.stderr_gamma,
            "stderr_beta0_m3_per_s": result.stderr_beta0,
            "residual_norm": result.residual_norm,
            "fixed": result.fixed,
            "n_evaluations": result.n_evaluations,
            "converged": result.converged,
        },
    )
    if args.residuals_csv:
        model = estimation.model_curve(
            result.gamma_damp,
            result.beta0,
            result.fixed,
            np.concatenate([[0.0], times]) if times[0] > 0 else times,
            rtol=cfg.ode_rtol,
        )
        model = model[1:] if times[0] > 0 else model
        rows = [
            (t, v, m, v - m) for t, v, m in zip(times, values, model)
        ]
        write_csv(args.residuals_csv, CSV_HEADERS["fit-residuals"], rows)
    return EXIT_OK


def _cmd_phase_diagram(cfg: RunConfig, args) -> int:
    if cfg.ueff_points < 1 or cfg.nc0_points < 1:
        raise DomainError("empty phase-diagram grid")
    u_grid = np.linspace(cfg.ueff_min_uK, cfg.ueff_max_uK, cfg.ueff_points) * 1e-6
    n_grid = np.geomspace(cfg.nc0_min, cfg.nc0_max, cfg.nc0_points)
    trap = cfg.trap()
    critical = effective_depth(trap).critical_arm_depth
    if u_grid[0] <= critical:
        raise DomainError(
            f"run.ueff_min_uK must exceed the critical arm depth {critical * 1e6:.3f} uK"
        )
    diagram = dynamics.phase_diagram(u_grid, n_grid, lambda u: _coefficients(cfg, u))
    grid_rows = []
    for i, u in enumerate(diagram.u_eff_grid):
        for j, n in enumerate(diagram.n_c0_grid):
            grid_rows.append((u * 1e6, n, diagram.labels[i, j]))
    write_csv(args.grid_csv, CSV_HEADERS["phase-grid"], grid_rows)
    if args.boundary_csv:
        rows = [(u * 1e6, n) for u, n in diagram.boundary]
        write_csv(args.boundary_csv, CSV_HEADERS["phase-boundary"], rows)
    if args.temperature_csv:
        rows = [
            (u * 1e6, c.eta * u) for u, c in zip(diagram.u_eff_grid, diagram.coefficients)
        ]
        write_csv(args.temperature_csv, CSV_HEADERS["depth-temperature"], rows)
    if args.json:
        write_json_doc(
            args.json,
            "phase-diagram",
            {
                "u_eff_uK": [u * 1e6 for u in diagram.u_eff_grid],
                "n_c0": list(map(float, diagram.n_c0_grid)),
                "boundary": [[u * 1e6, n] for u, n in diagram.boundary],
            },
        )
    return EXIT_OK


def _cmd_mc_check(cfg: RunConfig, args) -> int:
    trap = cfg.trap()
    u_eff = _current_u_eff(cfg)
    if u_eff <= 0:
        raise DomainError("trap is not trapping")
    temperature = cfg.eta * u_eff
    seed = cfg.seed  # --seed is already merged into the config
    samples = args.samples if args.samples is not None else cfg.mc_samples
    quad = equilibrium.partition(temperature, trap, cfg.full_region(), tol=cfg.quad_tol)
    mc = equilibrium.mc_partition(
        temperature, trap, cfg.full_region(), n_samples=samples, seed=seed
    )
    quad_err = abs(quad.history[-1][1] - quad.history[-2][1]) if len(quad.history) > 1 else 0.0
    rel = abs(mc.i1 - quad.i1) / quad.i1
    agree = abs(mc.i1 - quad.i1) <= 3.0 * (mc.se1 + quad_err)
    write_json_doc(
        args.json,
        "mc-check",
        {
            "temperature_K": temperature,
            "quad_i1": quad.i1,
            "quad_i2": quad.i2,
            "quad_converged": quad.converged,
            "mc_i1": mc.i1,
            "mc_se1": mc.se1,
            "mc_i2": mc.i2,
            "mc_se2": mc.se2,
            "n_samples": mc.n_samples,
            "seed": mc.seed,
            "relative_difference": rel,
            "agrees_within_3se": bool(agree),
        },
    )
    return EXIT_OK if agree else EXIT_NUMERIC


def _cmd_schema_check(cfg: RunConfig, args) -> int:
    status = EXIT_OK
    for path in args.files:
        problems = schema_check(path)
        if problems:
            status = EXIT_VALIDATION
            for p in problems:
                print(p, file=sys.stderr)
        else:
            print(f"{path}: ok")
    return status


_COMMANDS = {
    "depth": _cmd_depth,
    "equilibrium": _cmd_equilibrium,
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "fit": _cmd_fit,
    "phase-diagram": _cmd_phase_diagram,
    "mc-check": _cmd_mc_check,
    "schema-check": _cmd_schema_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        return _COMMANDS[args.command](cfg, args)
    except _ArgumentError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, DomainError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ModelViolationError, FitConvergenceError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
