"""Acceptance suite: every criterion prints one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines as they
execute; each test also asserts its criterion at the stated tolerance.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from codt import (
    CloudState,
    Environment,
    RateCoefficients,
    Region,
    center_rate,
    classify,
    cloud_sigmas,
    coefficients_at_depth,
    effective_depth,
    effective_volume,
    gamma_background,
    loading_rate,
    loss_rate,
    mc_partition,
    partition,
    rubidium_87,
    simulate,
)
from codt.estimation import TimeSeries, fit_transport, model_curve

from conftest import make_trap

ALPHA = 0.658
GAMMA_BG = 0.068
GAMMA_DAMP = 0.979


def report(num: int, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


def test_criterion_1_background_loss_rate():
    env = Environment(gravity=9.81, temperature=300.0, pressure=1.3e-9)
    rb = rubidium_87()
    gamma = gamma_background(env, rb)  # warm
    t0 = time.perf_counter()
    for _ in range(100):
        gamma = gamma_background(env, rb)
    per_call = (time.perf_counter() - t0) / 100
    in_band = 0.068 - 0.016 < gamma < 0.068 + 0.016
    ok = in_band and per_call < 1e-3
    assert report(
        1, ok, f"gamma_bg = {gamma:.4f} 1/s (band 0.052..0.084), {per_call * 1e6:.1f} us/call"
    )


def test_criterion_2_arm_criticality():
    t0 = time.perf_counter()
    worst = 0.0
    for waist_um in (25.0, 55.0, 100.0):
        closed = effective_depth(make_trap(depth_uK=50.0, waist_um=waist_um)).critical_arm_depth
        lo, hi = 0.2 * closed, 5.0 * closed
        for _ in range(26):
            mid = 0.5 * (lo + hi)
            trapped = effective_depth(
                make_trap(depth_uK=mid * 1e6, waist_um=waist_um)
            ).trapped_arms
            lo, hi = (lo, mid) if trapped else (mid, hi)
        rel = abs(0.5 * (lo + hi) - closed) / closed
        worst = max(worst, rel)
    dt = time.perf_counter() - t0
    ok = worst < 1e-3 and dt < 1.0
    assert report(2, ok, f"worst threshold error {worst:.2e} over 3 waists in {dt:.2f} s")


def test_criterion_3_ode_analytic_limits():
    t0 = time.perf_counter()
    c_exp = RateCoefficients(gamma_bg=GAMMA_BG, beta=0.0, gamma_damp=0.0)
    res = simulate(1e6, 1e6, c_exp, horizon=5.0)
    err_exp = np.max(
        np.abs(res.n_center - 1e6 * np.exp(-GAMMA_BG * res.times))
        / (1e6 * np.exp(-GAMMA_BG * res.times))
    )
    beta = 4.5e-7
    c_two = RateCoefficients(gamma_bg=0.0, beta=beta, gamma_damp=0.0)
    res = simulate(1e6, 1e6, c_two, horizon=5.0)
    expect = 1e6 / (1 + beta * 1e6 * res.times)
    err_two = np.max(np.abs(res.n_center - expect) / expect)
    dt = time.perf_counter() - t0
    ok = err_exp < 1e-6 and err_two < 1e-6 and dt < 1.0
    assert report(
        3, ok, f"exponential limit {err_exp:.2e}, two-body limit {err_two:.2e} in {dt:.2f} s"
    )


def test_criterion_4_loading_conservation():
    worst = 0.0
    for gamma in (0.3, 0.979, 3.0):
        total, _ = quad(loading_rate, 0.0, 6.0 / gamma, args=(gamma, 1e6), limit=200)
        worst = max(worst, abs(total - 1e6 / math.e) / (1e6 / math.e))
    ok = worst < 1e-3
    assert report(4, ok, f"worst integral error {worst:.2e} over gamma in {{0.3, 0.979, 3}}")


def test_criterion_5_regime_dichotomy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(12345)
    done = cases_two = 0
    while done < 200:
        coeffs = RateCoefficients(
            gamma_bg=rng.uniform(0.01, 0.3),
            beta=10 ** rng.uniform(-8.0, -5.0),
            gamma_damp=rng.uniform(0.1, 3.0),
        )
        n_c0 = 10 ** rng.uniform(4.0, 7.0)
        n0 = n_c0 / rng.uniform(0.2, 0.9)
        rate0 = center_rate(0.0, n_c0, coeffs, n0)
        scale = loading_rate(0.0, coeffs.gamma_damp, n0) + loss_rate(n_c0, coeffs)
        if abs(rate0) < 1e-3 * scale:
            continue  # boundary layer: either label is numerically defensible
        decision = classify(n_c0, n0, coeffs)
        assert (decision.regime == "II") == (rate0 > 0)
        assert (decision.regime == "II") == (n_c0 < decision.threshold)
        res = simulate(n_c0, n0, coeffs)
        rose = np.max(res.n_center) > res.n_center[0] * (1 + 1e-6)
        assert rose == (decision.regime == "II")
        if decision.regime == "II":
            assert res.t_peak is not None
            after = res.n_center[res.times > res.t_peak]
            assert np.all(np.diff(after) <= 1e-9 * res.n_center[0])
            cases_two += 1
        else:
            assert np.all(np.diff(res.n_center) <= 1e-9 * res.n_center[0])
        done += 1
    dt = time.perf_counter() - t0
    ok = dt < 30.0 and 20 < cases_two < 180
    assert report(
        5, ok, f"200 draws consistent ({cases_two} case II) in {dt:.1f} s"
    )


def test_criterion_6_peak_ordering():
    # proportioned like the reference runs: N_c0 scales with depth and the
    # two-body coefficient follows the sqrt(T) collision model
    v_eff = 8.9e-12
    peaks = {}
    for depth_uK in (657.0, 371.0):
        t = 0.475 * depth_uK * 1e-6
        beta0 = 4e-18 * math.sqrt(t / 312e-6)
        coeffs = RateCoefficients.from_beta0(
            gamma_bg=GAMMA_BG, beta0=beta0, v_eff=v_eff, gamma_damp=GAMMA_DAMP, alpha=ALPHA
        )
        n_c0 = 1.41e6 * depth_uK / 657.0
        res = simulate(n_c0, n_c0 / ALPHA, coeffs)
        assert res.regime == "II" and res.t_peak is not None
        peaks[depth_uK] = (res.t_peak, res.n_peak)
    ok = peaks[657.0][1] > peaks[371.0][1] and peaks[657.0][0] < peaks[371.0][0]
    assert report(
        6,
        ok,
        f"deep trap peaks at {peaks[657.0][0]:.3f} s with {peaks[657.0][1]:.3e} atoms, "
        f"shallow at {peaks[371.0][0]:.3f} s with {peaks[371.0][1]:.3e}",
    )


def test_criterion_7_fit_round_trip():
    t0 = time.perf_counter()
    gamma_true, beta0_true = 0.979, 4e-18
    fixed = {"gamma_bg": GAMMA_BG, "n_total0": 1.41e6 / ALPHA, "n_c0": 1.41e6, "v_eff": 8.9e-12}
    times = np.linspace(0.0, 5.0, 15)
    curve = model_curve(gamma_true, beta0_true, fixed, times)
    rng = np.random.default_rng(42)
    noisy = curve * (1 + 0.03 * rng.standard_normal(15))
    series = TimeSeries(times=tuple(times), values=tuple(noisy), kind="N_c")
    result = fit_transport(series, fixed)
    dt = time.perf_counter() - t0
    err_g = abs(result.gamma_damp - gamma_true) / gamma_true
    err_b = abs(result.beta0 - beta0_true) / beta0_true
    ok = err_g < 0.10 and err_b < 0.15 and dt < 30.0
    assert report(
        7,
        ok,
        f"gamma within {err_g:.1%} (<=10%), beta0 within {err_b:.1%} (<=15%) in {dt:.1f} s",
    )


def test_criterion_8_equilibrium_oracles():
    t0 = time.perf_counter()
    micro = make_trap(gravity=0.0)
    cold = CloudState(time=0.0, n_center=1e5, n_total=1e5, temperature=0.02 * micro.depth)
    v_eff = effective_volume(cold, micro, Region.full_trap())
    sx, sy, sz = cloud_sigmas(cold, micro)
    harmonic = 8 * math.pi**1.5 * sx * sy * sz
    dev = abs(v_eff - harmonic) / harmonic

    ground = make_trap()
    t_cloud = 0.475 * ground.depth
    quadr = partition(t_cloud, ground, Region.full_trap())
    mc = mc_partition(t_cloud, ground, Region.full_trap(), n_samples=2_000_000, seed=8)
    rel = abs(mc.i1 - quadr.i1) / quadr.i1
    dt = time.perf_counter() - t0
    ok = dev < 0.05 and rel < 0.02 and dt < 120.0
    assert report(
        8,
        ok,
        f"V_eff vs Gaussian-cloud closed form {dev:.1%} (<=5%) at T=0.02 U0; "
        f"MC vs quadrature {rel:.2%} (<=2%) at T=0.475 U0; {dt:.1f} s",
    )


def test_criterion_9_reference_point_placement():
    # reported comparison, not hard-gated: the report must carry the
    # computed threshold and margin, and any disagreement with the observed
    # behavior must be flagged with the two-body-rate sensitivity
    ground = make_trap()
    lines = []
    gates = []
    expectations = {657.0: ("II", 1.41e6), 1249.0: ("I", 5.02e6)}
    for depth_uK, (expected, n_c0) in expectations.items():
        coeffs = coefficients_at_depth(
            ground,
            depth_uK * 1e-6,
            eta=0.475,
            gamma_bg=GAMMA_BG,
            gamma_damp=GAMMA_DAMP,
            alpha=ALPHA,
        )
        decision = classify(n_c0, n_c0 / ALPHA, coeffs)
        margin = (decision.threshold - n_c0) / n_c0
        beta_flip = (2 * GAMMA_DAMP * math.exp(-1) / ALPHA - GAMMA_BG) / n_c0
        line = (
            f"  point ({depth_uK:.0f} uK, {n_c0:.3g}): regime {decision.regime}, "
            f"threshold {decision.threshold:.4g}, margin {margin:+.1%}"
        )
        if decision.regime != expected:
            line += (
                f" [MISMATCH vs observed {expected}: model beta {coeffs.beta:.3e} 1/s,"
                f" decision flips at beta {beta_flip:.3e} 1/s]"
            )
        else:
            line += f" [matches observed {expected}]"
        lines.append(line)
        gates.append(math.isfinite(decision.threshold) and decision.threshold > 0)
    ok = all(gates)
    report(9, ok, "reference-point placement (reported, not gated):")
    for line in lines:
        print(line)
    assert ok


CLI_CASES = [
    ["depth", "--json", "-"],
    ["equilibrium"],
    ["classify", "--nc0", "1.41e6", "--ntotal", "2.143e6"],
    ["mc-check", "--samples", "50000"],
]


def _run_cli(args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "codt.cli", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
        timeout=600,
    )


def test_criterion_10_cli_determinism(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text(
        "[run]\nseed = 3\nueff_min_uK = 400.0\nueff_max_uK = 900.0\n"
        "ueff_points = 2\nnc0_min = 4e5\nnc0_max = 6e6\nnc0_points = 2\n"
    )
    data = tmp_path / "data.csv"
    times = np.linspace(0.0, 4.0, 9)
    fixed = {"gamma_bg": GAMMA_BG, "n_total0": 1.41e6 / ALPHA, "n_c0": 1.41e6, "v_eff": 8.9e-12}
    curve = model_curve(0.979, 4e-18, fixed, times)
    data.write_text(
        "t_s,N_c\n" + "\n".join(f"{float(t)!r},{float(v)!r}" for t, v in zip(times, curve)) + "\n"
    )

    cases = [["--config", str(config)] + case for case in CLI_CASES]
    cases.append(
        ["--config", str(config), "simulate", "--nc0", "1.41e6", "--ntotal", "2.143e6",
         "--csv", "traj_{run}.csv"]
    )
    cases.append(
        ["--config", str(config), "phase-diagram", "--grid-csv", "grid_{run}.csv",
         "--boundary-csv", "edge_{run}.csv"]
    )
    cases.append(["--config", str(config), "fit", "--data", str(data)])
    cases.append(["schema-check", str(data)])

    identical = True
    for case in cases:
        outs = []
        files = {}
        for run in ("a", "b"):
            args = [c.format(run=run) for c in case]
            proc = _run_cli(args, tmp_path)
            assert proc.returncode == 0, f"{args}: {proc.stderr}"
            outs.append(proc.stdout)
            for c in args:
                if c.endswith(".csv") and "{" not in c and c != str(data):
                    files.setdefault(run, []).append((tmp_path / c).read_bytes())
        same_out = outs[0] == outs[1]
        same_files = files.get("a") == files.get("b")
        if not (same_out and same_files):
            identical = False
            print(f"  nondeterministic: {case[0]}")
    assert report(10, identical, f"{len(cases)} commands byte-identical across repeated runs")
