"""Truncated-Boltzmann equilibrium statistics over the trap potential.

The trapped cloud is treated as instantaneously Boltzmann-distributed,
``n(r) = N exp(-U(r)/k_B T) / Z``, with the integrals taken over a bounded
domain: a box spanning the beam crossing, intersected (under gravity) with
the sub-saddle energy region so that only trapped atoms are counted.  The
same integrals are evaluated two independent ways: a deterministic
panel Gauss-Legendre quadrature and a uniform-sampling Monte Carlo
estimator, which serve as mutual oracles.

All integrands are evaluated relative to the potential minimum, so weights
stay O(exp(depth/T)) only in the final partition value, never inside the
quadrature sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from .constants import K_B, DomainError
from .potential import TrapConfig, effective_depth, potential

#: Half-height of the bound box along gravity, in waist units.
Z_BOX_WAISTS = 3.0
#: Half-extent cap along each beam, in Rayleigh lengths.
X_BOX_RAYLEIGH = 3.0
#: Nested panel scales (in local thermal widths) around each density feature.
_PANEL_SCALES = (2.5, 6.0, 14.0)
#: Panel node counts per refinement level.
_LEVEL_NODES = (8, 12, 16, 24, 32)


@dataclass(frozen=True)
class CloudState:
    """Snapshot of the trapped ensemble.

    Attributes
    ----------
    time : float
        Time of the snapshot (s).
    n_center : float
        Atom number inside the center region.
    n_total : float
        Atom number in the whole trap.
    temperature : float
        Cloud temperature (K).
    """

    time: float
    n_center: float
    n_total: float
    temperature: float

    def __post_init__(self):
        if not 0 <= self.n_center <= self.n_total:
            raise DomainError(
                f"need 0 <= n_center <= n_total, got {self.n_center}, {self.n_total}"
            )
        if not self.temperature > 0:
            raise DomainError(f"temperature must be > 0, got {self.temperature}")


@dataclass(frozen=True)
class Region:
    """Integration region in the x-y plane; z always spans the bound column.

    ``center-roi`` is the imaging rectangle around the crossing (sides given
    as waist multiples); ``full-trap`` covers the whole bound domain clipped
    to the molasses footprint; ``custom-box`` takes explicit full extents (m).
    """

    kind: str
    l1_waists: float = 6.0
    l2_waists: float = 4.5
    molasses_x: float = 4e-3
    molasses_y: float = 4e-3
    x_extent: float | None = None
    y_extent: float | None = None
    z_extent: float | None = None

    def __post_init__(self):
        if self.kind not in ("center-roi", "full-trap", "custom-box"):
            raise DomainError(f"unknown region kind {self.kind!r}")
        if self.kind == "center-roi" and not (self.l1_waists > 0 and self.l2_waists > 0):
            raise DomainError("ROI side lengths must be > 0")
        if self.kind == "full-trap" and not (self.molasses_x > 0 and self.molasses_y > 0):
            raise DomainError("molasses extents must be > 0")
        if self.kind == "custom-box":
            for v in (self.x_extent, self.y_extent, self.z_extent):
                if v is None or not v > 0:
                    raise DomainError("custom-box needs positive x/y/z extents")

    @staticmethod
    def center_roi(l1_waists: float = 6.0, l2_waists: float = 4.5) -> "Region":
        return Region(kind="center-roi", l1_waists=l1_waists, l2_waists=l2_waists)

    @staticmethod
    def full_trap(molasses_x: float = 4e-3, molasses_y: float = 4e-3) -> "Region":
        return Region(kind="full-trap", molasses_x=molasses_x, molasses_y=molasses_y)

    @staticmethod
    def box(x_extent: float, y_extent: float, z_extent: float) -> "Region":
        return Region(kind="custom-box", x_extent=x_extent, y_extent=y_extent, z_extent=z_extent)


@dataclass(frozen=True)
class EquilibriumReport:
    """Headline equilibrium numbers for one (state, config, region)."""

    partition_volume: float  # integral of exp(-U/kT) over the domain (m^3)
    effective_volume: float  # (int n)^2 / int n^2 (m^3)
    center_fraction: float
    peak_location: tuple[float, float, float]


@dataclass(frozen=True)
class PartitionResult:
    """Deterministic quadrature of the Boltzmann weights over one region.

    ``i1`` and ``i2`` are the integrals of exp(-(U - u_ref)/kT) and
    exp(-2(U - u_ref)/kT); ``history`` records (nodes_per_panel, i1, i2) for
    every refinement level evaluated.
    """

    i1: float
    i2: float
    u_ref: float
    temperature: float
    converged: bool
    history: tuple[tuple[int, float, float], ...]

    @property
    def partition_volume(self) -> float:
        """Integral of exp(-U/kT) in absolute normalization (m^3)."""
        return self.i1 * math.exp(-self.u_ref / (K_B * self.temperature))


@dataclass(frozen=True)
class MCPartition:
    """Monte Carlo estimate of the same two integrals, with standard errors."""

    i1: float
    se1: float
    i2: float
    se2: float
    u_ref: float
    temperature: float
    n_samples: int
    seed: int


# ---------------------------------------------------------------------------
# geometry helpers


def region_bounds(region: Region, cfg: TrapConfig) -> tuple[float, float, float]:
    """Half-extents (hx, hy, hz) of the region's bounding box (m)."""
    w0 = cfg.geometry.waist
    zr = cfg.geometry.rayleigh_length
    hz = Z_BOX_WAISTS * w0
    if region.kind == "center-roi":
        return region.l1_waists * w0 / 2.0, region.l2_waists * w0 / 2.0, hz
    if region.kind == "full-trap":
        return (
            min(X_BOX_RAYLEIGH * zr, region.molasses_x / 2.0),
            min(X_BOX_RAYLEIGH * zr, region.molasses_y / 2.0),
            hz,
        )
    return region.x_extent / 2.0, region.y_extent / 2.0, region.z_extent / 2.0


def trap_cut(cfg: TrapConfig):
    """Energy cut of the bound domain: (z_floor, u_cut) or None without gravity.

    Under gravity only the basin below the center-line escape saddle counts
    as trapped; the floor excludes the free-fall region below the saddle.
    Raises ``DomainError`` when the tilted center holds no minimum at all.
    """
    if cfg.environment.gravity == 0:
        return None
    report = effective_depth(cfg)
    if not report.trapped_center:
        raise DomainError("degenerate domain: the tilted trap center holds no minimum")
    z_floor = max(-Z_BOX_WAISTS * cfg.geometry.waist, report.z_saddle)
    u_cut = float(potential(0.0, 0.0, report.z_saddle, cfg))
    return z_floor, u_cut


def _trap_minimum(cfg: TrapConfig) -> tuple[float, float]:
    """(z_min, U(0,0,z_min)) of the center-line minimum."""
    if cfg.environment.gravity == 0:
        return 0.0, float(potential(0.0, 0.0, 0.0, cfg))
    report = effective_depth(cfg)
    if not report.trapped_center:
        raise DomainError("degenerate domain: the tilted trap center holds no minimum")
    return report.z_min, float(potential(0.0, 0.0, report.z_min, cfg))


# ---------------------------------------------------------------------------
# panel Gauss-Legendre machinery


@lru_cache(maxsize=None)
def _gl(n: int):
    return leggauss(n)


def _panels(edges, n: int):
    """Composite Gauss-Legendre nodes/weights over consecutive panel edges.

    ``edges`` has shape (..., P+1); returns nodes and weights of shape
    (..., P*n).  Zero-width panels contribute zero weight.
    """
    xg, wg = _gl(n)
    edges = np.asarray(edges, dtype=float)
    lo = edges[..., :-1, None]
    hi = edges[..., 1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (xg + 1.0)
    wts = half * wg
    return nodes.reshape(*edges.shape[:-1], -1), wts.reshape(*edges.shape[:-1], -1)


def _sorted_edges(lo, hi, feature_edges):
    """Stack bounds + feature edges, clip into [lo, hi], sort along the last axis.

    Keeps a fixed edge count per row (duplicates are allowed and harmless).
    """
    arrs = [np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)]
    arrs += [np.asarray(e, dtype=float) for e in feature_edges]
    stacked = np.stack(np.broadcast_arrays(*arrs), axis=-1)
    stacked = np.clip(stacked, stacked[..., :1], stacked[..., 1:2])
    return np.sort(stacked, axis=-1)


def _scale_edges(center, width):
    """Nested panel edges around a feature: center and +-{2.5, 6, 14} widths."""
    e = [center]
    for s in _PANEL_SCALES:
        e.append(center - s * width)
        e.append(center + s * width)
    return e


def _z_intervals(fn, x, y, z_floor, z_hi, cut_energy, n_scan=41, n_bisect=45):
    """Per-row [z_lo, z_up] of the trapped z-interval, plus the well bottom.

    Scans for the z-minimum of ``fn`` on [z_floor, z_hi], refines it by
    ternary search, then bisects the crossings of ``fn = cut_energy`` on each
    side.  Rows whose well bottom lies above the cut get an empty interval.
    All searches run vectorized across rows.
    """
    m = x.shape[0]
    zg = np.linspace(z_floor, z_hi, n_scan)
    u = fn(x[:, None], y[:, None], zg[None, :])
    ja = np.argmin(u, axis=1)
    dz = zg[1] - zg[0]
    lo = np.maximum(zg[ja] - dz, z_floor)
    hi = np.minimum(zg[ja] + dz, z_hi)
    for _ in range(35):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        take = fn(x, y, m1) < fn(x, y, m2)
        hi = np.where(take, m2, hi)
        lo = np.where(take, lo, m1)
    za = 0.5 * (lo + hi)
    ua = fn(x, y, za)

    if cut_energy is None:
        return np.full(m, z_floor), np.full(m, z_hi), za

    inside = ua < cut_energy
    # lower crossing (or the floor, where the floor is already below the cut)
    u_floor = fn(x, y, np.full(m, z_floor))
    need = inside & (u_floor >= cut_energy)
    a = np.where(need, z_floor, za)
    b = za.copy()
    for _ in range(n_bisect):
        mid = 0.5 * (a + b)
        above = fn(x, y, mid) >= cut_energy
        a = np.where(above & need, mid, a)
        b = np.where((~above) & need, mid, b)
    z_lo = np.where(need, 0.5 * (a + b), np.where(inside, z_floor, za))
    # upper crossing
    u_top = fn(x, y, np.full(m, z_hi))
    need_up = inside & (u_top >= cut_energy)
    a = za.copy()
    b = np.full(m, z_hi)
    for _ in range(n_bisect):
        mid = 0.5 * (a + b)
        below = fn(x, y, mid) < cut_energy
        a = np.where(below & need_up, mid, a)
        b = np.where((~below) & need_up, mid, b)
    z_up = np.where(need_up, 0.5 * (a + b), np.where(inside, z_hi, za))
    return z_lo, z_up, za


def boltzmann_quadrature(
    fn,
    bounds,
    temperature: float,
    x_width: float,
    y_width: float,
    z_width: float,
    y_slopes=(),
    y_edge_offsets=(),
    cut=None,
    u_ref: float = 0.0,
    n: int = 12,
    moments_about=None,
    chunk_rows: int = 16384,
):
    """Panel-quadrature of exp(-(fn - u_ref)/kT) and its square over a box.

    Parameters
    ----------
    fn : callable
        Potential energy (J) of broadcastable (x, y, z).
    bounds : (hx, hy, hz)
        Box half-extents (m), centered on the origin.
    temperature : float
        Boltzmann temperature (K).
    x_width, y_width, z_width : float
        Thermal width scales used to place nested panels around features.
    y_slopes : sequence of float
        Density ridges run along y = slope * x; one feature per slope.
    y_edge_offsets : sequence of float
        Extra y panel edges at ridge +- offset (m), e.g. at an energy-cut
        boundary, to confine the cut kink to thin panels.
    cut : (z_floor, u_cut) or None
        Restrict to z >= z_floor and fn < u_cut.
    u_ref : float
        Reference energy subtracted before exponentiation (J).
    n : int
        Gauss-Legendre nodes per panel.
    moments_about : (cx, cy, cz) or None
        Also accumulate second moments of the weight about this point.

    Returns
    -------
    dict with keys ``i1``, ``i2`` and, when requested, ``var_x/var_y/var_z``.
    """
    hx, hy, hz = bounds
    kt = K_B * temperature
    z_floor, u_cut = cut if cut is not None else (-hz, None)
    z_floor = max(z_floor, -hz)

    ex = _sorted_edges(-hx, hx, _scale_edges(0.0, x_width))
    xs, wx = _panels(ex, n)

    y_feats = []
    for slope in y_slopes:
        ya = slope * xs
        y_feats += _scale_edges(ya, y_width)
        for off in y_edge_offsets:
            y_feats += [ya - off, ya + off]
    if not y_slopes:
        y_feats = _scale_edges(np.zeros_like(xs), y_width)
    ey = _sorted_edges(np.full_like(xs, -hy), np.full_like(xs, hy), y_feats)
    ys, wy = _panels(ey, n)

    x_rows = np.repeat(xs, ys.shape[1])
    y_rows = ys.ravel()
    w_rows = (wx[:, None] * wy).ravel()

    z_lo, z_up, za = _z_intervals(fn, x_rows, y_rows, z_floor, hz, u_cut)
    ez = _sorted_edges(z_lo, z_up, _scale_edges(za, z_width))
    zs, wz = _panels(ez, n)

    i1 = 0.0
    i2 = 0.0
    acc = {"x": 0.0, "y": 0.0, "z": 0.0}
    for start in range(0, x_rows.shape[0], chunk_rows):
        sl = slice(start, start + chunk_rows)
        u = fn(x_rows[sl, None], y_rows[sl, None], zs[sl])
        e1 = np.exp(-(u - u_ref) / kt)
        if u_cut is not None:
            e1 = np.where(u < u_cut, e1, 0.0)
        row1 = np.sum(wz[sl] * e1, axis=1)
        i1 += float(np.sum(w_rows[sl] * row1))
        i2 += float(np.sum(w_rows[sl] * np.sum(wz[sl] * e1 * e1, axis=1)))
        if moments_about is not None:
            cx, cy, cz = moments_about
            acc["x"] += float(np.sum(w_rows[sl] * (x_rows[sl] - cx) ** 2 * row1))
            acc["y"] += float(np.sum(w_rows[sl] * (y_rows[sl] - cy) ** 2 * row1))
            acc["z"] += float(np.sum(w_rows[sl] * np.sum(wz[sl] * e1 * (zs[sl] - cz) ** 2, axis=1)))
    out = {"i1": i1, "i2": i2}
    if moments_about is not None and i1 > 0:
        out.update(var_x=acc["x"] / i1, var_y=acc["y"] / i1, var_z=acc["z"] / i1)
    return out


# ---------------------------------------------------------------------------
# trap-specific drivers


def _thermal_widths(cfg: TrapConfig, temperature: float) -> tuple[float, float, float]:
    """Panel width scales (m) along x, y, z for the crossed-beam density."""
    w0 = cfg.geometry.waist
    ratio = temperature / cfg.depth
    half = cfg.geometry.crossing_angle / 2.0
    sig = w0 * math.sqrt(ratio / 2.0)
    sig_x = w0 * math.sqrt(ratio) / (2.0 * math.sin(half))
    sig_y = sig / math.cos(half)
    return sig_x, sig_y, sig


def _cut_edge_offsets(cfg: TrapConfig, cut) -> tuple[float, ...]:
    """Approximate y-offsets of the energy-cut tube boundary around each arm."""
    if cut is None:
        return ()
    z_floor, u_cut = cut
    zmin, u_min = _trap_minimum(cfg)
    env = 2.0 * abs(u_cut - cfg.species.mass * cfg.environment.gravity * zmin) / (
        K_B * cfg.depth
    )
    if env >= 1.0:
        return ()
    rho = cfg.geometry.waist * math.sqrt(max(math.log(1.0 / env), 0.0) / 2.0)
    rho /= math.cos(cfg.geometry.crossing_angle / 2.0)
    return (0.8 * rho, rho, 1.2 * rho)


@lru_cache(maxsize=64)
def _partition_cached(cfg: TrapConfig, temperature: float, region: Region, tol: float, max_level: int):
    cut = trap_cut(cfg)
    zmin, u_ref = _trap_minimum(cfg)
    bounds = region_bounds(region, cfg)
    sig_x, sig_y, sig_z = _thermal_widths(cfg, temperature)
    half = cfg.geometry.crossing_angle / 2.0
    slope = math.tan(half)

    def fn(x, y, z):
        return potential(x, y, z, cfg)

    history = []
    prev = None
    converged = False
    for level in range(max_level + 1):
        n = _LEVEL_NODES[min(level, len(_LEVEL_NODES) - 1)]
        res = boltzmann_quadrature(
            fn,
            bounds,
            temperature,
            sig_x,
            sig_y,
            sig_z,
            y_slopes=(slope, -slope),
            y_edge_offsets=_cut_edge_offsets(cfg, cut),
            cut=cut,
            u_ref=u_ref,
            n=n,
        )
        history.append((n, res["i1"], res["i2"]))
        if res["i1"] <= 0:
            raise DomainError("degenerate domain: vanishing partition integral")
        if prev is not None:
            d1 = abs(res["i1"] - prev["i1"]) / res["i1"]
            d2 = abs(res["i2"] - prev["i2"]) / res["i2"]
            if max(d1, d2) < tol:
                converged = True
                break
        prev = res
    return PartitionResult(
        i1=res["i1"],
        i2=res["i2"],
        u_ref=u_ref,
        temperature=temperature,
        converged=converged,
        history=tuple(history),
    )


def partition(
    state_or_temperature,
    cfg: TrapConfig,
    region: Region | None = None,
    tol: float = 1e-4,
    max_level: int = 3,
) -> PartitionResult:
    """Deterministic quadrature of the Boltzmann integrals over ``region``.

    Accepts either a :class:`CloudState` or a bare temperature (K).  Results
    are cached on (config, temperature, region, tolerance).
    """
    t = (
        state_or_temperature.temperature
        if isinstance(state_or_temperature, CloudState)
        else float(state_or_temperature)
    )
    if not t > 0:
        raise DomainError(f"temperature must be > 0, got {t}")
    region = region if region is not None else Region.full_trap()
    return _partition_cached(cfg, t, region, tol, max_level)


def _contains(outer: tuple[float, float, float], inner: tuple[float, float, float]) -> bool:
    return all(o >= i - 1e-12 * max(o, i) for o, i in zip(outer, inner))


def boltzmann_density(points, state: CloudState, cfg: TrapConfig, region: Region | None = None):
    """Atomic density (m^-3) at ``points`` (shape (..., 3)) plus an inside mask.

    Density follows the Boltzmann weight normalized to ``state.n_total`` over
    the bound domain; points outside the domain report zero density and a
    False mask entry.
    """
    region = region if region is not None else Region.full_trap()
    part = partition(state, cfg, region)
    pts = np.asarray(points, dtype=float)
    x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
    hx, hy, hz = region_bounds(region, cfg)
    inside = (np.abs(x) <= hx) & (np.abs(y) <= hy) & (np.abs(z) <= hz)
    u = potential(x, y, z, cfg)
    cut = trap_cut(cfg)
    if cut is not None:
        z_floor, u_cut = cut
        inside = inside & (z >= z_floor) & (u < u_cut)
    kt = K_B * state.temperature
    dens = state.n_total * np.exp(-(u - part.u_ref) / kt) / part.i1
    return np.where(inside, dens, 0.0), inside


def effective_volume(state: CloudState, cfg: TrapConfig, region: Region | None = None) -> float:
    """Effective cloud volume (int n)^2 / (int n^2) over ``region`` (m^3).

    Independent of the atom number: the density enters homogeneously.
    """
    part = partition(state, cfg, region)
    if part.i2 <= 0:
        raise DomainError("degenerate domain: vanishing density integral")
    return part.i1**2 / part.i2


def center_fraction(state: CloudState, cfg: TrapConfig, roi: Region, total: Region) -> float:
    """Fraction of the cloud inside ``roi`` relative to ``total``."""
    if not _contains(region_bounds(total, cfg), region_bounds(roi, cfg)):
        raise DomainError("roi must lie inside the total region")
    p_roi = partition(state, cfg, roi)
    p_tot = partition(state, cfg, total)
    return p_roi.i1 / p_tot.i1


def cloud_sigmas(state: CloudState, cfg: TrapConfig, region: Region | None = None, n: int = 16):
    """Cloud standard deviations (m) along x, y, z about the density peak."""
    region = region if region is not None else Region.full_trap()
    cut = trap_cut(cfg)
    zmin, u_ref = _trap_minimum(cfg)
    sig_x, sig_y, sig_z = _thermal_widths(cfg, state.temperature)
    half = cfg.geometry.crossing_angle / 2.0
    res = boltzmann_quadrature(
        lambda x, y, z: potential(x, y, z, cfg),
        region_bounds(region, cfg),
        state.temperature,
        sig_x,
        sig_y,
        sig_z,
        y_slopes=(math.tan(half), -math.tan(half)),
        y_edge_offsets=_cut_edge_offsets(cfg, cut),
        cut=cut,
        u_ref=u_ref,
        n=n,
        moments_about=(0.0, 0.0, zmin),
    )
    return math.sqrt(res["var_x"]), math.sqrt(res["var_y"]), math.sqrt(res["var_z"])


def equilibrium_report(
    state: CloudState,
    cfg: TrapConfig,
    roi: Region | None = None,
    total: Region | None = None,
) -> EquilibriumReport:
    """Partition volume, effective volume, center fraction, peak location."""
    roi = roi if roi is not None else Region.center_roi()
    total = total if total is not None else Region.full_trap()
    part = partition(state, cfg, total)
    zmin, _ = _trap_minimum(cfg)
    return EquilibriumReport(
        partition_volume=part.partition_volume,
        effective_volume=effective_volume(state, cfg, roi),
        center_fraction=center_fraction(state, cfg, roi, total),
        peak_location=(0.0, 0.0, zmin),
    )


# ---------------------------------------------------------------------------
# Monte Carlo oracle


def mc_box_integrals(fn, bounds, temperature, n_samples, seed, cut=None, u_ref=0.0):
    """Uniform-sampling MC estimate of the two Boltzmann integrals over a box.

    Returns (i1, se1, i2, se2); bit-reproducible for a fixed seed.
    """
    hx, hy, hz = bounds
    z_floor, u_cut = cut if cut is not None else (-hz, None)
    z_floor = max(z_floor, -hz)
    volume = (2 * hx) * (2 * hy) * (hz - z_floor)
    if volume <= 0:
        raise DomainError("zero-volume sampling domain")
    rng = np.random.default_rng(seed)
    pts = rng.random((int(n_samples), 3))
    x = (2.0 * pts[:, 0] - 1.0) * hx
    y = (2.0 * pts[:, 1] - 1.0) * hy
    z = z_floor + pts[:, 2] * (hz - z_floor)
    u = fn(x, y, z)
    kt = K_B * temperature
    w = np.exp(-(u - u_ref) / kt)
    if u_cut is not None:
        w = np.where(u < u_cut, w, 0.0)
    i1 = volume * float(w.mean())
    se1 = volume * float(w.std(ddof=1)) / math.sqrt(len(w))
    w2 = w * w
    i2 = volume * float(w2.mean())
    se2 = volume * float(w2.std(ddof=1)) / math.sqrt(len(w))
    return i1, se1, i2, se2


def mc_partition(
    state_or_temperature,
    cfg: TrapConfig,
    region: Region | None = None,
    n_samples: int = 200_000,
    seed: int = 0,
) -> MCPartition:
    """Monte Carlo oracle for :func:`partition` over the same domain."""
    if n_samples < 1000:
        raise DomainError(f"need n_samples >= 1000, got {n_samples}")
    t = (
        state_or_temperature.temperature
        if isinstance(state_or_temperature, CloudState)
        else float(state_or_temperature)
    )
    region = region if region is not None else Region.full_trap()
    cut = trap_cut(cfg)
    _, u_ref = _trap_minimum(cfg)
    i1, se1, i2, se2 = mc_box_integrals(
        lambda x, y, z: potential(x, y, z, cfg),
        region_bounds(region, cfg),
        t,
        n_samples,
        seed,
        cut=cut,
        u_ref=u_ref,
    )
    return MCPartition(
        i1=i1, se1=se1, i2=i2, se2=se2, u_ref=u_ref, temperature=t, n_samples=int(n_samples), seed=seed
    )
