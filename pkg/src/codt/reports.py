"""Plot-ready CSV tables and versioned JSON result documents.

Numbers are written with ``repr`` (shortest round-trip decimal) so that
downstream fits can consume simulator output losslessly and repeated runs
are byte-identical.
"""
from __future__ import annotations

import json
import sys

import numpy as np

from .constants import DomainError

REPORT_SCHEMA = "codt-report/1"

#: Known CSV table layouts; every numeric column carries a unit suffix
#: (dimensionless columns carry none).
CSV_HEADERS = {
    "trajectory": ["t_s", "N_c", "R_atoms_per_s", "D_atoms_per_s"],
    "phase-grid": ["U_eff_uK", "N_c0", "regime"],
    "phase-boundary": ["U_eff_uK", "N_c0_star"],
    "depth-temperature": ["U_eff_uK", "T_K"],
    "fit-residuals": ["t_s", "N_c", "N_c_model", "residual"],
    "timeseries": ["t_s", "N_c"],
    "timeseries-sigma": ["t_s", "N_c", "sigma_N"],
}


def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_csv(target, header, rows):
    """Write a CSV table to a path or ``-`` / file object for stdout."""
    lines = [",".join(header)]
    lines += [",".join(format_cell(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    _write_text(target, text)
    return text


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def write_json_doc(target, command: str, results: dict, config_echo: dict | None = None):
    """Write a versioned, deterministic JSON result document."""
    doc = {"schema": REPORT_SCHEMA, "command": command, "results": results}
    if config_echo is not None:
        doc["config"] = config_echo
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=True, default=_jsonable) + "\n"
    _write_text(target, text)
    return text


def _write_text(target, text: str):
    if target is None:
        return
    if target == "-":
        sys.stdout.write(text)
    elif hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_timeseries_csv(path, min_rows: int = 5):
    """Read a measured series ``t_s,N_c[,sigma_N]``.

    Simulator trajectory files are accepted too (their rate columns are
    ignored), so a simulated trajectory can be fed straight back into a fit.
    Returns (times, values, sigmas or None).  Raises ``DomainError`` naming
    the offending row for non-monotone times or malformed cells.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise DomainError(f"{path}: empty file")
    header = [c.strip() for c in lines[0].split(",")]
    if header not in (
        CSV_HEADERS["timeseries"],
        CSV_HEADERS["timeseries-sigma"],
        CSV_HEADERS["trajectory"],
    ):
        raise DomainError(
            f"{path}: expected header 't_s,N_c' or 't_s,N_c,sigma_N', got {lines[0]!r}"
        )
    want = len(header)
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != want:
            raise DomainError(f"{path}: row {i} has {len(cells)} cells, expected {want}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as err:
            raise DomainError(f"{path}: row {i}: {err}") from err
    if len(rows) < min_rows:
        raise DomainError(f"{path}: need at least {min_rows} data rows, got {len(rows)}")
    arr = np.asarray(rows)
    t = arr[:, 0]
    bad = np.nonzero(np.diff(t) <= 0)[0]
    if bad.size:
        # +3: 1-based file lines, header line, and the second row of the pair
        raise DomainError(f"{path}: t_s not strictly increasing at row {int(bad[0]) + 3}")
    sigmas = arr[:, 2] if want == 3 else None
    return t, arr[:, 1], sigmas


def schema_check(path) -> list[str]:
    """Validate a produced file against the known layouts; return problems."""
    problems = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        return [f"{path}: cannot read: {err}"]
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            return [f"{path}: invalid JSON: {err}"]
        if doc.get("schema") != REPORT_SCHEMA:
            problems.append(
                f"{path}: schema id {doc.get('schema')!r} != {REPORT_SCHEMA!r}"
            )
        if "command" not in doc or "results" not in doc:
            problems.append(f"{path}: missing 'command' or 'results'")
        return problems
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        return [f"{path}: empty file"]
    header = [c.strip() for c in lines[0].split(",")]
    kind = next((k for k, h in CSV_HEADERS.items() if h == header), None)
    if kind is None:
        return [f"{path}: unknown CSV header {lines[0]!r}"]
    for i, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            problems.append(f"{path}: row {i} has {len(cells)} cells, expected {len(header)}")
            continue
        for col, cell in zip(header, cells):
            if col == "regime":
                if cell not in ("I", "II"):
                    problems.append(f"{path}: row {i}: regime must be I or II, got {cell!r}")
            else:
                try:
                    float(cell)
                except ValueError:
                    problems.append(f"{path}: row {i}: non-numeric {col}={cell!r}")
    return problems
