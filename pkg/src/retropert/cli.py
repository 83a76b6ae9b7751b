"""Command-line front end: run scenario files, validate them, report the
version.

Results are deterministic: rows are ordered by sweep index then channel (or
outcome) index, floats are written with repr round-tripping, and parallel
sweep execution reassembles results in order, so serial and threaded runs
produce byte-identical bodies.  The manifest line carries the only varying
fields (timestamp, wall time).
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Any, Dict, List

from . import __version__
from .errors import NumericalError, RetropertError, SchemaError
from .rates import finite_time_band_rate, harmonic_rate
from .scenario import (
    Scenario,
    apply_overrides,
    build_scenario,
    load_raw,
    set_path,
)
from .transitions import first_order_residual, transition_probability
from .tsvf import abl_probability

_COLUMNS = {
    "probability": ("scenario_id", "sweep_value", "i", "f", "probability",
                    "pr_qm", "pr_retro", "is_real", "in_unit_interval",
                    "quadrature_converged"),
    "band-rate": ("scenario_id", "sweep_value", "initial_energy", "t",
                  "rate", "regime_flag"),
    "harmonic-rate": ("scenario_id", "sweep_value", "branch",
                      "resonant_energy", "initial_energy", "t",
                      "rate_closed_form", "rate_band_sum", "regime_flag",
                      "counter_rotating_deviation"),
    "abl": ("scenario_id", "sweep_value", "outcome", "probability"),
    "first-order-validity": ("scenario_id", "sweep_value", "i", "f",
                             "epsilon", "residual", "ratio_vs_prev"),
}

_COMPLEX_COLUMNS = {
    "probability": ("probability", "pr_retro"),
    "band-rate": (),
    "harmonic-rate": (),
    "abl": (),
    "first-order-validity": (),
}


# --------------------------------------------------------------------------
# mode runners (pure; safe to call from worker threads)


def _run_probability(scn: Scenario, sweep_value) -> List[Dict[str, Any]]:
    rows = []
    for ch in scn.channels:
        res = transition_probability(scn.system, scn.lambda_profile, ch,
                                     scn.quadrature)
        rows.append({
            "scenario_id": scn.scenario_id,
            "sweep_value": sweep_value,
            "i": ch.i,
            "f": ch.f,
            "probability": res.probability,
            "pr_qm": res.pr_qm,
            "pr_retro": res.pr_retro,
            "is_real": res.is_real,
            "in_unit_interval": res.in_unit_interval,
            "quadrature_converged": res.quadrature_converged,
        })
    return rows


def _run_band_rate(scn: Scenario, sweep_value) -> List[Dict[str, Any]]:
    res = finite_time_band_rate(scn.band, scn.lambda_profile, scn.rate_time,
                                scn.rate_initial_energy, scn.rate_hbar)
    return [{
        "scenario_id": scn.scenario_id,
        "sweep_value": sweep_value,
        "initial_energy": scn.rate_initial_energy,
        "t": res.time_used,
        "rate": res.rate,
        "regime_flag": res.regime_flag,
    }]


def _run_harmonic_rate(scn: Scenario, sweep_value) -> List[Dict[str, Any]]:
    sign = -1.0 if scn.rate_branch == "emission" else 1.0
    e_res = scn.rate_initial_energy + sign * scn.rate_hbar * scn.rate_drive_frequency
    lam = scn.lambda_profile.constant_for(scn.band.nearest_index(e_res))
    res = harmonic_rate(scn.band, scn.rate_branch, scn.rate_time,
                        scn.rate_initial_energy, scn.rate_drive_frequency,
                        lam, scn.rate_hbar)
    return [{
        "scenario_id": scn.scenario_id,
        "sweep_value": sweep_value,
        "branch": res.branch,
        "resonant_energy": res.resonant_energy,
        "initial_energy": scn.rate_initial_energy,
        "t": res.band_sum.time_used,
        "rate_closed_form": res.closed_form,
        "rate_band_sum": res.band_sum.rate,
        "regime_flag": res.band_sum.regime_flag,
        "counter_rotating_deviation": res.counter_rotating_deviation,
    }]


def _run_abl(scn: Scenario, sweep_value) -> List[Dict[str, Any]]:
    dist = abl_probability(scn.tsv, scn.measurement)
    rows = []
    for label, _ in scn.measurement.outcomes:
        rows.append({
            "scenario_id": scn.scenario_id,
            "sweep_value": sweep_value,
            "outcome": label,
            "probability": dist[label],
        })
    return rows


def _run_validity(scn: Scenario, sweep_value) -> List[Dict[str, Any]]:
    rows = []
    for ch in scn.channels:
        prev = None
        for eps in scn.epsilons:
            scaled = scn.system.with_scaled_perturbation(eps)
            residual = first_order_residual(scaled, ch, scn.propagator,
                                            scn.quadrature)
            ratio = None
            if prev is not None and residual != 0.0:
                ratio = prev / residual
            rows.append({
                "scenario_id": scn.scenario_id,
                "sweep_value": sweep_value,
                "i": ch.i,
                "f": ch.f,
                "epsilon": eps,
                "residual": residual,
                "ratio_vs_prev": ratio,
            })
            prev = residual
    return rows


_RUNNERS = {
    "probability": _run_probability,
    "band-rate": _run_band_rate,
    "harmonic-rate": _run_harmonic_rate,
    "abl": _run_abl,
    "first-order-validity": _run_validity,
}


def _rebuild_at(scenario: Scenario, value: float) -> Scenario:
    raw = copy.deepcopy(scenario.raw)
    set_path(raw, scenario.sweep_parameter, value)
    rebuilt, diags = build_scenario(raw)
    if rebuilt is None:
        problems = "; ".join(str(d) for d in diags if d.severity == "error")
        raise SchemaError(
            f"sweep point {scenario.sweep_parameter}={value}: {problems}"
        )
    return rebuilt


def execute_scenario(scenario: Scenario, threads: int = 1):
    """Run all sweep points; returns (rows, number of unconverged rows)."""
    if scenario.sweep_parameter:
        values = list(scenario.sweep_values)
    else:
        values = [None]

    def point(idx: int) -> List[Dict[str, Any]]:
        value = values[idx]
        scn = scenario if value is None else _rebuild_at(scenario, value)
        return _RUNNERS[scenario.mode](scn, value)

    if threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(point, range(len(values))))
    else:
        chunks = [point(k) for k in range(len(values))]
    rows = [row for chunk in chunks for row in chunk]
    unconverged = sum(1 for r in rows
                      if r.get("quadrature_converged") is False)
    return rows, unconverged


# --------------------------------------------------------------------------
# serialization


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # plain-float repr round-trips and is stable; also strips numpy types
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def write_rows(fh, fmt: str, manifest: Dict[str, Any], mode: str,
               rows: List[Dict[str, Any]]) -> None:
    columns = _COLUMNS[mode]
    complex_cols = set(_COMPLEX_COLUMNS[mode])
    if fmt == "jsonl":
        fh.write(json.dumps({"manifest": manifest}, sort_keys=True) + "\n")
        for row in rows:
            out = {}
            for col in columns:
                out[col] = _json_value(row[col])
            fh.write(json.dumps(out) + "\n")
        return
    # csv with a commented manifest line
    fh.write("# " + json.dumps(manifest, sort_keys=True) + "\n")
    header = []
    for col in columns:
        if col in complex_cols:
            header.extend([f"re_{col}", f"im_{col}"])
        else:
            header.append(col)
    fh.write(",".join(header) + "\n")
    for row in rows:
        cells = []
        for col in columns:
            v = row[col]
            if col in complex_cols:
                c = complex(v)
                cells.extend([repr(c.real), repr(c.imag)])
            else:
                cells.append(_cell(v))
        fh.write(",".join(cells) + "\n")


# --------------------------------------------------------------------------
# commands


def _print_diags(diags) -> None:
    for d in diags:
        print(str(d), file=sys.stderr)


def _cmd_validate(args) -> int:
    try:
        raw = load_raw(args.scenario)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    scenario, diags = build_scenario(raw)
    _print_diags(diags)
    return 0 if scenario is not None else 1


def _cmd_run(args) -> int:
    t0 = time.perf_counter()
    try:
        raw = load_raw(args.scenario)
        raw = apply_overrides(raw, args.set)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    scenario, diags = build_scenario(raw)
    _print_diags(diags)
    if scenario is None:
        return 1

    try:
        rows, unconverged = execute_scenario(scenario, threads=args.threads)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except RetropertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    fmt = args.format or scenario.output_format
    out_path = args.out or scenario.output_path
    manifest = {
        "tool": "retropert",
        "version": __version__,
        "scenario_id": scenario.scenario_id,
        "mode": scenario.mode,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": round(time.perf_counter() - t0, 6),
        "row_count": len(rows),
        "scenario": scenario.raw,
    }
    if out_path:
        try:
            with open(out_path, "w", encoding="utf-8", newline="") as fh:
                write_rows(fh, fmt, manifest, scenario.mode, rows)
        except OSError as exc:
            print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
            return 1
    else:
        write_rows(sys.stdout, fmt, manifest, scenario.mode, rows)

    if unconverged:
        level = "error" if args.strict else "warning"
        print(f"{level}: {unconverged} row(s) below quadrature tolerance "
              "(quadrature_converged=false)", file=sys.stderr)
        if args.strict:
            return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retropert",
        description="Scenario-driven calculations of transition probabilities "
                    "and rates with unequal forward/backward perturbations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="path to a TOML scenario file")
    run.add_argument("--out", help="output path (default: scenario's "
                                   "output.path, else stdout)")
    run.add_argument("--format", choices=("csv", "jsonl"),
                     help="output format (default: scenario's output.format)")
    run.add_argument("--strict", action="store_true",
                     help="exit 2 if any quadrature misses its tolerance")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads for sweep points (default 1)")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a scenario key (repeatable), "
                          "e.g. --set lambda.base=0.25")

    val = sub.add_parser("validate",
                         help="check a scenario file without computing")
    val.add_argument("scenario", help="path to a TOML scenario file")

    sub.add_parser("version", help="print the package version")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "version":
        print(f"retropert {__version__}")
        return 0
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
