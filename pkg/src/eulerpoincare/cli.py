"""Command line entry point: ``run`` a scenario file or ``verify`` a suite."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import suites
from .config import DEFAULT_TOLERANCE, ConfigError, ScenarioConfig, load
from .integrators import BlowUpError, Trajectory, simulate
from .report import InvariantReport, drift_entry

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


def _fmt(x) -> str:
    return "%.17g" % x


def csv_columns(traj: Trajectory) -> list:
    r = traj.V.shape[1]
    cols = ["t"] + [f"V{i + 1}" for i in range(r)] + [f"mu{i + 1}" for i in range(r)]
    if traj.gamma.ndim == 3:
        cols += [f"g{i + 1}{j + 1}" for i in range(3) for j in range(3)]
    else:
        cols += [f"x{i + 1}" for i in range(traj.gamma.shape[1])]
    return cols + list(traj.invariants)


def write_csv(path, traj: Trajectory) -> None:
    n = len(traj)
    data = np.column_stack(
        [traj.t, traj.V, traj.mu, traj.gamma.reshape(n, -1)] + [traj.invariants[k] for k in traj.invariants]
    )
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_columns(traj))
        for row in data:
            writer.writerow([_fmt(v) for v in row])


def build_report(cfg: ScenarioConfig, traj: Trajectory) -> InvariantReport:
    report = InvariantReport(system=cfg.system)
    for name, values in traj.invariants.items():
        report.invariants.append(drift_entry(name, values))
    sys_checks = cfg.checks or {}
    for name, tol in sys_checks.items():
        report.add_check(f"{name} relative drift", report.drift(name).max_rel_drift, tol)
    return report


def _apply_overrides(cfg: ScenarioConfig, dt, t_end) -> ScenarioConfig:
    if dt is None and t_end is None:
        return cfg
    changes = {}
    if dt is not None:
        changes["dt"] = dt
    if t_end is not None:
        changes["t_end"] = t_end
    try:
        stepper = dataclasses.replace(cfg.stepper, **changes)
    except ValueError as exc:
        raise ConfigError("--dt/--t-end", str(exc)) from None
    return dataclasses.replace(cfg, stepper=stepper)


def run(config_path, output_dir=None, dt=None, t_end=None, out=None) -> int:
    out = out or sys.stdout
    try:
        cfg = _apply_overrides(load(config_path), dt, t_end)
        system = cfg.build_system()
        init = cfg.initial_state(system)
        for name in cfg.checks:
            if name not in system.invariants:
                raise ConfigError(f"check.{name}", f"unknown invariant; known: {', '.join(system.invariants)}")
        if not cfg.checks:
            cfg = dataclasses.replace(cfg, checks={k: DEFAULT_TOLERANCE for k in system.first_integrals})
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        traj = simulate(system, init, cfg.stepper)
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP

    outdir = Path(output_dir) if output_dir else Path(config_path).resolve().parent
    outdir.mkdir(parents=True, exist_ok=True)
    write_csv(outdir / cfg.csv, traj)
    report = build_report(cfg, traj)
    payload = report.to_dict()
    payload["scenario"] = {
        "system": cfg.system,
        "dt": cfg.stepper.dt,
        "t_end": cfg.stepper.t_end,
        "scheme": cfg.stepper.scheme,
        "samples": len(traj),
    }
    with open(outdir / cfg.report, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    for check in report.checks:
        print(check.line(), file=out)
    print(f"wrote {outdir / cfg.csv} and {outdir / cfg.report}", file=out)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def verify(suite: str, out=None) -> int:
    out = out or sys.stdout
    try:
        checks, seconds = suites.run_suite(suite)
    except KeyError:
        known = ", ".join(list(suites.SUITES) + ["all"])
        print(f"unknown suite {suite!r}; expected one of: {known}", file=sys.stderr)
        return EXIT_CONFIG
    for check in checks:
        print(check.line(), file=out)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed in {seconds:.1f} s", file=out)
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eulerpoincare", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario file")
    p_run.add_argument("--config", required=True, help="scenario file (key = value format)")
    p_run.add_argument("--output-dir", help="directory for CSV and JSON output (default: next to the config)")
    p_run.add_argument("--dt", type=float, help="override the time step")
    p_run.add_argument("--t-end", type=float, help="override the final time")

    p_ver = sub.add_parser("verify", help="run a verification suite")
    p_ver.add_argument("suite", help="algebra, rigid-body, heavy-top, pendulum, euler-lagrange or all")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run(args.config, args.output_dir, args.dt, args.t_end)
    return verify(args.suite)


if __name__ == "__main__":
    sys.exit(main())
