"""Command-line entry point: ``curveflow run|eoc|hopf|linking``."""
from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from pathlib import Path
from typing import List, Optional

import numpy as np

from .eoc import DEFAULT_MESHES, eoc_harness
from .forces import LinkingAccuracyWarning, linking_number
from .integrator import IntegratorConfig, StiffnessError
from .io import fmt, read_curve
from .reduced_ode import HopfParams, ReducedState, integrate, jacobian_trace_det, steady_state
from .runner import EXIT_CONFIG, EXIT_IO, EXIT_NUMERICS, EXIT_OK, run_scenario
from .scenarios import ConfigError, parse_config


def _mesh_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curveflow", description="Curve flows in R^3 coupled to a transported scalar.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log resolved defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario from a JSON config (or a previous manifest)")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    p.add_argument("--no-self-distance", action="store_true", help="skip the O(M^2) min_self_distance column")

    p = sub.add_parser("eoc", help="convergence table for the manufactured shrinking-circle problem")
    p.add_argument("--meshes", type=_mesh_list, default=list(DEFAULT_MESHES))
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--t-final", type=float, default=0.45)
    p.add_argument("--out", type=Path, help="write the table to this CSV file")

    p = sub.add_parser("hopf", help="integrate the reduced (r, a) system")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--r0", type=float, help="initial radius (default: steady state + 0.1)")
    p.add_argument("--a0", type=float, help="initial amplitude (default: steady state)")
    p.add_argument("--t-final", type=float, default=200.0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--dt-max", type=float, default=0.05)
    p.add_argument("--dt-init", type=float, default=1e-3)
    p.add_argument("--sample-dt", type=float, default=0.1, help="spacing of trajectory rows")
    p.add_argument("--portrait-rays", type=int, default=8, help="trajectories in the phase portrait")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("linking", help="Gauss linking number of two closed curves (snapshot CSV or OBJ)")
    p.add_argument("--a", required=True, type=Path)
    p.add_argument("--b", required=True, type=Path)
    return parser


def _cmd_run(args) -> int:
    try:
        config = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    result = run_scenario(config, out_dir=str(args.out) if args.out else None,
                          keep_states=False, self_distance=not args.no_self_distance)
    if result.exit_code != EXIT_OK:
        print(result.message, file=sys.stderr)
    else:
        s = result.stats
        print(f"t={s['t_reached']:.6g} steps={s['accepted_steps']} rejected={s['rejected_steps']} "
              f"snapshots={s['snapshots']}" + (f" -> {result.directory}" if result.directory else ""))
    return result.exit_code


def _cmd_eoc(args) -> int:
    try:
        report = eoc_harness(args.meshes, T_final=args.t_final, tol=args.tol)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(report.table())
    if args.out:
        try:
            args.out.write_text(report.table() + "\n")
        except OSError as exc:
            print(f"I/O error: {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK if report.complete else EXIT_NUMERICS


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _cmd_hopf(args) -> int:
    try:
        params = HopfParams(args.lam)
        ss = steady_state(params)
        r0 = args.r0 if args.r0 is not None else ss.r + 0.1
        a0 = args.a0 if args.a0 is not None else ss.a
        state0 = ReducedState(r0, a0)
        config = IntegratorConfig(tol=args.tol, dt_max=args.dt_max, dt_init=min(args.dt_init, args.dt_max))
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    n = max(1, int(round(args.t_final / args.sample_dt)))
    times = np.linspace(0.0, args.t_final, n + 1)[1:]
    try:
        traj = integrate(state0, params, args.t_final, config, times)
        portrait = []
        for j in range(args.portrait_rays):
            phi = 2 * math.pi * j / max(args.portrait_rays, 1)
            start = ReducedState(max(ss.r + 0.3 * ss.r * math.cos(phi), 1e-3), ss.a + 0.3 * ss.a * math.sin(phi))
            run_j = integrate(start, params, args.t_final, config, times)
            portrait += [(j, t, float(y[0]), float(y[1])) for t, y in zip(run_j.snapshot_times, run_j.snapshots)]
    except StiffnessError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        _write_csv(args.out / "trajectory.csv", "t,r,a",
                   [(t, float(y[0]), float(y[1])) for t, y in zip(traj.snapshot_times, traj.snapshots)])
        _write_csv(args.out / "phase_portrait.csv", "trajectory,t,r,a", portrait)
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    td = jacobian_trace_det(params)
    print(f"lambda={args.lam} steady=(r={ss.r:.6g}, a={ss.a:.6g}) trace={td.trace:.6g} det={td.det:.6g}")
    print(f"final (r, a) = ({traj.y[0]:.6g}, {traj.y[1]:.6g}) -> {args.out}")
    return EXIT_OK


def _cmd_linking(args) -> int:
    try:
        a, b = read_curve(args.a), read_curve(args.b)
    except OSError as exc:
        print(f"I/O error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", LinkingAccuracyWarning)
        value = linking_number(a, b)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"{value:.12g} (nearest integer {round(value)})")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    handler = {"run": _cmd_run, "eoc": _cmd_eoc, "hopf": _cmd_hopf, "linking": _cmd_linking}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
