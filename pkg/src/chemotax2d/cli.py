"""Command line interface.

Subcommands:
  run <config.toml> [--plot] [--output-root DIR]
  sweep <config.toml> --axis1 key=v1,v2[,...] [--axis2 key=...] [--output-root DIR]
  verify --p P --delta d1,d2[,...] [--umax U] [--out FILE]
  report <run_dir> [--out DIR]
  gn-audit [--nx N] [--ny N] [--lx L] [--ly L] [--fields N] [--seed S] [--cutoff K]

The CHEMOTAX2D_OUTPUT_ROOT environment variable re-roots relative output
directories; the --output-root flag takes precedence over it.

Exit codes: 0 completed, 10 blow-up detected, 11 positivity failure,
12 solver failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, load_config, load_raw
from .runner import EXIT_CODES, run_scenario, run_sweep, verify_command


def _parse_axis(text: str) -> tuple[str, list[float]]:
    if "=" not in text:
        raise ConfigError(f"axis must look like key=v1,v2,... got {text!r}")
    key, _, values = text.partition("=")
    key = key.strip()
    if not key:
        raise ConfigError(f"axis has an empty key: {text!r}")
    try:
        vals = [float(v) for v in values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"axis {key!r} has a non-numeric value: {values!r}") from exc
    if not vals:
        raise ConfigError(f"axis {key!r} has no values")
    return key, vals


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemotax2d",
        description="Two-species chemotaxis simulator with energy diagnostics",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario config")
    p_run.add_argument("config", type=Path)
    p_run.add_argument("--plot", action="store_true", help="render report figures after the run")
    p_run.add_argument("--output-root", default=None, help="re-root relative output directories")

    p_sweep = sub.add_parser("sweep", help="grid of runs over numeric config leaves")
    p_sweep.add_argument("config", type=Path)
    p_sweep.add_argument("--axis1", required=True, help="key=v1,v2,... e.g. model.mu=0.5,1,2")
    p_sweep.add_argument("--axis2", default=None, help="optional second axis key=v1,v2,...")
    p_sweep.add_argument("--output-root", default=None)

    p_verify = sub.add_parser("verify", help="brute-force pointwise inequality report")
    p_verify.add_argument("--p", type=float, required=True, help="damping exponent in [0, 1)")
    p_verify.add_argument("--delta", required=True, help="comma-separated delta values")
    p_verify.add_argument("--umax", type=float, default=1e8)
    p_verify.add_argument("--out", type=Path, default=Path("inequalities.json"))

    p_report = sub.add_parser("report", help="render figures for a completed run directory")
    p_report.add_argument("run_dir", type=Path)
    p_report.add_argument("--out", type=Path, default=None)

    p_gn = sub.add_parser("gn-audit", help="empirical interpolation-constant ensemble scan")
    p_gn.add_argument("--nx", type=int, default=64)
    p_gn.add_argument("--ny", type=int, default=64)
    p_gn.add_argument("--lx", type=float, default=1.0)
    p_gn.add_argument("--ly", type=float, default=1.0)
    p_gn.add_argument("--fields", type=int, default=500)
    p_gn.add_argument("--seed", type=int, default=0)
    p_gn.add_argument("--cutoff", type=int, default=4)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            config = load_config(args.config)
            result = run_scenario(config, output_root=args.output_root)
            print(f"{result.reason}: t = {result.run.final_state.t:.6g}, "
                  f"{result.run.n_steps} steps, output in {result.outdir}")
            if args.plot:
                from .plots import render_report

                for path in render_report(result.outdir):
                    print(f"wrote {path}")
            return result.exit_code

        if args.command == "sweep":
            raw = load_raw(args.config)
            axis1 = _parse_axis(args.axis1)
            axis2 = _parse_axis(args.axis2) if args.axis2 else None
            sweep_path, cells = run_sweep(raw, axis1, axis2, output_root=args.output_root)
            for cell in cells:
                vals = ", ".join(f"{k}={v:g}" for k, v in cell.values.items())
                print(f"cell {cell.indices}: {vals} -> {cell.result.reason}")
            print(f"wrote {sweep_path}")
            return 0

        if args.command == "verify":
            deltas = _parse_float_list(args.delta)
            report = verify_command(args.p, deltas, u_max=args.umax, out_path=args.out)
            for entry in report["inequalities"]:
                status = "pass" if entry["holds"] and entry["certified_10x"] else "FAIL"
                print(f"delta = {entry['delta']:g}: C = {entry['c_delta']:.6e} "
                      f"(argmax u = {entry['argmax_u']:.6e}) [{status}]")
            print(f"phi bound: {'pass' if report['phi_bound']['holds'] else 'FAIL'}")
            print(f"wrote {args.out}")
            return 0 if report["all_pass"] else 1

        if args.command == "report":
            from .plots import render_report

            if not (Path(args.run_dir) / "diagnostics.csv").exists():
                print(f"error: no diagnostics.csv under {args.run_dir}", file=sys.stderr)
                return 2
            for path in render_report(args.run_dir, args.out):
                print(f"wrote {path}")
            return 0

        if args.command == "gn-audit":
            from .diagnostics import gn_ensemble_max
            from .grid import GridSpec

            value = gn_ensemble_max(
                GridSpec(args.nx, args.ny, args.lx, args.ly),
                n_fields=args.fields,
                seed=args.seed,
                cutoff=args.cutoff,
            )
            print(f"empirical ensemble ratio over {args.fields} fields: {value:.12g}")
            return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CODES["config_error"]
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
