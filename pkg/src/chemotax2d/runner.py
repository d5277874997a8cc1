"""Scenario execution: single runs, parameter sweeps, inequality reports.

Output contract for a run directory:

  diagnostics.csv   header + one row per cadence tick, 17 significant digits,
                    scientific notation, comma separated, appended as the run
                    progresses; byte-identical across reruns of one config on
                    one platform.
  snap_<field>_<k>.txt   snapshot of a field at the k-th requested time,
                    header '# nx ny lx ly t field' then ny rows of nx values.
                    Snapshots are taken at the first diagnostics tick whose
                    time reaches the requested value.
  summary.json      termination reason, exit code, final time, peaks, energy
                    coefficients, and the run metadata.

Exit codes: 0 completed, 10 blow-up detected, 11 positivity failure,
12 solver failure, 2 configuration error.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .config import ConfigError, ScenarioConfig, parse_config_data, set_numeric_leaf
from .diagnostics import (
    DIAGNOSTIC_COLUMNS,
    DiagnosticsRecord,
    EnergyParams,
    certify_inequality,
    energy_params_mass_branch,
    gn_ensemble_max,
    make_energy_params,
    verify_interpolation_inequality,
    verify_phi_bound,
)
from .grid import Field, GridSpec, integrate
from .initial import GeneratorError, make_initial_values
from .model import State
from .stepper import RunResult, StepControls, initialize_signals, run

logger = logging.getLogger(__name__)

OUTPUT_ROOT_ENV = "CHEMOTAX2D_OUTPUT_ROOT"

EXIT_CODES = {
    "completed": 0,
    "blow_up_detected": 10,
    "positivity_failure": 11,
    "solver_failure": 12,
    "config_error": 2,
}

_GN_AUDIT = {"nx": 32, "ny": 32, "n_fields": 64, "seed": 20406, "cutoff": 4, "amplitude": 5.0}


def format_float(x: float) -> str:
    return f"{x:.16e}"


def resolve_output_dir(directory: str, output_root: Optional[str] = None) -> Path:
    """Run directory, honoring the output-root override (flag beats env var)."""
    d = Path(directory)
    if d.is_absolute():
        return d
    root = output_root if output_root is not None else os.environ.get(OUTPUT_ROOT_ENV)
    return (Path(root) / d) if root else d


def build_initial_state(config: ScenarioConfig, controls: StepControls) -> State:
    grid = config.grid
    fields: dict[str, Field] = {}
    for name, spec in config.initial_data.items():
        try:
            vals = make_initial_values(grid, spec)
        except GeneratorError as exc:
            raise ConfigError(f"[initial_data.{name}]: {exc}") from exc
        if float(vals.min()) < 0.0:
            raise ConfigError(
                f"[initial_data.{name}]: generated data is negative "
                f"(min {float(vals.min()):.3e}); initial data must be nonnegative"
            )
        fields[name] = Field.from_2d(grid, vals)
    v, z = initialize_signals(
        fields["u0"],
        fields["w0"],
        config.model,
        v=fields.get("v0"),
        z=fields.get("z0"),
        solver=controls.solver,
        solver_tol=controls.solver_tol,
    )
    return State(u=fields["u0"], v=v, w=fields["w0"], z=z, t=0.0)


def build_energy_params(config: ScenarioConfig, w0_mass: float) -> EnergyParams:
    if config.model.mu > 0.0:
        return make_energy_params(config.model, w0_mass, config.grid.area, config.c_gn)
    logger.warning(
        "mu = 0: outside the boundedness hypotheses; energy coefficients use "
        "the mass branch of the epsilon formula only"
    )
    return energy_params_mass_branch(w0_mass, config.grid.area, config.c_gn)


def _write_snapshot(path: Path, f: Field, t: float, name: str) -> None:
    g = f.grid
    header = (
        f"# {g.nx} {g.ny} {format_float(g.lx)} {format_float(g.ly)} "
        f"{format_float(t)} {name}"
    )
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, f.as_2d(), fmt="%.16e")


@dataclass
class ScenarioResult:
    reason: str
    exit_code: int
    outdir: Path
    run: RunResult
    summary: dict[str, Any]


def run_scenario(
    config: ScenarioConfig,
    output_root: Optional[str] = None,
    controls_overrides: Optional[dict[str, Any]] = None,
) -> ScenarioResult:
    """Execute one scenario and write diagnostics.csv / snapshots / summary.json."""
    cc = config.controls
    overrides = controls_overrides or {}
    controls = StepControls(
        dt=cc.dt,
        dt_mode=cc.dt_mode,
        cfl_safety=cc.cfl_safety,
        pos_tol=cc.pos_tol,
        clamp_negatives=cc.clamp_negatives,
        **overrides,
    )
    if not config.model.theorem_regime:
        logger.warning(
            "model parameters (tau=%d, r=%g, mu=%g, p=%g) are outside the "
            "boundedness hypotheses (need r > 0, mu > 0, 0 <= p < 1)",
            config.model.tau,
            config.model.r,
            config.model.mu,
            config.model.p,
        )
    audit_grid = GridSpec(_GN_AUDIT["nx"], _GN_AUDIT["ny"], config.grid.lx, config.grid.ly)
    audit = gn_ensemble_max(
        audit_grid,
        n_fields=_GN_AUDIT["n_fields"],
        seed=_GN_AUDIT["seed"],
        cutoff=_GN_AUDIT["cutoff"],
        amplitude=_GN_AUDIT["amplitude"],
    )
    if config.c_gn < audit:
        logger.warning(
            "configured c_gn = %g is below the empirical ensemble ratio %.6g; "
            "the energy coefficients may rest on an inadmissible constant",
            config.c_gn,
            audit,
        )

    state = build_initial_state(config, controls)
    energy_params = build_energy_params(config, integrate(state.w))

    outdir = resolve_output_dir(config.output.directory, output_root)
    outdir.mkdir(parents=True, exist_ok=True)

    pending_snaps = sorted(config.output.snapshot_times)
    csv_path = outdir / "diagnostics.csv"

    with open(csv_path, "w", newline="\n") as csv_fh:
        csv_fh.write(",".join(DIAGNOSTIC_COLUMNS) + "\n")

        def sink(row: DiagnosticsRecord) -> None:
            csv_fh.write(",".join(format_float(x) for x in row.as_tuple()) + "\n")
            csv_fh.flush()

        def snapshot_observer(s: State, step_index: int, dt_used: float) -> None:
            while pending_snaps and s.t >= pending_snaps[0] - 1e-12:
                k = len(config.output.snapshot_times) - len(pending_snaps)
                pending_snaps.pop(0)
                for name, f in s.fields().items():
                    _write_snapshot(outdir / f"snap_{name}_{k:03d}.txt", f, s.t, name)

        result = run(
            state,
            config.model,
            controls,
            t_end=cc.t_end,
            observers=[snapshot_observer],
            energy_params=energy_params,
            record_every=config.output.cadence,
            record_sink=sink,
        )

    exit_code = EXIT_CODES[result.reason]
    summary = {
        "reason": result.reason,
        "exit_code": exit_code,
        "final_t": result.final_state.t,
        "n_steps": result.n_steps,
        "peak_linf_u": result.peak_linf_u,
        "peak_linf_w": result.peak_linf_w,
        "peak_energy_y": result.peak_energy_y,
        "energy_params": {
            "c_gn": energy_params.c_gn,
            "epsilon": energy_params.epsilon,
            "a_coef": energy_params.a_coef,
            "b_coef": energy_params.b_coef,
            "w0_mass": energy_params.w0_mass,
            "area": energy_params.area,
        },
        "theorem_regime": config.model.theorem_regime,
        "gn_audit_ratio": audit,
        "seed": config.seed,
        "grid": {"nx": config.grid.nx, "ny": config.grid.ny, "lx": config.grid.lx, "ly": config.grid.ly},
        "model": {
            "tau": config.model.tau,
            "r": config.model.r,
            "mu": config.model.mu,
            "p": config.model.p,
        },
        "message": result.message,
    }
    with open(outdir / "summary.json", "w", newline="\n") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ScenarioResult(result.reason, exit_code, outdir, result, summary)


@dataclass
class SweepCell:
    indices: tuple[int, int]
    values: dict[str, float]
    result: ScenarioResult
    runtime_seconds: float


def run_sweep(
    base_raw: dict,
    axis1: tuple[str, Sequence[float]],
    axis2: Optional[tuple[str, Sequence[float]]] = None,
    output_root: Optional[str] = None,
) -> tuple[Path, list[SweepCell]]:
    """Grid of runs over one or two numeric config leaves.

    Each cell writes into <base output directory>/cell_<i>_<j>/; rows land in
    sweep.csv in axis order regardless of how cells were executed.
    """
    key1, vals1 = axis1
    key2, vals2 = axis2 if axis2 is not None else (None, [None])
    if not vals1 or not list(vals2):
        raise ConfigError("sweep axes must carry at least one value")

    base_cfg = parse_config_data(base_raw)
    base_out = resolve_output_dir(base_cfg.output.directory, output_root)
    cells: list[SweepCell] = []
    for i, v1 in enumerate(vals1):
        for j, v2 in enumerate(vals2):
            raw = json.loads(json.dumps(base_raw))  # deep copy of plain data
            try:
                set_numeric_leaf(raw, key1, v1)
                if key2 is not None:
                    set_numeric_leaf(raw, key2, v2)
                raw["output"]["directory"] = str(base_out / f"cell_{i:02d}_{j:02d}")
                cfg = parse_config_data(raw)
            except ConfigError as exc:
                raise ConfigError(f"sweep cell ({i}, {j}): {exc}") from exc
            t0 = time.perf_counter()
            try:
                res = run_scenario(cfg)
            except ConfigError as exc:
                raise ConfigError(f"sweep cell ({i}, {j}): {exc}") from exc
            dt_wall = time.perf_counter() - t0
            values = {key1: float(v1)}
            if key2 is not None:
                values[key2] = float(v2)
            cells.append(SweepCell((i, j), values, res, dt_wall))

    base_out.mkdir(parents=True, exist_ok=True)
    sweep_path = base_out / "sweep.csv"
    with open(sweep_path, "w", newline="\n") as fh:
        fh.write(
            "key1,value1,key2,value2,reason,peak_linf_u,peak_energy_y,runtime_seconds\n"
        )
        for cell in cells:
            v2s = format_float(cell.values[key2]) if key2 is not None else ""
            fh.write(
                ",".join(
                    [
                        key1,
                        format_float(cell.values[key1]),
                        key2 or "",
                        v2s,
                        cell.result.reason,
                        format_float(cell.result.run.peak_linf_u),
                        format_float(cell.result.run.peak_energy_y),
                        f"{cell.runtime_seconds:.3f}",
                    ]
                )
                + "\n"
            )
    return sweep_path, cells


def verify_command(
    p: float,
    delta_list: Sequence[float],
    u_max: float = 1e8,
    out_path: Optional[Path] = None,
) -> dict[str, Any]:
    """Inequality report: C(delta) table plus the phi(u) <= u scan."""
    if not (0.0 <= p < 1.0):
        raise ConfigError(f"verify: p must be in [0, 1), got {p}")
    entries = []
    for delta in delta_list:
        if delta <= 0.0:
            raise ConfigError(f"verify: delta must be > 0, got {delta}")
        rep = verify_interpolation_inequality(p, delta, u_max=u_max)
        entries.append(
            {
                "delta": delta,
                "c_delta": rep.c_delta,
                "argmax_u": rep.argmax_u,
                "samples_used": rep.samples_used,
                "holds": rep.holds,
                "certified_10x": certify_inequality(rep, factor=10),
            }
        )
    phi_rep = verify_phi_bound(u_max=u_max)
    report = {
        "p": p,
        "u_max": u_max,
        "inequalities": entries,
        "phi_bound": {
            "u_max": phi_rep.u_max,
            "samples": phi_rep.samples,
            "max_excess": phi_rep.max_excess,
            "holds": phi_rep.holds,
        },
        "all_pass": phi_rep.holds
        and all(e["holds"] and e["certified_10x"] for e in entries),
    }
    if out_path is not None:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report
