"""IMEX time integration of the coupled system.

One step treats chemotactic transport and the growth source explicitly and
all diffusion implicitly (backward Euler), so the step size is governed by
the advective and reaction scales, never by the diffusive h^2 limit:

  (a) u* = u + dt (-div(u grad v) + f(u)),   w* = w + dt (-div(w grad z))
  (b) (I - dt Lap) u+ = u*,                  (I - dt Lap) w+ = w*
  (c) tau = 0:  (I - Lap) v+ = w+,           (I - Lap) z+ = u+
      tau = 1:  ((1+dt) I - dt Lap) v+ = v + dt w+,   likewise z+ from u+

The u update always sees v from the previous step and the w update sees the
old z; the signal fields are refreshed last.  The splitting is first order in
time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .diagnostics import (
    BlowupReport,
    DiagnosticsRecord,
    EnergyParams,
    detect_blowup,
    energy_params_mass_branch,
    make_energy_params,
    record,
)
from .elliptic import SolverFailure, solve_raw
from .grid import (
    Field,
    cell_label,
    chemotactic_divergence_raw,
    integrate,
    max_face_gradient_raw,
)
from .model import ModelParams, State, source_raw

TERMINATION_REASONS = ("completed", "blow_up_detected", "positivity_failure", "solver_failure")


class PositivityError(RuntimeError):
    def __init__(self, field_name: str, value: float, cell: str, t: float):
        super().__init__(
            f"positivity failure: {field_name} = {value:.6e} at cell {cell} (t = {t:.6g})"
        )
        self.field_name = field_name
        self.value = value
        self.cell = cell
        self.t = t


@dataclass(frozen=True)
class StepControls:
    """Numerical controls for the IMEX stepper.

    dt is the fixed step in "fixed" mode and the step ceiling in "adaptive"
    mode.  The adaptive bound is cfl_safety * h^2 / (4 D_expl + h Vmax + h^2 R)
    with D_expl the explicitly treated diffusivity (zero here, diffusion is
    implicit), Vmax the largest face gradient of the two signals, and R a
    source-stiffness estimate; it reduces to an advective CFL condition.
    """

    dt: float
    dt_mode: str = "fixed"
    cfl_safety: float = 0.4
    pos_tol: float = 1e-10
    clamp_negatives: bool = False
    solver: str = "dct"
    flux_mode: str = "centered"
    solver_tol: float = 1e-10
    blow_threshold: float = 1e5

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.dt_mode not in ("fixed", "adaptive"):
            raise ValueError(f"dt_mode must be 'fixed' or 'adaptive', got {self.dt_mode!r}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must be in (0, 1], got {self.cfl_safety}")
        if self.pos_tol < 0.0:
            raise ValueError("pos_tol must be >= 0")
        if self.solver not in ("dct", "cg"):
            raise ValueError(f"solver must be 'dct' or 'cg', got {self.solver!r}")
        if self.flux_mode not in ("centered", "upwind"):
            raise ValueError(f"flux_mode must be 'centered' or 'upwind', got {self.flux_mode!r}")


# diffusion is integrated implicitly, so nothing diffusive is explicit
_EXPLICIT_DIFFUSIVITY = 0.0


def compute_dt(state: State, params: ModelParams, controls: StepControls) -> float:
    """Step size for the next step; equals controls.dt in fixed mode."""
    if controls.dt_mode == "fixed":
        return controls.dt
    g = state.grid
    h = min(g.hx, g.hy)
    vmax = max(
        max_face_gradient_raw(state.v.as_2d(), g.hx, g.hy),
        max_face_gradient_raw(state.z.as_2d(), g.hx, g.hy),
    )
    umax = max(float(state.u.values.max()), 0.0)
    rate = abs(params.r)
    if params.mu > 0.0:
        rate += 2.0 * params.mu * umax / np.log(umax + np.e) ** params.p
    denom = 4.0 * _EXPLICIT_DIFFUSIVITY + h * vmax + h * h * rate
    if denom <= 0.0:
        return controls.dt
    return min(controls.dt, controls.cfl_safety * h * h / denom)


def _solver_iter_cap(grid) -> int:
    return 10 * (grid.nx + grid.ny)


def step(
    state: State,
    params: ModelParams,
    controls: StepControls,
    dt: Optional[float] = None,
) -> State:
    """Advance the state by one IMEX step.

    The returned fields are built without finite checks so that an emerging
    blow-up is handed to the detector instead of raising mid-step.
    """
    for name, f in state.fields().items():
        if not np.all(np.isfinite(f.values)):
            raise ValueError(f"step: non-finite field {name} on entry")
    for name in ("u", "w"):
        f = state.fields()[name]
        vmin = float(f.values.min())
        if vmin < -controls.pos_tol and not controls.clamp_negatives:
            bad = int(np.argmin(f.values))
            raise PositivityError(name, vmin, cell_label(f.grid, bad), state.t)

    if dt is None:
        dt = compute_dt(state, params, controls)
    g = state.grid
    u2 = state.u.as_2d()
    v2 = state.v.as_2d()
    w2 = state.w.as_2d()
    z2 = state.z.as_2d()
    if controls.clamp_negatives:
        u2 = np.maximum(u2, 0.0)
        w2 = np.maximum(w2, 0.0)

    cap = _solver_iter_cap(g)
    tol = controls.solver_tol
    backend = controls.solver
    # overflow to inf/nan is deliberate here: it is handed to the blow-up
    # detector instead of raising mid-step
    with np.errstate(over="ignore", invalid="ignore"):
        src = source_raw(np.maximum(u2, 0.0), params)
        ustar = u2 + dt * (
            src - chemotactic_divergence_raw(u2, v2, g.hx, g.hy, controls.flux_mode)
        )
        wstar = w2 + dt * (-chemotactic_divergence_raw(w2, z2, g.hx, g.hy, controls.flux_mode))
        uplus = solve_raw(1.0, dt, g, ustar, tol=tol, max_iter=cap, backend=backend)
        wplus = solve_raw(1.0, dt, g, wstar, tol=tol, max_iter=cap, backend=backend)
        if params.tau == 0:
            vplus = solve_raw(1.0, 1.0, g, wplus, tol=tol, max_iter=cap, backend=backend)
            zplus = solve_raw(1.0, 1.0, g, uplus, tol=tol, max_iter=cap, backend=backend)
        else:
            vplus = solve_raw(
                1.0 + dt, dt, g, v2 + dt * wplus, tol=tol, max_iter=cap, backend=backend
            )
            zplus = solve_raw(
                1.0 + dt, dt, g, z2 + dt * uplus, tol=tol, max_iter=cap, backend=backend
            )

    blown = not (
        np.all(np.isfinite(uplus))
        and np.all(np.isfinite(vplus))
        and np.all(np.isfinite(wplus))
        and np.all(np.isfinite(zplus))
    )
    return State(
        u=Field.from_2d(g, uplus, post_blowup=blown),
        v=Field.from_2d(g, vplus, post_blowup=blown),
        w=Field.from_2d(g, wplus, post_blowup=blown),
        z=Field.from_2d(g, zplus, post_blowup=blown),
        t=state.t + dt,
    )


def initialize_signals(
    u: Field,
    w: Field,
    params: ModelParams,
    v: Optional[Field] = None,
    z: Optional[Field] = None,
    solver: str = "dct",
    solver_tol: float = 1e-10,
) -> tuple[Field, Field]:
    """Initial v, z: user-supplied (tau=1 only) or quasi-steady elliptic solves."""
    g = u.grid
    cap = _solver_iter_cap(g)
    if v is None:
        v = Field.from_2d(
            g, solve_raw(1.0, 1.0, g, w.as_2d(), tol=solver_tol, max_iter=cap, backend=solver)
        )
    if z is None:
        z = Field.from_2d(
            g, solve_raw(1.0, 1.0, g, u.as_2d(), tol=solver_tol, max_iter=cap, backend=solver)
        )
    return v, z


@dataclass
class RunResult:
    final_state: State
    reason: str
    records: list[DiagnosticsRecord]
    n_steps: int
    peak_linf_u: float
    peak_linf_w: float
    peak_energy_y: float
    energy_params: EnergyParams
    blowup: Optional[BlowupReport] = None
    message: str = ""


Observer = Callable[[State, int, float], None]


def run(
    initial: State,
    params: ModelParams,
    controls: StepControls,
    t_end: float,
    observers: Sequence[Observer] = (),
    energy_params: Optional[EnergyParams] = None,
    record_every: int = 1,
    record_sink: Optional[Callable[[DiagnosticsRecord], None]] = None,
) -> RunResult:
    """Iterate `step` until t_end or an abort condition.

    Diagnostics rows are taken at t = initial.t, every `record_every` steps,
    and at the final accepted step; each row also goes to `record_sink` as it
    is produced.  Observers are invoked at the same cadence and must not
    mutate the state.  Sup-norm peaks are tracked every step; the energy peak
    is tracked at recording ticks.
    """
    if t_end < initial.t:
        raise ValueError(f"t_end = {t_end} precedes initial time {initial.t}")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    if energy_params is None:
        w0_mass = integrate(initial.w)
        if params.mu > 0.0:
            energy_params = make_energy_params(params, w0_mass, initial.grid.area)
        else:
            energy_params = energy_params_mass_branch(w0_mass, initial.grid.area)

    state = initial
    records = [record(state, energy_params, params, dt_used=0.0)]
    if record_sink is not None:
        record_sink(records[0])
    for obs in observers:
        obs(state, 0, 0.0)
    peak_u = records[0].linf_u
    peak_w = records[0].linf_w
    peak_y = records[0].energy_y
    n = 0
    reason = "completed"
    blowup = None
    message = ""
    time_eps = 1e-12 * max(1.0, abs(t_end))

    while state.t < t_end - time_eps:
        dt = compute_dt(state, params, controls)
        if state.t + dt > t_end:
            dt = t_end - state.t
        try:
            state = step(state, params, controls, dt=dt)
        except PositivityError as exc:
            reason = "positivity_failure"
            message = str(exc)
            break
        except SolverFailure as exc:
            reason = "solver_failure"
            message = str(exc)
            break
        n += 1

        rep = detect_blowup(state, controls.blow_threshold)
        if rep is not None:
            reason = "blow_up_detected"
            blowup = rep
            message = (
                f"blow-up detected at t = {rep.t:.6g}: {rep.field_name} = {rep.value:.6e} "
                f"at cell (i={rep.cell[0]}, j={rep.cell[1]}) [{rep.trigger}]"
            )
            break

        min_u = float(state.u.values.min())
        min_w = float(state.w.values.min())
        if not controls.clamp_negatives and min(min_u, min_w) < -controls.pos_tol:
            name, val, f = (
                ("u", min_u, state.u) if min_u <= min_w else ("w", min_w, state.w)
            )
            bad = int(np.argmin(f.values))
            reason = "positivity_failure"
            message = str(
                PositivityError(name, val, cell_label(f.grid, bad), state.t)
            )
            break

        peak_u = max(peak_u, float(np.abs(state.u.values).max()))
        peak_w = max(peak_w, float(np.abs(state.w.values).max()))
        done = state.t >= t_end - time_eps
        if done:
            state = replace(state, t=t_end)
        if n % record_every == 0 or done:
            row = record(state, energy_params, params, dt_used=dt)
            records.append(row)
            if record_sink is not None:
                record_sink(row)
            peak_y = max(peak_y, row.energy_y)
            for obs in observers:
                obs(state, n, dt)
        if done:
            break

    return RunResult(
        final_state=state,
        reason=reason,
        records=records,
        n_steps=n,
        peak_linf_u=peak_u,
        peak_linf_w=peak_w,
        peak_energy_y=peak_y,
        energy_params=energy_params,
        blowup=blowup,
        message=message,
    )
