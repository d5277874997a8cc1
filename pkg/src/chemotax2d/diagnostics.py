"""Tracked functionals, the combined energy y(t), blow-up detection, and
brute-force verifiers for the pointwise inequalities behind the boundedness
argument.

The combined energy is

    y = int u ln(u+e) + int w ln(w+e)
        + tau * (A/2) int |grad v|^2 + tau * (B/2) int |grad z|^2

with eps = min{ mu/4, 1/(3 C_GN) * (int w0 + e |Omega|)^(-1) }, A = 2 eps and
B = eps + 1/(4 eps).  That choice of A makes A^2/(4 eps) + eps - A vanish
identically, which the constructor checks to 1e-14.

C_GN is not derivable from theory alone; it is a configuration input
(default 1.0) paired with `gn_ensemble_max`, an empirical audit that scans
random smooth fields for the largest observed ratio.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import (
    Field,
    GridSpec,
    cell_label,
    gradient_sq_integral,
    integrate,
    weighted_gradient_sq_integral,
)
from .model import ModelParams, State


@dataclass(frozen=True)
class EnergyParams:
    """Coefficients of the combined energy functional."""

    c_gn: float
    epsilon: float
    a_coef: float
    b_coef: float
    w0_mass: float
    area: float

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        vanish = self.a_coef**2 / (4.0 * self.epsilon) + self.epsilon - self.a_coef
        if abs(vanish) > 1e-14:
            raise ValueError(f"A-coefficient identity violated: residual {vanish:.3e}")
        if abs(self.b_coef - (self.epsilon + 1.0 / (4.0 * self.epsilon))) > 1e-14:
            raise ValueError("B-coefficient identity violated")


def make_energy_params(
    params: ModelParams, w0_mass: float, area: float, c_gn: float = 1.0
) -> EnergyParams:
    """Energy coefficients for a damped run (requires mu > 0)."""
    if params.mu <= 0.0:
        raise ValueError("make_energy_params: mu must be > 0 (epsilon is undefined at mu = 0)")
    if c_gn <= 0.0:
        raise ValueError(f"c_gn must be > 0, got {c_gn}")
    if area <= 0.0:
        raise ValueError(f"area must be > 0, got {area}")
    if w0_mass < 0.0:
        raise ValueError(f"w0_mass must be >= 0, got {w0_mass}")
    eps = min(params.mu / 4.0, 1.0 / (3.0 * c_gn) / (w0_mass + np.e * area))
    return EnergyParams(
        c_gn=c_gn,
        epsilon=eps,
        a_coef=2.0 * eps,
        b_coef=eps + 1.0 / (4.0 * eps),
        w0_mass=w0_mass,
        area=area,
    )


def energy_params_mass_branch(w0_mass: float, area: float, c_gn: float = 1.0) -> EnergyParams:
    """Fallback coefficients for undamped (mu = 0) exploratory runs.

    Only the mass-dependent branch of the eps formula is used; the mu branch
    would give eps = 0 and an undefined B.  Records stay finite this way.
    """
    eps = 1.0 / (3.0 * c_gn) / (w0_mass + np.e * area)
    return EnergyParams(
        c_gn=c_gn,
        epsilon=eps,
        a_coef=2.0 * eps,
        b_coef=eps + 1.0 / (4.0 * eps),
        w0_mass=w0_mass,
        area=area,
    )


def l_log_l(f: Field, pos_tol: float = 1e-10) -> float:
    """Quadrature of f ln(f + e); f must be nonnegative up to pos_tol undershoot."""
    vmin = float(f.values.min())
    if vmin < -pos_tol:
        bad = int(np.argmin(f.values))
        raise ValueError(
            f"l_log_l: negative entry {vmin:.6e} at cell {cell_label(f.grid, bad)}"
        )
    vals = np.maximum(f.values, 0.0) if vmin < 0.0 else f.values
    return f.grid.hx * f.grid.hy * float(np.sum(vals * np.log(vals + np.e)))


def _combine_energy(
    llu: float, llw: float, gv: float, gz: float, ep: EnergyParams, tau: int
) -> float:
    # single combination point so record() reproduces energy() bit for bit
    y = llu + llw
    if tau == 1:
        y += 0.5 * ep.a_coef * gv
        y += 0.5 * ep.b_coef * gz
    return y


def energy(state: State, ep: EnergyParams, params: ModelParams) -> float:
    """The combined functional; gradient terms enter only in the tau=1 regime."""
    return _combine_energy(
        l_log_l(state.u),
        l_log_l(state.w),
        gradient_sq_integral(state.v),
        gradient_sq_integral(state.z),
        ep,
        params.tau,
    )


@dataclass(frozen=True)
class BlowupReport:
    t: float
    field_name: str
    value: float
    cell: tuple[int, int]
    trigger: str  # "threshold" or "nonfinite"


def detect_blowup(state: State, threshold: float) -> Optional[BlowupReport]:
    """Report when ||u||_inf + ||w||_inf exceeds threshold or anything is non-finite."""
    for name, f in state.fields().items():
        finite = np.isfinite(f.values)
        if not finite.all():
            k = int(np.flatnonzero(~finite)[0])
            j, i = divmod(k, f.grid.nx)
            return BlowupReport(state.t, name, float(f.values[k]), (i, j), "nonfinite")
    linf_u = float(np.abs(state.u.values).max())
    linf_w = float(np.abs(state.w.values).max())
    if linf_u + linf_w > threshold:
        name, f, val = ("u", state.u, linf_u) if linf_u >= linf_w else ("w", state.w, linf_w)
        k = int(np.argmax(np.abs(f.values)))
        j, i = divmod(k, f.grid.nx)
        return BlowupReport(state.t, name, val, (i, j), "threshold")
    return None


DIAGNOSTIC_COLUMNS = (
    "t",
    "mass_u",
    "mass_w",
    "linf_u",
    "linf_v",
    "linf_w",
    "linf_z",
    "l_log_l_u",
    "l_log_l_w",
    "grad_v_sq",
    "grad_z_sq",
    "energy_y",
    "min_u",
    "min_w",
    "dt_used",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """One time-stamped row of every tracked functional."""

    t: float
    mass_u: float
    mass_w: float
    linf_u: float
    linf_v: float
    linf_w: float
    linf_z: float
    l_log_l_u: float
    l_log_l_w: float
    grad_v_sq: float
    grad_z_sq: float
    energy_y: float
    min_u: float
    min_w: float
    dt_used: float

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in DIAGNOSTIC_COLUMNS)


def record(
    state: State,
    ep: EnergyParams,
    params: ModelParams,
    controls=None,
    dt_used: Optional[float] = None,
) -> DiagnosticsRecord:
    """Populate one diagnostics row from a non-aborted state.

    Negative undershoot is clamped inside the L ln L integrand regardless of
    magnitude (runs with clamp_negatives carry real negatives); the min_u and
    min_w columns report the unclamped values.
    """
    if dt_used is None:
        dt_used = float(controls.dt) if controls is not None else 0.0
    llu = l_log_l(state.u, pos_tol=np.inf)
    llw = l_log_l(state.w, pos_tol=np.inf)
    gv = gradient_sq_integral(state.v)
    gz = gradient_sq_integral(state.z)
    y = _combine_energy(llu, llw, gv, gz, ep, params.tau)
    return DiagnosticsRecord(
        t=state.t,
        mass_u=integrate(state.u),
        mass_w=integrate(state.w),
        linf_u=float(np.abs(state.u.values).max()),
        linf_v=float(np.abs(state.v.values).max()),
        linf_w=float(np.abs(state.w.values).max()),
        linf_z=float(np.abs(state.z.values).max()),
        l_log_l_u=llu,
        l_log_l_w=llw,
        grad_v_sq=gv,
        grad_z_sq=gz,
        energy_y=y,
        min_u=float(state.u.values.min()),
        min_w=float(state.w.values.min()),
        dt_used=float(dt_used),
    )


# --- pointwise inequality verifiers ---------------------------------------

_LOG_GRID_FLOOR = 1e-6


def log_grid(u_max: float, samples: int) -> np.ndarray:
    """Log-spaced scan grid on [0, u_max] with u = 0 included exactly."""
    if u_max <= _LOG_GRID_FLOOR:
        raise ValueError(f"u_max must exceed {_LOG_GRID_FLOOR}, got {u_max}")
    if samples < 3:
        raise ValueError("need at least 3 samples")
    return np.concatenate(([0.0], np.geomspace(_LOG_GRID_FLOOR, u_max, samples - 1)))


@dataclass(frozen=True)
class InequalityReport:
    p: float
    delta: float
    u_max: float
    samples_used: int
    c_delta: float
    argmax_u: float
    holds: bool


def _bracket_scan(p: float, delta: float, u: np.ndarray) -> tuple[float, float]:
    g = u * u * (1.0 - delta * np.log(u + np.e) ** (1.0 - p))
    k = int(np.argmax(g))
    return max(0.0, float(g[k])), float(u[k])


def verify_interpolation_inequality(
    p: float, delta: float, u_max: float = 1e8, samples: int = 4001
) -> InequalityReport:
    """Brute-force constant for u^2 <= delta u^2 ln^(1-p)(u+e) + C(delta).

    C is the scan maximum of u^2 (1 - delta ln^(1-p)(u+e)), floored at 0, on a
    log-spaced grid refined by doubling until two successive grids agree to
    1e-6 relative.  The reported C carries a 1e-5 margin so that it also
    certifies the inequality on grids 10x finer than the final scan.
    """
    if not (0.0 <= p < 1.0):
        raise ValueError(f"p must be in [0, 1), got {p}")
    if delta <= 0.0:
        raise ValueError(f"delta must be > 0, got {delta}")
    n = samples
    c_prev, argmax = _bracket_scan(p, delta, log_grid(u_max, n))
    for _ in range(8):
        if c_prev == 0.0:
            break
        n *= 2
        c_next, argmax = _bracket_scan(p, delta, log_grid(u_max, n))
        done = abs(c_next - c_prev) <= 1e-6 * max(c_next, c_prev)
        c_prev = max(c_prev, c_next)
        if done:
            break
    c = c_prev * (1.0 + 1e-5) if c_prev > 0.0 else 0.0
    u = log_grid(u_max, n)
    holds = bool(np.all(u * u <= delta * u * u * np.log(u + np.e) ** (1.0 - p) + c))
    return InequalityReport(
        p=p, delta=delta, u_max=u_max, samples_used=n, c_delta=c, argmax_u=argmax, holds=holds
    )


def certify_inequality(report: InequalityReport, factor: int = 10) -> bool:
    """Re-check the reported C on a grid `factor` times finer than the scan."""
    u = log_grid(report.u_max, report.samples_used * factor)
    lhs = u * u
    rhs = report.delta * u * u * np.log(u + np.e) ** (1.0 - report.p) + report.c_delta
    return bool(np.all(lhs <= rhs))


@dataclass(frozen=True)
class PhiBoundReport:
    u_max: float
    samples: int
    max_excess: float
    holds: bool


def verify_phi_bound(u_max: float = 1e8, samples: int = 4001) -> PhiBoundReport:
    """Scan phi(u) = u^2/(u+e) <= u over the log-spaced grid."""
    u = log_grid(u_max, samples)
    excess = u * u / (u + np.e) - u
    worst = float(excess.max())
    return PhiBoundReport(u_max=u_max, samples=samples, max_excess=worst, holds=worst <= 0.0)


# --- empirical Gagliardo-Nirenberg audit -----------------------------------


def empirical_gn_ratio(f: Field) -> float:
    """int f^2 / (int |grad f|^2/(f+e) * int (f+e) + (int (f+e))^2).

    A lower estimate of any admissible interpolation constant; the denominator
    is strictly positive because int (f+e) >= e |Omega|.
    """
    num = integrate(Field(f.values * f.values, f.grid))
    mass_e = integrate(f) + np.e * f.grid.area
    den = weighted_gradient_sq_integral(f) * mass_e + mass_e * mass_e
    return num / den


def gn_ensemble_max(
    grid: GridSpec, n_fields: int = 500, seed: int = 0, cutoff: int = 4, amplitude: float = 5.0
) -> float:
    """Largest empirical ratio over rectified random low-frequency fields."""
    from .initial import rectified_random_values

    best = 0.0
    for k in range(n_fields):
        vals = rectified_random_values(grid, seed=seed + k, cutoff=cutoff, amplitude=amplitude)
        best = max(best, empirical_gn_ratio(Field(vals.ravel(), grid)))
    return best
