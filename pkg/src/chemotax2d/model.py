"""Model parameters, the damped growth source, and its proof-side companion phi.

The source is f(u) = r u - mu u^2 / ln^p(u + e).  For p = 0 it reduces to the
classical logistic r u - mu u^2; for 0 < p < 1 the damping is weaker than
logistic ("sub-logistic") but still strong enough, per the theory this code
probes numerically, to keep solutions bounded.

phi(u) = u^2 / (u + e) is the closed form of the auxiliary integral
int_0^u [s/(s+e) + e s/(s+e)^2] ds; tests cross-check the closed form against
adaptive quadrature before anything relies on it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, GridSpec, cell_label


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the coupled system: tau regime and source coefficients."""

    tau: int
    r: float
    mu: float
    p: float

    def __post_init__(self):
        if self.tau not in (0, 1):
            raise ValueError(f"tau must be 0 or 1, got {self.tau}")
        if self.mu < 0.0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if self.p < 0.0:
            raise ValueError(f"p must be >= 0, got {self.p}")

    @property
    def theorem_regime(self) -> bool:
        """True iff r > 0, mu > 0 and 0 <= p < 1 (the boundedness hypotheses)."""
        return self.r > 0.0 and self.mu > 0.0 and 0.0 <= self.p < 1.0


@dataclass
class State:
    """The quadruple (u, v, w, z) on one shared grid at one time instant."""

    u: Field
    v: Field
    w: Field
    z: Field
    t: float

    def __post_init__(self):
        g = self.u.grid
        for name in ("v", "w", "z"):
            if getattr(self, name).grid != g:
                raise ValueError(f"field {name} is not on the same grid as u")
        if self.t < 0.0:
            raise ValueError(f"time must be >= 0, got {self.t}")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    def fields(self) -> dict[str, Field]:
        return {"u": self.u, "v": self.v, "w": self.w, "z": self.z}


def source_raw(u2: np.ndarray, params: ModelParams) -> np.ndarray:
    # elementwise source; caller guarantees u2 >= 0
    return params.r * u2 - params.mu * u2 * u2 / np.log(u2 + np.e) ** params.p


def source(u_val: float, params: ModelParams) -> float:
    """Pointwise source r u - mu u^2 / ln^p(u + e), defined for u >= 0.

    Evaluated through the same array kernels as `source_field` (scalar and
    array power can differ by one ulp otherwise).
    """
    if u_val < 0.0:
        raise ValueError(f"source: u must be >= 0, got {u_val}")
    return float(source_raw(np.array([u_val], dtype=float), params)[0])


def source_field(u: Field, params: ModelParams, pos_tol: float = 1e-10) -> Field:
    """Elementwise source.  Undershoot within pos_tol is clamped to 0 first."""
    vals = u.values
    vmin = float(vals.min())
    if vmin < -pos_tol:
        bad = int(np.argmin(vals))
        raise ValueError(
            f"source_field: u = {vmin:.6e} < -pos_tol at cell {cell_label(u.grid, bad)}"
        )
    clamped = np.maximum(vals, 0.0) if vmin < 0.0 else vals
    out = source_raw(clamped.reshape(u.grid.ny, u.grid.nx), params)
    return Field.from_2d(u.grid, out)


def phi(u_val: float) -> float:
    """u^2 / (u + e), the closed form of int_0^u [s/(s+e) + e s/(s+e)^2] ds."""
    if u_val < 0.0:
        raise ValueError(f"phi: u must be >= 0, got {u_val}")
    return float(u_val * u_val / (u_val + np.e))


def phi_integrand(s: float) -> float:
    """Defining integrand of phi, kept separate as the quadrature oracle target."""
    return s / (s + np.e) + np.e * s / (s + np.e) ** 2


def phi_derivative(u_val: float) -> float:
    """d phi / du = u/(u+e) + e u/(u+e)^2."""
    if u_val < 0.0:
        raise ValueError(f"phi_derivative: u must be >= 0, got {u_val}")
    return phi_integrand(u_val)
