"""Uniform cell-centered rectangular grid with zero-flux discrete operators.

The domain is an axis-aligned rectangle [0, lx] x [0, ly] split into nx*ny
equal cells.  Unknowns live at cell centers, x_i = (i + 1/2) hx,
y_j = (j + 1/2) hy.  Homogeneous Neumann boundaries are realized with ghost
cells that mirror the adjacent interior value, so every operator here is
discretely conservative: the 5-point Laplacian and the face-flux chemotactic
divergence both sum to zero over the grid up to round-off.

Field values are stored flat in row-major cell order (row = y index), i.e.
cell (i, j) sits at index j * nx + i.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a uniform cell-centered rectangular grid."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise ValueError("nx and ny must be integers")
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid must be at least 4x4, got {self.nx}x{self.ny}")
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise ValueError(f"domain lengths must be positive, got lx={self.lx}, ly={self.ly}")

    @property
    def hx(self) -> float:
        return self.lx / self.nx

    @property
    def hy(self) -> float:
        return self.ly / self.ny

    @property
    def ncells(self) -> int:
        return self.nx * self.ny

    @property
    def area(self) -> float:
        return self.lx * self.ly

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Meshgrid arrays (X, Y) of shape (ny, nx) with cell-center coordinates."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)


@dataclass
class Field:
    """One scalar unknown sampled at cell centers, flat row-major storage."""

    values: np.ndarray
    grid: GridSpec
    post_blowup: bool = field(default=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).ravel()
        if self.values.size != self.grid.ncells:
            raise ValueError(
                f"field has {self.values.size} values, grid has {self.grid.ncells} cells"
            )
        if not self.post_blowup and not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ValueError(f"non-finite field value at cell {cell_label(self.grid, bad)}")

    @classmethod
    def from_2d(cls, grid: GridSpec, arr: np.ndarray, post_blowup: bool = False) -> "Field":
        arr = np.asarray(arr, dtype=float)
        if arr.shape != (grid.ny, grid.nx):
            raise ValueError(f"expected shape {(grid.ny, grid.nx)}, got {arr.shape}")
        return cls(arr.ravel().copy(), grid, post_blowup)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "Field":
        return cls(np.full(grid.ncells, float(value)), grid)

    def as_2d(self) -> np.ndarray:
        """(ny, nx) view onto the flat values; row index is the y cell index."""
        return self.values.reshape(self.grid.ny, self.grid.nx)

    def copy(self) -> "Field":
        return Field(self.values.copy(), self.grid, self.post_blowup)


def cell_label(grid: GridSpec, flat_index: int) -> str:
    j, i = divmod(int(flat_index), grid.nx)
    return f"(i={i}, j={j})"


def _require_finite(f: Field, op: str) -> None:
    if not np.all(np.isfinite(f.values)):
        bad = int(np.flatnonzero(~np.isfinite(f.values))[0])
        raise ValueError(f"{op}: non-finite input at cell {cell_label(f.grid, bad)}")


def _require_same_grid(a: Field, b: Field, op: str) -> None:
    if a.grid != b.grid:
        raise ValueError(f"{op}: fields live on different grids ({a.grid} vs {b.grid})")


def laplacian_raw(f2: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """5-point Laplacian on a (ny, nx) array with mirror (zero-flux) ghosts.

    Neighbor pairs are summed before the center is subtracted so the result
    commutes bitwise with x/y reflections of the input.
    """
    p = np.pad(f2, 1, mode="edge")
    return ((p[1:-1, 2:] + p[1:-1, :-2]) - 2.0 * f2) / (hx * hx) + (
        (p[2:, 1:-1] + p[:-2, 1:-1]) - 2.0 * f2
    ) / (hy * hy)


def laplacian(f: Field) -> Field:
    """Discrete Laplacian with homogeneous Neumann (mirror ghost) boundaries."""
    _require_finite(f, "laplacian")
    g = f.grid
    return Field.from_2d(g, laplacian_raw(f.as_2d(), g.hx, g.hy))


def chemotactic_divergence_raw(
    d2: np.ndarray, p2: np.ndarray, hx: float, hy: float, mode: str = "centered"
) -> np.ndarray:
    """Divergence of the flux (density * grad potential) in conservative face form.

    Face flux = (face density) * (potential difference across the face) / h,
    zero on boundary faces.  Face density is the arithmetic mean of the two
    adjacent cells, or the upstream cell when mode == "upwind" (upstream is
    chosen by the sign of the potential difference, i.e. of the face velocity).
    """
    gx = (p2[:, 1:] - p2[:, :-1]) / hx
    gy = (p2[1:, :] - p2[:-1, :]) / hy
    if mode == "centered":
        dx_face = 0.5 * (d2[:, 1:] + d2[:, :-1])
        dy_face = 0.5 * (d2[1:, :] + d2[:-1, :])
    elif mode == "upwind":
        dx_face = np.where(gx > 0.0, d2[:, :-1], d2[:, 1:])
        dy_face = np.where(gy > 0.0, d2[:-1, :], d2[1:, :])
    else:
        raise ValueError(f"unknown flux mode {mode!r}")
    fx = dx_face * gx
    fy = dy_face * gy
    return np.diff(fx, axis=1, prepend=0.0, append=0.0) / hx + np.diff(
        fy, axis=0, prepend=0.0, append=0.0
    ) / hy


def chemotactic_divergence(density: Field, potential: Field, mode: str = "centered") -> Field:
    """div(density * grad potential) with zero flux through the boundary."""
    _require_same_grid(density, potential, "chemotactic_divergence")
    _require_finite(density, "chemotactic_divergence")
    _require_finite(potential, "chemotactic_divergence")
    g = density.grid
    out = chemotactic_divergence_raw(density.as_2d(), potential.as_2d(), g.hx, g.hy, mode)
    return Field.from_2d(g, out)


def integrate(f: Field) -> float:
    """Midpoint quadrature: hx * hy * sum of cell values."""
    _require_finite(f, "integrate")
    return f.grid.hx * f.grid.hy * float(np.sum(f.values))


def gradient_sq_integral(f: Field) -> float:
    """Integral of |grad f|^2 from interior-face differences.

    Boundary faces carry zero difference under the mirror ghost convention and
    are omitted.  The value is 0 exactly iff f is constant.
    """
    _require_finite(f, "gradient_sq_integral")
    g = f.grid
    f2 = f.as_2d()
    gx = (f2[:, 1:] - f2[:, :-1]) / g.hx
    gy = (f2[1:, :] - f2[:-1, :]) / g.hy
    return g.hx * g.hy * (float(np.sum(gx * gx)) + float(np.sum(gy * gy)))


def max_face_gradient_raw(f2: np.ndarray, hx: float, hy: float) -> float:
    """Sup norm of the face-difference gradient, used by the step-size controller."""
    gx = np.abs(f2[:, 1:] - f2[:, :-1]).max(initial=0.0) / hx
    gy = np.abs(f2[1:, :] - f2[:-1, :]).max(initial=0.0) / hy
    return max(float(gx), float(gy))


def weighted_gradient_sq_integral(f: Field) -> float:
    """Integral of |grad f|^2 / (f + e) with f face-averaged in the weight.

    Rejects inputs whose face average makes the weight nonpositive (the
    intended use is nonnegative densities, where f + e >= e).
    """
    _require_finite(f, "weighted_gradient_sq_integral")
    g = f.grid
    f2 = f.as_2d()
    wx = 0.5 * (f2[:, 1:] + f2[:, :-1]) + np.e
    wy = 0.5 * (f2[1:, :] + f2[:-1, :]) + np.e
    wmin = min(wx.min(initial=np.inf), wy.min(initial=np.inf))
    if wmin <= 0.0:
        raise ValueError(
            f"weighted_gradient_sq_integral: face weight f + e <= 0 (min {wmin:.3e})"
        )
    gx = (f2[:, 1:] - f2[:, :-1]) / g.hx
    gy = (f2[1:, :] - f2[:-1, :]) / g.hy
    return g.hx * g.hy * (float(np.sum(gx * gx / wx)) + float(np.sum(gy * gy / wy)))
