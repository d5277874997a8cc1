"""Named initial-data generators.

Each generator takes the grid plus a parameter mapping and returns a
(ny, nx) array sampled at cell centers.  Unknown parameter keys are rejected
so a typo in a scenario file cannot silently change a run.

Registry:
  constant          value
  gaussian_bump     center=[cx, cy], width, amplitude, optional mass
                    (mass rescales so the discrete integral is exact)
  cosine_modes      modes=[[kx, ky, amplitude], ...] of cos(kx pi x / lx) *
                    cos(ky pi y / ly) terms
  rectified_random  seed, cutoff, optional amplitude: random low-frequency
                    cosine sum, negatives clipped to zero
"""

from __future__ import annotations

from typing import Any, Callable, Mapping

import numpy as np

from .grid import GridSpec


class GeneratorError(ValueError):
    pass


def _check_keys(name: str, params: Mapping[str, Any], required: set, optional: set = frozenset()):
    keys = set(params)
    missing = required - keys
    if missing:
        raise GeneratorError(f"{name}: missing parameter(s) {sorted(missing)}")
    unknown = keys - required - set(optional)
    if unknown:
        raise GeneratorError(f"{name}: unknown parameter(s) {sorted(unknown)}")


def constant_values(grid: GridSpec, value: float) -> np.ndarray:
    return np.full((grid.ny, grid.nx), float(value))


def gaussian_bump_values(
    grid: GridSpec,
    center: tuple[float, float],
    width: float,
    amplitude: float,
    mass: float | None = None,
) -> np.ndarray:
    if width <= 0.0:
        raise GeneratorError(f"gaussian_bump: width must be > 0, got {width}")
    x, y = grid.cell_centers()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    out = amplitude * np.exp(-r2 / (2.0 * width * width))
    if mass is not None:
        discrete = grid.hx * grid.hy * float(np.sum(out))
        if discrete <= 0.0:
            raise GeneratorError("gaussian_bump: cannot rescale a nonpositive-mass bump")
        out *= mass / discrete
    return out


def cosine_modes_values(grid: GridSpec, modes) -> np.ndarray:
    x, y = grid.cell_centers()
    out = np.zeros((grid.ny, grid.nx))
    for m in modes:
        if len(m) != 3:
            raise GeneratorError(f"cosine_modes: each mode needs [kx, ky, amplitude], got {m}")
        kx, ky, amp = m
        if int(kx) != kx or int(ky) != ky or kx < 0 or ky < 0:
            raise GeneratorError(f"cosine_modes: kx, ky must be integers >= 0, got {m}")
        out += amp * np.cos(kx * np.pi * x / grid.lx) * np.cos(ky * np.pi * y / grid.ly)
    return out


def rectified_random_values(
    grid: GridSpec, seed: int, cutoff: int, amplitude: float = 1.0
) -> np.ndarray:
    if cutoff < 1:
        raise GeneratorError(f"rectified_random: cutoff must be >= 1, got {cutoff}")
    rng = np.random.default_rng(seed)
    x, y = grid.cell_centers()
    out = np.zeros((grid.ny, grid.nx))
    for ky in range(cutoff + 1):
        cy = np.cos(ky * np.pi * y / grid.ly)
        for kx in range(cutoff + 1):
            coef = rng.standard_normal() / (1.0 + kx * kx + ky * ky)
            out += coef * cy * np.cos(kx * np.pi * x / grid.lx)
    return np.maximum(amplitude * out, 0.0)


def _build_constant(grid, params):
    _check_keys("constant", params, {"value"})
    return constant_values(grid, params["value"])


def _build_gaussian(grid, params):
    _check_keys("gaussian_bump", params, {"center", "width", "amplitude"}, {"mass"})
    center = params["center"]
    if len(center) != 2:
        raise GeneratorError(f"gaussian_bump: center must be [cx, cy], got {center}")
    return gaussian_bump_values(
        grid,
        (float(center[0]), float(center[1])),
        float(params["width"]),
        float(params["amplitude"]),
        mass=float(params["mass"]) if "mass" in params else None,
    )


def _build_cosine(grid, params):
    _check_keys("cosine_modes", params, {"modes"})
    return cosine_modes_values(grid, params["modes"])


def _build_rectified(grid, params):
    _check_keys("rectified_random", params, {"seed", "cutoff"}, {"amplitude"})
    return rectified_random_values(
        grid,
        int(params["seed"]),
        int(params["cutoff"]),
        float(params.get("amplitude", 1.0)),
    )


GENERATORS: dict[str, Callable[[GridSpec, Mapping[str, Any]], np.ndarray]] = {
    "constant": _build_constant,
    "gaussian_bump": _build_gaussian,
    "cosine_modes": _build_cosine,
    "rectified_random": _build_rectified,
}


def make_initial_values(grid: GridSpec, spec: Mapping[str, Any]) -> np.ndarray:
    """Build one field from {"generator": name, ...params}."""
    if "generator" not in spec:
        raise GeneratorError("initial data entry is missing the 'generator' key")
    name = spec["generator"]
    if name not in GENERATORS:
        raise GeneratorError(
            f"unknown generator {name!r}; known: {sorted(GENERATORS)}"
        )
    params = {k: v for k, v in spec.items() if k != "generator"}
    return GENERATORS[name](grid, params)
