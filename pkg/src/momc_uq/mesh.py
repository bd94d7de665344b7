"""Uniform 1D grids, cell-averaged fields, ghost cells and discrete norms."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatchError, StencilError

GHOST_WIDTH = 2  # fixed support; reconstructions must not ask for more

BOUNDARIES = ("periodic", "transmissive")


@dataclass(frozen=True)
class Grid1D:
    """Uniform cell-centered grid on [x_min, x_max] with n_cells cells."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.n_cells}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    def cell_centers(self) -> np.ndarray:
        i = np.arange(self.n_cells)
        return self.x_min + (i + 0.5) * self.dx

    def refined(self, factor: int = 2) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.n_cells * factor)


@dataclass
class CellField:
    """Cell-averaged multi-variable state: values has shape (n_vars, n_cells).

    Construction validates shape and finiteness; `check=False` is reserved
    for transient stage states inside the time integrators, whose completed
    steps are re-validated by the march loop.
    """

    grid: Grid1D
    values: np.ndarray
    boundary: str = "transmissive"
    check: bool = True

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.values.shape[1] != self.grid.n_cells:
            raise GridMismatchError(
                f"values have {self.values.shape[1]} cells, grid has {self.grid.n_cells}"
            )
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary policy {self.boundary!r}")
        if self.check and not np.all(np.isfinite(self.values)):
            raise ValueError("field contains nonfinite entries")

    @property
    def n_vars(self) -> int:
        return self.values.shape[0]

    def copy_with(self, values: np.ndarray, check: bool = False) -> "CellField":
        return CellField(self.grid, values, self.boundary, check)


def extend(values: np.ndarray, boundary: str, width: int) -> np.ndarray:
    """Return values padded with `width` ghost cells on each side.

    Periodic ghosts wrap around; transmissive ghosts copy the nearest
    interior cell (zero gradient). Interior entries are never modified.
    """
    if width > GHOST_WIDTH:
        raise StencilError(f"ghost width {width} exceeds supported {GHOST_WIDTH}")
    if width < 1:
        raise ValueError("width must be >= 1")
    vals = np.atleast_2d(values)
    if boundary == "periodic":
        return np.concatenate([vals[:, -width:], vals, vals[:, :width]], axis=1)
    if boundary == "transmissive":
        left = np.repeat(vals[:, :1], width, axis=1)
        right = np.repeat(vals[:, -1:], width, axis=1)
        return np.concatenate([left, vals, right], axis=1)
    raise ValueError(f"unknown boundary policy {boundary!r}")


def fill_ghosts(field: CellField, width: int) -> np.ndarray:
    """Ghost-extended view of a field's values, shape (n_vars, n + 2*width)."""
    return extend(field.values, field.boundary, width)


def l1_norm(field_a: CellField, field_b: CellField, var: int | None = None):
    """Discrete L1(D) norm of the difference, dx * sum |a - b|.

    Returns one value per variable, or a scalar when `var` selects one.
    """
    if field_a.grid != field_b.grid:
        raise GridMismatchError("fields live on different grids")
    if field_a.n_vars != field_b.n_vars:
        raise GridMismatchError("fields have different variable counts")
    per_var = field_a.grid.dx * np.sum(np.abs(field_a.values - field_b.values), axis=1)
    if var is None:
        return per_var
    return float(per_var[var])


def l1_norm_values(a: np.ndarray, b: np.ndarray, dx: float) -> np.ndarray:
    """Same norm on bare arrays of shape (n_vars, n_cells) or (n_cells,)."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape != b.shape:
        raise GridMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    return dx * np.sum(np.abs(a - b), axis=1)
