"""Uniform cell-centered 2D grids and finite-difference field algebra.

Fields are plain float64 arrays of shape (nx, ny) holding values at cell
centers x0 + (i+1/2)*hx, y0 + (j+1/2)*hy (x along axis 0).  All operators
enforce homogeneous Neumann walls through ghost cells:

* ``gradient``   -- centered differences, even ghost extension (ghost copies
  the wall cell), so gradients of constants vanish.
* ``divergence`` -- centered differences, odd ghost extension (ghost negates
  the wall cell, i.e. zero normal flux).  This makes divergence the exact
  negative adjoint of ``gradient`` under the midpoint inner product.
* ``laplacian``  -- compact 5-point stencil assembled from face differences
  with zero flux through the walls.  Its eigenvectors are the 2D DCT-II
  cosine modes, eigenvalue -(2/hx^2)(1-cos(k*pi/nx)) per direction.

``grad_inner`` is the Dirichlet form of ``laplacian``: it sums products of
face differences, so <laplacian(f), g> == -grad_inner(f, g) holds to
roundoff.  All quadratic gradient energies in the time steppers use it;
that exactness is what makes the discrete energy identities balance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GridSpec",
    "gradient",
    "divergence",
    "laplacian",
    "inner",
    "norm_sq",
    "integrate",
    "grad_inner",
    "grad_norm_sq",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform cell-centered grid on the rectangle (x0, x1) x (y0, y1)."""

    nx: int
    ny: int
    x0: float = -1.0
    x1: float = 1.0
    y0: float = -1.0
    y1: float = 1.0

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid needs nx, ny >= 4, got {self.nx}x{self.ny}")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError("domain bounds must satisfy x1 > x0 and y1 > y0")

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def xs(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.hx

    def ys(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.hy

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays broadcast to the field shape."""
        return np.meshgrid(self.xs(), self.ys(), indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def check(self, *fields: np.ndarray) -> None:
        """Reject fields that do not live on this grid."""
        for f in fields:
            if f.shape != self.shape:
                raise ValueError(f"field shape {f.shape} not conformable with grid {self.shape}")


def gradient(grid: GridSpec, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered-difference gradient with even ghost reflection at the walls."""
    grid.check(f)
    px = np.pad(f, ((1, 1), (0, 0)), mode="edge")
    py = np.pad(f, ((0, 0), (1, 1)), mode="edge")
    gx = (px[2:, :] - px[:-2, :]) / (2.0 * grid.hx)
    gy = (py[:, 2:] - py[:, :-2]) / (2.0 * grid.hy)
    return gx, gy


def divergence(grid: GridSpec, vx: np.ndarray, vy: np.ndarray) -> np.ndarray:
    """Centered-difference divergence with odd (zero normal flux) ghosts.

    Exactly the negative adjoint of :func:`gradient`:
    inner(divergence(v), f) == -(inner(vx, gx) + inner(vy, gy)).
    """
    grid.check(vx, vy)
    px = np.concatenate([-vx[:1, :], vx, -vx[-1:, :]], axis=0)
    py = np.concatenate([-vy[:, :1], vy, -vy[:, -1:]], axis=1)
    dx = (px[2:, :] - px[:-2, :]) / (2.0 * grid.hx)
    dy = (py[:, 2:] - py[:, :-2]) / (2.0 * grid.hy)
    return dx + dy


def _face_diff_x(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Differences across x-faces, zero on the two wall faces; shape (nx+1, ny)."""
    d = np.zeros((grid.nx + 1, grid.ny))
    d[1:-1, :] = f[1:, :] - f[:-1, :]
    return d


def _face_diff_y(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    d = np.zeros((grid.nx, grid.ny + 1))
    d[:, 1:-1] = f[:, 1:] - f[:, :-1]
    return d


def laplacian(grid: GridSpec, f: np.ndarray) -> np.ndarray:
    """Compact 5-point Neumann Laplacian (face fluxes, zero at the walls)."""
    grid.check(f)
    fx = _face_diff_x(grid, f) / grid.hx
    fy = _face_diff_y(grid, f) / grid.hy
    return (fx[1:, :] - fx[:-1, :]) / grid.hx + (fy[:, 1:] - fy[:, :-1]) / grid.hy


def face_flux_divergence(
    grid: GridSpec, w: np.ndarray, f: np.ndarray
) -> np.ndarray:
    """Divergence of w*grad(f) with face-centered fluxes and no-flux walls.

    ``w`` is a cell-centered coefficient, averaged onto faces.  With w == 1
    this reduces bit-for-bit to :func:`laplacian`.
    """
    grid.check(w, f)
    wx = np.ones((grid.nx + 1, grid.ny))
    wx[1:-1, :] = 0.5 * (w[1:, :] + w[:-1, :])
    wy = np.ones((grid.nx, grid.ny + 1))
    wy[:, 1:-1] = 0.5 * (w[:, 1:] + w[:, :-1])
    fx = wx * _face_diff_x(grid, f) / grid.hx
    fy = wy * _face_diff_y(grid, f) / grid.hy
    return (fx[1:, :] - fx[:-1, :]) / grid.hx + (fy[:, 1:] - fy[:, :-1]) / grid.hy


def inner(grid: GridSpec, f: np.ndarray, g: np.ndarray) -> float:
    """Midpoint-rule L2 inner product."""
    grid.check(f, g)
    return float(np.dot(f.ravel(), g.ravel())) * grid.cell_area


def norm_sq(grid: GridSpec, f: np.ndarray) -> float:
    return inner(grid, f, f)


def integrate(grid: GridSpec, f: np.ndarray) -> float:
    """Midpoint-rule integral over the domain."""
    grid.check(f)
    return float(np.sum(f)) * grid.cell_area


def grad_inner(grid: GridSpec, f: np.ndarray, g: np.ndarray) -> float:
    """Dirichlet form <grad f, grad g> built from face differences.

    Satisfies inner(laplacian(f), g) == -grad_inner(f, g) to roundoff, and
    grad_inner(f, f) >= 0.
    """
    grid.check(f, g)
    sx = np.dot(_face_diff_x(grid, f).ravel(), _face_diff_x(grid, g).ravel())
    sy = np.dot(_face_diff_y(grid, f).ravel(), _face_diff_y(grid, g).ravel())
    return float(sx) * grid.hy / grid.hx + float(sy) * grid.hx / grid.hy


def grad_norm_sq(grid: GridSpec, f: np.ndarray) -> float:
    return grad_inner(grid, f, f)
