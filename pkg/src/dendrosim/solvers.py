"""Fast elliptic solvers for (a*I - b*Laplacian) u = rhs with Neumann walls.

The constant-coefficient solve diagonalizes the compact Neumann Laplacian
in the DCT-II cosine basis, which is exact up to roundoff.  The variable
coefficient solve (c(x)*I - b*Laplacian) runs conjugate gradients
preconditioned with the constant solve at mean(c): the coefficients that
arise in the time steppers vary mildly about their mean, so the
preconditioned spectrum is tightly clustered.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.fft import dctn, idctn

from .grid import GridSpec, laplacian

__all__ = ["SolverError", "helmholtz_solve", "variable_helmholtz_solve", "solve_shifted"]


class SolverError(RuntimeError):
    """Iterative solve failed to reach tolerance; carries the final residual."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@lru_cache(maxsize=32)
def _neumann_eigenvalues(nx: int, ny: int, hx: float, hy: float) -> np.ndarray:
    lx = -(2.0 / hx**2) * (1.0 - np.cos(np.pi * np.arange(nx) / nx))
    ly = -(2.0 / hy**2) * (1.0 - np.cos(np.pi * np.arange(ny) / ny))
    return lx[:, None] + ly[None, :]


def helmholtz_solve(grid: GridSpec, a: float, b: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (a*I - b*Laplacian) u = rhs exactly via 2D cosine transforms.

    Requires a > 0 (keeps the constant mode invertible) and b >= 0.
    """
    grid.check(rhs)
    if not a > 0.0:
        raise ValueError(f"helmholtz_solve needs a > 0, got a={a}")
    if b < 0.0:
        raise ValueError(f"helmholtz_solve needs b >= 0, got b={b}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("helmholtz_solve: rhs contains non-finite values")
    if b == 0.0:
        return rhs / a
    lam = _neumann_eigenvalues(grid.nx, grid.ny, grid.hx, grid.hy)
    coef = dctn(rhs, type=2, norm="ortho")
    coef /= a - b * lam
    return idctn(coef, type=2, norm="ortho")


def variable_helmholtz_solve(
    grid: GridSpec,
    c: np.ndarray,
    b: float,
    rhs: np.ndarray,
    tol: float = 1e-10,
    maxit: int = 500,
) -> tuple[np.ndarray, int]:
    """Solve (c(x)*I - b*Laplacian) u = rhs by preconditioned CG.

    Returns (u, iterations).  Converged when ||residual|| <= tol * ||rhs||;
    raises SolverError past maxit.  Requires min(c) > 0 and b >= 0.
    """
    grid.check(c, rhs)
    if not np.all(c > 0.0):
        raise ValueError("variable_helmholtz_solve needs c > 0 everywhere")
    if b < 0.0:
        raise ValueError(f"variable_helmholtz_solve needs b >= 0, got b={b}")
    if not np.all(np.isfinite(rhs)):
        raise ValueError("variable_helmholtz_solve: rhs contains non-finite values")

    c_mean = float(np.mean(c))

    def apply_op(u: np.ndarray) -> np.ndarray:
        return c * u - b * laplacian(grid, u)

    def precondition(r: np.ndarray) -> np.ndarray:
        return helmholtz_solve(grid, c_mean, b, r)

    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs), 0

    x = np.zeros_like(rhs)
    r = rhs.copy()
    z = precondition(r)
    p = z.copy()
    rz = float(np.vdot(r, z))
    res = rhs_norm
    for it in range(1, maxit + 1):
        ap = apply_op(p)
        alpha = rz / float(np.vdot(p, ap))
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r))
        if res <= tol * rhs_norm:
            return x, it
        z = precondition(r)
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"PCG did not reach tol={tol} in {maxit} iterations "
        f"(relative residual {res / rhs_norm:.3e})",
        residual=res / rhs_norm,
        iterations=maxit,
    )


def solve_shifted(
    grid: GridSpec,
    coeff: float | np.ndarray,
    b: float,
    rhs: np.ndarray,
    tol: float = 1e-10,
    maxit: int = 500,
) -> tuple[np.ndarray, int]:
    """Solve (coeff*I - b*Laplacian) u = rhs; coeff may be a scalar or a field.

    Scalar coefficients take the exact cosine-transform path (0 iterations),
    fields go through preconditioned CG.
    """
    if np.isscalar(coeff):
        return helmholtz_solve(grid, float(coeff), b, rhs), 0
    return variable_helmholtz_solve(grid, np.asarray(coeff), b, rhs, tol, maxit)
