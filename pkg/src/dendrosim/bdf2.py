"""Second-order decoupled, unconditionally energy-stable time stepper.

Same four-solves-plus-scalar structure as the first-order scheme, with
backward-difference-2 time derivatives and all explicit data taken at the
linear extrapolations 2*(.)^n - (.)^{n-1}.  The first level is produced by
one first-order bootstrap step, which costs O(tau^2) globally and leaves
the second-order convergence intact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bdf1
from .bdf1 import StepReport
from .grid import GridSpec, grad_norm_sq, inner, laplacian, norm_sq
from .model import (
    NO_SOURCES,
    ModelParams,
    SourceTerms,
    e1_energy,
    g_residual,
    h_prime,
)
from .solvers import helmholtz_solve, solve_shifted

__all__ = [
    "StateBDF2",
    "bootstrap",
    "step2",
    "scheme_energy2",
    "energy_identity_residual2",
    "identity_proof_lines2",
]


@dataclass
class StateBDF2:
    """Two time levels of (phi, T, mu, R); ``prev`` fields hold level n-1."""

    phi: np.ndarray
    phi_prev: np.ndarray
    temp: np.ndarray
    temp_prev: np.ndarray
    mu: np.ndarray
    mu_prev: np.ndarray
    r: float
    r_prev: float
    t: float
    n: int


def bootstrap(
    grid: GridSpec,
    phi0: np.ndarray,
    temp0: np.ndarray,
    tau: float,
    p: ModelParams,
    sources: SourceTerms = NO_SOURCES,
    check_identity: bool = False,
    cg_tol: float = 1e-10,
    cg_maxit: int = 500,
    initial: "bdf1.StateBDF1 | None" = None,
) -> tuple[StateBDF2, StepReport]:
    """Fill both levels: level 0 from the inputs, level 1 from one
    first-order step.  ``initial`` reuses an already-built level-0 state."""
    s0 = initial if initial is not None else bdf1.init_state(grid, phi0, temp0, p)
    s1, report = bdf1.step(grid, s0, tau, p, sources, check_identity, cg_tol, cg_maxit)
    state = StateBDF2(
        phi=s1.phi, phi_prev=s0.phi,
        temp=s1.temp, temp_prev=s0.temp,
        mu=s1.mu, mu_prev=s0.mu,
        r=s1.r, r_prev=s0.r,
        t=s1.t, n=1,
    )
    return state, report


def step2(
    grid: GridSpec,
    state: StateBDF2,
    tau: float,
    p: ModelParams,
    sources: SourceTerms = NO_SOURCES,
    check_identity: bool = False,
    cg_tol: float = 1e-10,
    cg_maxit: int = 500,
) -> tuple[StateBDF2, StepReport]:
    """Advance one time level with the second-order scheme."""
    if not tau > 0.0:
        raise ValueError("tau must be positive")
    t_new = state.t + tau
    phi_bar = 2.0 * state.phi - state.phi_prev
    temp_bar = 2.0 * state.temp - state.temp_prev
    mu_bar = 2.0 * state.mu - state.mu_prev

    rho_bar = p.mobility.rho_at(phi_bar)
    g_bar = g_residual(grid, phi_bar, p)
    hp_bar = h_prime(phi_bar)
    try:
        e1_bar = e1_energy(grid, phi_bar, p)
    except ValueError as exc:
        raise type(exc)(
            f"{exc} (extrapolated field at t={t_new:g}; a larger bconst or a "
            "smaller tau tames the extrapolation overshoot)"
        ) from exc

    b = p.s1 + p.s4
    coeff = 1.5 * rho_bar / tau + (p.s2 + p.s3) / p.eps**2

    rhs1 = (
        (4.0 * state.phi - state.phi_prev) * (rho_bar / (2.0 * tau))
        + (p.s3 / p.eps**2) * phi_bar
        - p.s4 * laplacian(grid, phi_bar)
    )
    s_phi = sources.phi_at(grid, t_new)
    if s_phi is not None:
        rhs1 = rhs1 + rho_bar * s_phi
    phi1, it1 = solve_shifted(grid, coeff, b, rhs1, cg_tol, cg_maxit)
    mu1 = p.s1 * laplacian(grid, phi1) - (p.s2 / p.eps**2) * phi1

    core2 = -(g_bar + (p.lam / p.eps) * hp_bar * temp_bar)
    phi2, it2 = solve_shifted(grid, coeff, b, core2, cg_tol, cg_maxit)
    mu2 = core2 + p.s1 * laplacian(grid, phi2) - (p.s2 / p.eps**2) * phi2

    rhs_t1 = (4.0 * state.temp - state.temp_prev) / (2.0 * tau)
    s_temp = sources.temp_at(grid, t_new)
    if s_temp is not None:
        rhs_t1 = rhs_t1 + s_temp
    temp1 = helmholtz_solve(grid, 1.5 / tau, p.diff, rhs_t1)
    temp2 = helmholtz_solve(grid, 1.5 / tau, p.diff, p.latent * hp_bar / rho_bar * mu_bar)

    lam_ek = p.lam / (p.eps * p.latent)
    a1 = math.fsum(
        [
            3.0 * e1_bar,
            1.5 * inner(grid, coeff * phi2, phi2),
            1.5 * (p.s1 + p.s4) * grad_norm_sq(grid, phi2),
            1.5 * lam_ek * norm_sq(grid, temp2),
            lam_ek * tau * p.diff * grad_norm_sq(grid, temp2),
        ]
    )
    a2 = math.fsum(
        [
            math.sqrt(e1_bar) * (4.0 * state.r - state.r_prev),
            -0.5 * inner(grid, core2, 3.0 * phi1 - 4.0 * state.phi + state.phi_prev),
            lam_ek * inner(
                grid,
                -1.5 * temp2 + tau * p.diff * laplacian(grid, temp2),
                temp1,
            ),
        ]
    )
    if not a1 > 0.0:
        raise FloatingPointError(
            f"closure denominator A1={a1} is not positive; this violates a "
            "structural invariant of the scheme"
        )
    xi = a2 / a1

    new = StateBDF2(
        phi=phi1 + xi * phi2,
        phi_prev=state.phi,
        temp=temp1 + xi * temp2,
        temp_prev=state.temp,
        mu=mu1 + xi * mu2,
        mu_prev=state.mu,
        r=xi * math.sqrt(e1_bar),
        r_prev=state.r,
        t=t_new,
        n=state.n + 1,
    )
    report = StepReport(xi=xi, a1=a1, a2=a2, cg_iterations=it1 + it2)
    if check_identity:
        report.identity_residual = energy_identity_residual2(grid, p, tau, state, new)
    return new, report


def scheme_energy2(grid: GridSpec, p: ModelParams, state: StateBDF2) -> float:
    """Modified energy of the second-order discrete energy law (two levels)."""
    lead_phi = 2.0 * state.phi - state.phi_prev
    lead_temp = 2.0 * state.temp - state.temp_prev
    dphi = state.phi - state.phi_prev
    return 0.25 * math.fsum(
        [
            p.s1 * (grad_norm_sq(grid, state.phi) + grad_norm_sq(grid, lead_phi)),
            p.s2 / p.eps**2 * (norm_sq(grid, state.phi) + norm_sq(grid, lead_phi)),
            2.0 * p.s3 / p.eps**2 * norm_sq(grid, dphi),
            2.0 * p.s4 * grad_norm_sq(grid, dphi),
            p.lam / (p.eps * p.latent)
            * (norm_sq(grid, state.temp) + norm_sq(grid, lead_temp)),
            2.0 * (state.r**2 + (2.0 * state.r - state.r_prev) ** 2),
        ]
    )


def identity_proof_lines2(
    grid: GridSpec,
    p: ModelParams,
    tau: float,
    before: StateBDF2,
    after: StateBDF2,
) -> tuple[float, float, float]:
    """The three inner-product identities behind the second-order energy law,
    recomputed from two consecutive states (after.prev must be before's level)."""
    phi_bar = 2.0 * before.phi - before.phi_prev
    temp_bar = 2.0 * before.temp - before.temp_prev
    mu_bar = 2.0 * before.mu - before.mu_prev
    rho_bar = p.mobility.rho_at(phi_bar)
    g_bar = g_residual(grid, phi_bar, p)
    hp_bar = h_prime(phi_bar)
    e1_bar = e1_energy(grid, phi_bar, p)
    xi = after.r / math.sqrt(e1_bar)
    lam_e = p.lam / p.eps
    lam_ek = p.lam / (p.eps * p.latent)

    bdf_phi = 3.0 * after.phi - 4.0 * before.phi + before.phi_prev
    curv_phi = after.phi - 2.0 * before.phi + before.phi_prev
    d_new = after.phi - before.phi
    d_old = before.phi - before.phi_prev
    lead_new = 2.0 * after.phi - before.phi
    lead_old = 2.0 * before.phi - before.phi_prev
    hm_mubar = hp_bar / rho_bar * mu_bar

    line1 = math.fsum(
        [
            (1.0 / tau) * inner(grid, rho_bar * bdf_phi, bdf_phi),
            (2.0 * p.s3 / p.eps**2)
            * (norm_sq(grid, d_new) - norm_sq(grid, d_old) + 2.0 * norm_sq(grid, curv_phi)),
            2.0 * p.s4
            * (grad_norm_sq(grid, d_new) - grad_norm_sq(grid, d_old)
               + 2.0 * grad_norm_sq(grid, curv_phi)),
            p.s1
            * (grad_norm_sq(grid, after.phi) + grad_norm_sq(grid, lead_new)
               - grad_norm_sq(grid, before.phi) - grad_norm_sq(grid, lead_old)
               + grad_norm_sq(grid, curv_phi)),
            (p.s2 / p.eps**2)
            * (norm_sq(grid, after.phi) + norm_sq(grid, lead_new)
               - norm_sq(grid, before.phi) - norm_sq(grid, lead_old)
               + norm_sq(grid, curv_phi)),
            2.0 * xi * inner(grid, g_bar, bdf_phi),
            2.0 * xi * lam_e * inner(grid, hp_bar * temp_bar, bdf_phi),
        ]
    )
    line2 = math.fsum(
        [
            2.0
            * (
                after.r**2
                + (2.0 * after.r - before.r) ** 2
                - before.r**2
                - (2.0 * before.r - before.r_prev) ** 2
                + (after.r - 2.0 * before.r + before.r_prev) ** 2
            ),
            -2.0 * xi * inner(grid, g_bar, bdf_phi),
            4.0 * tau * xi * lam_e * inner(grid, hm_mubar, after.temp),
            -2.0 * xi * lam_e * inner(grid, hp_bar * temp_bar, bdf_phi),
        ]
    )
    lead_t_new = 2.0 * after.temp - before.temp
    lead_t_old = 2.0 * before.temp - before.temp_prev
    curv_t = after.temp - 2.0 * before.temp + before.temp_prev
    line3 = math.fsum(
        [
            lam_ek
            * (norm_sq(grid, after.temp) + norm_sq(grid, lead_t_new)
               - norm_sq(grid, before.temp) - norm_sq(grid, lead_t_old)
               + norm_sq(grid, curv_t)),
            4.0 * tau * lam_ek * p.diff * grad_norm_sq(grid, after.temp),
            -4.0 * tau * xi * lam_e * inner(grid, hm_mubar, after.temp),
        ]
    )
    return line1, line2, line3


def energy_identity_residual2(
    grid: GridSpec,
    p: ModelParams,
    tau: float,
    before: StateBDF2,
    after: StateBDF2,
) -> float:
    """Energy-law balance of one second-order step, relative to |E^n|."""
    lines = identity_proof_lines2(grid, p, tau, before, after)
    return abs(math.fsum(lines)) / (4.0 * abs(scheme_energy2(grid, p, before)))
