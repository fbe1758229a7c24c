"""Diagnostics extracted from evolving states: the order parameter psi,
the (xi, eta) decomposition around the normal state, the conserved field
s(k), Fermi-shell masses, and the residuals of the pointwise conservation
identity and of its cubic reduction away from the Fermi sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .grid import MomentumGrid
from .state import BdGState, DomainError, dispersion, normal_state, pressure_difference


def psi_of(state: BdGState, reference, h: float) -> complex:
    """Order parameter psi = h^{-1} <alpha_*, alpha> (alpha_* is real)."""
    if h <= 0:
        raise DomainError("h must be positive")
    return complex(state.grid.inner(reference.alpha_star, state.alpha) / h)


def decompose(state: BdGState, reference, h: float, temperature: float):
    """Split alpha = h psi alpha_* + xi and gamma = gamma_n + eta.

    xi is orthogonal to alpha_* in the weighted inner product by
    construction; the reconstruction is exact.
    """
    psi = psi_of(state, reference, h)
    xi = state.alpha - h * psi * reference.alpha_star
    gamma_n = normal_state(temperature, reference.mu, state.grid).gamma
    eta = state.gamma - gamma_n
    return psi, xi, eta


def s_field(state: BdGState) -> np.ndarray:
    return state.s()


def eq10_residual(state_t: BdGState, state_0: BdGState, temperature: float,
                  mu: float) -> float:
    """Max pointwise defect of the conservation identity

    eta_t^2 - eta_0^2 - (eta_t - eta_0) tanh(eps/2T) + |alpha_t|^2 - |alpha_0|^2 = 0,

    which is algebraically equivalent to s_t(k) = s_0(k).
    """
    grid = state_t.grid
    if grid is not state_0.grid and grid.n != state_0.grid.n:
        raise DomainError("states live on different grids")
    eps = dispersion(grid, mu)
    th = np.tanh(eps / (2.0 * temperature))
    gamma_n = 0.5 * (1.0 - th)
    eta_t = state_t.gamma - gamma_n
    eta_0 = state_0.gamma - gamma_n
    defect = (eta_t**2 - eta_0**2 - (eta_t - eta_0) * th
              + np.abs(state_t.alpha) ** 2 - np.abs(state_0.alpha) ** 2)
    return float(np.max(np.abs(defect)))


def shell_mask(grid: MomentumGrid, delta: float, mu: float) -> np.ndarray:
    return np.abs(np.abs(grid.nodes) - np.sqrt(mu)) <= delta


def fermi_shell_mass(field, delta: float, mu: float, grid: MomentumGrid) -> float:
    """Integral of |field|^2 over the shell | |k| - sqrt(mu) | <= delta."""
    if not 0 < delta < np.sqrt(mu):
        raise DomainError("shell half-width must lie in (0, sqrt(mu))")
    mask = shell_mask(grid, delta, mu)
    if np.count_nonzero(mask) < 8:
        raise DomainError(
            f"shell of half-width {delta:g} contains fewer than 8 grid nodes"
        )
    f = np.asarray(field)
    return float(np.sum(grid.weights[mask] * np.abs(f[mask]) ** 2))


def eta_cubic_residual(state_t: BdGState, state_0: BdGState, temperature: float,
                       mu: float, exclusion: float):
    """Defect of the cubic reduction eta_t - eta_0 ~ (|a_t|^2 - |a_0|^2)/tanh.

    Returns (max defect outside the exclusion shell, max |eta_t - eta_0|
    inside it); the inside magnitude is the quantity the reduction cannot
    control because the tanh denominator vanishes on the Fermi sphere.
    """
    if exclusion <= 0:
        raise DomainError("exclusion shell half-width must be positive")
    grid = state_t.grid
    eps = dispersion(grid, mu)
    th = np.tanh(eps / (2.0 * temperature))
    gamma_n = 0.5 * (1.0 - th)
    deta = state_t.gamma - state_0.gamma  # eta_t - eta_0; gamma_n cancels
    dal = np.abs(state_t.alpha) ** 2 - np.abs(state_0.alpha) ** 2
    inside = shell_mask(grid, exclusion, mu)
    outside = ~inside
    resid_out = np.abs(deta[outside] - dal[outside] / th[outside])
    max_out = float(np.max(resid_out)) if resid_out.size else 0.0
    max_in = float(np.max(np.abs(deta[inside]))) if inside.any() else 0.0
    return max_out, max_in


CSV_COLUMNS = (
    "t", "psi_re", "psi_im", "abs_psi_sq", "pressure_drift", "s_drift",
    "xi_norm", "eta_norm", "delta_norm", "eq10_residual", "admissibility_margin",
)


@dataclass
class ObservablesRecord:
    t: float
    psi: complex
    abs_psi_sq: float
    pressure_drift: float
    s_drift: float
    xi_norm: float
    eta_norm: float
    delta_norm: float
    eq10_residual: float
    admissibility_margin: float

    def row(self) -> tuple:
        return (self.t, self.psi.real, self.psi.imag, self.abs_psi_sq,
                self.pressure_drift, self.s_drift, self.xi_norm, self.eta_norm,
                self.delta_norm, self.eq10_residual, self.admissibility_margin)


class ObservablesCollector:
    """Observer for evolve runs; builds one ObservablesRecord per sample."""

    def __init__(self, reference, h: float, temperature: float, potential,
                 state0: BdGState):
        self.reference = reference
        self.h = h
        self.temperature = temperature
        self.potential = potential
        self.mu = reference.mu
        self.state0 = state0.copy()
        self.s0 = state0.s()
        self.pressure0 = pressure_difference(state0, temperature, self.mu, potential)
        self.records: list[ObservablesRecord] = []

    def __call__(self, t: float, state: BdGState) -> None:
        psi, xi, eta = decompose(state, self.reference, self.h, self.temperature)
        grid = state.grid
        delta = self.potential.delta_from_alpha(state.alpha, grid)
        pressure = pressure_difference(state, self.temperature, self.mu, self.potential)
        self.records.append(ObservablesRecord(
            t=t,
            psi=psi,
            abs_psi_sq=abs(psi) ** 2,
            pressure_drift=pressure - self.pressure0,
            s_drift=float(np.max(np.abs(state.s() - self.s0))),
            xi_norm=grid.norm(xi),
            eta_norm=grid.norm(eta),
            delta_norm=grid.norm(delta),
            eq10_residual=eq10_residual(state, self.state0, self.temperature, self.mu),
            admissibility_margin=state.admissibility_margin(),
        ))

    def max_abs_psi_sq_deviation(self) -> float:
        base = self.records[0].abs_psi_sq if self.records else 0.0
        return max((abs(r.abs_psi_sq - base) for r in self.records), default=0.0)
