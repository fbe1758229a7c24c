"""BCS/BdG states on a momentum grid and the pressure functional.

A state is the pair (gamma(k), alpha_hat(k)) with gamma the momentum
distribution and alpha_hat the pair density; together they determine the
2x2 matrix

    Gamma(k) = [[gamma(k), alpha_hat(k)], [conj(alpha_hat(k)), 1 - gamma(k)]]

(we restrict throughout to even gamma and radial/even fields).  Admissibility
0 <= Gamma <= 1 is equivalent to s(k)^2 = (gamma - 1/2)^2 + |alpha_hat|^2
being at most 1/4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import MomentumGrid

# Slack allowed on the admissibility margin 1/4 - s^2; perturbed normal
# states sit within rounding of the boundary in the far momentum tail.
ADMISSIBILITY_TOL = 1e-12

_LOG_CLAMP = 1e-30


class DomainError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    pass


def k_t(eps, temperature):
    """Dispersion-over-tanh kernel (k^2 - mu)/tanh((k^2 - mu)/2T).

    The singularity at eps = 0 is removable with value 2T; the result is
    >= 2T everywhere.  Scalar or array eps.
    """
    if temperature <= 0:
        raise DomainError("k_t requires T > 0 (zero-temperature branch not supported)")
    eps = np.asarray(eps, dtype=float)
    x = eps / (2.0 * temperature)
    out = np.where(np.abs(x) < 1e-8, 2.0 * temperature * (1.0 + x * x / 3.0),
                   eps / np.tanh(np.where(np.abs(x) < 1e-8, 1.0, x)))
    if out.ndim == 0:
        return float(out)
    return out


def dispersion(grid: MomentumGrid, mu: float):
    return grid.nodes**2 - mu


@dataclass
class BdGState:
    gamma: np.ndarray
    alpha: np.ndarray
    grid: MomentumGrid

    def copy(self) -> "BdGState":
        return BdGState(self.gamma.copy(), self.alpha.copy(), self.grid)

    def s(self) -> np.ndarray:
        """Conserved spectral field s(k) = sqrt((gamma-1/2)^2 + |alpha|^2)."""
        return np.sqrt((self.gamma - 0.5) ** 2 + np.abs(self.alpha) ** 2)

    def admissibility_margin(self) -> float:
        """min over k of 1/4 - s(k)^2; admissible states have margin >= 0."""
        s2 = (self.gamma - 0.5) ** 2 + np.abs(self.alpha) ** 2
        return float(np.min(0.25 - s2))

    def validate(self, tol: float = ADMISSIBILITY_TOL) -> None:
        if np.any(self.gamma < -tol) or np.any(self.gamma > 1.0 + tol):
            raise InvariantViolation("gamma out of [0, 1]")
        if self.admissibility_margin() < -tol:
            raise InvariantViolation(
                f"state inadmissible: margin {self.admissibility_margin():.3e}"
            )


def gibbs_state(delta, temperature: float, mu: float, grid: MomentumGrid) -> BdGState:
    """Gibbs state of the quasi-free Hamiltonian with pairing field delta.

    gamma = 1/2 - (eps/2E) tanh(E/2T), alpha = -(delta/2E) tanh(E/2T) with
    E = sqrt(eps^2 + |delta|^2); saturates s = (1/2) tanh(E/2T) pointwise.
    """
    if temperature <= 0:
        raise DomainError("gibbs_state requires T > 0")
    delta = np.asarray(delta, dtype=complex)
    if delta.shape != grid.nodes.shape:
        delta = np.broadcast_to(delta, grid.nodes.shape)
    eps = dispersion(grid, mu)
    e = np.sqrt(eps**2 + np.abs(delta) ** 2)
    # tanh(E/2T)/(2E), with the E -> 0 limit 1/(4T)
    x = e / (2.0 * temperature)
    small = x < 1e-8
    ratio = np.where(small, (1.0 - x * x / 3.0) / (4.0 * temperature),
                     np.tanh(x) / np.where(small, 1.0, 2.0 * e))
    gamma = 0.5 - eps * ratio
    alpha = -delta * ratio
    return BdGState(gamma, alpha, grid)


def normal_state(temperature: float, mu: float, grid: MomentumGrid) -> BdGState:
    """Pairing-free Fermi-Dirac state: gamma = 1/(1 + exp(eps/T)), alpha = 0."""
    return gibbs_state(np.zeros(grid.n, dtype=complex), temperature, mu, grid)


def _entropy_density(s: np.ndarray) -> np.ndarray:
    """Per-k entropy -[(1/2+s)ln(1/2+s) + (1/2-s)ln(1/2-s)] of Gamma(k)."""
    up = np.clip(0.5 + s, _LOG_CLAMP, 1.0)
    dn = np.clip(0.5 - s, _LOG_CLAMP, 1.0)
    return -(up * np.log(up) + dn * np.log(dn))


def pressure_difference(state: BdGState, temperature: float, mu: float,
                        potential) -> float:
    """Free-energy difference F(Gamma) - F(Gamma_n) against the normal state.

    Computed as one integral of pointwise differences (kinetic and entropy
    densities differenced per node before quadrature) plus the interaction
    energy (1/2) Re <alpha, Delta>; never as a difference of two large
    functionals.
    """
    if state.admissibility_margin() < -1e-8:
        raise InvariantViolation("pressure_difference: state inadmissible")
    grid = state.grid
    eps = dispersion(grid, mu)
    gamma_n = 1.0 / (1.0 + np.exp(np.clip(eps / temperature, -700, 700)))
    s_n = 0.5 * np.abs(np.tanh(eps / (2.0 * temperature)))
    s = np.clip(state.s(), 0.0, 0.5)

    kinetic = eps * (state.gamma - gamma_n)
    entropy = _entropy_density(s) - _entropy_density(s_n)
    delta = potential.delta_from_alpha(state.alpha, grid)
    interaction = 0.5 * np.real(grid.inner(state.alpha, delta))
    return float(grid.integrate(kinetic - temperature * entropy).real + interaction)
