"""Interaction potentials and the pairing field Delta.

The BdG Hamiltonian couples to the state through
Delta(k) = 2 (2pi)^{-d/2} (Vhat * alpha_hat)(k) = 2 (V alpha)^hat (k).
Three variants are supported:

  Contact1D        V(x) = -g delta(x) in 1D; Delta is the constant field
                   -(g/pi) * integral(alpha_hat).
  SeparableRankOne V = -|phi><phi| with a real radial form factor phi_hat;
                   Delta(k) = -2 phi_hat(k) <phi_hat, alpha_hat>.
  LocalRadial      radial tabulated Vhat; Delta is an N x N angular-averaged
                   kernel applied through the quadrature weights.

All three expose the same small surface: delta_from_alpha, the matrix of
K_T + V in the weight-symmetrized basis, and (when rank-one structured) the
effective form factor used by the fast evolve kernels.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline

from .grid import DIM_1D, DIM_3D, MomentumGrid
from .state import DomainError, dispersion, k_t


class Potential:
    """Base class; concrete variants implement the coupling geometry."""

    dimension: str

    def check_grid(self, grid: MomentumGrid) -> None:
        if grid.dimension != self.dimension:
            raise DomainError(
                f"{type(self).__name__} is {self.dimension} but grid is {grid.dimension}"
            )

    def delta_from_alpha(self, alpha, grid: MomentumGrid) -> np.ndarray:
        raise NotImplementedError

    def kt_plus_v_matrix(self, temperature: float, mu: float,
                         grid: MomentumGrid) -> np.ndarray:
        """Symmetric matrix of K_T + V in the basis u_i = sqrt(w_i) f(k_i)."""
        raise NotImplementedError

    def rank_one_form_factor(self, grid: MomentumGrid):
        """Form factor f with V = -|f><f| on the grid, or None."""
        return None


class SeparableRankOne(Potential):
    """V = -|phi><phi| with real square-integrable radial form factor."""

    dimension = DIM_3D

    def __init__(self, phi_hat: np.ndarray, gaussian_params: tuple[float, float] | None = None):
        self.phi_hat = np.asarray(phi_hat, dtype=float)
        self.gaussian_params = gaussian_params

    @classmethod
    def gaussian(cls, grid: MomentumGrid, amplitude: float, width: float = 1.0):
        phi = amplitude * np.exp(-grid.nodes**2 / (2.0 * width**2))
        return cls(phi, gaussian_params=(amplitude, width))

    def phi_at(self, k: float) -> float:
        if self.gaussian_params is not None:
            a, w = self.gaussian_params
            return a * np.exp(-k**2 / (2.0 * w**2))
        raise DomainError("pointwise form factor requires gaussian_params")

    def rank_one_form_factor(self, grid: MomentumGrid) -> np.ndarray:
        self.check_grid(grid)
        if self.phi_hat.shape != grid.nodes.shape:
            raise DomainError("form factor tabulated on a different grid")
        return self.phi_hat

    def delta_from_alpha(self, alpha, grid: MomentumGrid) -> np.ndarray:
        phi = self.rank_one_form_factor(grid)
        return -2.0 * phi * np.sum(grid.weights * phi * alpha)

    def kt_plus_v_matrix(self, temperature, mu, grid):
        phi = self.rank_one_form_factor(grid)
        q = np.sqrt(grid.weights) * phi
        m = np.diag(k_t(dispersion(grid, mu), temperature)) - np.outer(q, q)
        return m


class Contact1D(Potential):
    """V(x) = -g delta(x) in one dimension; rank one with constant form factor."""

    dimension = DIM_1D

    def __init__(self, g: float):
        if g <= 0:
            raise DomainError("contact coupling g must be positive")
        self.g = float(g)

    def rank_one_form_factor(self, grid: MomentumGrid) -> np.ndarray:
        self.check_grid(grid)
        return np.full(grid.n, np.sqrt(self.g / (2.0 * np.pi)))

    def delta_from_alpha(self, alpha, grid: MomentumGrid) -> np.ndarray:
        self.check_grid(grid)
        const = -self.g / np.pi * np.sum(grid.weights * alpha)
        return np.full(grid.n, const, dtype=complex)

    def kt_plus_v_matrix(self, temperature, mu, grid):
        f = self.rank_one_form_factor(grid)
        q = np.sqrt(grid.weights) * f
        return np.diag(k_t(dispersion(grid, mu), temperature)) - np.outer(q, q)


class LocalRadial(Potential):
    """Radial local potential given by a tabulated radial Vhat.

    The 3D convolution reduces to the angular average
      W(k, k') = 2 (2pi)^{-3/2} * (1/2) * int_{-1}^{1} Vhat(|k - k'|) du,
    precomputed once on the grid so Delta_i = sum_j W_ij w_j alpha_j.
    """

    dimension = DIM_3D

    def __init__(self, v_hat_func, grid: MomentumGrid, n_angle: int = 64):
        self.v_hat_func = v_hat_func
        self._grid_id = id(grid)
        self.kernel = self._build_kernel(v_hat_func, grid, n_angle)

    @staticmethod
    def _build_kernel(v_hat_func, grid: MomentumGrid, n_angle: int) -> np.ndarray:
        k = grid.nodes
        u, wu = leggauss(n_angle)
        # loop over angle nodes rather than forming the (N, N, n_angle) cube
        ki = k[:, None]
        kj = k[None, :]
        acc = np.zeros((k.size, k.size))
        for ui, wi in zip(u, wu):
            p = np.sqrt(np.maximum(ki**2 + kj**2 - 2.0 * ki * kj * ui, 0.0))
            acc += wi * v_hat_func(p)
        w_ang = 0.5 * acc
        kern = 2.0 * (2.0 * np.pi) ** (-1.5) * w_ang
        return 0.5 * (kern + kern.T)

    def check_kernel_grid(self, grid: MomentumGrid) -> None:
        self.check_grid(grid)
        if self.kernel.shape != (grid.n, grid.n):
            raise DomainError("LocalRadial kernel precomputed for a different grid")

    def delta_from_alpha(self, alpha, grid: MomentumGrid) -> np.ndarray:
        self.check_kernel_grid(grid)
        return self.kernel @ (grid.weights * np.asarray(alpha, dtype=complex))

    def kt_plus_v_matrix(self, temperature, mu, grid):
        self.check_kernel_grid(grid)
        sw = np.sqrt(grid.weights)
        # V acts as half the Delta kernel: (V alpha)^hat = Delta/2
        v = 0.5 * self.kernel * np.outer(sw, sw)
        return np.diag(k_t(dispersion(grid, mu), temperature)) + v


def load_tabulated(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column (k, value) text table; '#' starts a comment."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns (k, value)")
    k, v = data[:, 0], data[:, 1]
    if np.any(np.diff(k) <= 0):
        raise DomainError(f"{path}: k column must be strictly increasing")
    return k, v


def tabulated_interpolant(k: np.ndarray, v: np.ndarray):
    """Cubic interpolant of a radial table, zero outside the tabulated range."""
    spline = CubicSpline(k, v)
    k_lo, k_hi = k[0], k[-1]

    def f(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= k_lo) & (x <= k_hi)
        out = np.zeros_like(x)
        out[inside] = spline(x[inside])
        return out

    return f


def separable_from_table(path, grid: MomentumGrid) -> SeparableRankOne:
    k, v = load_tabulated(path)
    phi = tabulated_interpolant(k, v)(grid.nodes)
    return SeparableRankOne(phi)


def local_radial_from_table(path, grid: MomentumGrid) -> LocalRadial:
    k, v = load_tabulated(path)
    return LocalRadial(tabulated_interpolant(k, v), grid)
