"""Momentum grids: composite Gauss-Legendre quadrature over |k| (3D radial)
or signed k (1D), with panels clustered at the Fermi momentum sqrt(mu).

The weights carry the full integration measure (4*pi*k^2*dk radially, dk in
1D), so every integral in the package is a plain weighted sum over nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

DIM_3D = "3d-radial"
DIM_1D = "1d"

# Relative accuracy the composite rule is trusted to on smooth fields; grid
# refinement tests compare against this.
QUADRATURE_TOL = 1e-9

# Innermost panel width at the Fermi surface, in units of sqrt(mu).  The
# linearized dynamics dephases into a quasi-continuum whose level spacing
# near the Fermi surface is ~ 4*sqrt(mu)*dk, so the panels refine
# geometrically down to this scale.
_W_MIN_REL = 2e-3
_PANELS_LEFT = 28   # panels on (0, kF]
_PANELS_RIGHT = 36  # panels on [kF, k_max]


class GridError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    dimension: str
    nodes: np.ndarray
    weights: np.ndarray
    k_max: float
    mu: float
    panel_edges: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.dimension not in (DIM_3D, DIM_1D):
            raise GridError(f"unknown dimension {self.dimension!r}")
        if np.any(self.weights <= 0):
            raise GridError("quadrature weights must be strictly positive")
        if np.any(np.diff(self.nodes) <= 0):
            raise GridError("nodes must be strictly increasing")
        if self.dimension == DIM_3D and self.nodes[0] <= 0:
            raise GridError("3d-radial nodes must be strictly positive")

    @property
    def n(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> complex:
        return np.sum(self.weights * values)

    def inner(self, a, b) -> complex:
        """Weighted inner product <a, b> = integral of conj(a)*b."""
        return np.sum(self.weights * np.conj(a) * b)

    def norm(self, a) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(a) ** 2).real))

    def refined(self, factor: int = 2) -> "MomentumGrid":
        """Same panel layout with `factor` times as many nodes per panel."""
        if self.dimension == DIM_3D:
            return radial_grid(self.mu, k_max=self.k_max, n=self.n * factor)
        return line_grid(self.mu, k_max=self.k_max, n=self.n * factor)


def _geometric_widths(total: float, w0: float, m: int) -> np.ndarray:
    """m panel widths, geometric from w0, summing exactly to total."""
    if m * w0 >= total:
        return np.full(m, total / m)

    def gap(r):
        return w0 * (r**m - 1.0) / (r - 1.0) - total

    r = brentq(gap, 1.0 + 1e-12, 8.0, xtol=1e-15)
    widths = w0 * r ** np.arange(m)
    return widths * (total / widths.sum())


def _panel_edges(mu: float, k_max: float) -> np.ndarray:
    """Panel boundaries on (0, k_max] refining geometrically toward sqrt(mu)."""
    kf = np.sqrt(mu)
    if k_max <= kf:
        raise GridError("k_max must exceed the Fermi momentum sqrt(mu)")
    w0 = _W_MIN_REL * kf
    widths_l = _geometric_widths(kf, w0, _PANELS_LEFT)
    widths_r = _geometric_widths(k_max - kf, w0, _PANELS_RIGHT)
    edges = np.concatenate(
        [
            kf - np.cumsum(widths_l)[::-1],
            [kf],
            kf + np.cumsum(widths_r),
        ]
    )
    edges[0] = 0.0
    edges[-1] = k_max
    return edges


def _composite_gauss(edges: np.ndarray, n: int):
    n_panels = len(edges) - 1
    per, rem = divmod(n, n_panels)
    if per < 2:
        raise GridError(f"need at least {2 * n_panels} nodes for {n_panels} panels")
    x0, w0 = leggauss(per)
    nodes, weights = [], []
    for i in range(n_panels):
        a, b = edges[i], edges[i + 1]
        # spill the remainder into the outermost (widest) panel
        if rem and i == n_panels - 1:
            x0, w0 = leggauss(per + rem)
        nodes.append(0.5 * (b - a) * x0 + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w0)
    return np.concatenate(nodes), np.concatenate(weights)


def radial_grid(mu: float, k_max: float | None = None, n: int = 2048) -> MomentumGrid:
    """3D radial grid on (0, k_max]; weights include the 4*pi*k^2 measure."""
    if mu <= 0:
        raise GridError("mu must be positive")
    if k_max is None:
        k_max = 6.0 * np.sqrt(mu)
    edges = _panel_edges(mu, k_max)
    k, w = _composite_gauss(edges, n)
    return MomentumGrid(DIM_3D, k, 4.0 * np.pi * k**2 * w, float(k_max), float(mu), edges)


def line_grid(mu: float, k_max: float | None = None, n: int = 4096) -> MomentumGrid:
    """1D grid on [-k_max, k_max], symmetric about 0, clustered at +-sqrt(mu)."""
    if mu <= 0:
        raise GridError("mu must be positive")
    if k_max is None:
        k_max = 6.0 * np.sqrt(mu)
    if n % 2:
        raise GridError("1d grid size must be even")
    edges = _panel_edges(mu, k_max)
    k, w = _composite_gauss(edges, n // 2)
    nodes = np.concatenate([-k[::-1], k])
    weights = np.concatenate([w[::-1], w])
    full_edges = np.concatenate([-edges[::-1], edges[1:]])
    return MomentumGrid(DIM_1D, nodes, weights, float(k_max), float(mu), full_edges)


def make_grid(dimension: str, mu: float, k_max: float | None = None,
              n: int | None = None) -> MomentumGrid:
    if dimension == DIM_3D:
        return radial_grid(mu, k_max, 2048 if n is None else n)
    if dimension == DIM_1D:
        return line_grid(mu, k_max, 4096 if n is None else n)
    raise GridError(f"unknown dimension {dimension!r}")
