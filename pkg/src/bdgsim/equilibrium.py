"""Critical temperature, the gap eigenfunction, and BCS equilibria.

T_c is the temperature at which the operator K_T + V first has lowest
eigenvalue zero.  For rank-one potentials the discretized operator is a
diagonal-minus-rank-one matrix, so its extreme eigenvalues come from the
secular equation sum_i q_i^2/(D_i - lambda) = 1 at O(N) cost; generic
potentials fall back to dense symmetric eigensolves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.linalg import eigh
from scipy.optimize import brentq

from .grid import MomentumGrid
from .potential import Potential, SeparableRankOne
from .state import (BdGState, DomainError, dispersion, gibbs_state, k_t,
                    normal_state)

EIGEN_TOL = 1e-10


class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def assemble_kt_plus_v(temperature: float, mu: float, potential: Potential,
                       grid: MomentumGrid) -> np.ndarray:
    """N x N symmetric matrix of K_T + V in the weight-symmetrized basis."""
    if temperature <= 0:
        raise DomainError("assemble_kt_plus_v requires T > 0")
    return potential.kt_plus_v_matrix(temperature, mu, grid)


def _secular_lowest(d: np.ndarray, q: np.ndarray) -> float:
    """Lowest eigenvalue of diag(d) - q q^T (always below min(d) for q != 0)."""
    d_min = float(np.min(d))
    qq = float(q @ q)

    def f(lam):
        return 1.0 - np.sum(q * q / (d - lam))

    lo = d_min - qq - 1.0
    hi = d_min - 1e-300
    # approach the pole until the secular function changes sign
    gap = 0.5 * (d_min - lo)
    while f(d_min - gap) > 0.0:
        gap *= 0.5
        if gap < 1e-15 * max(1.0, abs(d_min)):
            return d_min  # coupling too weak to split an eigenvalue off
    hi = d_min - gap
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16)


def _secular_second(d: np.ndarray, q: np.ndarray) -> float:
    """Second eigenvalue of diag(d) - q q^T, in (d_(1), d_(2))."""
    ds = np.sort(d)
    a, b = ds[0], ds[1]
    if b - a < 1e-13 * max(1.0, b):
        return float(a)

    def f(lam):
        return 1.0 - np.sum(q * q / (d - lam))

    shift = 1e-12 * (b - a)
    try:
        return brentq(f, a + shift, b - shift, xtol=1e-14)
    except ValueError:
        return float(a)


def _rank_one_data(potential: Potential, temperature, mu, grid):
    phi = potential.rank_one_form_factor(grid)
    d = k_t(dispersion(grid, mu), temperature)
    q = np.sqrt(grid.weights) * phi
    return d, q


def lowest_eigenpair(temperature: float, mu: float, potential: Potential,
                     grid: MomentumGrid):
    """(lowest eigenvalue, eigenvector field) of K_T + V.

    The eigenvector is returned as a field on the grid, normalized to 1 in
    the weighted norm, sign-fixed so its overlap with the potential's form
    factor (or with a positive probe) is positive.
    """
    if potential.rank_one_form_factor(grid) is not None:
        d, q = _rank_one_data(potential, temperature, mu, grid)
        lam = _secular_lowest(d, q)
        v = q / (d - lam)
        v /= np.linalg.norm(v)
        probe = q
    else:
        m = assemble_kt_plus_v(temperature, mu, potential, grid)
        w, vecs = eigh(m, subset_by_index=[0, 0])
        lam, v = float(w[0]), vecs[:, 0]
        probe = np.sqrt(grid.weights)
    if probe @ v < 0:
        v = -v
    return float(lam), v / np.sqrt(grid.weights)


@dataclass
class ReferenceData:
    """Frozen equilibrium context: T_c, the normalized gap eigenfunction,
    and the spectral gap of K_{T_c} + V."""

    t_c: float
    alpha_star: np.ndarray
    spectral_gap: float
    mu: float
    grid: MomentumGrid
    potential: Potential
    t_c_scalar: float | None = None  # adaptive-quadrature cross-check (rank-one)
    eigen_residual: float = 0.0

    def validate(self) -> None:
        if self.spectral_gap <= EIGEN_TOL:
            raise DomainError("degenerate lowest eigenvalue: non-degeneracy violated")
        if self.eigen_residual > 1e-8:
            raise DomainError(f"gap eigenfunction residual {self.eigen_residual:.2e}")


def _phi_continuum(potential: SeparableRankOne, grid: MomentumGrid):
    """Pointwise form factor for off-grid quadrature."""
    if potential.gaussian_params is not None:
        a, w = potential.gaussian_params
        return lambda k: a * np.exp(-np.asarray(k) ** 2 / (2.0 * w**2))
    from scipy.interpolate import CubicSpline

    return CubicSpline(grid.nodes, potential.phi_hat)


def scalar_tc_condition(phi_func, temperature: float, mu: float,
                        k_max: float, with_tail: bool = True) -> float:
    """<phi, K_T^{-1} phi> - 1 evaluated by adaptive quadrature (3D radial)."""

    def integrand(k):
        return 4.0 * np.pi * k * k * phi_func(k) ** 2 / k_t(k * k - mu, temperature)

    val, _ = integrate.quad(integrand, 0.0, k_max,
                            points=[np.sqrt(mu)], limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    tail = 0.0
    if with_tail:
        tail, _ = integrate.quad(integrand, k_max, np.inf, limit=200)
    return val + tail - 1.0


def critical_temperature(mu: float, potential: Potential, grid: MomentumGrid,
                         bracket: tuple[float, float] = (1e-4, None)) -> ReferenceData:
    """Locate T_c by root-finding on the lowest eigenvalue of K_T + V.

    Bisection to 1e-3 relative, then secant polish to 1e-10.  For separable
    rank-one potentials the result is cross-validated against the scalar
    condition <phi, K_{T_c}^{-1} phi> = 1 computed by adaptive quadrature,
    and alpha_* is proportional to K_{T_c}^{-1} phi.
    """
    t_lo, t_hi = bracket
    if t_hi is None:
        t_hi = mu

    rank_one = potential.rank_one_form_factor(grid) is not None

    def lowest(temp):
        if rank_one:
            d, q = _rank_one_data(potential, temp, mu, grid)
            return _secular_lowest(d, q)
        m = assemble_kt_plus_v(temp, mu, potential, grid)
        return float(eigh(m, eigvals_only=True, subset_by_index=[0, 0])[0])

    f_lo, f_hi = lowest(t_lo), lowest(t_hi)
    if f_lo >= 0.0 or f_hi <= 0.0:
        raise DomainError(
            f"T_c outside bracket ({t_lo:g}, {t_hi:g}): "
            f"lowest eigenvalue {f_lo:.3e} .. {f_hi:.3e}"
        )

    # bisection to 1e-3 relative
    a, b, fa, fb = t_lo, t_hi, f_lo, f_hi
    while (b - a) > 1e-3 * b:
        m = 0.5 * (a + b)
        fm = lowest(m)
        if fm < 0.0:
            a, fa = m, fm
        else:
            b, fb = m, fm

    # secant polish to 1e-10
    x0, x1, f0, f1 = a, b, fa, fb
    for _ in range(80):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x2 = min(max(x2, t_lo), t_hi)
        x0, f0, x1, f1 = x1, f1, x2, lowest(x2)
        if abs(x1 - x0) <= 1e-10 * x1:
            break
    tc = x1

    # eigenpair and spectral gap at T_c
    lam, alpha_star = lowest_eigenpair(tc, mu, potential, grid)
    if rank_one:
        d, q = _rank_one_data(potential, tc, mu, grid)
        kappa = _secular_second(d, q)
        mv = d * (np.sqrt(grid.weights) * alpha_star) - q * (
            q @ (np.sqrt(grid.weights) * alpha_star))
        residual = float(np.linalg.norm(mv - lam * np.sqrt(grid.weights) * alpha_star))
    else:
        m = assemble_kt_plus_v(tc, mu, potential, grid)
        w2, vecs = eigh(m, subset_by_index=[0, 1])
        kappa = float(w2[1])
        v = np.sqrt(grid.weights) * alpha_star
        residual = float(np.linalg.norm(m @ v - lam * v))

    tc_scalar = None
    if isinstance(potential, SeparableRankOne):
        phi_func = _phi_continuum(potential, grid)
        # a tabulated form factor has no trustworthy extension beyond the grid
        with_tail = potential.gaussian_params is not None

        def cond(temp):
            return scalar_tc_condition(phi_func, temp, mu, grid.k_max, with_tail)

        tc_scalar = brentq(cond, t_lo, t_hi, xtol=1e-14, rtol=8.9e-16)

    ref = ReferenceData(
        t_c=float(tc), alpha_star=alpha_star, spectral_gap=float(kappa),
        mu=mu, grid=grid, potential=potential,
        t_c_scalar=tc_scalar, eigen_residual=residual,
    )
    ref.validate()
    return ref


def gap_equation_solve(temperature: float, mu: float, potential: Potential,
                       grid: MomentumGrid, delta_init=None,
                       damping: float = 0.5, tol: float = 1e-10,
                       max_iter: int = 10_000):
    """Self-consistent pairing field: Delta = delta_from_alpha(Gibbs(Delta)).

    Damped fixed-point iteration; for T >= T_c the iteration collapses to
    Delta = 0 (detected by an absolute floor) and the normal state is
    returned.
    """
    if delta_init is None:
        phi = potential.rank_one_form_factor(grid)
        shape = phi if phi is not None else np.ones(grid.n)
        delta_init = 0.1 * temperature * shape / np.max(np.abs(shape))
    delta = np.asarray(delta_init, dtype=complex)
    if not np.any(delta):
        raise DomainError("delta_init must be nonzero")
    scale0 = np.linalg.norm(delta)
    residual = np.inf
    for _ in range(max_iter):
        state = gibbs_state(delta, temperature, mu, grid)
        update = potential.delta_from_alpha(state.alpha, grid)
        new = (1.0 - damping) * delta + damping * update
        norm = np.linalg.norm(delta)
        if norm <= 1e-13 * scale0:
            zero = np.zeros(grid.n, dtype=complex)
            return zero, normal_state(temperature, mu, grid)
        residual = np.linalg.norm(new - delta) / norm
        delta = new
        if residual <= tol:
            return delta, gibbs_state(delta, temperature, mu, grid)
    raise NonConvergenceError(
        f"gap equation: no convergence in {max_iter} iterations "
        f"(last residual {residual:.3e})", residual=residual)


PERTURBED_NORMAL = "perturbed-normal"
SCALED_EQUILIBRIUM = "scaled-equilibrium"


def pairing_constrained_gamma(alpha_abs: np.ndarray, eps: np.ndarray,
                              temperature: float) -> np.ndarray:
    """Momentum distribution minimizing the free-energy density pointwise at
    a prescribed pairing magnitude.

    Equals gamma_n wherever the pairing vanishes, and is the Gibbs-manifold
    gamma of the implied local field elsewhere:
    |alpha| = D tanh(E/2T)/(2E), gamma = 1/2 - (eps/2E) tanh(E/2T) with
    E = sqrt(eps^2 + D^2).  Output is strictly admissible for |alpha| < 1/2.
    """
    from scipy.optimize import brentq as _brentq

    t = temperature
    gamma = 1.0 / (1.0 + np.exp(np.clip(eps / t, -700, 700)))
    if np.max(alpha_abs) >= 0.5:
        raise DomainError("pairing magnitude must stay below 1/2")
    for i in np.nonzero(alpha_abs > 1e-15)[0]:
        a, e = float(alpha_abs[i]), float(eps[i])

        def implied(d):
            en = np.hypot(e, d)
            if en == 0.0:
                return -a
            return d * np.tanh(en / (2.0 * t)) / (2.0 * en) - a

        hi = 4.0 * k_t(e, t) * a + 8.0 * t * np.arctanh(min(2.0 * a, 1.0 - 1e-12)) + 1.0
        while implied(hi) < 0.0:
            hi *= 2.0
        d = _brentq(implied, 0.0, hi, rtol=8.9e-16)
        en = np.hypot(e, d)
        gamma[i] = 0.5 - (e / (2.0 * en)) * np.tanh(en / (2.0 * t))
    return gamma


def build_initial_state(kind: str, psi0: complex, h: float,
                        reference: ReferenceData, temperature: float) -> BdGState:
    """Initial conditions for theorem-style runs.

    perturbed-normal:    pairing alpha = h psi0 alpha_* exactly (so the
                         order parameter starts at psi0 and the residual xi
                         vanishes), with gamma the pointwise free-energy
                         minimizer at that pairing.  (Keeping gamma_n
                         literally would push s(k) above 1/2 wherever
                         h |alpha_*| exceeds the Fermi factor's margin.)
    scaled-equilibrium:  the self-consistent state at T < T_c with alpha
                         rescaled so the order parameter equals psi0 exactly.
    """
    grid, mu = reference.grid, reference.mu
    if kind == PERTURBED_NORMAL:
        alpha = h * psi0 * reference.alpha_star.astype(complex)
        if np.max(np.abs(alpha)) >= 0.5:
            raise DomainError("h too large: pairing magnitude reaches 1/2")
        gamma = pairing_constrained_gamma(np.abs(alpha), dispersion(grid, mu),
                                          temperature)
        state = BdGState(gamma, alpha, grid)
    elif kind == SCALED_EQUILIBRIUM:
        if temperature >= reference.t_c:
            raise DomainError("scaled-equilibrium requires T < T_c")
        _, eq = gap_equation_solve(temperature, mu, reference.potential, grid)
        overlap = grid.inner(reference.alpha_star, eq.alpha)
        if abs(overlap) == 0:
            raise DomainError("equilibrium pairing density orthogonal to alpha_*")
        c = h * psi0 / overlap
        state = BdGState(eq.gamma.copy(), c * eq.alpha, grid)
        state.validate()
    else:
        raise DomainError(f"unknown initial state kind {kind!r}")
    state.validate()
    return state
