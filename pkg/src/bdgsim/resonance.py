"""Complex resonance of the linearized pair propagator for rank-one
potentials.

Near T_c the embedded zero eigenvalue of the generator moves into the lower
half plane; to leading order in T - T_c

    lambda = (T_c - T)/T_c^2 * I1 * [P - i Q]^{-1}

with I1 the cosh^{-2}-weighted form-factor mass, P the principal-value
integral of |phi|^2 / ((k^2 - mu) K_{T_c}) and Q = (pi^2 sqrt(mu)/T_c)
|phi(sqrt(mu))|^2.  (The prefactor follows from implicit differentiation of
the resolvent condition below and is confirmed both by the exact dilation
root and by rate fits against the linearized dynamics.)  P is computed by
pole subtraction; the subtracted integrand is finite at the Fermi momentum
and is evaluated there by a local Taylor expansion, so the raw pole is
never touched.

For Gaussian form factors the resonance is also available without the
leading-order expansion, as the root of the complex-dilated eigenvalue
condition (the dilation only needs the closed-form continuation
phi_theta(k) = e^{3 theta/2} phi(e^theta k), which a Gaussian provides).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .grid import MomentumGrid
from .state import DomainError, k_t

LEADING_ORDER = "leading-order"
DILATION_ROOT = "complex-dilation-root"

# half-width (relative to sqrt(mu)) of the Taylor window around the pole
_SERIES_WINDOW = 1e-3


@dataclass
class ResonanceResult:
    lam: complex
    method: str
    pv_integral: float      # P
    fermi_weight: float     # Q
    prefactor: float
    theta_used: complex | None = None

    def decay_timescale(self) -> float:
        return predicted_decay_timescale(self)


def predicted_decay_timescale(result: ResonanceResult) -> float:
    """1/|Im lambda|; the linear order parameter decays on this scale."""
    if result.lam.imag >= 0:
        raise DomainError("no decay: Im lambda >= 0")
    return 1.0 / abs(result.lam.imag)


def _pv_weight(k_max: float, mu: float) -> float:
    """Closed form p.v. integral of 1/(k^2 - mu) over (0, k_max)."""
    rm = np.sqrt(mu)
    return (1.0 / (2.0 * rm)) * np.log((k_max - rm) / (k_max + rm))


def principal_value_integral(phi_func, mu: float, t_c: float,
                             k_max: float) -> float:
    """p.v. of |phi(k)|^2 / ((k^2 - mu) K_{T_c}(k)) over the radial measure,
    by subtracting the pole value of g(k) = 4 pi k^2 |phi|^2 / K_{T_c}."""
    rm = np.sqrt(mu)

    def g(k):
        return 4.0 * np.pi * k * k * phi_func(k) ** 2 / k_t(k * k - mu, t_c)

    g0 = g(rm)
    # local derivatives of g for the near-pole Taylor window
    step = 1e-4 * rm
    g1 = (g(rm + step) - g(rm - step)) / (2.0 * step)
    g2 = (g(rm + step) - 2.0 * g0 + g(rm - step)) / step**2
    window = _SERIES_WINDOW * rm

    def subtracted(k):
        if abs(k - rm) < window:
            return (g1 + 0.5 * g2 * (k - rm)) / (k + rm)
        return (g(k) - g0) / (k * k - mu)

    parts = []
    for a, b in ((0.0, rm - window), (rm - window, rm + window),
                 (rm + window, k_max)):
        val, _ = integrate.quad(subtracted, a, b, limit=400,
                                epsabs=1e-13, epsrel=1e-11)
        parts.append(val)
    return float(sum(parts) + g0 * _pv_weight(k_max, mu))


def resonance_leading_order(potential, mu: float, temperature: float,
                            t_c: float, grid: MomentumGrid) -> ResonanceResult:
    """Leading-order resonance for a separable rank-one potential (3D)."""
    from .equilibrium import _phi_continuum  # shared form-factor interpolant

    phi_func = _phi_continuum(potential, grid)
    rm = np.sqrt(mu)
    phi_f = float(phi_func(rm))
    if abs(phi_f) < 1e-12:
        raise DomainError("Q ~ 0: form factor vanishes on the Fermi sphere, "
                          "resonance formula degenerate")

    def weight(k):
        return (4.0 * np.pi * k * k * phi_func(k) ** 2
                / np.cosh((k * k - mu) / (2.0 * temperature)) ** 2)

    i1, _ = integrate.quad(weight, 0.0, grid.k_max, points=[rm], limit=400,
                           epsabs=1e-14, epsrel=1e-11)
    prefactor = (t_c - temperature) / t_c**2 * i1
    p = principal_value_integral(phi_func, mu, t_c, grid.k_max)
    q = np.pi**2 * rm / t_c * phi_f**2
    lam = prefactor / complex(p, -q)
    return ResonanceResult(lam=lam, method=LEADING_ORDER, pv_integral=p,
                           fermi_weight=q, prefactor=prefactor)


def _dilated_condition(lam: complex, theta: complex, amplitude: float,
                       width: float, mu: float, temperature: float,
                       k_max: float) -> complex:
    """F(lambda) = 1 - <phi_theta| (2 e^{-2 theta} k^2 - 2 mu + lambda)^{-1}
    L_theta |phi_theta> for the Gaussian family.

    The kinetic term, L and the form factor are all continued with the same
    momentum scaling k -> e^{-theta} k (for real theta the integral is then
    exactly theta-independent by substitution, the prerequisite for the
    continuation to mean anything).
    """
    scale = np.exp(-theta)

    def integrand(k):
        ks = scale * k
        phi2 = (amplitude * np.exp(-ks * ks / (2.0 * width**2))) ** 2
        eps_t = ks * ks - mu
        l_t = 2.0 * np.tanh(eps_t / (2.0 * temperature))
        return 4.0 * np.pi * k * k * scale**3 * phi2 * l_t / (2.0 * eps_t + lam)

    rm = np.sqrt(mu)
    pts = [0.9 * rm, rm, 1.1 * rm]
    re, _ = integrate.quad(lambda k: integrand(k).real, 0.0, k_max,
                           limit=800, points=pts, epsabs=1e-13, epsrel=1e-11)
    im, _ = integrate.quad(lambda k: integrand(k).imag, 0.0, k_max,
                           limit=800, points=pts, epsabs=1e-13, epsrel=1e-11)
    return 1.0 - complex(re, im)


def resonance_rootfind_gaussian(gaussian_params, mu: float, temperature: float,
                                theta: complex, grid: MomentumGrid,
                                t_c: float | None = None,
                                seed: complex | None = None,
                                tol: float = 1e-10,
                                max_iter: int = 60) -> ResonanceResult:
    """Secant root of the complex-dilated eigenvalue condition.

    Requires Im theta < 0 (strip of analyticity of the Gaussian family) and
    a seed, normally the leading-order resonance.
    """
    if theta.imag >= 0:
        raise DomainError("complex dilation requires Im theta < 0")
    amplitude, width = gaussian_params
    if seed is None:
        if t_c is None:
            raise DomainError("root-finder needs a seed or T_c for the "
                              "leading-order seed")
        from .potential import SeparableRankOne

        pot = SeparableRankOne.gaussian(grid, amplitude, width)
        lead = resonance_leading_order(pot, mu, temperature, t_c, grid)
        seed = lead.lam

    def f(lam):
        return _dilated_condition(lam, theta, amplitude, width, mu,
                                  temperature, grid.k_max)

    x0 = seed
    x1 = seed * 1.02 + 1e-12 * (1.0 - 1.0j)
    f0, f1 = f(x0), f(x1)
    for _ in range(max_iter):
        if abs(f1) <= tol:
            break
        if f1 == f0:
            raise DomainError("secant stalled; increase |Im theta| or adjust seed")
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        x0, f0, x1, f1 = x1, f1, x2, f(x2)
    else:
        raise DomainError(f"secant did not converge (|F| = {abs(f1):.2e}); "
                          "increase |Im theta|")
    return ResonanceResult(lam=complex(x1), method=DILATION_ROOT,
                           pv_integral=np.nan, fermi_weight=np.nan,
                           prefactor=np.nan, theta_used=theta)
