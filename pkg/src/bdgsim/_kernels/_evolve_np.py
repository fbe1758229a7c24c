"""Pure-numpy evolve kernels (fallback when the compiled extension is absent).

A step conjugates Gamma(k) by exp(-i dt H(k)) at every node.  In Bloch form
v = (Re alpha, -Im alpha, gamma - 1/2) and b = (Re Delta, -Im Delta, eps),
the conjugation is the Rodrigues rotation of v about n = b/|b| by the angle
2|b| dt, which preserves |v| = s(k) exactly up to rounding.

The self-consistent pairing field is refreshed by midpoint iteration: the
step is taken provisionally with the current Delta, Delta is re-evaluated at
the predicted state and averaged with the start-of-step value, and the step
is retaken; the committed update is always a single exact rotation.
"""

from __future__ import annotations

import numpy as np


def rotate(gamma, alpha, eps, delta, dt):
    """One frozen-field unitary step at every node; returns (gamma', alpha')."""
    b1 = np.real(delta)
    b2 = -np.imag(delta)
    b3 = eps
    v1 = np.real(alpha)
    v2 = -np.imag(alpha)
    v3 = gamma - 0.5

    e = np.sqrt(b1 * b1 + b2 * b2 + b3 * b3)
    safe = np.where(e > 0.0, e, 1.0)
    n1, n2, n3 = b1 / safe, b2 / safe, b3 / safe

    half = e * dt
    sh, ch = np.sin(half), np.cos(half)
    sin_t = 2.0 * sh * ch
    cos_t = 1.0 - 2.0 * sh * sh
    omc = 2.0 * sh * sh

    ndotv = n1 * v1 + n2 * v2 + n3 * v3
    c1 = n2 * v3 - n3 * v2
    c2 = n3 * v1 - n1 * v3
    c3 = n1 * v2 - n2 * v1

    w1 = v1 * cos_t + c1 * sin_t + n1 * ndotv * omc
    w2 = v2 * cos_t + c2 * sin_t + n2 * ndotv * omc
    w3 = v3 * cos_t + c3 * sin_t + n3 * ndotv * omc

    zero = e == 0.0
    if np.any(zero):
        w1 = np.where(zero, v1, w1)
        w2 = np.where(zero, v2, w2)
        w3 = np.where(zero, v3, w3)
    return w3 + 0.5, w1 - 1j * w2


def evolve_chunk_rank1(gamma, alpha, eps, phi, q, coupling, dt, n_steps,
                       midpoint_iters):
    """Advance n_steps in place for a rank-one coupled pairing field.

    Delta(k) = coupling * phi(k) * sum_i q_i alpha_i with q = weights * phi.
    """
    for _ in range(n_steps):
        c0 = coupling * np.sum(q * alpha)
        c_eff = c0
        for _ in range(midpoint_iters):
            _, a_pred = rotate(gamma, alpha, eps, c_eff * phi, dt)
            c_eff = 0.5 * (c0 + coupling * np.sum(q * a_pred))
        g_new, a_new = rotate(gamma, alpha, eps, c_eff * phi, dt)
        gamma[:] = g_new
        alpha[:] = a_new


def evolve_chunk_matrix(gamma, alpha, eps, kernel_w, dt, n_steps,
                        midpoint_iters):
    """Advance n_steps in place with Delta_i = sum_j kernel_w[i, j] alpha_j."""

    def delta_of(a):
        return kernel_w @ a.real + 1j * (kernel_w @ a.imag)

    for _ in range(n_steps):
        d0 = delta_of(alpha)
        d_eff = d0
        for _ in range(midpoint_iters):
            _, a_pred = rotate(gamma, alpha, eps, d_eff, dt)
            d_eff = 0.5 * (d0 + delta_of(a_pred))
        g_new, a_new = rotate(gamma, alpha, eps, d_eff, dt)
        gamma[:] = g_new
        alpha[:] = a_new
