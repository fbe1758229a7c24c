"""Evolve kernel backend selection.

The compiled Cython kernel is preferred for the rank-one hot loop; the numpy
implementation is the fallback and also serves the dense-kernel (LocalRadial)
coupling.  Set BDG_FORCE_NUMPY=1 to force the fallback (used by the parity
tests and the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _evolve_np

if os.environ.get("BDG_FORCE_NUMPY"):
    _cy = None
else:
    try:
        from . import _evolve_cy as _cy
    except ImportError:
        _cy = None

BACKEND = "cython" if _cy is not None else "numpy"

rotate = _evolve_np.rotate
evolve_chunk_matrix = _evolve_np.evolve_chunk_matrix


def evolve_chunk_rank1(gamma, alpha, eps, phi, q, coupling, dt, n_steps,
                       midpoint_iters, scratch=None):
    if _cy is None:
        _evolve_np.evolve_chunk_rank1(gamma, alpha, eps, phi, q, coupling,
                                      dt, n_steps, midpoint_iters)
        return
    if scratch is None:
        scratch = (np.empty_like(gamma), np.empty_like(alpha))
    _cy.evolve_chunk_rank1(gamma, alpha, eps, phi, q, coupling, dt,
                           int(n_steps), int(midpoint_iters),
                           scratch[0], scratch[1])


def numpy_chunk_rank1(gamma, alpha, eps, phi, q, coupling, dt, n_steps,
                      midpoint_iters, scratch=None):
    """Always the numpy path (for backend comparison)."""
    _evolve_np.evolve_chunk_rank1(gamma, alpha, eps, phi, q, coupling, dt,
                                  n_steps, midpoint_iters)
