# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evolve kernel for rank-one coupled pairing fields.

Same semantics as _evolve_np.evolve_chunk_rank1: per-node exact unitary
conjugation (Rodrigues rotation of the Bloch vector) with midpoint
self-consistency on the pairing field.  All reductions are straight-line
loops, so repeated runs are bit-identical.
"""

from libc.math cimport cos, sin, sqrt


cdef inline void _rotate_into(double[::1] g_in, double complex[::1] a_in,
                              double[::1] eps, double[::1] phi,
                              double cre, double cim, double dt,
                              double[::1] g_out, double complex[::1] a_out) noexcept nogil:
    cdef Py_ssize_t i, n = g_in.shape[0]
    cdef double b1, b2, b3, v1, v2, v3, e, n1, n2, n3
    cdef double half, sh, ch, sin_t, cos_t, omc, ndotv, c1, c2, c3, w1, w2, w3
    cdef double are, aim
    cdef double complex z
    for i in range(n):
        b1 = cre * phi[i]
        b2 = -cim * phi[i]
        b3 = eps[i]
        are = a_in[i].real
        aim = a_in[i].imag
        v1 = are
        v2 = -aim
        v3 = g_in[i] - 0.5
        e = sqrt(b1 * b1 + b2 * b2 + b3 * b3)
        if e == 0.0:
            g_out[i] = g_in[i]
            a_out[i] = a_in[i]
            continue
        n1 = b1 / e
        n2 = b2 / e
        n3 = b3 / e
        half = e * dt
        sh = sin(half)
        ch = cos(half)
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
        g_out[i] = w3 + 0.5
        z.real = w1
        z.imag = -w2
        a_out[i] = z


def evolve_chunk_rank1(double[::1] gamma, double complex[::1] alpha,
                       double[::1] eps, double[::1] phi, double[::1] q,
                       double coupling, double dt, long n_steps,
                       int midpoint_iters,
                       double[::1] g_tmp, double complex[::1] a_tmp):
    """Advance n_steps in place; g_tmp/a_tmp are caller-provided scratch."""
    cdef Py_ssize_t i, n = gamma.shape[0]
    cdef long step
    cdef int it
    cdef double ore, oim, c0re, c0im, cre, cim, pre, pim
    with nogil:
        for step in range(n_steps):
            ore = 0.0
            oim = 0.0
            for i in range(n):
                ore += q[i] * alpha[i].real
                oim += q[i] * alpha[i].imag
            c0re = coupling * ore
            c0im = coupling * oim
            cre = c0re
            cim = c0im
            for it in range(midpoint_iters):
                _rotate_into(gamma, alpha, eps, phi, cre, cim, dt, g_tmp, a_tmp)
                pre = 0.0
                pim = 0.0
                for i in range(n):
                    pre += q[i] * a_tmp[i].real
                    pim += q[i] * a_tmp[i].imag
                cre = 0.5 * (c0re + coupling * pre)
                cim = 0.5 * (c0im + coupling * pim)
            _rotate_into(gamma, alpha, eps, phi, cre, cim, dt, gamma, alpha)
