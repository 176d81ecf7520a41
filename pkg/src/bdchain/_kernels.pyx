# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: DP sweep, chain paths, Brownian excursions.

Signatures mirror :mod:`bdchain._fallback`.
"""

from libc.math cimport sqrt, log1p, cos, sin, fabs, M_PI
from libc.stdint cimport uint32_t, uint64_t, int64_t, int8_t

import numpy as np

cdef extern from "_fpmode.h" nogil:
    unsigned int bd_ftz_enter()
    void bd_ftz_leave(unsigned int old)

cdef uint64_t M0 = 0xD2511F53
cdef uint64_t M1 = 0xCD9E8D57
cdef uint32_t W0 = 0x9E3779B9
cdef uint32_t W1 = 0xBB67AE85
cdef double TWO_M53 = 1.0 / 9007199254740992.0

cdef enum:
    ALIVE = 0
    EXTINCT = 1
    CAP_HIT = 2
    STREAM_CHAIN = 1
    STREAM_BROWNIAN = 2

BACKEND = "compiled"


cdef inline void philox(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3,
                        uint32_t k0, uint32_t k1, uint32_t* out) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t t0
    cdef int i
    for i in range(10):
        if i:
            k0 += W0
            k1 += W1
        p0 = M0 * c0
        p1 = M1 * c2
        t0 = <uint32_t>(p1 >> 32) ^ c1 ^ k0
        c1 = <uint32_t>p1
        c2 = <uint32_t>(p0 >> 32) ^ c3 ^ k1
        c3 = <uint32_t>p0
        c0 = t0
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline double to_unit(uint32_t hi, uint32_t lo) noexcept nogil:
    return <double>(((<uint64_t>hi << 32) | lo) >> 11) * TWO_M53


def philox_block(uint32_t c0, uint32_t c1, uint32_t c2, uint32_t c3, uint32_t k0, uint32_t k1):
    """Single Philox4x32-10 block, exposed for known-answer tests."""
    cdef uint32_t out[4]
    philox(c0, c1, c2, c3, k0, k1, out)
    return out[0], out[1], out[2], out[3]


def dp_sweep(const double[::1] left, const double[::1] right, double[::1] mass,
             Py_ssize_t top, Py_ssize_t steps, int parity, double[::1] visits=None):
    cdef Py_ssize_t size = mass.shape[0]
    cdef Py_ssize_t i, j, j0, stride, hi
    cdef bint track = visits is not None
    cdef double acc, e, tot, v
    cdef double[::1] buf_a = np.array(mass, dtype=np.float64)
    cdef double[::1] buf_b = np.zeros(size, dtype=np.float64)
    cdef double[::1] cur = buf_a
    cdef double[::1] nxt = buf_b
    cdef double[::1] tmp
    expect = np.empty(steps, dtype=np.float64)
    extinct = np.empty(steps, dtype=np.float64)
    total = np.empty(steps, dtype=np.float64)
    cdef double[::1] expect_v = expect
    cdef double[::1] extinct_v = extinct
    cdef double[::1] total_v = total
    cdef unsigned int fpmode

    with nogil:
        # masses far in the tail decay through the subnormal range
        fpmode = bd_ftz_enter()
        for i in range(steps):
            if parity < 0:
                j0 = 1
                stride = 1
            else:
                j0 = 2 - parity   # first occupied state >= 1 before the step
                stride = 2
            if track:
                visits[0] += cur[0]
                j = j0
                while j <= top:
                    visits[j] += cur[j]
                    j += stride
            hi = top + 1 if top + 1 < size else size - 1
            v = cur[0]
            if top >= 1:
                v = v + left[1] * cur[1]
            nxt[0] = v
            tot = v
            e = 0.0
            if parity >= 0:
                parity = 1 - parity
                j0 = 2 - parity
            # boundary terms handled apart so the bulk loop has no branches
            j = j0
            if j == 1:
                acc = left[2] * cur[2] if top >= 2 else 0.0
                nxt[1] = acc
                tot += acc
                e += acc
                j += stride
            while j + 1 <= top:
                acc = right[j - 1] * cur[j - 1] + left[j + 1] * cur[j + 1]
                nxt[j] = acc
                tot += acc
                e += j * acc
                j += stride
            while j <= hi:
                acc = right[j - 1] * cur[j - 1]
                nxt[j] = acc
                tot += acc
                e += j * acc
                j += stride
            expect_v[i] = e
            extinct_v[i] = nxt[0]
            total_v[i] = tot
            # shrink to the last nonzero state; flushed tail entries are exact zeros
            top = hi
            while top >= 1 and nxt[top] == 0.0:
                top -= 1
            tmp = cur
            cur = nxt
            nxt = tmp
        bd_ftz_leave(fpmode)
        for j in range(size):
            mass[j] = cur[j] if j <= top else 0.0
    return expect, extinct, total, top


def chain_paths(const double[::1] left, Py_ssize_t k, int64_t horizon, int64_t state_cap,
                uint64_t seed, uint64_t path_start, Py_ssize_t count):
    cdef uint32_t k0 = <uint32_t>seed
    cdef uint32_t k1 = <uint32_t>(seed >> 32)
    status = np.zeros(count, dtype=np.int8)
    stopped = np.zeros(count, dtype=np.int64)
    final = np.zeros(count, dtype=np.int64)
    cdef int8_t[::1] status_v = status
    cdef int64_t[::1] stopped_v = stopped
    cdef int64_t[::1] final_v = final
    cdef Py_ssize_t p
    cdef uint64_t path
    cdef int64_t s, state
    cdef int8_t st
    cdef uint32_t w[4]
    cdef double u
    cdef uint32_t c2, c3

    with nogil:
        for p in range(count):
            path = path_start + p
            c2 = <uint32_t>path
            c3 = <uint32_t>(path >> 32) | (STREAM_CHAIN << 16)
            state = k
            s = 0
            st = ALIVE
            if state >= state_cap:
                st = CAP_HIT
            while st == ALIVE and s < horizon:
                if (s & 1) == 0:
                    philox(<uint32_t>(s >> 1), <uint32_t>(<uint64_t>s >> 33), c2, c3, k0, k1, w)
                    u = to_unit(w[0], w[1])
                else:
                    u = to_unit(w[2], w[3])
                if u < left[state]:
                    state -= 1
                else:
                    state += 1
                s += 1
                if state == 0:
                    st = EXTINCT
                elif state >= state_cap:
                    st = CAP_HIT
            status_v[p] = st
            stopped_v[p] = s
            final_v[p] = state
    return status, stopped, final


def bm_excursions(double lower, double start, double upper, double dt, double eps,
                  uint64_t seed, uint64_t path_start, Py_ssize_t count, int64_t max_steps):
    cdef uint32_t k0 = <uint32_t>seed
    cdef uint32_t k1 = <uint32_t>(seed >> 32)
    cdef double sd = sqrt(dt)
    band = np.zeros(count, dtype=np.int64)
    right = np.full(count, -1, dtype=np.int8)
    steps = np.zeros(count, dtype=np.int64)
    cdef int64_t[::1] band_v = band
    cdef int8_t[::1] right_v = right
    cdef int64_t[::1] steps_v = steps
    cdef Py_ssize_t p
    cdef uint64_t path
    cdef int64_t s, hits
    cdef uint32_t w[4]
    cdef uint32_t c2, c3
    cdef double b, z, radius, angle, z1 = 0.0

    with nogil:
        for p in range(count):
            path = path_start + p
            c2 = <uint32_t>path
            c3 = <uint32_t>(path >> 32) | (STREAM_BROWNIAN << 16)
            b = start
            hits = 0
            s = 0
            while s < max_steps:
                if fabs(b - start) < eps:
                    hits += 1
                if (s & 1) == 0:
                    philox(<uint32_t>(s >> 1), <uint32_t>(<uint64_t>s >> 33), c2, c3, k0, k1, w)
                    radius = sqrt(-2.0 * log1p(-to_unit(w[0], w[1])))
                    angle = 2.0 * M_PI * to_unit(w[2], w[3])
                    z = radius * cos(angle)
                    z1 = radius * sin(angle)
                else:
                    z = z1
                b = b + sd * z
                s += 1
                if b <= lower:
                    right_v[p] = 0
                    break
                if b >= upper:
                    right_v[p] = 1
                    break
            band_v[p] = hits
            steps_v[p] = s
    return band, right, steps
