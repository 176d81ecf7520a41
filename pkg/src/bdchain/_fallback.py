"""Pure NumPy versions of the compiled kernels.

Same signatures and return values as ``_kernels.pyx``.  Random draws come
from the same Philox counters, so chain paths are bit-identical across
backends; Brownian excursions agree up to libm rounding in Box-Muller.
"""

import numpy as np

from . import _philox

BACKEND = "python"

ALIVE, EXTINCT, CAP_HIT = 0, 1, 2


def philox_block(c0, c1, c2, c3, k0, k1):
    return tuple(int(w) for w in _philox.philox4x32(c0, c1, c2, c3, k0, k1))


def dp_sweep(left, right, mass, top, steps, parity, visits=None):
    size = mass.shape[0]
    cur = mass.astype(np.float64, copy=True)
    nxt = np.zeros(size)
    expect = np.empty(steps)
    extinct = np.empty(steps)
    total = np.empty(steps)
    for i in range(steps):
        if visits is not None:
            visits[: top + 1] += cur[: top + 1]
        hi = min(top + 1, size - 1)
        nxt[0] = cur[0] + (left[1] * cur[1] if top >= 1 else 0.0)
        if parity < 0:
            j0, stride = 1, 1
        else:
            parity = 1 - parity
            j0, stride = 2 - parity, 2
        js = np.arange(j0, hi + 1, stride)
        acc = np.zeros(js.size)
        has_left = js >= 2
        acc[has_left] = right[js[has_left] - 1] * cur[js[has_left] - 1]
        has_right = js + 1 <= top
        acc[has_right] = acc[has_right] + left[js[has_right] + 1] * cur[js[has_right] + 1]
        nxt[js] = acc
        total[i] = nxt[0] + acc.sum()
        expect[i] = float(np.dot(js, acc))
        extinct[i] = nxt[0]
        top = hi
        cur, nxt = nxt, cur
    mass[:] = cur
    return expect, extinct, total, top


def chain_paths(left, k, horizon, state_cap, seed, path_start, count):
    status = np.zeros(count, dtype=np.int8)
    stopped = np.zeros(count, dtype=np.int64)
    state = np.full(count, k, dtype=np.int64)
    if k >= state_cap:
        status[:] = CAP_HIT
    paths = np.uint64(path_start) + np.arange(count, dtype=np.uint64)
    live = np.flatnonzero(status == ALIVE)
    s = 0
    while live.size and s < horizon:
        u = _philox.chain_uniforms(seed, paths[live], s)
        here = state[live]
        here = np.where(u < left[here], here - 1, here + 1)
        state[live] = here
        s += 1
        stopped[live] = s
        status[live[here == 0]] = EXTINCT
        status[live[(here >= state_cap) & (here != 0)]] = CAP_HIT
        live = live[status[live] == ALIVE]
    return status, stopped, state


def bm_excursions(lower, start, upper, dt, eps, seed, path_start, count, max_steps):
    sd = np.sqrt(dt)
    band = np.zeros(count, dtype=np.int64)
    right = np.full(count, -1, dtype=np.int8)
    steps = np.zeros(count, dtype=np.int64)
    pos = np.full(count, float(start))
    paths = np.uint64(path_start) + np.arange(count, dtype=np.uint64)
    live = np.arange(count)
    s = 0

    def advance(live, z, s):
        b = pos[live]
        band[live] += np.abs(b - start) < eps
        b = b + sd * z
        pos[live] = b
        steps[live] = s + 1
        lo_exit = b <= lower
        hi_exit = (b >= upper) & ~lo_exit
        right[live[lo_exit]] = 0
        right[live[hi_exit]] = 1
        return ~(lo_exit | hi_exit)

    while live.size and s < max_steps:
        z0, z1 = _philox.normal_pairs(seed, paths[live], s >> 1)
        keep = advance(live, z0, s)
        live, z1 = live[keep], z1[keep]
        s += 1
        if live.size and s < max_steps:
            keep = advance(live, z1, s)
            live = live[keep]
            s += 1
    return band, right, steps
