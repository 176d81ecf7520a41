"""Vectorised Philox4x32-10 (Random123) over arbitrary counter arrays.

Every random number in the simulators is a pure function of
``(seed, stream, path, call)``.  The compiled kernels evaluate the same
block cipher inline, so both backends see identical draws.
"""

import numpy as np

M0 = np.uint64(0xD2511F53)
M1 = np.uint64(0xCD9E8D57)
W0 = 0x9E3779B9
W1 = 0xBB67AE85
MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
TWO_M53 = 2.0**-53

STREAM_CHAIN = 1
STREAM_BROWNIAN = 2


def split_seed(seed: int) -> tuple[int, int]:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed & 0xFFFFFFFF, seed >> 32


def philox4x32(c0, c1, c2, c3, k0: int, k1: int):
    """Apply 10 Philox rounds; counters are uint64 arrays holding 32-bit words."""
    x0, x1, x2, x3 = (np.asarray(c, dtype=np.uint64) & MASK32 for c in (c0, c1, c2, c3))
    for i in range(10):
        if i:
            k0 = (k0 + W0) & 0xFFFFFFFF
            k1 = (k1 + W1) & 0xFFFFFFFF
        p0 = M0 * x0
        p1 = M1 * x2
        x0, x1, x2, x3 = (
            (p1 >> _S32) ^ x1 ^ np.uint64(k0),
            p1 & MASK32,
            (p0 >> _S32) ^ x3 ^ np.uint64(k1),
            p0 & MASK32,
        )
    return x0, x1, x2, x3


def path_words(paths, stream: int):
    paths = np.asarray(paths, dtype=np.uint64)
    return paths & MASK32, (paths >> _S32) | np.uint64(stream << 16)


def to_unit(hi, lo):
    """Two 32-bit words -> double in [0, 1) with 53 random bits."""
    return (((hi << _S32) | lo) >> _S11).astype(np.float64) * TWO_M53


def uniform_pairs(seed: int, stream: int, paths, call):
    """Two uniforms per (path, call); ``call`` may be scalar or array."""
    k0, k1 = split_seed(seed)
    p_lo, p_hi = path_words(paths, stream)
    call = np.asarray(call, dtype=np.uint64)
    w = philox4x32(call & MASK32, call >> _S32, p_lo, p_hi, k0, k1)
    return to_unit(w[0], w[1]), to_unit(w[2], w[3])


def chain_uniforms(seed: int, paths, step):
    """Uniform consumed by each path at chain step ``step`` (two steps per call)."""
    step = np.asarray(step, dtype=np.uint64)
    u0, u1 = uniform_pairs(seed, STREAM_CHAIN, paths, step >> np.uint64(1))
    return np.where((step & np.uint64(1)) == 0, u0, u1)


def normal_pairs(seed: int, paths, call):
    """Box-Muller pair of standard normals for each (path, call)."""
    u0, u1 = uniform_pairs(seed, STREAM_BROWNIAN, paths, call)
    radius = np.sqrt(-2.0 * np.log1p(-u0))
    angle = 2.0 * np.pi * u1
    return radius * np.cos(angle), radius * np.sin(angle)
