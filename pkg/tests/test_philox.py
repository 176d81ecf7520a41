"""Known-answer vectors for Philox4x32-10 (Random123 distribution)."""

import numpy as np
import pytest

from bdchain import _backend, _philox

KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    (
        (0xFFFFFFFF,) * 4,
        (0xFFFFFFFF, 0xFFFFFFFF),
        (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD),
    ),
    (
        (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
        (0xA4093822, 0x299F31D0),
        (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1),
    ),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_known_answers(backend, ctr, key, expected):
    kern = _backend.get(backend)
    assert tuple(kern.philox_block(*ctr, *key)) == expected


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_vectorised_matches_scalar(ctr, key, expected):
    cols = [np.full(3, c, dtype=np.uint64) for c in ctr]
    out = _philox.philox4x32(*cols, *key)
    for word, want in zip(out, expected):
        assert (word == want).all()


def test_uniforms_in_unit_interval():
    u = _philox.chain_uniforms(7, np.arange(5000), 3)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.02


def test_streams_and_seeds_differ():
    a = _philox.chain_uniforms(1, np.arange(100), 0)
    b = _philox.chain_uniforms(2, np.arange(100), 0)
    c, _ = _philox.uniform_pairs(1, _philox.STREAM_BROWNIAN, np.arange(100), 0)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_seed_range():
    with pytest.raises(ValueError):
        _philox.split_seed(-1)
    with pytest.raises(ValueError):
        _philox.split_seed(2**64)
    assert _philox.split_seed(2**64 - 1) == (0xFFFFFFFF, 0xFFFFFFFF)
