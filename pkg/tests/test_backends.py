"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from bdchain import ConstantBias, PaperHarmonic, _backend, oracle
from bdchain.montecarlo import SimConfig, simulate_paths


@pytest.fixture
def both():
    try:
        return _backend.get("compiled"), _backend.get("python")
    except ImportError:
        pytest.skip("compiled kernels not built")


def test_env_selects_fallback():
    code = "import bdchain; print(bdchain.BACKEND)"
    env = dict(os.environ, BDCHAIN_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        _backend.get("fortran")


@pytest.mark.parametrize("spec", [ConstantBias(0.6), ConstantBias(0.35), PaperHarmonic()])
def test_dp_sweeps_agree(both, spec):
    a = oracle.sweep(spec, 3, 400, track_visits=True, backend="compiled")
    b = oracle.sweep(spec, 3, 400, track_visits=True, backend="python")
    np.testing.assert_allclose(a.final.mass, b.final.mass, rtol=0, atol=1e-15)
    np.testing.assert_allclose(a.expectation, b.expectation, rtol=1e-12)
    np.testing.assert_allclose(a.extinct, b.extinct, rtol=0, atol=1e-15)
    np.testing.assert_allclose(a.visits, b.visits, rtol=1e-12, atol=1e-300)


@pytest.mark.parametrize("spec", [ConstantBias(0.5), ConstantBias(0.6), PaperHarmonic()])
def test_chain_paths_bit_identical(both, spec):
    cfg = SimConfig(seed=2024, paths=3000, horizon=500, state_cap=60)
    a = simulate_paths(spec, 2, cfg, backend="compiled")
    b = simulate_paths(spec, 2, cfg, backend="python")
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


def test_brownian_excursions_agree(both):
    comp, py = both
    args = (0.0, 1.0, 2.0, 1e-3, 2 * np.sqrt(1e-3), 5, 10, 200, 100_000)
    a = comp.bm_excursions(*args)
    b = py.bm_excursions(*args)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)
