"""Seeded simulation of chain paths and of the Brownian oracle for ``G_n``.

Every uniform a path consumes is ``Philox4x32-10(seed; stream, path, step)``,
so results depend on ``(seed, path index)`` only: splitting the paths over
any number of workers gives bit-identical per-path outcomes, and estimators
reduce the full per-path arrays in a fixed order.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import _backend, _philox
from .chain import ChainSpec, ScaleEmbedding

__all__ = [
    "SimConfig",
    "SimEstimate",
    "PathOutcome",
    "LocalTimeEstimate",
    "simulate_path",
    "simulate_paths",
    "estimate_extinction",
    "estimate_expectation",
    "estimate_local_time_bm",
    "paths_csv",
    "ALIVE",
    "EXTINCT",
    "CAP_HIT",
]

ALIVE, EXTINCT, CAP_HIT = 0, 1, 2
_Z95 = 1.959963984540054
_DEFAULT_DT = 1e-5


@dataclass(frozen=True)
class SimConfig:
    seed: int
    paths: int = 100_000
    horizon: int = 10_000
    state_cap: int | None = None  # None: k + horizon + 1, never binding
    workers: int = 1

    def __post_init__(self):
        _philox.split_seed(self.seed)
        if self.paths < 1:
            raise ValueError("paths must be >= 1")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.state_cap is not None and self.state_cap < 1:
            raise ValueError("state_cap must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    ci95: tuple[float, float]
    paths_used: int
    truncated_paths: int = 0

    def __post_init__(self):
        lo, hi = self.ci95
        if not lo <= self.mean <= hi or self.std_error < 0:
            raise ValueError("inconsistent estimate")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


class PathOutcome(NamedTuple):
    kind: int  # ALIVE / EXTINCT / CAP_HIT
    step: int  # steps taken
    state: int  # state when stopped
    trajectory: np.ndarray | None = None


@dataclass(frozen=True)
class LocalTimeEstimate:
    local_time: SimEstimate
    right_exit: SimEstimate
    dt: float
    eps: float


def _estimate(samples: np.ndarray, truncated: int = 0, clamp: tuple[float, float] | None = None) -> SimEstimate:
    n = samples.size
    mean = float(np.sum(samples) / n)  # pairwise, fixed order
    if n > 1:
        var = float(np.sum((samples - mean) ** 2) / (n - 1))
        se = math.sqrt(var / n)
    else:
        se = 0.0
    lo, hi = mean - _Z95 * se, mean + _Z95 * se
    if clamp is not None:
        lo, hi = max(lo, clamp[0]), min(hi, clamp[1])
    return SimEstimate(mean, se, (lo, hi), n, truncated)


def _cap(k: int, config: SimConfig) -> int:
    return config.state_cap if config.state_cap is not None else k + config.horizon + 1


def _left_table(spec: ChainSpec, top: int) -> np.ndarray:
    left = np.zeros(top + 1)
    left[1:] = spec.arrays(1, top + 1)[0]
    return left


def _chunks(count: int, workers: int):
    bounds = np.linspace(0, count, workers + 1).astype(int)
    return [(int(a), int(b - a)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate_paths(spec: ChainSpec, k: int, config: SimConfig, backend: str | None = None):
    """Run ``config.paths`` independent paths; returns ``(status, steps, final_state)`` arrays."""
    if k < 1:
        raise ValueError("start state must be >= 1")
    kern = _backend.kernels if backend is None else _backend.get(backend)
    cap = _cap(k, config)
    left = _left_table(spec, min(cap, k + config.horizon) + 1)
    status = np.empty(config.paths, dtype=np.int8)
    steps = np.empty(config.paths, dtype=np.int64)
    final = np.empty(config.paths, dtype=np.int64)

    def work(chunk):
        start, count = chunk
        out = kern.chain_paths(left, k, config.horizon, cap, config.seed, start, count)
        status[start : start + count], steps[start : start + count], final[start : start + count] = out

    chunks = _chunks(config.paths, config.workers)
    if config.workers == 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(config.workers) as pool:
            list(pool.map(work, chunks))
    return status, steps, final


def simulate_path(
    spec: ChainSpec,
    k: int,
    seed: int,
    path_index: int = 0,
    horizon: int = 10_000,
    state_cap: int | None = None,
    record: bool = False,
) -> PathOutcome:
    """One path; identical to path ``path_index`` of :func:`simulate_paths`."""
    if k < 1:
        raise ValueError("start state must be >= 1")
    cap = state_cap if state_cap is not None else k + horizon + 1
    state, s = k, 0
    traj = [k] if record else None
    kind = CAP_HIT if state >= cap else ALIVE
    left = _left_table(spec, min(cap, k + horizon) + 1)
    block = 1024
    while kind == ALIVE and s < horizon:
        n = min(block, horizon - s)
        us = _philox.chain_uniforms(seed, path_index, np.arange(s, s + n, dtype=np.uint64))
        for u in us:
            state += -1 if u < left[state] else 1
            s += 1
            if record:
                traj.append(state)
            if state == 0:
                kind = EXTINCT
                break
            if state >= cap:
                kind = CAP_HIT
                break
    return PathOutcome(kind, s, state, np.asarray(traj) if record else None)


def estimate_extinction(spec: ChainSpec, k: int, config: SimConfig, backend: str | None = None) -> SimEstimate:
    """Fraction of paths absorbed by the horizon; survivors are reported as truncated."""
    status, _, _ = simulate_paths(spec, k, config, backend)
    hits = (status == EXTINCT).astype(float)
    return _estimate(hits, int((status != EXTINCT).sum()), clamp=(0.0, 1.0))


def estimate_expectation(
    spec: ChainSpec, k: int, m: int, config: SimConfig, backend: str | None = None
) -> SimEstimate:
    """Sample mean of ``X_m``; extinct paths count as 0."""
    cfg = SimConfig(config.seed, config.paths, m, config.state_cap, config.workers)
    status, _, final = simulate_paths(spec, k, cfg, backend)
    values = np.where(status == EXTINCT, 0, final).astype(float)
    return _estimate(values, int((status == CAP_HIT).sum()))


def estimate_local_time_bm(
    emb: ScaleEmbedding,
    n: int,
    dt: float = _DEFAULT_DT,
    eps: float | None = None,
    paths: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    max_steps: int | None = None,
    backend: str | None = None,
) -> LocalTimeEstimate:
    """Euler-discretised Brownian motion from ``x_n`` until it leaves ``(x_{n-1}, x_{n+1})``.

    Local time at ``x_n`` is estimated as the time spent within ``eps`` of
    ``x_n`` divided by ``2 eps``; the target is ``green_value(emb, n)``.  The
    discretisation bias is ``O(sqrt(dt))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if dt <= 0:
        raise ValueError("dt must be positive")
    eps = 2.0 * math.sqrt(dt) if eps is None else eps
    if eps <= 0:
        raise ValueError("eps must be positive")
    _philox.split_seed(seed)
    lower, start, upper = emb.x(n - 1), emb.x(n), emb.x(n + 1)
    if max_steps is None:
        # mean exit time is (start-lower)(upper-start); allow a wide margin
        max_steps = int(200 * (start - lower) * (upper - start) / dt) + 1000
    kern = _backend.kernels if backend is None else _backend.get(backend)
    band = np.empty(paths, dtype=np.int64)
    right = np.empty(paths, dtype=np.int8)

    def work(chunk):
        a, count = chunk
        b, r, _ = kern.bm_excursions(lower, start, upper, dt, eps, seed, a, count, max_steps)
        band[a : a + count], right[a : a + count] = b, r

    chunks = _chunks(paths, workers)
    if workers == 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, chunks))
    truncated = int((right < 0).sum())
    lt = _estimate(band * dt / (2.0 * eps), truncated)
    exits = _estimate((right == 1).astype(float), truncated, clamp=(0.0, 1.0))
    return LocalTimeEstimate(lt, exits, dt, eps)


def paths_csv(spec: ChainSpec, k: int, seed: int, horizon: int, count: int) -> str:
    """``path,step,state`` rows for the first ``count`` paths."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["path", "step", "state"])
    for p in range(count):
        out = simulate_path(spec, k, seed, p, horizon, record=True)
        for s, state in enumerate(out.trajectory):
            w.writerow([p, s, int(state)])
    return buf.getvalue()
