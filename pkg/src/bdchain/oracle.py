"""Exact finite-horizon dynamic programming over the chain's law.

This is the ground truth the closed forms are tested against.  The law of
``X_m`` started from ``delta_k`` lives on ``0..k+m``; expected local times at
grid points come from expected visit counts times per-visit Green values.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _backend
from .analysis import green_values
from .chain import ChainSpec, ScaleEmbedding

__all__ = [
    "StateDistribution",
    "LocalTimeProfile",
    "Sweep",
    "StateCapExceeded",
    "DEFAULT_STATE_CAP",
    "initial",
    "step_distribution",
    "sweep",
    "expectation_curve",
    "extinction_by_horizon",
    "local_time_profile",
    "check_monotonicity",
    "curve_csv",
    "profile_csv",
]

DEFAULT_STATE_CAP = 1_000_000
MASS_TOL = 1e-12
MONOTONE_TOL = 1e-12


class StateCapExceeded(MemoryError):
    pass


@dataclass(frozen=True)
class StateDistribution:
    step: int
    mass: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        if mass.ndim != 1 or mass.size == 0:
            raise ValueError("mass must be a nonempty vector")
        if (mass < 0).any():
            raise ValueError("negative probability mass")
        if abs(mass.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass.sum()!r} differs from 1")
        object.__setattr__(self, "mass", mass)

    @property
    def top(self) -> int:
        nz = np.flatnonzero(self.mass)
        return int(nz[-1]) if nz.size else 0

    def parity(self) -> int:
        """Parity shared by all occupied states >= 1, or -1 when mixed."""
        occupied = np.flatnonzero(self.mass[1:]) + 1
        if occupied.size == 0:
            return 0
        par = occupied % 2
        return int(par[0]) if (par == par[0]).all() else -1

    def expectation(self) -> float:
        return float(np.dot(np.arange(self.mass.size), self.mass))


@dataclass(frozen=True)
class LocalTimeProfile:
    """Expected local times ``E[L^{x_n}_{T_m}]`` indexed by state ``n``."""

    spec: ChainSpec
    start: int
    horizon: int
    values: np.ndarray
    visits: np.ndarray = field(repr=False)
    grid: np.ndarray = field(repr=False)

    def __post_init__(self):
        if (self.values < 0).any():
            raise ValueError("negative local time")
        if self.values[self.start + self.horizon + 1 :].any():
            raise ValueError("local time beyond reachable states")


class Sweep(NamedTuple):
    final: StateDistribution
    expectation: np.ndarray  # E[X_i], i = 0..m
    extinct: np.ndarray  # P(X_i = 0), i = 0..m
    total: np.ndarray  # total mass, i = 0..m
    visits: np.ndarray | None


def initial(k: int, size: int | None = None) -> StateDistribution:
    if k < 0:
        raise ValueError("start state must be nonnegative")
    mass = np.zeros(max(size or 0, k + 1))
    mass[k] = 1.0
    return StateDistribution(0, mass)


def _tables(spec: ChainSpec, size: int) -> tuple[np.ndarray, np.ndarray]:
    left = np.zeros(size + 1)
    right = np.zeros(size + 1)
    left[1:], right[1:] = spec.arrays(1, size + 1)
    return left, right


def _run(spec, dist: StateDistribution, steps: int, state_cap: int, track_visits: bool, backend=None):
    kern = _backend.kernels if backend is None else _backend.get(backend)
    top = dist.top
    size = top + steps + 1
    if size > state_cap:
        raise StateCapExceeded(f"{size} states exceed the cap of {state_cap}")
    mass = np.zeros(size)
    mass[: min(size, dist.mass.size)] = dist.mass[:size]
    left, right = _tables(spec, size + 1)
    visits = np.zeros(size) if track_visits else None
    e0, x0, t0 = dist.expectation(), float(mass[0]), float(mass.sum())
    if steps:
        expect, extinct, total, _ = kern.dp_sweep(left, right, mass, top, steps, dist.parity(), visits)
    else:
        expect = extinct = total = np.empty(0)
    final = StateDistribution(dist.step + steps, np.clip(mass, 0.0, None))
    return Sweep(
        final,
        np.concatenate(([e0], expect)),
        np.concatenate(([x0], extinct)),
        np.concatenate(([t0], total)),
        visits,
    )


def step_distribution(spec: ChainSpec, dist: StateDistribution) -> StateDistribution:
    """Advance a distribution by one step; state 0 keeps its mass."""
    return _run(spec, dist, 1, DEFAULT_STATE_CAP, False).final


def sweep(
    spec: ChainSpec,
    k: int,
    m: int,
    state_cap: int = DEFAULT_STATE_CAP,
    track_visits: bool = False,
    backend: str | None = None,
) -> Sweep:
    """Run ``m`` exact steps from ``delta_k`` and keep per-step summaries."""
    if k < 1:
        raise ValueError("start state must be >= 1")
    if m < 0:
        raise ValueError("horizon must be >= 0")
    return _run(spec, initial(k), m, state_cap, track_visits, backend)


def expectation_curve(spec: ChainSpec, k: int, m: int, state_cap: int = DEFAULT_STATE_CAP) -> np.ndarray:
    """``E[X_i]`` for ``i = 0..m``."""
    return sweep(spec, k, m, state_cap).expectation


def extinction_by_horizon(spec: ChainSpec, k: int, m: int, state_cap: int = DEFAULT_STATE_CAP) -> float:
    """``P(X_m = 0)``: absorbed by step ``m``."""
    return float(sweep(spec, k, m, state_cap).extinct[-1])


def local_time_profile(
    spec: ChainSpec,
    emb: ScaleEmbedding,
    k: int,
    m: int,
    state_cap: int = DEFAULT_STATE_CAP,
) -> LocalTimeProfile:
    """Exact ``E[L^{x_n}_{T_m}]`` for all ``n``.

    Brownian local time at ``x_n`` accrues only during skeleton steps launched
    from ``x_n``, each contributing ``G_n`` in expectation, so the profile is
    ``G_n`` times the expected number of visits to ``n`` among steps ``0..m-1``.
    """
    if emb.spec != spec:
        raise ValueError("embedding belongs to a different chain")
    run = sweep(spec, k, m, state_cap, track_visits=True)
    size = k + m + 2
    visits = np.zeros(size)
    visits[: run.visits.size] = run.visits[:size]
    visits[0] = 0.0  # absorbed mass launches no steps
    values = green_values(emb, size) * visits
    return LocalTimeProfile(spec, k, m, values, visits, emb.x_array(size).copy())


class MonotonicityReport(NamedTuple):
    ok: bool
    violation: int | None


def check_monotonicity(profile: LocalTimeProfile, k: int) -> MonotonicityReport:
    """Check ``E[L^{x_n}] >= E[L^{x_{n+1}}]`` for every ``n >= k``."""
    vals = profile.values
    if k + 1 >= vals.size:
        return MonotonicityReport(True, None)
    bad = np.flatnonzero(vals[k:-1] < vals[k + 1 :] - MONOTONE_TOL)
    if bad.size:
        return MonotonicityReport(False, int(bad[0]) + k)
    return MonotonicityReport(True, None)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def curve_csv(run: Sweep) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "expectation", "extinct_mass"])
    for i, (e, x) in enumerate(zip(run.expectation, run.extinct)):
        w.writerow([i, _fmt(e), _fmt(x)])
    return buf.getvalue()


def profile_csv(profile: LocalTimeProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "x_n", "expected_local_time"])
    for n in range(1, profile.start + profile.horizon + 1):
        w.writerow([n, _fmt(profile.grid[n]), _fmt(profile.values[n])])
    return buf.getvalue()
