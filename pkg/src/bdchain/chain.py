"""Birth-death chains and their Brownian scale embedding.

A chain on the nonnegative integers steps right from ``n`` with probability
``r_n`` and left with probability ``l_n``; state 0 is absorbing.  The scale
embedding places state ``n`` at ``x_n = t_0 + ... + t_{n-1}`` where
``t_0 = 1`` and ``t_n = t_{n-1} * l_n / r_n``.  A Brownian motion started at
``x_k`` and observed at successive hits of the grid ``{x_n}`` moves like the
chain.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "ChainSpec",
    "ConstantBias",
    "PaperHarmonic",
    "Tabular",
    "ScaleEmbedding",
    "SkeletonStep",
    "ChainSpecError",
    "probabilities",
    "parse_chain",
    "read_table",
    "skeleton_step_distribution",
    "SKELETON_TOL",
]

SKELETON_TOL = 1e-12
_TABLE_TOL = 1e-12
_CHUNK = 4096


class ChainSpecError(ValueError):
    """Raised for malformed or inconsistent chain specifications."""


class ChainSpec:
    """Transition rule ``n -> (l_n, r_n)`` for ``n >= 1``.

    Subclasses implement :meth:`_arrays`.  Analytic hints are declared through
    :attr:`sum_hint` / :attr:`limit_hint` and are consumed by the limit
    classifiers when numerical certificates cannot decide.
    """

    #: ``"diverges"`` when sum of t_n is known to diverge, else None.
    sum_hint: str | None = None
    #: ``"zero"`` / ``"infinity"`` when the limit of t_n is known, else None.
    limit_hint: str | None = None

    def arrays(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(l, r)`` for states ``start <= n < stop`` as float arrays."""
        if start < 1:
            raise ChainSpecError("state 0 is absorbing and has no free transition")
        if stop <= start:
            return np.empty(0), np.empty(0)
        return self._arrays(start, stop)

    def probabilities(self, n: int) -> tuple[float, float]:
        l, r = self.arrays(n, n + 1)
        return float(l[0]), float(r[0])

    def _arrays(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def text(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantBias(ChainSpec):
    """Right step with probability ``p`` from every state."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ChainSpecError(f"constant bias needs 0 < p < 1, got {self.p!r}")

    @property
    def sum_hint(self):
        # t_n = ((1-p)/p)^n >= 1 for p <= 1/2, so the partial sums exceed n
        return "diverges" if self.p <= 0.5 else None

    def _arrays(self, start, stop):
        size = stop - start
        return np.full(size, 1.0 - self.p), np.full(size, self.p)

    def text(self):
        return f"constant:p={self.p!r}"


@dataclass(frozen=True)
class PaperHarmonic(ChainSpec):
    """``l_n = n/(2n+1)``, ``r_n = (n+1)/(2n+1)``, so that ``t_n = 1/(n+1)``.

    Extinction is certain although the mean grows without bound; both facts
    rest on the harmonic series, which no finite sweep can certify, so they
    are declared as hints.
    """

    sum_hint = "diverges"
    limit_hint = "zero"

    def _arrays(self, start, stop):
        n = np.arange(start, stop, dtype=float)
        return n / (2.0 * n + 1.0), (n + 1.0) / (2.0 * n + 1.0)

    def text(self):
        return "paper-harmonic"


@dataclass(frozen=True)
class Tabular(ChainSpec):
    """Explicit ``(l_n, r_n)`` for ``n = 1..len(entries)``, then ``tail``.

    The tail is evaluated at the absolute state index, so ``tail`` governs
    state ``len(entries) + 1`` exactly as it would govern it on its own.
    """

    entries: tuple[tuple[float, float], ...]
    tail: ChainSpec
    source: str | None = None

    def __post_init__(self):
        if not isinstance(self.tail, ChainSpec):
            raise ChainSpecError("a table needs an explicit tail rule")
        entries = tuple((float(l), float(r)) for l, r in self.entries)
        for n, (l, r) in enumerate(entries, start=1):
            if not (0.0 < l < 1.0 and 0.0 < r < 1.0):
                raise ChainSpecError(f"state {n}: probabilities must lie in (0, 1), got l={l}, r={r}")
            if abs(l + r - 1.0) > _TABLE_TOL:
                raise ChainSpecError(f"state {n}: l + r = {l + r!r}, expected 1")
        object.__setattr__(self, "entries", entries)

    # a finite head rescales the tail's t_n by a constant factor
    @property
    def sum_hint(self):
        return self.tail.sum_hint

    @property
    def limit_hint(self):
        return self.tail.limit_hint

    def _arrays(self, start, stop):
        size = len(self.entries)
        l = np.empty(stop - start)
        r = np.empty(stop - start)
        head_stop = min(stop, size + 1)
        if start <= size:
            block = np.asarray(self.entries[start - 1 : head_stop - 1], dtype=float)
            l[: head_stop - start] = block[:, 0]
            r[: head_stop - start] = block[:, 1]
        tail_start = max(start, size + 1)
        if tail_start < stop:
            tl, tr = self.tail.arrays(tail_start, stop)
            l[tail_start - start :] = tl
            r[tail_start - start :] = tr
        return l, r

    def text(self):
        src = self.source if self.source is not None else "<memory>"
        return f"table:{src},tail={self.tail.text()}"


def probabilities(spec: ChainSpec, n: int) -> tuple[float, float]:
    """Return ``(l_n, r_n)``; state 0 is rejected."""
    return spec.probabilities(n)


def read_table(path: str | Path) -> list[tuple[float, float]]:
    """Read a ``n,l,r`` CSV with 1-based consecutive ``n``."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["n", "l", "r"]:
            raise ChainSpecError(f"{path}: header must be 'n,l,r'")
        for expected, row in enumerate(reader, start=1):
            try:
                n = int(row["n"])
                l, r = float(row["l"]), float(row["r"])
            except (TypeError, ValueError) as exc:
                raise ChainSpecError(f"{path}: bad row {expected}: {exc}") from None
            if n != expected:
                raise ChainSpecError(f"{path}: expected n={expected}, got n={n}")
            rows.append((l, r))
    if not rows:
        raise ChainSpecError(f"{path}: table is empty")
    return rows


def parse_chain(text: str) -> ChainSpec:
    """Parse ``constant:p=0.6``, ``paper-harmonic`` or ``table:FILE,tail=SPEC``."""
    text = text.strip()
    if text == "paper-harmonic":
        return PaperHarmonic()
    if text.startswith("constant:"):
        key, _, value = text[len("constant:") :].partition("=")
        if key.strip() != "p" or not value:
            raise ChainSpecError(f"expected constant:p=VALUE, got {text!r}")
        try:
            p = float(value)
        except ValueError:
            raise ChainSpecError(f"bad probability in {text!r}") from None
        return ConstantBias(p)
    if text.startswith("table:"):
        body = text[len("table:") :]
        path, sep, tail = body.partition(",tail=")
        if not sep or not tail:
            raise ChainSpecError("table chains need an explicit ',tail=SPEC' clause")
        return Tabular(tuple(read_table(path)), parse_chain(tail), source=path)
    raise ChainSpecError(f"unknown chain spec {text!r}")


class SkeletonStep(NamedTuple):
    """One step of the embedded chain from grid point ``x_n``."""

    left_point: float
    right_point: float
    left_prob: float
    right_prob: float


class ScaleEmbedding:
    """Lazily grown caches of ``t_n``, ``log t_n`` and ``x_n`` for a chain.

    Caches only grow.  Growth happens under a lock and publishes fresh arrays,
    so readers of an already computed prefix never block.
    """

    def __init__(self, spec: ChainSpec):
        self.spec = spec
        self._lock = threading.Lock()
        # t[0] = 1, x[0] = 0; len(x) == len(t) + 1
        self._t = np.ones(1)
        self._log_t = np.zeros(1)
        self._x = np.array([0.0, 1.0])
        self._sum = 1.0
        self._comp = 0.0

    def __len__(self):
        return len(self._t)

    def ensure(self, n: int) -> None:
        """Make ``t_0..t_n`` and ``x_0..x_{n+1}`` available."""
        if n < len(self._t):
            return
        with self._lock:
            have = len(self._t)
            if n < have:
                return
            target = max(n + 1, 2 * have, _CHUNK)
            self._grow(have, target)

    def _grow(self, have: int, target: int) -> None:
        with np.errstate(over="ignore", under="ignore"):
            self._extend(have, target)

    def _extend(self, have: int, target: int) -> None:
        l, r = self.spec.arrays(have, target)
        log_ratio = np.log(l) - np.log(r)
        log_t = self._log_t[-1] + np.cumsum(log_ratio)
        t = self._t[-1] * np.cumprod(l / r)
        bad = ~np.isfinite(t) | (t < np.finfo(float).tiny)
        if bad.any():
            # recursion saturated; fall back to the log form there
            t[bad] = np.exp(log_t[bad])

        # compensated prefix sums of t (vectorised TwoSum over cumsum)
        s = np.cumsum(np.concatenate(([self._sum], t)))
        a, b, snew = s[:-1], t, s[1:]
        with np.errstate(invalid="ignore"):
            bb = snew - a
            err = (a - (snew - bb)) + (b - bb)
        err[~np.isfinite(err)] = 0.0
        comp = self._comp + np.cumsum(err)
        x = snew + comp
        x[~np.isfinite(snew)] = snew[~np.isfinite(snew)]

        self._t = np.concatenate((self._t, t))
        self._log_t = np.concatenate((self._log_t, log_t))
        self._x = np.concatenate((self._x, x))
        self._sum = float(snew[-1])
        self._comp = float(comp[-1])

    # -- scalar accessors -------------------------------------------------
    def t(self, n: int) -> float:
        self.ensure(n)
        return float(self._t[n])

    def log_t(self, n: int) -> float:
        self.ensure(n)
        return float(self._log_t[n])

    def x(self, n: int) -> float:
        if n < 0:
            raise ValueError("grid index must be nonnegative")
        self.ensure(n)
        return float(self._x[n])

    def phi_slope(self, n: int) -> float:
        """Slope of the piecewise-linear inverse of ``x`` on ``(x_{n-1}, x_n)``."""
        if n < 1:
            raise ValueError("phi slope is defined for n >= 1")
        return 1.0 / self.t(n - 1)

    # -- array accessors (read-only views) --------------------------------
    def t_array(self, stop: int) -> np.ndarray:
        self.ensure(stop - 1)
        return self._t[:stop]

    def log_t_array(self, stop: int) -> np.ndarray:
        self.ensure(stop - 1)
        return self._log_t[:stop]

    def x_array(self, stop: int) -> np.ndarray:
        self.ensure(stop - 1)
        return self._x[:stop]

    def right_probabilities(self, stop: int) -> np.ndarray:
        """Grid-derived ``t_{n-1}/(t_{n-1}+t_n)`` for ``1 <= n < stop`` (index 0 is nan)."""
        log_t = self.log_t_array(stop)
        out = np.full(stop, np.nan)
        # 1 / (1 + t_n/t_{n-1}), with the ratio taken in log form
        out[1:] = 1.0 / (1.0 + np.exp(log_t[1:] - log_t[:-1]))
        t = self.t_array(stop)
        normal = (t[1:] > 1e-290) & (t[:-1] > 1e-290) & (t[1:] < 1e290) & (t[:-1] < 1e290)
        with np.errstate(over="ignore", invalid="ignore"):
            direct = t[:-1] / (t[:-1] + t[1:])
        out[1:][normal] = direct[normal]
        return out


def skeleton_step_distribution(emb: ScaleEmbedding, n: int) -> SkeletonStep:
    """Exit law of Brownian motion from ``x_n`` over ``(x_{n-1}, x_{n+1})``.

    The law is computed from the grid and checked against ``(l_n, r_n)``.
    """
    if n < 1:
        raise ValueError("state 0 is absorbing")
    right = float(emb.right_probabilities(n + 1)[n])
    l, r = emb.spec.probabilities(n)
    if abs(right - r) > SKELETON_TOL or abs((1.0 - right) - l) > SKELETON_TOL:
        raise ArithmeticError(f"skeleton law at n={n} gives r={right!r}, chain has r={r!r}")
    return SkeletonStep(emb.x(n - 1), emb.x(n + 1), 1.0 - right, right)
