"""Closed forms read off the scale embedding.

* extinction probability ``P_k = (x_inf - x_k) / x_inf`` (1 when ``x_inf`` is infinite);
* ``lim E[X_m] = x_k * phi'_inf = x_k / t_inf``;
* expected Brownian local times at grid points, and the Tanaka-type identity
  ``E[X_m] = k + sum_n (phi'_{n+1} - phi'_n)/2 * E[L^{x_n}_{T_m}]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import LimitPolicy, LimitVerdict, VerdictKind, classify_t_limit, sum_t
from .chain import ScaleEmbedding

__all__ = [
    "ExtinctionResult",
    "LimitKind",
    "LimitExpectation",
    "CertificateError",
    "TransientChainError",
    "ConsistencyError",
    "extinction_probability",
    "limit_expectation",
    "green_value",
    "log_green_value",
    "green_values",
    "expected_local_time_infinity",
    "tanaka_expectation",
]

_EPS = np.finfo(float).eps
_IDENTITY_TOL = 1e-12
_FORM_TOL = 1e-12


class CertificateError(RuntimeError):
    """A limit the closed form depends on could not be certified."""

    def __init__(self, message: str, *verdicts: LimitVerdict):
        super().__init__(message)
        self.verdicts = verdicts


class TransientChainError(ValueError):
    """The chain survives with positive probability where extinction is required."""


class ConsistencyError(ArithmeticError):
    """Two algebraically equal routes to a quantity disagreed."""


@dataclass(frozen=True)
class ExtinctionResult:
    value: float
    exact_one: bool
    error_bound: float
    certificates: tuple[LimitVerdict, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"extinction probability {self.value} outside [0, 1]")
        if self.exact_one and self.value != 1.0:
            raise ValueError("exact_one requires value 1")


class LimitKind(enum.Enum):
    FINITE = "finite"
    INFINITE = "infinite"
    NO_LIMIT = "no_limit"


@dataclass(frozen=True)
class LimitExpectation:
    kind: LimitKind
    value: float | None = None
    error_bound: float | None = None
    reason: str = ""
    verdict: LimitVerdict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is LimitKind.FINITE and (self.value is None or self.value < 0):
            raise ValueError("finite limit must be a nonnegative value")


def extinction_probability(
    emb: ScaleEmbedding, k: int, policy: LimitPolicy | None = None
) -> ExtinctionResult:
    """Probability that the chain started at ``k`` is ever absorbed at 0.

    Raises :class:`CertificateError` when the series verdict is inconclusive;
    :func:`bdchain.oracle.extinction_by_horizon` is the fallback then.
    """
    if k < 0:
        raise ValueError("start state must be nonnegative")
    if k == 0:
        return ExtinctionResult(1.0, True, 0.0)
    verdict = sum_t(emb, policy)
    if verdict.kind is VerdictKind.DIVERGES:
        return ExtinctionResult(1.0, True, 0.0, (verdict,))
    if verdict.kind is not VerdictKind.CONVERGES:
        raise CertificateError(f"cannot certify sum of t_n: {verdict.reason}", verdict)

    x_inf, tail_err = verdict.value, verdict.error_bound
    x_k = emb.x(k)
    value = min(1.0, max(0.0, (x_inf - x_k) / x_inf))
    # first-order propagation of the series remainder, plus rounding
    bound = float((x_k / x_inf**2) * tail_err + 4 * _EPS)
    return ExtinctionResult(value, False, bound, (verdict,))


def limit_expectation(
    emb: ScaleEmbedding, k: int, policy: LimitPolicy | None = None
) -> LimitExpectation:
    """Limit of ``E[X_m]`` as ``m -> infinity`` for the chain started at ``k``."""
    if k < 1:
        raise ValueError("start state must be >= 1")
    verdict = classify_t_limit(emb, policy)
    if verdict.kind is VerdictKind.ZERO:
        return LimitExpectation(LimitKind.INFINITE, reason="t_n -> 0, slope -> infinity", verdict=verdict)
    if verdict.kind is VerdictKind.DIVERGES:
        return LimitExpectation(LimitKind.FINITE, 0.0, 0.0, "t_n -> infinity, slope -> 0", verdict)
    if verdict.kind is VerdictKind.INCONCLUSIVE:
        return LimitExpectation(LimitKind.NO_LIMIT, reason=verdict.reason, verdict=verdict)

    t_inf = verdict.value
    x_k = emb.x(k)
    by_t = x_k / t_inf
    by_slope = x_k * (1.0 / t_inf)
    if abs(by_t - by_slope) > _FORM_TOL * max(abs(by_t), 1.0):
        raise ConsistencyError(f"x_k/t_inf = {by_t!r} but x_k*phi'_inf = {by_slope!r}")
    bound = float(x_k * verdict.error_bound / t_inf**2 + 4 * _EPS * by_t)
    return LimitExpectation(LimitKind.FINITE, by_t, bound, verdict=verdict)


def log_green_value(emb: ScaleEmbedding, n: int) -> float:
    if n < 1:
        raise ValueError("green value is defined for n >= 1")
    lt0, lt1 = emb.log_t(n - 1), emb.log_t(n)
    hi, lo = max(lt0, lt1), min(lt0, lt1)
    return math.log(2.0) + lt0 + lt1 - hi - math.log1p(math.exp(lo - hi))


def green_value(emb: ScaleEmbedding, n: int) -> float:
    """Expected local time at ``x_n`` per skeleton step launched from ``x_n``.

    ``2 t_{n-1} t_n / (t_{n-1} + t_n)``, checked against ``2 r_n t_n`` and
    ``2 l_n t_{n-1}``.
    """
    if n < 1:
        raise ValueError("green value is defined for n >= 1")
    t0, t1 = emb.t(n - 1), emb.t(n)
    l, r = emb.spec.probabilities(n)
    g = 2.0 * t1 * (t0 / (t0 + t1))  # no intermediate t0 * t1 to underflow
    if not (np.isfinite(g) and g > 1e-290 and np.isfinite(t0 + t1)):
        return math.exp(log_green_value(emb, n))
    for other in (2.0 * r * t1, 2.0 * l * t0):
        if abs(g - other) > _IDENTITY_TOL * g:
            raise ConsistencyError(f"green value identity broken at n={n}: {g!r} vs {other!r}")
    return g


def green_values(emb: ScaleEmbedding, stop: int) -> np.ndarray:
    """``G_n`` for ``0 <= n < stop``; index 0 is 0 (nothing accrues at the absorbing point)."""
    out = np.zeros(stop)
    if stop <= 1:
        return out
    t = emb.t_array(stop)
    log_t = emb.log_t_array(stop)
    with np.errstate(over="ignore", invalid="ignore"):
        g = 2.0 * t[1:] * (t[:-1] / (t[:-1] + t[1:]))
    hi = np.maximum(log_t[:-1], log_t[1:])
    lo = np.minimum(log_t[:-1], log_t[1:])
    log_g = math.log(2.0) + log_t[:-1] + log_t[1:] - hi - np.log1p(np.exp(lo - hi))
    bad = ~np.isfinite(g) | (g < 1e-290)
    with np.errstate(over="ignore", under="ignore"):
        g[bad] = np.exp(log_g[bad])
    out[1:] = g
    return out


def expected_local_time_infinity(
    emb: ScaleEmbedding, k: int, n: int, policy: LimitPolicy | None = None
) -> float:
    """``E[L^{x_n}_inf] = 2 min(x_k, x_n)`` for chains that die out almost surely."""
    if k < 1 or n < 1:
        raise ValueError("k and n must be >= 1")
    ext = extinction_probability(emb, k, policy)
    if ext.value < 1.0:
        raise TransientChainError(
            f"chain survives with probability {1 - ext.value:.6g}; the formula needs certain extinction"
        )
    return 2.0 * min(emb.x(k), emb.x(n))


def tanaka_expectation(emb: ScaleEmbedding, k: int, profile) -> float:
    """``k + sum_n (phi'_{n+1} - phi'_n)/2 * E[L^{x_n}_{T_m}]`` from a local-time profile."""
    if profile.start != k:
        raise ValueError(f"profile started at {profile.start}, not {k}")
    if profile.spec != emb.spec:
        raise ValueError("profile was computed for a different chain")
    top = profile.start + profile.horizon
    if top < 1:
        return float(k)
    stop = top + 2
    t = emb.t_array(stop)
    log_t = emb.log_t_array(stop)
    values, visits = profile.values, profile.visits
    terms = []
    for n in range(1, top + 1):
        if visits[n] == 0.0:
            continue
        v = values[n]  # may have underflowed even though visits[n] > 0
        t0, t1 = t[n - 1], t[n]
        if 1e-290 < min(t0, t1) and max(t0, t1) < 1e290 and v > 1e-290:
            terms.append((1.0 / t1 - 1.0 / t0) / 2.0 * v)
            continue
        # out of range: |1/t_n - 1/t_{n-1}| = exp(-log t_n) |1 - t_n/t_{n-1}|
        ratio = math.exp(log_t[n] - log_t[n - 1])
        if ratio == 1.0:
            continue
        log_coef = -log_t[n] + math.log(abs(1.0 - ratio)) - math.log(2.0)
        log_v = math.log(visits[n]) + log_green_value(emb, n)
        terms.append(math.copysign(math.exp(log_coef + log_v), 1.0 - ratio))
    return k + math.fsum(terms)
