"""Certified classification of ``x_inf = sum t_n`` and ``t_inf = lim t_n``.

Nothing here assumes a limit exists.  Each verdict is backed by a named
certificate over a finite sweep of the scale sequence, or an analytic hint
declared by the chain family; otherwise the answer is ``INCONCLUSIVE``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .chain import ScaleEmbedding

__all__ = ["VerdictKind", "LimitVerdict", "LimitPolicy", "classify_t_limit", "sum_t"]

_EPS = np.finfo(float).eps
_LOG_TINY = math.log(1e-300)
_LOG_HUGE = math.log(1e300)
_FIRST_CHECK = 1024


class VerdictKind(enum.Enum):
    CONVERGES = "converges"
    DIVERGES = "diverges"
    ZERO = "zero"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class LimitVerdict:
    kind: VerdictKind
    terms_examined: int
    value: float | None = None
    error_bound: float | None = None
    reason: str = ""

    def __post_init__(self):
        if self.kind is VerdictKind.CONVERGES:
            if self.value is None or self.error_bound is None or self.error_bound < 0:
                raise ValueError("a convergent verdict needs a value and a nonnegative bound")
        if self.kind is VerdictKind.INCONCLUSIVE and not self.reason:
            raise ValueError("an inconclusive verdict needs a reason")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": self.value,
            "error_bound": self.error_bound,
            "terms_examined": self.terms_examined,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class LimitPolicy:
    max_terms: int = 1_000_000
    rel_tol: float = 1e-12
    ratio_window: int = 64
    divergence_threshold: float = 1e15

    def __post_init__(self):
        if self.ratio_window < 2 or self.max_terms < self.ratio_window:
            raise ValueError("need max_terms >= ratio_window >= 2")
        if self.rel_tol <= 0 or self.divergence_threshold <= 0:
            raise ValueError("tolerances must be positive")


def _checkpoints(policy: LimitPolicy):
    n = min(max(_FIRST_CHECK, policy.ratio_window + 1), policy.max_terms)
    while True:
        yield n
        if n >= policy.max_terms:
            return
        n = min(2 * n, policy.max_terms)


def classify_t_limit(emb: ScaleEmbedding, policy: LimitPolicy | None = None) -> LimitVerdict:
    """Decide whether ``t_n`` settles, vanishes or blows up."""
    policy = policy or LimitPolicy()
    hint = emb.spec.limit_hint
    if hint == "zero":
        return LimitVerdict(VerdictKind.ZERO, 0, 0.0, 0.0, "analytic hint: t_n -> 0")
    if hint == "infinity":
        return LimitVerdict(VerdictKind.DIVERGES, 0, reason="analytic hint: t_n -> infinity")

    w = policy.ratio_window
    for n in _checkpoints(policy):
        t = emb.t_array(n)
        log_t = emb.log_t_array(n)
        tail_log = log_t[n - w :]
        steps = np.diff(tail_log)

        last = t[-1]
        if np.isfinite(last) and last > 1e-290 and last < 1e290:
            dev = np.abs(t[n - w :] - last)
            if dev.max() / last < policy.rel_tol:
                return LimitVerdict(VerdictKind.CONVERGES, n, float(last), float(dev.max()))
        if tail_log[-1] < _LOG_TINY and (steps < 0).all():
            return LimitVerdict(VerdictKind.ZERO, n, 0.0, float(np.exp(tail_log[-1])))
        if tail_log[-1] > _LOG_HUGE and (steps > 0).all():
            return LimitVerdict(VerdictKind.DIVERGES, n)

    return LimitVerdict(
        VerdictKind.INCONCLUSIVE,
        n,
        reason=(
            f"after {n} terms t_n neither stabilised within rel_tol={policy.rel_tol:g} over "
            f"the last {w} terms nor left [1e-300, 1e300] monotonically "
            f"(last log t_n = {float(log_t[-1]):.6g})"
        ),
    )


def sum_t(emb: ScaleEmbedding, policy: LimitPolicy | None = None) -> LimitVerdict:
    """Decide convergence of ``sum_j t_j`` with a tail bound, or divergence.

    A convergence claim needs every ratio ``t_{j+1}/t_j`` in the trailing window
    to stay below some ``rho < 1``; the remainder is then bounded by the
    geometric tail ``t_N rho / (1 - rho)``.  Divergence is claimed only from an
    analytic hint or a partial sum above ``divergence_threshold``: no finite
    sweep separates a slow geometric decay from a divergent series.
    """
    policy = policy or LimitPolicy()
    if emb.spec.sum_hint == "diverges":
        return LimitVerdict(VerdictKind.DIVERGES, 0, reason="analytic hint: sum of t_n diverges")

    w = policy.ratio_window
    for n in _checkpoints(policy):
        partial = float(emb.x_array(n + 1)[n])  # t_0 + ... + t_{n-1}
        if partial > policy.divergence_threshold:
            return LimitVerdict(VerdictKind.DIVERGES, n, reason="partial sum above divergence threshold")
        log_t = emb.log_t_array(n)
        ratios = np.exp(np.diff(log_t[n - w :]))
        rho = float(ratios.max())
        if rho < 1.0:
            last = float(emb.t_array(n)[-1])
            tail = float(last * rho / (1.0 - rho))
            # compensated sum: a few ulps of rounding on top of the tail
            bound = tail + 4 * _EPS * partial
            if bound <= policy.rel_tol * partial:
                return LimitVerdict(VerdictKind.CONVERGES, n, partial, float(bound))

    return LimitVerdict(
        VerdictKind.INCONCLUSIVE,
        n,
        reason=(
            f"ratio certificate failed: after {n} terms the trailing {w} ratios reach "
            f"{rho:.6g} and the partial sum {partial:.6g} stays below "
            f"{policy.divergence_threshold:g}"
        ),
    )
