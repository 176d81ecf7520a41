import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdchain import (
    ConstantBias,
    LimitPolicy,
    LimitVerdict,
    PaperHarmonic,
    ScaleEmbedding,
    Tabular,
    VerdictKind,
    classify_t_limit,
    sum_t,
)
from helpers import Alternating, PowerLaw


def verdict(fn, spec, **kw):
    return fn(ScaleEmbedding(spec), LimitPolicy(**kw) if kw else None)


def test_t_limit_examples():
    v = verdict(classify_t_limit, ConstantBias(0.5))
    assert v.kind is VerdictKind.CONVERGES and v.value == 1.0 and v.error_bound < 1e-12
    assert verdict(classify_t_limit, PaperHarmonic()).kind is VerdictKind.ZERO
    assert verdict(classify_t_limit, ConstantBias(0.4)).kind is VerdictKind.DIVERGES
    assert verdict(classify_t_limit, ConstantBias(0.6)).kind is VerdictKind.ZERO


def test_sum_examples():
    v = verdict(sum_t, ConstantBias(0.6))
    assert v.kind is VerdictKind.CONVERGES
    assert abs(v.value - 3.0) <= v.error_bound <= 3e-12
    assert verdict(sum_t, ConstantBias(0.5)).kind is VerdictKind.DIVERGES
    assert verdict(sum_t, ConstantBias(0.3)).kind is VerdictKind.DIVERGES
    ph = verdict(sum_t, PaperHarmonic())
    assert ph.kind is VerdictKind.DIVERGES and "hint" in ph.reason


@pytest.mark.parametrize("p", [0.55, 0.6, 0.75, 0.9])
def test_sum_sound_against_closed_form(p):
    v = verdict(sum_t, ConstantBias(p))
    closed = 1.0 / (1.0 - (1.0 - p) / p)
    assert v.kind is VerdictKind.CONVERGES
    assert abs(v.value - closed) <= v.error_bound


def test_tabular_with_constant_tail_limit():
    spec = Tabular(((0.2, 0.8), (0.6, 0.4)), ConstantBias(0.5))
    v = verdict(classify_t_limit, spec)
    assert v.kind is VerdictKind.CONVERGES
    assert v.value == pytest.approx(0.25 * 1.5, rel=1e-14)


def test_slow_convergent_sum_is_inconclusive():
    v = verdict(sum_t, PowerLaw(2.0), max_terms=1 << 17)
    assert v.kind is VerdictKind.INCONCLUSIVE
    assert "ratio certificate" in v.reason


def test_oscillating_t_is_inconclusive():
    v = verdict(classify_t_limit, Alternating())
    assert v.kind is VerdictKind.INCONCLUSIVE
    assert "stabilised" in v.reason
    # linear growth stays far below the threshold: no divergence claim without a hint
    assert verdict(sum_t, Alternating()).kind is VerdictKind.INCONCLUSIVE


def test_slow_geometric_never_called_divergent():
    for terms in (100, 1000, 1 << 14):
        v = verdict(sum_t, Tabular(((0.5, 0.5),), ConstantBias(0.501)), max_terms=terms)
        assert v.kind is not VerdictKind.DIVERGES
    v = verdict(sum_t, ConstantBias(0.501))
    assert v.kind is VerdictKind.CONVERGES
    assert v.value == pytest.approx(1 / (1 - 0.499 / 0.501), rel=1e-12)


def test_verdict_validation():
    with pytest.raises(ValueError):
        LimitVerdict(VerdictKind.CONVERGES, 10)
    with pytest.raises(ValueError):
        LimitVerdict(VerdictKind.INCONCLUSIVE, 10)
    with pytest.raises(ValueError):
        LimitPolicy(ratio_window=1)
    with pytest.raises(ValueError):
        LimitPolicy(rel_tol=0)


@given(st.floats(0.05, 0.95), st.integers(11, 16))
def test_verdict_kind_stable_when_budget_doubles(p, log_terms):
    spec = ConstantBias(p)
    for fn in (sum_t, classify_t_limit):
        small = verdict(fn, spec, max_terms=1 << log_terms)
        large = verdict(fn, spec, max_terms=1 << (log_terms + 1))
        if small.kind is not VerdictKind.INCONCLUSIVE:
            assert large.kind is small.kind
        if small.kind is VerdictKind.CONVERGES:
            assert abs(large.value - small.value) <= small.error_bound + large.error_bound


@given(st.sampled_from([PowerLaw(2.0), PowerLaw(3.0), Alternating(0.6)]))
def test_inconclusive_always_explains(spec):
    for fn in (sum_t, classify_t_limit):
        v = verdict(fn, spec, max_terms=1 << 14)
        if v.kind is VerdictKind.INCONCLUSIVE:
            assert v.reason
