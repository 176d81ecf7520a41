import math
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bdchain import (
    ChainSpecError,
    ConstantBias,
    PaperHarmonic,
    ScaleEmbedding,
    Tabular,
    parse_chain,
    probabilities,
    read_table,
    skeleton_step_distribution,
)

FAMILIES = [ConstantBias(0.4), ConstantBias(0.5), ConstantBias(0.6), PaperHarmonic()]


# -- specs ----------------------------------------------------------------


def test_probabilities_examples():
    assert probabilities(PaperHarmonic(), 1) == pytest.approx((1 / 3, 2 / 3), abs=1e-15)
    assert probabilities(ConstantBias(0.5), 17) == (0.5, 0.5)
    assert probabilities(ConstantBias(0.6), 7) == pytest.approx((0.4, 0.6), abs=1e-15)


@pytest.mark.parametrize("spec", FAMILIES)
def test_absorbing_state_rejected(spec):
    with pytest.raises(ChainSpecError):
        probabilities(spec, 0)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_constant_bias_range(p):
    with pytest.raises(ChainSpecError):
        ConstantBias(p)


def test_tabular_validation():
    with pytest.raises(ChainSpecError):
        Tabular(((0.3, 0.6),), ConstantBias(0.5))
    with pytest.raises(ChainSpecError):
        Tabular(((0.0, 1.0),), ConstantBias(0.5))
    with pytest.raises(ChainSpecError):
        Tabular(((0.3, 0.7),), None)


def test_tabular_head_then_tail():
    spec = Tabular(((0.3, 0.7), (0.8, 0.2)), PaperHarmonic())
    assert spec.probabilities(1) == (0.3, 0.7)
    assert spec.probabilities(2) == (0.8, 0.2)
    # tail sees the absolute index
    assert spec.probabilities(3) == pytest.approx(PaperHarmonic().probabilities(3))
    l, r = spec.arrays(1, 6)
    assert l[:2].tolist() == [0.3, 0.8]
    assert spec.sum_hint == "diverges"


def test_parse_round_trip(tmp_path):
    table = tmp_path / "head.csv"
    table.write_text("n,l,r\n1,0.3,0.7\n2,0.45,0.55\n")
    for text in ("constant:p=0.6", "paper-harmonic", f"table:{table},tail=constant:p=0.5"):
        spec = parse_chain(text)
        assert parse_chain(spec.text()) == spec
    assert read_table(table) == [(0.3, 0.7), (0.45, 0.55)]


@pytest.mark.parametrize(
    "body",
    ["n,l,r\n1,0.3,0.6\n", "n,l,r\n2,0.5,0.5\n", "n,x,y\n1,0.5,0.5\n", "n,l,r\n", "n,l,r\n1,a,b\n"],
)
def test_bad_tables(tmp_path, body):
    table = tmp_path / "t.csv"
    table.write_text(body)
    with pytest.raises(ChainSpecError):
        parse_chain(f"table:{table},tail=constant:p=0.5")


@pytest.mark.parametrize("text", ["constant:p=2", "constant:q=0.5", "harmonic", "table:x.csv"])
def test_bad_spec_text(text):
    with pytest.raises(ChainSpecError):
        parse_chain(text)


# -- embedding --------------------------------------------------------------


def test_t_x_phi_examples():
    cb6 = ScaleEmbedding(ConstantBias(0.6))
    assert cb6.t(0) == 1.0
    assert cb6.t(2) == pytest.approx(4 / 9, rel=1e-15)
    assert cb6.phi_slope(3) == pytest.approx(2.25, rel=1e-15)
    assert ScaleEmbedding(ConstantBias(0.5)).x(5) == 5.0
    assert ScaleEmbedding(ConstantBias(0.5)).phi_slope(99) == 1.0
    ph = ScaleEmbedding(PaperHarmonic())
    assert ph.x(3) == pytest.approx(11 / 6, rel=1e-15)
    assert ph.phi_slope(4) == pytest.approx(4.0, rel=1e-15)
    assert ph.x(0) == 0.0


def test_log_form_survives_underflow():
    emb = ScaleEmbedding(ConstantBias(0.9))
    n = 5000
    assert emb.log_t(n) == pytest.approx(n * math.log(1 / 9), rel=1e-12)
    assert emb.t(n) == 0.0 or emb.t(n) > 0
    big = ScaleEmbedding(ConstantBias(0.1))
    assert big.log_t(n) == pytest.approx(n * math.log(9), rel=1e-12)


def test_x_is_compensated():
    emb = ScaleEmbedding(PaperHarmonic())
    n = 200_000
    exact = math.fsum(1.0 / (j + 1) for j in range(n))
    assert emb.x(n) == pytest.approx(exact, rel=4e-16)


def test_skeleton_examples():
    s = skeleton_step_distribution(ScaleEmbedding(PaperHarmonic()), 1)
    assert (s.left_point, s.right_point) == (0.0, 1.5)
    assert s.right_prob == pytest.approx(2 / 3, abs=1e-15)
    s = skeleton_step_distribution(ScaleEmbedding(ConstantBias(0.6)), 1)
    assert (s.left_prob, s.right_prob) == pytest.approx((0.4, 0.6), abs=1e-15)
    s = skeleton_step_distribution(ScaleEmbedding(ConstantBias(0.5)), 2)
    assert (s.left_point, s.right_point, s.right_prob) == (1.0, 3.0, 0.5)
    with pytest.raises(ValueError):
        skeleton_step_distribution(ScaleEmbedding(ConstantBias(0.5)), 0)


@pytest.mark.parametrize("spec", FAMILIES + [ConstantBias(0.9), ConstantBias(0.05)])
def test_skeleton_identity_vectorised(spec):
    emb = ScaleEmbedding(spec)
    stop = 10_001
    err = np.abs(emb.right_probabilities(stop)[1:] - spec.arrays(1, stop)[1])
    assert err.max() <= 1e-12


def test_concurrent_growth_consistent():
    emb = ScaleEmbedding(PaperHarmonic())
    results = []

    def grab(n):
        results.append((n, emb.x(n)))

    threads = [threading.Thread(target=grab, args=(n,)) for n in range(1000, 200_000, 9973)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    ref = ScaleEmbedding(PaperHarmonic())
    for n, v in results:
        assert v == ref.x(n)


# -- properties ------------------------------------------------------------

probs = st.floats(0.01, 0.99)


@given(st.lists(probs, min_size=1, max_size=30), probs, st.integers(1, 60))
def test_recursion_and_grid(rs, tail_p, n):
    spec = Tabular(tuple((1 - r, r) for r in rs), ConstantBias(tail_p))
    emb = ScaleEmbedding(spec)
    l, r = spec.probabilities(n)
    assert emb.t(n) == pytest.approx(emb.t(n - 1) * l / r, rel=1e-12)
    # differencing loses a few ulps of x, not of t
    assert emb.x(n + 1) - emb.x(n) == pytest.approx(emb.t(n), abs=8 * np.finfo(float).eps * emb.x(n + 1))
    assert emb.phi_slope(n) == pytest.approx(1.0 / emb.t(n - 1), rel=1e-12)
    assert math.log(emb.t(n)) == pytest.approx(emb.log_t(n), rel=1e-9, abs=1e-9)
    step = skeleton_step_distribution(emb, n)
    assert step.right_prob == pytest.approx(r, abs=1e-12)


@given(probs, st.integers(1, 3000))
def test_grid_nondecreasing(p, n):
    emb = ScaleEmbedding(ConstantBias(p))
    x = emb.x_array(n + 1)
    assert x[0] == 0.0
    finite = np.isfinite(x)
    # once the direct form saturates it stays saturated
    assert (finite[:-1] >= finite[1:]).all()
    assert (np.diff(x[finite]) >= 0).all()
