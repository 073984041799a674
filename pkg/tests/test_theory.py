import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from usbc.channel import KIDNEY_PHANTOM, FadingModel
from usbc.errors import QuadratureError
from usbc.theory import (
    TheoryParams,
    ber_conditional,
    ber_faded,
    ber_from_pcorrect,
    ber_theoretical,
    decision_noise,
    p_correct_conditional,
    q_function,
    statistic_oracle,
)

# P_correct from a direct adaptive integral over the n_x' density (scipy quad,
# 1e-12 rel), independent of the Gauss-Hermite rule.
PCORRECT_QUAD = {
    (1, 0): 0.5551465322334497,
    (1, 6): 0.6994819068477938,
    (1, 12): 0.9602380398581228,
    (2, 0): 0.3688309119171293,
    (2, 6): 0.6940095373275836,
    (2, 12): 0.9965560195121859,
    (4, 0): 0.23172393660911186,
    (4, 6): 0.8169924856612567,
    (4, 12): 0.9999921302190788,
}


def test_q_function_examples():
    assert q_function(0.0) == 0.5
    assert q_function(math.inf) == 0.0
    assert q_function(-math.inf) == 1.0
    assert q_function(1.2816) == pytest.approx(0.099991500097675153, rel=1e-12)


def test_q_function_precision():
    mpmath.mp.dps = 40
    for x in np.linspace(-8, 8, 161):
        ref = float(mpmath.erfc(mpmath.mpf(x) / mpmath.sqrt(2)) / 2)
        assert abs(q_function(x) - ref) <= 1e-10 * ref


def test_q_function_vectorised():
    out = q_function(np.array([0.0, 1.0]))
    assert out.shape == (2,)


@pytest.mark.parametrize("key,expected", sorted(PCORRECT_QUAD.items()))
def test_pcorrect_against_adaptive_quadrature(key, expected):
    k, db = key
    assert p_correct_conditional(10 ** (db / 10), k) == pytest.approx(expected, abs=1e-8)


def test_pcorrect_limits():
    assert p_correct_conditional(1e6, 1) == pytest.approx(1.0, abs=1e-12)
    assert p_correct_conditional(0.0, 2) == 0.25
    g = np.array([1e-9, 1e-3])
    assert np.all(np.abs(p_correct_conditional(g, 3) - 1 / 8) < 1e-3)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_pcorrect_monotone(k):
    g = np.logspace(-2, 4, 200)
    p = p_correct_conditional(g, k)
    assert np.all(np.diff(p) >= -1e-9)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_node_doubling_converged(k):
    from usbc.theory import _gh_pcorrect

    g = np.logspace(-3, 5, 300)
    p = p_correct_conditional(g, k)
    # the returned value is already within 1e-8 of a rule with twice the nodes
    ref = _gh_pcorrect(g, k, 25.0, 4096)
    assert np.max(np.abs(p - ref)) < 2e-8


def test_quadrature_error_raised():
    with pytest.raises(QuadratureError):
        p_correct_conditional(4.0, 2, tol=-1.0)


def test_closed_form_k1():
    # for N_bc = 2 the Gaussian model collapses to a single Gaussian comparison
    g, tw = 4.0, 25.0
    var = 2 / g + 2 * tw / g**2
    assert p_correct_conditional(g, 1, tw) == pytest.approx(1 - q_function(1 / math.sqrt(var)), abs=1e-10)


def test_pcorrect_matches_gaussian_oracle():
    est = statistic_oracle(TheoryParams(1, 4.0), 4_000_000, np.random.default_rng(77), exact_noise=False)
    assert 1 - p_correct_conditional(4.0, 1) == pytest.approx(est.ber, abs=1e-3)


def test_ber_from_pcorrect():
    assert ber_from_pcorrect(0.9, 1) == pytest.approx(0.1)
    assert ber_from_pcorrect(0.7, 2) == pytest.approx(0.2)
    assert ber_from_pcorrect(1.0, 5) == 0.0
    assert ber_from_pcorrect(0.0, 20) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ValueError):
        ber_from_pcorrect(1.2, 1)


def test_decision_noise():
    d = decision_noise(2, 25.0, 4.0)
    assert d["cross"].variance == pytest.approx(0.25)
    assert d["square"].mean == pytest.approx(25 / 8)
    assert d["square"].variance == pytest.approx(25 / 64)
    assert d["matched"].variance == pytest.approx(0.25 + 25 / 64)


def test_theory_params():
    p = TheoryParams(3, 2.0, fading=KIDNEY_PHANTOM)
    assert p.n_bc == 8
    assert isinstance(p.fading, FadingModel)
    with pytest.raises(ValueError):
        TheoryParams(1, 2.0, tfwrx=20.0)
    with pytest.raises(ValueError):
        TheoryParams(1, 0.0)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_theoretical_decreasing(k):
    g = np.logspace(-1, 2, 25)
    conditional = [ber_theoretical(TheoryParams(k, x)) for x in g]
    faded = [ber_theoretical(TheoryParams(k, x, fading=FadingModel())) for x in g[::4]]
    assert np.all(np.diff(conditional) <= 1e-12)
    assert np.all(np.diff(faded) <= 1e-12)


@pytest.mark.parametrize("db", [6, 9, 12])
def test_larger_k_lowers_ber(db):
    g = 10 ** (db / 10)
    assert ber_conditional(g, 2) <= ber_conditional(g, 1)
    assert ber_faded(g, 2, FadingModel()) <= ber_faded(g, 1, FadingModel())


@pytest.mark.parametrize("db,k", [(0, 1), (6, 2), (12, 4)])
def test_faded_quadrature_matches_monte_carlo(db, k):
    g = 10 ** (db / 10)
    model = FadingModel()
    quad = ber_faded(g, k, model)
    gains = model.sample_tag_gain(np.random.default_rng(db), 200_000)
    vals = ber_conditional(g * gains**2, k)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(quad - vals.mean()) < 4 * se
    mc = ber_faded(g, k, model, method="montecarlo", rng=np.random.default_rng(1))
    assert abs(quad - mc) < 0.01


def test_faded_product_mode():
    v = ber_faded(4.0, 1, FadingModel(roundtrip="product"), draws=20_000)
    assert 0 < v < 0.5
    with pytest.raises(ValueError):
        ber_faded(4.0, 1, FadingModel(), method="simpson")


@settings(max_examples=60, deadline=None)
@given(g=st.floats(1e-8, 1e8), k=st.integers(1, 5), tw=st.floats(20.5, 200))
def test_probabilities_finite(g, k, tw):
    b = ber_conditional(g, k, tw)
    assert 0.0 <= b <= 0.5 + 1e-12 and math.isfinite(b)


# Exact K=1 error probability at 12 dB: P(chi2_50 > ncx2_50(lambda=2 gamma)),
# integrated with scipy.stats densities (adaptive quad).
EXACT_K1_12DB = 0.03584221114999114


def test_oracle_exact_matches_chisquare_integral():
    est = statistic_oracle(TheoryParams(1, 10**1.2), 1_000_000, np.random.default_rng(5))
    assert abs(est.ber - EXACT_K1_12DB) < 3 * est.std_error


def test_gaussian_approximation_pessimistic_at_high_snr():
    p = TheoryParams(1, 10**1.2)
    exact = statistic_oracle(p, 1_000_000, np.random.default_rng(1), exact_noise=True)
    approx = statistic_oracle(p, 1_000_000, np.random.default_rng(2), exact_noise=False)
    assert approx.ber - exact.ber > 3 * math.hypot(approx.std_error, exact.std_error)


def test_oracle_high_snr_and_limits():
    assert statistic_oracle(TheoryParams(2, 1e6), 10_000, np.random.default_rng(0)).ber == 0.0
    with pytest.raises(ValueError):
        statistic_oracle(TheoryParams(1, 1.0), 100, np.random.default_rng(0))


def test_oracle_deterministic():
    p = TheoryParams(2, 3.0, fading=FadingModel())
    a = statistic_oracle(p, 20_000, np.random.default_rng(3))
    b = statistic_oracle(p, 20_000, np.random.default_rng(3))
    assert a == b
    assert a.symbol_std_error >= a.std_error * 0.99
