import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tasep_entropy import closed_forms as cf
from tasep_entropy import matrix_product as mp
from tasep_entropy.core import _s, mobility
from tasep_entropy.params import DomainError, Params, ResourceError

PAIRS = [(F(1, 10), F(7, 10)), (F(1, 10), F(3, 10)), (F(1, 5), F(3, 5)), (F(1, 4), F(2, 5)), (F(3, 10), F(4, 5)), (F(3, 5), F(17, 20))]
DIRS = ["competitive", "cooperative"]

rational_density = st.integers(1, 19).map(lambda k: F(k, 20))


@st.composite
def rational_params(draw):
    a, b = sorted([draw(rational_density), draw(rational_density)])
    return Params(a, b, draw(st.sampled_from(DIRS)))


# ------------------------------------------------------------------ algebra


def test_normal_order_examples():
    assert mp.normal_order("DE").coeffs == {(0, 1): 1, (1, 0): 1}
    assert mp.normal_order("ED").coeffs == {(1, 1): 1}
    assert mp.normal_order("DDE").coeffs == {(0, 2): 1, (0, 1): 1, (1, 0): 1}
    assert mp.normal_order("110").coeffs == mp.normal_order("DDE").coeffs
    assert mp.normal_order([1, 1, 0]).coeffs == mp.normal_order("DDE").coeffs
    with pytest.raises(DomainError):
        mp.normal_order("DXE")


def test_two_site_weights():
    a, b = F(1, 3), F(2, 5)
    assert mp.weight("11", a, b) == 1 / b**2
    assert mp.weight("10", a, b) == 1 / a + 1 / b
    assert mp.weight("01", a, b) == 1 / (a * b)
    assert mp.weight("00", a, b) == 1 / a**2
    half = F(1, 2)
    assert {mp.weight(c, half, half) for c in ("00", "01", "10", "11")} == {4}


def test_one_site():
    a, b = F(1, 3), F(2, 5)
    assert mp.partition_function(1, a, b) == 1 / a + 1 / b
    p = Params(a, 1 - b)
    m = mp.stationary_measure(1, p)
    assert m.exact_probabilities()[1] == a / (a + b)
    assert mp.master_equation_stationary(1, p)[1] == pytest.approx(float(a / (a + b)), abs=1e-15)


@given(st.fractions(F(1, 50), F(49, 50)), st.fractions(F(1, 50), F(49, 50)))
def test_dehp_scalar(a, b):
    assert mp.dehp_scalar(a, b) == 1 / a + 1 / b - 1 / (a * b)


def test_dehp_scalar_vanishes_on_equilibrium_line():
    for rho in (F(1, 10), F(1, 2), F(3, 4)):
        a, b, _ = mp.boundary_rates(Params(rho, rho))
        assert mp.dehp_scalar(a, b) == 0


@settings(max_examples=20)
@given(st.integers(1, 9), rational_params())
def test_enumeration_matches_reduction_and_partition(L, p):
    a, b, _ = mp.boundary_rates(p)
    w = mp._dfs_weights(L, a, b)
    for i in range(0, 1 << L, max(1, (1 << L) // 16)):
        assert w[i] == mp.weight(format(i, f"0{L}b"), a, b)
    assert sum(w) == mp.partition_function(L, a, b)
    wf = mp._bfs_weights(L, float(a), float(b))
    assert np.allclose(wf, [float(x) for x in w], rtol=1e-12)


# ------------------------------------------------------- against the chain


@pytest.mark.parametrize("direction", DIRS)
@pytest.mark.parametrize("pair", PAIRS)
def test_matches_master_equation(pair, direction):
    p = Params(*pair, direction)
    for L in range(2, 9):
        m = mp.stationary_measure(L, p)
        assert np.max(np.abs(m.probabilities - mp.master_equation_stationary(L, p))) <= 1e-10


@pytest.mark.parametrize("direction", DIRS)
@pytest.mark.parametrize("pair", PAIRS[:3])
def test_exact_balance(pair, direction):
    p = Params(*pair, direction)
    for L in range(1, 7):
        assert mp.balance_residual(mp.stationary_measure(L, p)) == 0


@pytest.mark.parametrize("direction", DIRS)
@pytest.mark.parametrize("rho", [F(1, 10), F(1, 2), F(2, 3)])
def test_equilibrium_is_bernoulli(rho, direction):
    p = Params(rho, rho, direction)
    for L in range(1, 11):
        probs = mp.stationary_measure(L, p).exact_probabilities()
        for i in (0, 1, (1 << L) - 1, (1 << L) // 3):
            k = bin(i).count("1")
            assert probs[i] == rho**k * (1 - rho) ** (L - k)
    assert np.allclose(mp.master_equation_stationary(6, p), [float(x) for x in mp.stationary_measure(6, p).exact_probabilities()])


def test_float_mode_agrees_with_rational():
    p = Params(F(1, 10), F(7, 10), "cooperative")
    r, f = mp.stationary_measure(10, p, mode="rational"), mp.stationary_measure(10, p, mode="float")
    assert np.allclose(r.probabilities, f.probabilities, rtol=1e-12)
    assert f.mode == "float" and r.exact


def test_auto_mode_and_caps():
    assert mp.stationary_measure(4, Params(0.1, 0.7)).mode == "float"
    assert mp.stationary_measure(4, Params(F(1, 10), F(7, 10))).mode == "rational"
    assert mp.stationary_measure(15, Params(F(1, 10), F(7, 10))).mode == "float"
    with pytest.raises(ResourceError):
        mp.stationary_measure(21, Params(0.1, 0.7))
    with pytest.raises(ResourceError):
        mp.master_equation_stationary(13, Params(0.1, 0.7))


def test_cooperative_is_mirror_image():
    p = Params(F(1, 5), F(3, 5), "cooperative")
    m = mp.stationary_measure(5, p)
    a, b, reflected = mp.boundary_rates(p)
    assert reflected and (a, b) == (F(3, 5), F(4, 5))
    direct = mp._dfs_weights(5, a, b)
    for i in range(32):
        assert m.weights[mp.bit_reverse(i, 5)] == direct[i]


def test_marginals_low_density():
    m = mp.stationary_measure(8, Params(F(1, 10), F(7, 10)))
    marg = m.marginals()
    assert np.all((marg > 0) & (marg < 1))
    assert abs(marg[3] - 0.1) < 0.05


# --------------------------------------------------------------- the lemma


def test_lemma_competitive_negative():
    for L in range(2, 11):
        r = mp.lemma_sign_check(L, Params(F(1, 10), F(7, 10)))
        assert r.expected_sign == -1 and r.passed and not r.zeros
        assert r.checked == (L - 1) * 2 ** (L - 2)


def test_lemma_cooperative_positive():
    for L in range(2, 11):
        r = mp.lemma_sign_check(L, Params(F(1, 10), F(7, 10), "cooperative"))
        assert r.expected_sign == 1 and r.passed and not r.zeros


def test_lemma_equilibrium_all_ties():
    r = mp.lemma_sign_check(6, Params(F(3, 10), F(3, 10)))
    assert r.expected_sign == 0 and not r.violations and len(r.zeros) == r.checked


# ------------------------------------------------------------ observables


def test_y_spectrum_uniform():
    ys = mp.y_spectrum(mp.stationary_measure(6, Params(F(1, 2), F(1, 2))))
    assert len(ys.Y) == 1 and ys.Y[0] == pytest.approx(math.log(2)) and ys.probability[0] == pytest.approx(1.0)


@pytest.mark.parametrize("rho", [F(1, 10), F(1, 3), F(7, 10)])
def test_y_variance_on_equilibrium_line(rho):
    phi = math.log(rho / (1 - rho))
    for L in (3, 7, 12):
        ys = mp.y_spectrum(mp.stationary_measure(L, Params(rho, rho)))
        assert L * ys.variance() == pytest.approx(mobility(float(rho)) * phi**2, rel=1e-12)
        assert int(ys.multiplicity.sum()) == 2**L


def test_mean_y_converges_to_stationary_entropy():
    p = Params(0.1, 0.7)
    target = cf.gibbs_shannon_of_stationary(p)
    gaps = [abs(mp.y_spectrum(mp.stationary_measure(L, p)).mean() - target) for L in range(4, 15, 2)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


@settings(max_examples=15)
@given(st.integers(1, 12), rational_params())
def test_finite_pressure_identities(L, p):
    m = mp.stationary_measure(L, p)
    assert mp.finite_pressure(m, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert mp.finite_pressure(m, 0.0) == pytest.approx(-math.log(2), abs=1e-14)


def test_finite_pressure_trend():
    p = Params(0.1, 0.3)
    gaps = [abs(mp.finite_pressure(mp.stationary_measure(L, p), 2.0) - cf.pressure(p, 2.0)) for L in (6, 8, 10, 12, 14)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_finite_pressure_float_path_consistent():
    m = mp.stationary_measure(8, Params(F(1, 5), F(3, 5)))
    assert mp.finite_pressure(m, 2.0) == pytest.approx(0.0 - math.log(sum(float(q) ** 2 for q in m.exact_probabilities())) / 8, abs=1e-13)


def test_gibbs_shannon_exact():
    for rho in (0.2, 0.6):
        for L in (3, 9):
            m = mp.stationary_measure(L, Params(rho, rho))
            assert mp.gibbs_shannon_exact(m) / L == pytest.approx(-_s(rho), abs=1e-13)
    p = Params(0.1, 0.7)
    target = cf.gibbs_shannon_of_stationary(p)
    vals = [mp.gibbs_shannon_exact(mp.stationary_measure(L, p)) / L for L in range(4, 15, 2)]
    assert all(v <= math.log(2) for v in vals)
    gaps = [abs(v - target) for v in vals]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_box_occupancies():
    c = mp.box_occupancies(4, 2)
    assert c.shape == (16, 2)
    assert list(c[0b1101]) == [2, 1]
    with pytest.raises(DomainError):
        mp.box_occupancies(5, 2)


@pytest.mark.parametrize("L", [4, 6, 8])
def test_local_eq_zero_cases(L):
    m = mp.stationary_measure(L, Params(F(1, 10), F(7, 10)))
    assert mp.local_eq_diagnostic(m, L) == 0.0
    eq = mp.stationary_measure(L, Params(F(2, 5), F(2, 5)))
    for K in [k for k in range(1, L + 1) if L % k == 0]:
        assert mp.local_eq_diagnostic(eq, K) == 0.0


def test_local_eq_positive_off_equilibrium():
    m = mp.stationary_measure(8, Params(0.1, 0.7))
    assert mp.local_eq_diagnostic(m, 2) > 0.0
    exact = mp.stationary_measure(8, Params(F(1, 10), F(7, 10)))
    assert mp.local_eq_diagnostic(exact, 2) == pytest.approx(mp.local_eq_diagnostic(m, 2), rel=1e-12)


def test_local_eq_k2_trend():
    # expected nonincreasing over L = 8..16 at K = 2; the exact values grow
    m = [mp.stationary_measure(L, Params(0.1, 0.7), mode="float") for L in (8, 10, 12, 14, 16)]
    H = [mp.local_eq_diagnostic(x, 2) for x in m]
    assert all(b <= a for a, b in zip(H, H[1:])), f"(H) at K=2: {H}"
