import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tasep_entropy import closed_forms as cf
from tasep_entropy import variational as vo
from tasep_entropy.acceptance import one_sided_slopes
from tasep_entropy.core import NEG_INF, _s, mobility, pair_constants, softplus
from tasep_entropy.params import DegenerateParameterError, DomainError, Params, Profile

from strategies import driven_params

LOG2 = math.log(2)
CASE_PAIRS = [(0.1, 0.7), (0.1, 0.3), (0.2, 0.6), (0.25, 0.4), (0.3, 0.8), (0.15, 0.95), (0.6, 0.85), (0.55, 0.9)]
ALL = [Params(a, b, d) for a, b in CASE_PAIRS for d in ("competitive", "cooperative")]


def ids(p):
    return f"{p.direction.value[:4]}-{p.rm}-{p.rp}"


# ------------------------------------------------------------------ phases


def test_classify_examples():
    info = cf.classify(Params(0.1, 0.7))
    assert info.phase is cf.Phase.LD and info.rho_bar == 0.1
    assert cf.classify(Params(0.3, 0.7)).phase is cf.Phase.SHOCK_LINE
    info = cf.classify(Params(0.2, 0.6, "cooperative"))
    assert info.phase is cf.Phase.MC and info.rho_bar == 0.5
    assert info.vbar == pytest.approx(-2 * LOG2)
    assert cf.classify(Params(0.2, 0.9)).phase is cf.Phase.HD


@given(driven_params())
def test_vbar_is_log_mobility_of_bulk(p):
    info = cf.classify(p)
    rb = info.rho_bar[0] if isinstance(info.rho_bar, tuple) else info.rho_bar
    assert info.vbar == pytest.approx(math.log(mobility(rb)), abs=1e-12)


def test_stationary_profile_and_gibbs_shannon():
    assert cf.gibbs_shannon(Profile.constant(0.5)) == pytest.approx(LOG2)
    assert cf.gibbs_shannon(Profile.constant(0.3)) == pytest.approx(-_s(0.3))
    step = Profile.step(0.1, 0.7)
    assert cf.gibbs_shannon(step) == pytest.approx(-(_s(0.1) + _s(0.7)) / 2)
    shock = cf.stationary_profile(Params(0.3, 0.7))
    assert list(shock.values) == [0.3, 0.7]


# ---------------------------------------------------------------- the band


def test_band_examples():
    assert cf.energy_band(Params(0.1, 0.7)).lo == pytest.approx(-math.log(0.9), abs=1e-14)
    for a, b in [(0.1, 0.7), (0.2, 0.6), (0.4, 0.9)]:
        assert cf.energy_band(Params(a, b, "cooperative")).lo == pytest.approx(LOG2, abs=1e-14)
    p = Params(0.25, 0.4, "cooperative")
    vb = math.log(mobility(0.4))
    assert cf.vbar(p) == pytest.approx(vb)
    assert cf.energy_band(p).lo == pytest.approx(-vb - math.log1p(math.exp(-p.phi_plus)), abs=1e-14)


@given(driven_params())
def test_band_nonempty_and_entropy_support(p):
    band = cf.energy_band(p)
    assert band.width > 0
    assert cf.entropy(p, band.hi + 1e-6) == NEG_INF
    assert cf.entropy(p, band.lo - 1e-6) == NEG_INF
    assert np.all(np.isfinite(cf.entropy(p, np.linspace(band.lo, band.hi, 257))))


def test_closed_forms_reject_equilibrium():
    with pytest.raises(DegenerateParameterError):
        cf.entropy(Params(0.4, 0.4), 0.7)


def test_direction_guards():
    with pytest.raises(DomainError):
        cf.entropy_plus(Params(0.1, 0.7, "cooperative"), 0.5)
    with pytest.raises(DomainError):
        cf.pressure_minus(Params(0.1, 0.7), 0.5)


# ------------------------------------------------------------------ entropy


def test_entropy_plus_examples():
    p = Params(0.1, 0.7)
    assert cf.entropy_plus(p, cf.energy_band(p).lo) == pytest.approx(0.0, abs=1e-12)
    q = Params(0.1, 0.3)
    kink = pair_constants(q).W - cf.vbar(q)
    h = 1e-9
    assert cf.entropy_plus(q, kink - h) == pytest.approx(cf.entropy_plus(q, kink + h), abs=1e-7)


def test_entropy_minus_examples():
    p = Params(0.2, 0.6, "cooperative")
    assert cf.entropy_minus(p, LOG2) == pytest.approx(LOG2, abs=1e-14)
    # linear branch has slope −1
    E, h = 0.8, 1e-5
    assert (cf.entropy_minus(p, E + h) - cf.entropy_minus(p, E - h)) / (2 * h) == pytest.approx(-1.0, abs=1e-9)


@pytest.mark.parametrize("p", [q for q in ALL if not q.competitive], ids=ids)
def test_entropy_minus_junctions_are_c1_not_c2(p):
    S = lambda E: cf.entropy_minus(p, E)
    h = 1e-4
    for x in cf.breakpoints(p):
        assert S(x - 1e-10) == pytest.approx(S(x + 1e-10), abs=1e-8)
        left, right = one_sided_slopes(S, x, 1e-5)
        assert left == pytest.approx(right, abs=1e-6)
        d2_left = S(x) - 2 * S(x - h) + S(x - 2 * h)
        d2_right = S(x + 2 * h) - 2 * S(x + h) + S(x)
        assert abs(d2_left - d2_right) / h**2 > 1e-2


@given(driven_params())
def test_entropy_concave_and_bounded(p):
    band = cf.energy_band(p)
    E = np.linspace(band.lo, band.hi, 2001)
    S = cf.entropy(p, E)
    assert np.all(S <= LOG2 + 1e-12) and np.all(S >= -1e-12)
    assert np.max(S[2:] - 2 * S[1:-1] + S[:-2]) <= 1e-10


# ----------------------------------------------------------------- pressure


@pytest.mark.parametrize("p", ALL, ids=ids)
def test_pressure_normalisations(p):
    assert cf.pressure(p, 1.0) == pytest.approx(0.0, abs=1e-10)
    assert cf.pressure(p, 0.0) == pytest.approx(-LOG2, abs=1e-10)
    if not p.competitive:
        assert cf.pressure(p, -1.0) == pytest.approx(cf.vbar(p), abs=1e-12)


@given(driven_params())
def test_pressure_concave(p):
    th = np.linspace(-3, 3, 1201)
    P = cf.pressure(p, th)
    assert np.max(P[2:] - 2 * P[1:-1] + P[:-2]) <= 1e-10


@given(driven_params(), st.floats(-3, 3))
def test_pressure_is_lower_bound_of_affine_family(p, theta):
    # P(θ) ≤ θE − S(E) for every band energy
    E = cf.energy_grid(p, 501)
    assert cf.pressure(p, theta) <= float(np.min(theta * E - cf.entropy(p, E))) + 1e-10


@pytest.mark.parametrize("p", ALL, ids=ids)
def test_legendre_duality(p):
    E = cf.energy_grid(p, 10_000)
    th = np.linspace(-3, 3, 121)
    if not p.competitive:
        th = th[np.abs(th + 1) >= 0.05]
    num = vo.legendre(vo.Curve(E, cf.entropy(p, E)), th).y
    assert np.max(np.abs(num - cf.pressure(p, th))) <= 1e-5


# --------------------------------------------------------------- maximizers


def test_maximizer_examples():
    p = Params(0.1, 0.7)
    for E in np.linspace(cf.energy_band(p).lo, cf.energy_band(p).hi, 7):
        fam = cf.maximizer(p, E)
        assert fam.kind == "constant" and 0 <= fam.u <= 1
    q = Params(0.2, 0.6, "cooperative")
    fam = cf.maximizer(q, 0.8)
    assert fam.kind == "monotone"
    assert fam.value_range == pytest.approx((0.4, 0.8))
    assert fam.target_entropy == pytest.approx(-(0.8 + cf.vbar(q)))
    with pytest.raises(DomainError):
        cf.maximizer(p, cf.energy_band(p).hi + 0.1)


@pytest.mark.parametrize("p", ALL, ids=ids)
def test_maximizer_consistency(p):
    band = cf.energy_band(p)
    for E in band.lo + band.width * np.array([0.05, 0.3, 0.55, 0.8, 0.97]):
        prof = cf.maximizer(p, E).profile()
        S = cf.gibbs_shannon(prof)
        assert S == pytest.approx(cf.entropy(p, E), abs=1e-6)
        assert vo.quasipotential(p, prof) + S == pytest.approx(E, abs=1e-6)


def test_cooperative_maximizer_uses_dominant_endpoint():
    # φ₀ = |φ₋| here; the constant at ρ₀ = 1 − ρ₋ misses the energy constraint
    p = Params(0.1, 0.7, "cooperative")
    E = cf.energy_band(p).hi - 0.05
    e = E + cf.vbar(p)
    rho0 = p.rho0
    u_wrong = (math.log(rho0) - e) / (math.log(rho0) - math.log1p(-rho0))
    wrong = Profile.constant(u_wrong)
    assert abs(vo.quasipotential(p, wrong) + cf.gibbs_shannon(wrong) - E) > 0.1
    right = cf.maximizer(p, E).profile()
    assert vo.quasipotential(p, right) + cf.gibbs_shannon(right) == pytest.approx(E, abs=1e-12)


def test_monotone_representative_hits_target():
    fam = cf.MaximizerFamily("monotone", value_range=(0.3, 0.9), target_entropy=0.5)
    prof = cf.monotone_representative(fam)
    assert cf.gibbs_shannon(prof) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(DomainError):
        cf.monotone_representative(cf.MaximizerFamily("monotone", value_range=(0.3, 0.9), target_entropy=0.9))


# ------------------------------------------------------------ fluctuations


@given(driven_params())
def test_rate_function_nonnegative_with_zero_at_stationary_entropy(p):
    assume(cf.classify(p).phase is not cf.Phase.SHOCK_LINE)
    band = cf.energy_band(p)
    J = cf.rate_function(p, np.linspace(band.lo, band.hi, 1001))
    assert np.all(J >= -1e-12)
    assert cf.rate_function(p, cf.gibbs_shannon_of_stationary(p)) == pytest.approx(0.0, abs=1e-9)
    assert cf.rate_function(p, band.hi + 1) == math.inf


@pytest.mark.parametrize("p", ALL, ids=ids)
def test_gaussian_variance_matches_curvature(p):
    sigma = cf.gaussian_variance(p)
    g = cf.gibbs_shannon_of_stationary(p)
    if sigma is None:
        assert cf.classify(p).phase is cf.Phase.MC and not p.competitive
        E = np.linspace(LOG2, LOG2 + 0.05, 11)
        assert np.allclose(cf.rate_function(p, E), 2 * E + cf.vbar(p), atol=1e-12)
        return
    h = 1e-4
    J = lambda E: cf.rate_function(p, E)
    inv = h * h / (J(g + h) - 2 * J(g) + J(g - h))
    assert inv == pytest.approx(sigma, rel=1e-4)
