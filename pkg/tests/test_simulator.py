import math
from dataclasses import replace

import numpy as np
import pytest

from tasep_entropy import simulator as sim
from tasep_entropy.params import DomainError, Params


def run(L, a, b, direction="competitive", **kw):
    return sim.simulate(sim.SimConfig(L, Params(a, b, direction), **kw))


def test_config_validation():
    with pytest.raises(DomainError):
        sim.SimConfig(1, Params(0.1, 0.7))
    with pytest.raises(DomainError):
        sim.SimConfig(10, Params(0.1, 0.7), t_measure=0.0)
    with pytest.raises(DomainError):
        sim.SimConfig(10, Params(0.1, 0.7), n_batches=1)


def test_deterministic():
    a = run(30, 0.2, 0.6, "cooperative", seed=11, n_replicas=2)
    b = run(30, 0.2, 0.6, "cooperative", seed=11, n_replicas=2)
    assert np.array_equal(a.profile, b.profile) and a.current == b.current and a.events == b.events
    c = run(30, 0.2, 0.6, "cooperative", seed=12, n_replicas=2)
    assert not np.array_equal(a.profile, c.profile)


def test_parallel_equals_serial():
    cfg = sim.SimConfig(20, Params(0.1, 0.7), t_burnin=200.0, t_measure=800.0, seed=3, n_replicas=3)
    assert np.array_equal(sim.simulate(cfg, threads=1).profile, sim.simulate(cfg, threads=2).profile)


def test_bounds_and_current_sign():
    r = run(40, 0.1, 0.7, t_burnin=500.0, t_measure=2000.0, seed=1)
    assert np.all((r.profile >= 0) & (r.profile <= 1)) and r.current > 0
    r = run(40, 0.1, 0.7, "cooperative", t_burnin=500.0, t_measure=2000.0, seed=1)
    assert np.all((r.profile >= 0) & (r.profile <= 1)) and r.current < 0


def test_equilibrium_bulk_density():
    r = run(100, 0.35, 0.35, t_burnin=2000.0, t_measure=20000.0, seed=5)
    assert abs(r.bulk_density - 0.35) <= 3 * r.bulk_stderr + 1e-3


def test_high_density_phase():
    r = run(200, 0.2, 0.9, t_burnin=5000.0, t_measure=20000.0, seed=2)
    assert abs(r.bulk_density - 0.9) <= 0.02


def test_cooperative_maximal_current():
    r = run(200, 0.3, 0.8, "cooperative", t_burnin=5000.0, t_measure=20000.0, seed=2)
    assert abs(r.bulk_density - 0.5) <= 0.02
    # MC current per bond is close to 1/4 in magnitude
    assert abs(abs(r.current) - 0.25) < 0.02


def test_shock_line_bulk_between_reservoirs():
    r = run(200, 0.3, 0.7, t_burnin=5000.0, t_measure=20000.0, seed=4)
    assert 0.3 - 0.03 <= r.bulk_density <= 0.7 + 0.03


def test_stationarity_self_consistency():
    base = sim.SimConfig(100, Params(0.1, 0.7), t_burnin=3000.0, t_measure=10000.0, seed=9)
    a = sim.simulate(base)
    b = sim.simulate(replace(base, t_measure=20000.0))
    assert abs(a.bulk_density - b.bulk_density) < 2 * math.hypot(a.bulk_stderr, b.bulk_stderr)


def test_matches_exact_marginals_small_L():
    cfg = sim.SimConfig(6, Params(0.1, 0.7), t_burnin=1000.0, t_measure=200_000.0, seed=21)
    rep = sim.small_L_cross_check(cfg)
    assert rep.passed, rep.z_scores
    cfg = sim.SimConfig(6, Params(0.1, 0.7, "cooperative"), t_burnin=1000.0, t_measure=200_000.0, seed=22)
    assert sim.small_L_cross_check(cfg).passed


def test_two_sites_uniform():
    r = run(2, 0.5, 0.5, t_burnin=100.0, t_measure=50_000.0, seed=8)
    assert np.allclose(r.profile, 0.5, atol=0.02)


def test_boundary_distance():
    assert sim.boundary_distance(Params(0.3, 0.7)) == pytest.approx(0.0)
    assert sim.boundary_distance(Params(0.1, 0.3)) == pytest.approx(0.6 / math.sqrt(2))
    assert sim.boundary_distance(Params(0.1, 0.7, "cooperative")) == pytest.approx(0.2)


def test_sweep_grid():
    g = sim.sweep_grid([0.5, 0.1, 0.3])
    assert g == [(0.1, 0.1), (0.1, 0.3), (0.1, 0.5), (0.3, 0.3), (0.3, 0.5), (0.5, 0.5)]


@pytest.mark.parametrize("direction", ["competitive", "cooperative"])
def test_small_phase_sweep(direction):
    template = sim.SimConfig(100, Params(0.1, 0.2), t_burnin=3000.0, t_measure=8000.0, seed=17)
    rows = sim.phase_sweep(sim.sweep_grid([0.1, 0.3, 0.7, 0.9]), direction, template)
    assert sim.sweep_agreement(rows) >= 0.9
    for r in rows:
        if r.phase == "ShockLine":
            assert r.excluded
        if r.rho_minus == r.rho_plus:
            assert not r.excluded and r.agree
