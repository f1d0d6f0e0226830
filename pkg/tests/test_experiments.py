import numpy as np
import pytest

from robin_sep.experiments import (
    entropy_identity_check,
    hydro_limit_check,
    rare_event_probe,
    replica_seeds,
    tilted_hydro_check,
)
from robin_sep.model import TiltField, oracle_field
from robin_sep.params import ReservoirParams

FLAT = ReservoirParams(0.4, 0.4)


def step(x):
    return (np.asarray(x) < 0.5).astype(float)


def test_replica_seeds():
    a, b = replica_seeds(5, 10), replica_seeds(5, 10)
    assert a == b
    assert len({k for pair in a for k in pair}) == 20
    assert replica_seeds(6, 10) != a


def test_stationary_flat_profile():
    rep = hydro_limit_check(FLAT.stationary_profile, FLAT, (64, 256), 0.1, 60, 0.05, seed=3, tolerance=0.0)
    last = rep.scales[-1]
    assert last.sup_error <= 3 * last.radius
    assert rep.monotone()


def test_density_bound_and_report(tmp_path, params):
    rep = hydro_limit_check(step, params, (32, 64), 0.05, 20, 0.1, seed=1)
    # the bound is the smoothed full configuration, 1/U_eps up to the Riemann-sum error
    assert all(0 <= s.max_density <= s.density_bound + 1e-12 for s in rep.scales)
    assert all(abs(s.density_bound - 1 / 1.1) < 0.05 for s in rep.scales)
    assert all(len(s.l2_error) == 3 for s in rep.scales)
    files = rep.save(tmp_path / "conv")
    assert all(f.exists() for f in files)
    data = np.loadtxt(files[1], delimiter=",", skiprows=1)
    assert data.shape == (2, 8)
    assert rep.summary()["manifest"]["seed"] == 1


def test_scheduling_invariance(params):
    a = hydro_limit_check(step, params, (32, 64), 0.05, 12, 0.1, seed=9, jobs=1)
    b = hydro_limit_check(step, params, (32, 64), 0.05, 12, 0.1, seed=9, jobs=3)
    for x, y in zip(a.scales, b.scales):
        assert vars(x) == vars(y)
    for n in a.profiles:
        np.testing.assert_array_equal(a.profiles[n][0], b.profiles[n][0])


def test_zero_field_same_protocol(params):
    a = hydro_limit_check(step, params, (32,), 0.05, 10, 0.1, seed=2)
    b = tilted_hydro_check(step, params, TiltField.zero(), (32,), 0.05, 10, 0.1, seed=2)
    assert vars(a.scales[0]) == vars(b.scales[0])


def test_scales_must_increase(params):
    with pytest.raises(ValueError):
        hydro_limit_check(step, params, (64, 32), 0.05, 4, 0.1)


def test_entropy_zero_field(params):
    rep = entropy_identity_check(params.stationary_profile, params, TiltField.zero(), 32, 0.1, 10, 16)
    assert rep.rate_value == 0.0
    assert all(m == 0.0 for _, m, _ in rep.rows)
    assert rep.passed()


def test_entropy_small_scale(params, tmp_path):
    rep = entropy_identity_check(params.stationary_profile, params, oracle_field(), 64, 0.5, 60, 32, seed=4)
    assert rep.rate_value > 0
    assert rep.standard_error > 0
    # the identity is only asymptotic; at N=64 the mean must at least be of the right size
    assert 0.5 < rep.mean / rep.rate_value < 1.5
    files = rep.save(tmp_path / "ent")
    assert np.loadtxt(files[1], delimiter=",", skiprows=1).shape == (2, 5)


def test_rare_event_trivial_target(params):
    rep = rare_event_probe(params.stationary_profile, params, TiltField.zero(), 32, 0.2, 100, 0.25, epsilon=0.2)
    assert rep.hits == rep.replicas
    assert rep.cost == pytest.approx(0.0, abs=1e-12)
    assert rep.rate_value == 0.0


def test_rare_event_matched_proposal_helps(params):
    f = TiltField.sine(1.5, 1, 0.05)
    matched = rare_event_probe(params.stationary_profile, params, f, 64, 0.2, 400, 0.105, seed=11)
    plain = rare_event_probe(params.stationary_profile, params, f, 64, 0.2, 400, 0.105,
                             proposal=TiltField.zero(), seed=11)
    assert matched.ess > plain.ess
    assert plain.degenerate
    assert np.isfinite(matched.cost) and matched.cost > 0


def test_rare_event_size_limit(params):
    with pytest.raises(ValueError):
        rare_event_probe(params.stationary_profile, params, TiltField.zero(), 128)
