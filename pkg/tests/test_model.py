import numpy as np
import pytest
from scipy.integrate import quad

from robin_sep.model import (
    EmpiricalMeasure,
    JumpPath,
    LatticeConfiguration,
    Simulator,
    TiltField,
    bump,
    bump_normalizer,
    empirical_density,
    girsanov_log_weight,
    load_configuration,
    load_jump_path,
    oracle_field,
    sample_profile,
    save_configuration,
    save_jump_path,
    simulate,
    ssep_rates,
    time_averaged_occupation,
    wasep_rates,
)
from robin_sep.params import ReservoirParams

HALF = ReservoirParams(0.5, 0.5, 1.0, 1.0)


def config(*bits):
    return LatticeConfiguration.from_occupancy(np.array(bits))


# --- parameters and configurations -------------------------------------------------------------

@pytest.mark.parametrize("kw, name", [
    (dict(alpha=0.0, beta=0.5), "alpha"), (dict(alpha=0.3, beta=1.0), "beta"),
    (dict(alpha=0.9, beta=0.1), "alpha <= beta"), (dict(alpha=0.2, beta=0.5, cap_a=0.0), "cap_a"),
    (dict(alpha=0.2, beta=0.5, cap_b=-1.0), "cap_b"), (dict(alpha=float("nan"), beta=0.5), "alpha"),
])
def test_params_validation(kw, name):
    with pytest.raises(ValueError, match=name):
        ReservoirParams(**kw)


def test_stationary_profile_endpoints(params):
    r = params.stationary_profile(np.array([0.0, 1.0]))
    slope = (params.beta - params.alpha) / (1 + params.cap_a + params.cap_b)
    np.testing.assert_allclose(r, [params.alpha + params.cap_a * slope, params.beta - params.cap_b * slope])


def test_configuration_roundtrip(rng):
    occ = rng.integers(0, 2, 37).astype(np.uint8)
    c = LatticeConfiguration.from_occupancy(occ)
    assert c.n_scale == 38
    np.testing.assert_array_equal(c.occupancy, occ)
    assert c == LatticeConfiguration.from_occupancy(occ.copy())
    assert hash(c) == hash(LatticeConfiguration.from_occupancy(occ.copy()))
    assert c.particle_count() == occ.sum()
    with pytest.raises(ValueError):
        LatticeConfiguration.from_occupancy(np.array([0, 2, 1]))
    with pytest.raises(ValueError):
        LatticeConfiguration.empty(2)


def test_configuration_io(tmp_path, rng):
    c = LatticeConfiguration.from_occupancy(rng.integers(0, 2, 20))
    assert load_configuration(save_configuration(c, tmp_path / "c.csv")) == c


# --- rates ---------------------------------------------------------------------------------------

def test_ssep_rates_empty():
    r = ssep_rates(config(0, 0, 0), HALF)
    np.testing.assert_array_equal(r.bonds, [0.0, 0.0])
    assert r.left == 2.0 and r.right == 2.0


def test_ssep_rates_discordant():
    r = ssep_rates(config(1, 0, 1), HALF)
    np.testing.assert_array_equal(r.bonds, [16.0, 16.0])


def test_left_rate_vanishes_with_empty_reservoir():
    rates = [ssep_rates(config(0, 0, 0), ReservoirParams(a, 0.5)).left for a in (1e-2, 1e-4, 1e-8)]
    assert rates[-1] < 1e-7 and rates[0] > rates[1] > rates[2]


def test_wasep_reduces_to_ssep(rng):
    occ = rng.integers(0, 2, 15)
    c = LatticeConfiguration.from_occupancy(occ)
    a, b = ssep_rates(c, HALF), wasep_rates(c, HALF, TiltField.zero(), 0.3)
    np.testing.assert_array_equal(a.bonds, b.bonds)
    assert (a.left, a.right) == (b.left, b.right)
    const = wasep_rates(c, HALF, TiltField.affine(0.0, 0.7), 0.3)
    np.testing.assert_allclose(const.bonds, a.bonds)


def test_wasep_bond_rate():
    r = wasep_rates(config(1, 0), HALF, TiltField.affine(1.0), 0.0)
    assert r.bonds[0] == pytest.approx(9 * np.exp(1 / 3))


def test_rates_nonnegative(rng):
    f = oracle_field()
    for _ in range(20):
        c = LatticeConfiguration.from_occupancy(rng.integers(0, 2, 11))
        r = wasep_rates(c, ReservoirParams(0.1, 0.9, 0.5, 2.0), f, rng.uniform(0, 1))
        assert np.all(r.bonds >= 0) and r.left > 0 and r.right > 0
        occ = c.occupancy
        assert np.all((r.bonds == 0) == (occ[1:] == occ[:-1]))


# --- simulation -----------------------------------------------------------------------------------

def test_zero_horizon_has_no_events():
    p = simulate(config(1, 0, 1, 1), HALF, None, 0.0, seed=3)
    assert len(p) == 0


def test_determinism(params):
    init = sample_profile(lambda x: 0.5 + 0 * x, 32, 5)
    a = simulate(init, params, oracle_field(), 0.05, seed=11)
    b = simulate(init, params, oracle_field(), 0.05, seed=11)
    c = simulate(init, params, oracle_field(), 0.05, seed=12)
    assert a == b
    assert a.log_weight == b.log_weight
    assert a != c


def test_exchange_conserves_particles(params):
    init = sample_profile(params.stationary_profile, 24, 1)
    path = simulate(init, params, oracle_field(), 0.05, seed=2)
    eta = init.occupancy.astype(int).copy()
    for t, kind, s in path.events:
        before = eta.sum()
        if kind == "exchange":
            assert eta[s - 1] != eta[s]
            eta[s - 1], eta[s] = eta[s], eta[s - 1]
            assert eta.sum() == before
        else:
            k = 0 if kind == "left" else eta.size - 1
            assert s - 1 == k
            eta[k] = 1 - eta[k]
    np.testing.assert_array_equal(eta, path.state_at(path.end_time))


def test_sample_profile():
    assert sample_profile(lambda x: 0 * x, 50, 1).particle_count() == 0
    assert sample_profile(lambda x: 0 * x + 1, 50, 1).particle_count() == 49
    c = sample_profile(lambda x: 0 * x + 0.5, 10_000, 3)
    assert abs(EmpiricalMeasure.from_config(c).mass - 0.5) <= 0.015
    with pytest.raises(ValueError):
        sample_profile(lambda x: 0 * x + 1.5, 10, 1)


def test_stationarity_of_half_product_measure():
    n, reps = 16, 10_000
    sim = Simulator(n, HALF, None, 0.05)
    occ = np.empty((reps, n - 1))
    for i in range(reps):
        init = sample_profile(lambda x: 0 * x + 0.5, n, 10_000 + i)
        occ[i] = time_averaged_occupation(sim.run(init, 20_000 + i))
    mean, se = occ.mean(axis=0), occ.std(axis=0, ddof=1) / np.sqrt(reps)
    assert np.all(np.abs(mean - 0.5) <= 3 * se)
    assert np.abs(occ.mean() - 0.5) <= 3 * occ.mean(axis=1).std(ddof=1) / np.sqrt(reps)


def _uniformization(init, params, field, horizon, rng):
    """Reference sampler: dominating Poisson clock and acceptance of each candidate event."""
    n = init.n_scale
    eta = init.occupancy.astype(int).copy()
    hb, gb = field.value_bound, field.grad_bound
    cap = (n - 2) * n * n * np.exp(2 * gb / n) + n * np.exp(hb) * (1 / params.cap_a + 1 / params.cap_b)
    t, left = 0.0, 0
    counts = np.zeros(3)
    while True:
        t += rng.exponential(1 / cap)
        if t > horizon:
            return counts
        r = wasep_rates(eta, params, field, t)
        rates = np.r_[r.bonds, r.left, r.right]
        u = rng.uniform(0, cap)
        c = np.cumsum(rates)
        k = int(np.searchsorted(c, u, side="right"))
        if k >= rates.size:
            continue
        if k < n - 2:
            eta[k], eta[k + 1] = eta[k + 1], eta[k]
            counts[0] += 1
        elif k == n - 2:
            eta[0] = 1 - eta[0]
            counts[1] += 1
        else:
            eta[-1] = 1 - eta[-1]
            counts[2] += 1


def test_thinning_against_uniformization():
    n, horizon, reps = 8, 0.1, 2000
    params = ReservoirParams(0.2, 0.7, 0.5, 2.0)
    field = TiltField.sine(1.5, 1)
    init = sample_profile(lambda x: 0.3 + 0.4 * x, n, 0)
    g = np.random.default_rng(99)
    ref = np.array([_uniformization(init, params, field, horizon, g) for _ in range(reps)])
    sim = Simulator(n, params, field, horizon)
    got = np.array([sim.snapshots(init.occupancy, 500 + i, None)[2][:3] for i in range(reps)], dtype=float)
    for j in range(3):
        se = np.hypot(ref[:, j].std(ddof=1), got[:, j].std(ddof=1)) / np.sqrt(reps)
        assert abs(ref[:, j].mean() - got[:, j].mean()) <= 3 * se + 1e-12


def test_run_and_snapshot_agree(params):
    sim = Simulator(20, params, oracle_field(), 0.04)
    init = sample_profile(params.stationary_profile, 20, 4)
    path = sim.run(init, 17)
    snaps, logw, counts = sim.snapshots(init.occupancy, 17, [0.01, 0.04])
    np.testing.assert_array_equal(snaps[0], path.state_at(0.01))
    np.testing.assert_array_equal(snaps[1], path.state_at(0.04))
    assert logw == path.log_weight
    assert counts[:3].sum() == len(path)


# --- Girsanov weights ---------------------------------------------------------------------------

def test_zero_field_weight_is_zero(params):
    path = simulate(sample_profile(params.stationary_profile, 16, 1), params, None, 0.05, seed=1)
    assert girsanov_log_weight(path, params, TiltField.zero()) == 0.0
    assert path.log_weight == 0.0


def test_replay_matches_inline(params):
    f = oracle_field()
    path = simulate(sample_profile(params.stationary_profile, 32, 1), params, f, 0.2, seed=8)
    assert girsanov_log_weight(path, params, f) == pytest.approx(path.log_weight, abs=1e-10)


def test_single_left_flip_closed_form():
    n, h, t1, horizon = 5, 0.3, 0.4, 1.0
    p = ReservoirParams(0.25, 0.6, 2.0, 0.5)
    init = config(0, 0, 0, 0)
    path = JumpPath(init, [t1], [1], [1], horizon, params=p)
    w = girsanov_log_weight(path, p, TiltField.affine(0.0, h))
    left_before = n / p.cap_a * p.alpha * np.expm1(h)
    left_after = n / p.cap_a * (1 - p.alpha) * np.expm1(-h)
    right = n / p.cap_b * p.beta * np.expm1(h)
    expected = h - (left_before * t1 + left_after * (horizon - t1) + right * horizon)
    assert w == pytest.approx(expected, rel=1e-12, abs=1e-12)


def _exact_log_ratio(path, params, field, n_quad=400):
    """Jump log-ratios minus the compensator, integrated piecewise with Gauss-Legendre."""
    eta = path.initial_config.occupancy.astype(int).copy()
    n = path.n_scale
    x = np.arange(1, n) / n
    grid = np.r_[path.start_time, path.times, path.end_time]
    total = 0.0
    for i in range(grid.size - 1):
        a, b = grid[i], grid[i + 1]
        if b > a:
            comp = quad(lambda s: wasep_rates(eta, params, field, s).total - ssep_rates(eta, params).total, a, b,
                        epsabs=1e-13, epsrel=1e-12)[0]
            total -= comp
        if i < path.times.size:
            t, k, s = path.times[i], path.kinds[i], path.sites[i]
            h = field.value(t, x)
            if k == 0:
                total += (eta[s - 1] - eta[s]) * (h[s] - h[s - 1])
                eta[s - 1], eta[s] = eta[s], eta[s - 1]
            else:
                j = s - 1
                total += h[j] if eta[j] == 0 else -h[j]
                eta[j] = 1 - eta[j]
    return total


def test_weight_matches_continuous_time_oracle():
    params = ReservoirParams(0.3, 0.6)
    field = oracle_field()
    path = simulate(sample_profile(params.stationary_profile, 6, 2), params, field, 0.5, seed=21)
    assert len(path) > 5
    exact = _exact_log_ratio(path, params, field)
    assert girsanov_log_weight(path, params, field) == pytest.approx(exact, abs=1e-6)


def test_weight_additive_under_split(params):
    f = oracle_field()
    path = simulate(sample_profile(params.stationary_profile, 24, 3), params, f, 0.2, seed=5)
    a, b = path.split(0.1)
    total = girsanov_log_weight(a, params, f) + girsanov_log_weight(b, params, f)
    assert total == pytest.approx(girsanov_log_weight(path, params, f), abs=1e-10)
    assert len(a) + len(b) == len(path)


def test_likelihood_ratio_has_unit_mean():
    n, horizon, reps = 8, 0.1, 4000
    params = ReservoirParams(0.2, 0.7)
    field = TiltField.sine(0.8, 1)
    sim = Simulator(n, params, field, horizon)
    init = sample_profile(lambda x: 0.5 + 0 * x, n, 1)
    w = np.exp(-np.array([sim.snapshots(init.occupancy, i, None)[1] for i in range(reps)]))
    assert abs(w.mean() - 1) <= 3 * w.std(ddof=1) / np.sqrt(reps)


def test_weight_requires_covering_field(params):
    f = TiltField.tabulated([0.0, 0.05], [0.0, 1.0], np.zeros((2, 2)))
    path = simulate(sample_profile(params.stationary_profile, 8, 3), params, None, 0.1, seed=5)
    with pytest.raises(ValueError):
        girsanov_log_weight(path, params, f)


# --- paths and measures -------------------------------------------------------------------------

def test_jump_path_validation():
    c = config(0, 1, 0)
    with pytest.raises(ValueError):
        JumpPath(c, [0.2, 0.1], [0, 0], [1, 2], 1.0)
    with pytest.raises(ValueError):
        JumpPath(c, [1.5], [0], [1], 1.0)


def test_jump_path_io(tmp_path, params):
    path = simulate(sample_profile(params.stationary_profile, 12, 3), params, oracle_field(), 0.05, seed=9)
    save_jump_path(path, tmp_path / "p")
    back = load_jump_path(tmp_path / "p")
    assert back == path and back.rng_seed == 9


def test_mollifier_normalized():
    z = bump_normalizer()
    assert quad(lambda r: bump(r), -1, 1, epsabs=1e-13)[0] == pytest.approx(1.0, rel=1e-12)
    assert z > 0
    assert bump(np.array([-1.0, 1.0, 2.0])).max() == 0.0


def test_empirical_density_limits():
    assert np.all(empirical_density(LatticeConfiguration.empty(40), 0.1) == 0)
    full = LatticeConfiguration.from_occupancy(np.ones(4095, np.uint8))
    eps = 0.1
    x = np.array([0.3, 0.5, 0.7])
    np.testing.assert_allclose(empirical_density(full, eps, x=x), 1 / (1 + eps), rtol=1e-6)


def test_empirical_density_mass(rng):
    c = LatticeConfiguration.from_occupancy(rng.integers(0, 2, 199))
    m = EmpiricalMeasure.from_config(c)
    x = np.linspace(0, 1, 4001)
    d = empirical_density(m, 0.05, x=x)
    assert np.trapezoid(d, x) <= m.mass / 1.05 + 1e-9
    assert m.integrate(lambda y: np.ones_like(y)) == m.mass
    with pytest.raises(ValueError):
        empirical_density(m, 0.0)
    with pytest.raises(ValueError):
        empirical_density(m, 0.1, u_eps=1.0)


def test_field_bounds_enforced():
    bad = TiltField(lambda t, x: 5 * x, lambda t, x: np.full_like(x, 5.0), lambda t, x: 0 * x, 1.0, 5.0)
    with pytest.raises(ValueError):
        Simulator(10, HALF, bad, 0.1)


def test_field_from_csv(tmp_path):
    t, x = np.linspace(0, 1, 3), np.linspace(0, 1, 5)
    rows = [(ti, xi, ti * xi) for ti in t for xi in x]
    p = tmp_path / "h.csv"
    np.savetxt(p, rows, delimiter=",", header="t,x,H", comments="")
    f = TiltField.from_csv(p)
    assert f.value(0.5, np.array([0.5]))[0] == pytest.approx(0.25)
    assert f.covers(1.0) and not f.covers(1.5)
