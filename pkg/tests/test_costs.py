import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robin_sep.boundary import (
    boundary_b,
    boundary_c,
    boundary_p,
    boundary_p_inverse,
    boundary_p_prime,
    boundary_q,
)


def sweep(n=10_000, seed=0):
    g = np.random.default_rng(seed)
    return (g.uniform(0.01, 0.99, n), g.uniform(0.1, 5.0, n), g.uniform(0.0, 1.0, n), g.uniform(-3.0, 3.0, n))


def test_p_is_derivative_of_b():
    rho, d, a, m = sweep()
    h = 1e-5
    fd = (boundary_b(rho, d, a, m + h) - boundary_b(rho, d, a, m - h)) / (2 * h)
    assert np.max(np.abs(fd - boundary_p(rho, d, a, m))) < 1e-6


def test_p_prime_is_derivative_of_p():
    rho, d, a, m = sweep(2000, 1)
    h = 1e-5
    fd = (boundary_p(rho, d, a, m + h) - boundary_p(rho, d, a, m - h)) / (2 * h)
    assert np.max(np.abs(fd - boundary_p_prime(rho, d, a, m))) < 1e-6
    assert np.all(boundary_p_prime(rho, d, a, m) >= 0)


def test_c_and_q_identities():
    rho, d, a, m = sweep()
    b = boundary_b(rho, d, a, m)
    c_ref = m * boundary_p(rho, d, a, m) - b
    q_ref = b - m * (rho - a) / d
    scale = 1 + np.abs(b) + np.abs(m * boundary_p(rho, d, a, m))
    assert np.max(np.abs(boundary_c(rho, d, a, m) - c_ref) / scale) < 1e-14
    assert np.max(np.abs(boundary_q(rho, d, a, m) - q_ref) / scale) < 1e-14


def test_q_nonnegative_and_zero_at_origin():
    rho, d, a, m = sweep()
    assert np.all(boundary_q(rho, d, a, m) >= 0)
    assert np.all(boundary_q(rho, d, a, np.zeros_like(m)) == 0)
    assert np.all(boundary_b(rho, d, a, np.zeros_like(m)) == 0)


def test_c_is_nonnegative():
    rho, d, a, m = sweep()
    assert np.all(boundary_c(rho, d, a, m) >= -1e-15)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1])
def test_invalid_reservoir_density(bad):
    with pytest.raises(ValueError):
        boundary_b(bad, 1.0, 0.5, 0.1)


def test_invalid_coupling():
    with pytest.raises(ValueError):
        boundary_p(0.3, 0.0, 0.5, 0.1)


@settings(max_examples=200, deadline=None)
@given(rho=st.floats(0.01, 0.99), d=st.floats(0.1, 10), a=st.floats(0.001, 0.999), m=st.floats(-8, 8))
def test_p_inverse_roundtrip(rho, d, a, m):
    p = boundary_p(rho, d, a, m)
    assert boundary_p_inverse(rho, d, a, p) == pytest.approx(m, abs=1e-9 * (1 + abs(m)))
