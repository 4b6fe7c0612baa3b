import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numba import njit
from scipy import stats

from mzip import prng


@njit(cache=True)
def _normals(s, m):
    out = np.empty(m)
    for i in range(m):
        out[i] = prng.std_normal(s)
    return out


@njit(cache=True)
def _gammas(s, shape, m):
    out = np.empty(m)
    for i in range(m):
        out[i] = prng.gamma(s, shape)
    return out


@njit(cache=True)
def _truncs(s, a, m):
    out = np.empty(m)
    for i in range(m):
        out[i] = prng.std_truncnorm_lower(s, a)
    return out


@njit(cache=True)
def _uniforms(s, m):
    out = np.empty(m)
    for i in range(m):
        out[i] = prng.uniform(s)
    return out


def test_stream_is_function_of_seed():
    a, b = prng.new_state(7), prng.new_state(7)
    assert np.array_equal(_normals(a, 50), _normals(b, 50))
    assert not np.array_equal(_normals(prng.new_state(8), 50), _normals(prng.new_state(7), 50))


def test_uniform_range_and_moments():
    u = _uniforms(prng.new_state(1), 200_000)
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)


def test_ziggurat_normal_ks():
    x = _normals(prng.new_state(2), 400_000)
    assert stats.kstest(x, "norm").pvalue > 1e-3
    # tails are exercised
    assert np.mean(np.abs(x) > 3.442619855899) == pytest.approx(2 * stats.norm.sf(3.442619855899), rel=0.15)


@pytest.mark.parametrize("shape", [0.3, 0.7, 1.0, 2.5, 40.0])
def test_gamma_ks(shape):
    g = _gammas(prng.new_state(3), shape, 100_000)
    assert stats.kstest(g, "gamma", args=(shape,)).pvalue > 1e-3


@settings(max_examples=15, deadline=None)
@given(a=st.floats(min_value=-4.0, max_value=30.0))
def test_truncnorm_matches_law(a):
    x = _truncs(prng.new_state(4), a, 20_000)
    assert x.min() >= a
    dist = stats.truncnorm(a, np.inf)
    assert stats.kstest(x, dist.cdf).pvalue > 1e-4


def test_truncnorm_sides():
    s = prng.new_state(9)
    assert all(prng.truncnorm_positive(s, -25.0, 1.0) >= 0 for _ in range(100))
    assert all(prng.truncnorm_negative(s, 25.0, 0.5) < 0 for _ in range(100))
