"""Explicit-state random streams for the compiled kernels.

xoshiro256** (Blackman & Vigna) with a 4-word ``uint64`` state array that is
passed to every kernel, plus the few variate generators the sampler needs.
States are seeded from :class:`numpy.random.SeedSequence`, so a stream is a
pure function of the integer seed.
"""
import math

import numpy as np
from numba import njit

_U53 = 1.0 / 9007199254740992.0


def new_state(seed) -> np.ndarray:
    """Fresh stream state from an int seed or a SeedSequence."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    st = ss.generate_state(4, np.uint64)
    if not st.any():
        st[0] = 1
    return st


def state_from_generator(rng: np.random.Generator) -> np.ndarray:
    return new_state(np.random.SeedSequence(rng.integers(0, 2**63, size=4).tolist()))


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def uniform(s):
    """[0, 1) with 53 random bits."""
    return float(next_u64(s) >> np.uint64(11)) * _U53


@njit(cache=True)
def uniform_open(s):
    """(0, 1]."""
    return 1.0 - uniform(s)


def _zignor_tables(c=128, r=3.442619855899, v=9.91256303526217e-3):
    # Doornik's ZIGNOR layout: x[0] is the base strip (area v incl. the tail)
    x = np.empty(c + 1)
    f = math.exp(-0.5 * r * r)
    x[0] = v / f
    x[1] = r
    x[c] = 0.0
    for i in range(2, c):
        x[i] = math.sqrt(-2.0 * math.log(v / x[i - 1] + f))
        f = math.exp(-0.5 * x[i] * x[i])
    return x, x[1:] / x[:-1]


_ZIG_X, _ZIG_R = _zignor_tables()
_ZIG_TAIL = 3.442619855899


@njit(cache=True)
def std_normal(s):
    """Exact N(0, 1) by the 128-layer ziggurat; layer index and abscissa use disjoint bits."""
    while True:
        r = next_u64(s)
        i = int(r & np.uint64(127))
        u = 2.0 * (float(r >> np.uint64(11)) * _U53) - 1.0
        if abs(u) < _ZIG_R[i]:
            return u * _ZIG_X[i]
        if i == 0:
            while True:
                xx = math.log(uniform_open(s)) / _ZIG_TAIL
                yy = math.log(uniform_open(s))
                if -2.0 * yy >= xx * xx:
                    break
            return xx - _ZIG_TAIL if u < 0.0 else _ZIG_TAIL - xx
        xx = u * _ZIG_X[i]
        f0 = math.exp(-0.5 * (_ZIG_X[i] * _ZIG_X[i] - xx * xx))
        f1 = math.exp(-0.5 * (_ZIG_X[i + 1] * _ZIG_X[i + 1] - xx * xx))
        if f1 + uniform(s) * (f0 - f1) < 1.0:
            return xx


@njit(cache=True)
def gamma(s, shape):
    """Gamma(shape, 1) by Marsaglia-Tsang; boosted for shape < 1."""
    if shape < 1.0:
        return _gamma_ge1(s, shape + 1.0) * uniform_open(s) ** (1.0 / shape)
    return _gamma_ge1(s, shape)


@njit(cache=True)
def _gamma_ge1(s, shape):
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        xx = std_normal(s)
        v = 1.0 + c * xx
        if v <= 0.0:
            continue
        v = v * v * v
        u = uniform_open(s)
        if u < 1.0 - 0.0331 * xx ** 4:
            return d * v
        if math.log(u) < 0.5 * xx * xx + d * (1.0 - v + math.log(v)):
            return d * v


@njit(cache=True)
def chisquare(s, dof):
    return 2.0 * gamma(s, 0.5 * dof)


@njit(cache=True)
def std_truncnorm_lower(s, a):
    """One draw of Z ~ N(0, 1) conditioned on Z >= a."""
    if a < 0.0:
        # plain rejection: acceptance P(Z >= a) >= 1/2
        while True:
            zz = std_normal(s)
            if zz >= a:
                return zz
    # Robert (1995) exponential rejection with the optimal rate; acceptance >= 0.76
    lam = 0.5 * (a + math.sqrt(a * a + 4.0))
    while True:
        zz = a - math.log(uniform_open(s)) / lam
        if math.log(uniform_open(s)) <= -0.5 * (zz - lam) ** 2:
            return zz


@njit(cache=True)
def truncnorm_positive(s, m, sd):
    """Draw from N(m, sd^2) restricted to [0, inf)."""
    return m + sd * std_truncnorm_lower(s, -m / sd)


@njit(cache=True)
def truncnorm_negative(s, m, sd):
    """Draw from N(m, sd^2) restricted to (-inf, 0)."""
    draw = m - sd * std_truncnorm_lower(s, m / sd)
    if draw >= 0.0:
        # rounding at the boundary; the event has probability zero
        draw = -1e-300
    return draw
