import numpy as np
import pytest

from mzip.errors import InvalidArgument
from mzip.geweke import functionals, joint_test, small_problem
from mzip.sampler import draw_prior_state, simulate_counts


def test_prior_draw_is_valid_state():
    from mzip.model import validate_state

    data, hyper = small_problem()
    rng = np.random.default_rng(0)
    for _ in range(20):
        st = draw_prior_state(hyper, data, rng)
        validate_state(st, data)
        y = simulate_counts(st, data, rng)
        assert np.all(y[st.w_lat < 0] == 0)


def test_jeffreys_prior_cannot_be_drawn():
    data, hyper = small_problem(r_prior="jeffreys")
    with pytest.raises(InvalidArgument):
        draw_prior_state(hyper, data, np.random.default_rng(0))


def test_functionals_cover_every_block():
    data, hyper = small_problem(q=3)
    f = functionals(draw_prior_state(hyper, data, np.random.default_rng(1)))
    for key in ("beta0_0", "alpha0_2", "r_01", "sigma_v_12", "gamma_00", "delta_20", "log_sigma2_alpha0"):
        assert key in f and np.isfinite(f[key])


def test_short_joint_run():
    res = joint_test(n_iter=600, n_prior=4000, seed=3)
    assert len(res.names) == res.z.size
    assert np.all(np.isfinite(res.z))
    assert res.fraction_within >= 0.9
