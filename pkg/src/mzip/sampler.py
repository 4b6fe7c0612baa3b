"""Data-augmentation MCMC for the MZIP model.

One scan runs the kernels in a fixed order::

    impute_w -> alpha/delta -> alpha0 -> R (PX-DA) -> beta/gamma -> beta0
             -> V -> count shift -> Sigma_V -> variance hyperparameters

The Python wrappers below (``impute_w``, ``update_alpha_delta`` ...) run a
single kernel on a :class:`~mzip.model.ModelState`; :func:`run_chain` drives
the compiled scan loop.
"""
from __future__ import annotations

import dataclasses
import logging
import time
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy import special, stats

from . import kernels as K
from .archive import ChainArchive
from .errors import InvalidArgument, InvalidState
from .model import Dataset, Hyperparameters, ModelState, validate_state
from .prng import new_state, state_from_generator

log = logging.getLogger(__name__)

KERNEL_NAMES = ("impute_w", "update_alpha_delta", "update_alpha0", "update_r_pxda", "update_beta_gamma",
                "update_beta0", "update_v", "update_count_shift", "update_sigma_v", "update_sigma2_hypers")
INTERCEPT_EPS = 1e-6


@dataclass
class SamplerConfig:
    n_scans: int = 10_000
    burn_in: int = 5_000
    thin: int = 1
    seed: int = 0
    mh_step_beta: float = 1.0  # birth-proposal SD as a multiple of the local curvature scale
    mh_step_v: float = 1.0  # initial random-walk multiplier for V (adapted)
    adapt_until: Optional[int] = None  # None -> burn_in
    target_accept: float = 0.44
    store_covariances: bool = True
    store_latent: bool = False

    def __post_init__(self):
        if self.n_scans < 1 or self.thin < 1:
            raise InvalidArgument("n_scans and thin must be positive")
        if not 0 <= self.burn_in < self.n_scans:
            raise InvalidArgument("burn_in must satisfy 0 <= burn_in < n_scans")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be a 64-bit unsigned integer")
        if self.mh_step_beta <= 0 or self.mh_step_v <= 0:
            raise InvalidArgument("step sizes must be positive")
        if not 0 < self.target_accept < 1:
            raise InvalidArgument("target_accept must lie in (0, 1)")
        if self.adapt_until is not None and self.adapt_until < 0:
            raise InvalidArgument("adapt_until must be >= 0")

    @property
    def adapt_stop(self) -> int:
        return self.burn_in if self.adapt_until is None else self.adapt_until

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _prior_centre(a, b):
    """Inverse-Gamma mean where it exists, otherwise the mode."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.where(a > 1, b / np.maximum(a - 1, 1e-300), b / (a + 1))


def initialize_state(data: Dataset, hyper: Hyperparameters, seed: int) -> ModelState:
    hyper.validate(data)
    rng = np.random.default_rng(seed)
    n, q, p_x, p_z = data.n, data.q, data.p_x, data.p_z
    mean_y = data.y.mean(axis=0)
    if np.any(mean_y == 0):
        bad = [data.outcome_names[j] for j in np.flatnonzero(mean_y == 0)]
        warnings.warn(f"outcomes with all-zero counts: {bad}; intercepts floored at log({INTERCEPT_EPS})")
    beta0 = np.log(mean_y / data.offset.mean() + INTERCEPT_EPS)

    s2b = np.atleast_1d(_prior_centre(hyper.a_beta, hyper.b_beta)).astype(float)
    s2a = np.atleast_1d(_prior_centre(hyper.a_alpha, hyper.b_alpha)).astype(float)
    b_mat = np.zeros((p_x, q))
    a_mat = np.zeros((p_z, q))
    gamma = np.zeros((q, p_x), np.int64)
    delta = np.zeros((q, p_z), np.int64)
    # forced-in coefficients start near zero; a draw from the diffuse slab overflows exp()
    for k in np.flatnonzero(hyper.forced_in_count):
        gamma[:, k] = 1
        b_mat[k] = rng.normal(0.0, 0.01, q)
    for l in np.flatnonzero(hyper.forced_in_binary):
        delta[:, l] = 1
        a_mat[l] = rng.normal(0.0, 0.01, q)

    prop = np.maximum(0.05, (data.y > 0).mean(axis=0))
    centre = np.broadcast_to(special.ndtri(np.minimum(prop, 0.95)), (n, q))
    w = rng.normal(centre, 1.0)
    pos = data.y > 0
    if pos.any():
        lower = -centre[pos]
        w[pos] = centre[pos] + stats.truncnorm.rvs(lower, np.inf, random_state=rng)
    state = ModelState(
        beta0=beta0, alpha0=np.zeros(q), b_mat=b_mat, a_mat=a_mat, gamma=gamma, delta=delta,
        v_rand=np.zeros((n, q)), sigma_v=np.eye(q), r_corr=np.eye(q), w_lat=w,
        sigma2_beta=s2b, sigma2_alpha=s2a,
        sigma2_beta0=float(_prior_centre(hyper.a_beta0, hyper.b_beta0)),
        sigma2_alpha0=float(_prior_centre(hyper.a_alpha0, hyper.b_alpha0)),
    )
    validate_state(state, data)
    return state


def draw_prior_state(hyper: Hyperparameters, data: Dataset, rng: np.random.Generator) -> ModelState:
    """Exact draw of every parameter and latent from the prior (given covariates).

    Only proper correlation priors can be sampled; ``y`` in ``data`` is ignored.
    """
    from scipy.stats import invwishart

    q, p_x, p_z, n = data.q, data.p_x, data.p_z, data.n
    if hyper.r_prior == "jeffreys":
        raise InvalidArgument("the Jeffreys correlation prior is improper and cannot be sampled")
    if q == 1:
        r = np.ones((1, 1))
    elif hyper.r_prior == "marginal-uniform":
        sig = np.atleast_2d(invwishart.rvs(df=q + 1, scale=np.eye(q), random_state=rng))
        dd = np.sqrt(np.diag(sig))
        r = sig / np.outer(dd, dd)
    else:
        # uniform over PD correlation matrices by rejection from uniform off-diagonals
        while True:
            r = np.eye(q)
            iu = np.triu_indices(q, 1)
            r[iu] = rng.uniform(-1, 1, len(iu[0]))
            r = r + np.triu(r, 1).T
            if np.linalg.eigvalsh(r).min() > 0:
                break
    np.fill_diagonal(r, 1.0)

    def inv_gamma(a, b):
        return b / rng.gamma(a)

    s2b0 = inv_gamma(hyper.a_beta0, hyper.b_beta0)
    s2a0 = inv_gamma(hyper.a_alpha0, hyper.b_alpha0)
    beta0 = hyper.mu_beta0 + np.sqrt(s2b0) * rng.standard_normal(q)
    alpha0 = rng.multivariate_normal(hyper.mu_alpha0, s2a0 * r)
    s2b = np.array([inv_gamma(a, b) for a, b in zip(hyper.a_beta, hyper.b_beta)])
    s2a = np.array([inv_gamma(a, b) for a, b in zip(hyper.a_alpha, hyper.b_alpha)])
    gamma = (rng.random((q, p_x)) < hyper.omega_beta).astype(np.int64)
    delta = (rng.random((q, p_z)) < hyper.omega_alpha).astype(np.int64)
    gamma[:, hyper.forced_in_count] = 1
    delta[:, hyper.forced_in_binary] = 1
    b_mat = (gamma * rng.standard_normal((q, p_x)) * hyper.v_beta[:, None] * np.sqrt(s2b)).T.copy()
    a_mat = (delta * rng.standard_normal((q, p_z)) * hyper.v_alpha[:, None] * np.sqrt(s2a)).T.copy()
    sigma_v = np.atleast_2d(invwishart.rvs(df=hyper.rho0, scale=hyper.psi0, random_state=rng))
    v_rand = rng.multivariate_normal(np.zeros(q), sigma_v, size=n)
    w = probit_mean_np(data.z, alpha0, a_mat) + rng.multivariate_normal(np.zeros(q), r, size=n)
    return ModelState(beta0=beta0, alpha0=alpha0, b_mat=b_mat, a_mat=a_mat, gamma=gamma, delta=delta,
                      v_rand=v_rand, sigma_v=sigma_v, r_corr=r, w_lat=w, sigma2_beta=s2b, sigma2_alpha=s2a,
                      sigma2_beta0=float(s2b0), sigma2_alpha0=float(s2a0))


def probit_mean_np(z, alpha0, a_mat):
    return alpha0 + z @ a_mat


def simulate_counts(state: ModelState, data: Dataset, rng: np.random.Generator) -> np.ndarray:
    """y | (parameters, w, V): structural zero where w < 0, Poisson otherwise."""
    lam = np.exp(state.log_lambda(data))
    return np.where(state.w_lat >= 0, rng.poisson(lam), 0).astype(np.int64)


# ---------------------------------------------------------------- single-kernel wrappers

def _check(status: int, kernel: str) -> None:
    if status == K.ERR_NOT_PD:
        raise InvalidState(f"{kernel}: matrix not positive-definite")
    if status == K.ERR_IW_FAILED:
        raise InvalidState(f"{kernel}: inverse-Wishart draw failed after 5 attempts")


def _log_offset(data: Dataset) -> np.ndarray:
    return np.log(data.offset)


def _yf(data: Dataset) -> np.ndarray:
    return data.y.astype(np.float64)


def impute_w(state: ModelState, data: Dataset, rng: np.random.Generator) -> np.ndarray:
    rs = state_from_generator(rng)
    _check(K.impute_w(rs, _yf(data), data.x, data.z, _log_offset(data), state.beta0, state.b_mat, state.v_rand,
                      state.alpha0, state.a_mat, state.r_corr, state.w_lat), "impute_w")
    return state.w_lat


def update_alpha_delta(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator):
    rs = state_from_generator(rng)
    _check(K.update_alpha_delta(rs, state.w_lat, data.z, state.alpha0, state.a_mat, state.delta, state.r_corr,
                                state.sigma2_alpha, hyper.v_alpha, hyper.omega_alpha, hyper.forced_in_binary),
           "update_alpha_delta")
    return state.a_mat, state.delta


def update_alpha0(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator):
    rs = state_from_generator(rng)
    _check(K.update_alpha0(rs, state.w_lat, data.z, state.a_mat, state.r_corr, hyper.mu_alpha0,
                           state.sigma2_alpha0, state.alpha0), "update_alpha0")
    return state.alpha0


def update_r_pxda(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator,
                  acc: Optional[np.ndarray] = None):
    rs = state_from_generator(rng)
    acc = np.zeros((len(K.ACC_NAMES), 2)) if acc is None else acc
    _check(K.update_r_pxda(rs, state.w_lat, data.z, state.alpha0, state.a_mat, state.delta, state.r_corr,
                           state.sigma2_alpha, hyper.v_alpha, state.sigma2_alpha0, hyper.mu_alpha0,
                           *hyper.r_prior_terms, acc), "update_r_pxda")
    return state.r_corr


def update_beta_gamma(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator,
                      log_step: Optional[np.ndarray] = None, birth_scale: float = 1.0,
                      acc: Optional[np.ndarray] = None):
    rs = state_from_generator(rng)
    log_step = np.zeros((data.q, data.p_x)) if log_step is None else log_step
    acc = np.zeros((len(K.ACC_NAMES), 2)) if acc is None else acc
    _check(K.update_beta_gamma(rs, _yf(data), data.x, _log_offset(data), state.w_lat, state.beta0, state.b_mat,
                               state.gamma, state.v_rand, state.sigma2_beta, hyper.v_beta, hyper.omega_beta,
                               hyper.forced_in_count, log_step, birth_scale, 0.0, 0.44, acc),
           "update_beta_gamma")
    return state.b_mat, state.gamma


def update_beta0(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator,
                 log_step: Optional[np.ndarray] = None, acc: Optional[np.ndarray] = None):
    rs = state_from_generator(rng)
    log_step = np.zeros(data.q) if log_step is None else log_step
    acc = np.zeros((len(K.ACC_NAMES), 2)) if acc is None else acc
    _check(K.update_beta0(rs, _yf(data), data.x, _log_offset(data), state.w_lat, state.beta0, state.b_mat,
                          state.v_rand, hyper.mu_beta0, state.sigma2_beta0, log_step, 0.0, 0.44, acc),
           "update_beta0")
    return state.beta0


def update_v(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator,
             log_step: Optional[np.ndarray] = None, acc: Optional[np.ndarray] = None):
    rs = state_from_generator(rng)
    log_step = np.zeros(data.q) if log_step is None else log_step
    acc = np.zeros((len(K.ACC_NAMES), 2)) if acc is None else acc
    _check(K.update_v(rs, _yf(data), data.x, _log_offset(data), state.w_lat, state.beta0, state.b_mat, state.v_rand,
                      state.sigma_v, log_step, 0.0, 0.44, acc), "update_v")
    return state.v_rand


def update_count_shift(state: ModelState, data: Dataset, hyper: Hyperparameters, rng: np.random.Generator):
    rs = state_from_generator(rng)
    _check(K.update_count_shift(rs, data.x, state.beta0, state.b_mat, state.gamma, state.v_rand, state.sigma_v,
                                hyper.mu_beta0, state.sigma2_beta0, state.sigma2_beta, hyper.v_beta,
                                hyper.omega_beta, hyper.forced_in_count), "update_count_shift")
    return state.beta0, state.b_mat, state.gamma, state.v_rand


def update_sigma_v(state: ModelState, hyper: Hyperparameters, rng: np.random.Generator):
    rs = state_from_generator(rng)
    _check(K.update_sigma_v(rs, state.v_rand, hyper.psi0, hyper.rho0, state.sigma_v), "update_sigma_v")
    return state.sigma_v


def update_sigma2_hypers(state: ModelState, hyper: Hyperparameters, rng: np.random.Generator):
    rs = state_from_generator(rng)
    s2b0, s2a0 = K.update_sigma2_hypers(rs, 
        state.beta0, state.alpha0, state.b_mat, state.a_mat, state.gamma, state.delta, state.r_corr,
        hyper.v_beta, hyper.v_alpha, hyper.mu_beta0, hyper.mu_alpha0, hyper.a_beta, hyper.b_beta, hyper.a_alpha,
        hyper.b_alpha, hyper.a_beta0, hyper.b_beta0, hyper.a_alpha0, hyper.b_alpha0, state.sigma2_beta,
        state.sigma2_alpha)
    if s2a0 <= 0:
        raise InvalidState("update_sigma2_hypers: r_corr not positive-definite")
    state.sigma2_beta0 = s2b0
    state.sigma2_alpha0 = s2a0
    return state.sigma2_beta, state.sigma2_alpha, s2b0, s2a0


# ---------------------------------------------------------------- compiled scan loop

@njit(cache=True)
def _scan_block(rs, n_block, first_scan, adapt_stop, target_accept, birth_scale,
                y, x, z, log_offset,
                mu_beta0, mu_alpha0, a_beta0, b_beta0, a_alpha0, b_alpha0, v_beta, v_alpha, a_beta, b_beta,
                a_alpha, b_alpha, omega_beta, omega_alpha, psi0, rho0, forced_count, forced_binary, r_kappa, r_lam,
                beta0, alpha0, b_mat, a_mat, gamma, delta, v_rand, sigma_v, r_corr, w, sigma2_beta, sigma2_alpha,
                scalars, log_step_beta0, log_step_beta, log_step_v, acc):
    """Run ``n_block`` scans. ``scalars`` holds [sigma2_beta0, sigma2_alpha0].
    Returns (status, kernel index, scan index) of the first failure, or zeros."""
    for b in range(n_block):
        scan = first_scan + b
        aw = 0.0
        if scan < adapt_stop:
            aw = (scan + 1.0) ** -0.6
        st = K.impute_w(rs, y, x, z, log_offset, beta0, b_mat, v_rand, alpha0, a_mat, r_corr, w)
        if st:
            return st, 0, scan
        st = K.update_alpha_delta(rs, w, z, alpha0, a_mat, delta, r_corr, sigma2_alpha, v_alpha, omega_alpha,
                                  forced_binary)
        if st:
            return st, 1, scan
        st = K.update_alpha0(rs, w, z, a_mat, r_corr, mu_alpha0, scalars[1], alpha0)
        if st:
            return st, 2, scan
        st = K.update_r_pxda(rs, w, z, alpha0, a_mat, delta, r_corr, sigma2_alpha, v_alpha, scalars[1], mu_alpha0,
                             r_kappa, r_lam, acc)
        if st:
            return st, 3, scan
        st = K.update_beta_gamma(rs, y, x, log_offset, w, beta0, b_mat, gamma, v_rand, sigma2_beta, v_beta,
                                 omega_beta, forced_count, log_step_beta, birth_scale, aw, target_accept, acc)
        if st:
            return st, 4, scan
        st = K.update_beta0(rs, y, x, log_offset, w, beta0, b_mat, v_rand, mu_beta0, scalars[0], log_step_beta0,
                            aw, target_accept, acc)
        if st:
            return st, 5, scan
        st = K.update_v(rs, y, x, log_offset, w, beta0, b_mat, v_rand, sigma_v, log_step_v, aw, target_accept, acc)
        if st:
            return st, 6, scan
        st = K.update_count_shift(rs, x, beta0, b_mat, gamma, v_rand, sigma_v, mu_beta0, scalars[0], sigma2_beta,
                                  v_beta, omega_beta, forced_count)
        if st:
            return st, 7, scan
        st = K.update_sigma_v(rs, v_rand, psi0, rho0, sigma_v)
        if st:
            return st, 8, scan
        s2b0, s2a0 = K.update_sigma2_hypers(rs, beta0, alpha0, b_mat, a_mat, gamma, delta, r_corr, v_beta, v_alpha,
                                            mu_beta0, mu_alpha0, a_beta, b_beta, a_alpha, b_alpha, a_beta0,
                                            b_beta0, a_alpha0, b_alpha0, sigma2_beta, sigma2_alpha)
        if s2a0 <= 0.0:
            return K.ERR_NOT_PD, 9, scan
        scalars[0] = s2b0
        scalars[1] = s2a0
    return 0, 0, 0


class ChainRunner:
    """Holds a state plus tuning and runs scans; :func:`run_chain` is the usual entry point."""

    def __init__(self, data: Dataset, hyper: Hyperparameters, config: SamplerConfig,
                 state: Optional[ModelState] = None):
        hyper.validate(data)
        self.data, self.hyper, self.config = data, hyper, config
        self.state = initialize_state(data, hyper, config.seed) if state is None else state
        # initialization consumes SeedSequence(seed); the chain uses a spawned child
        self.rs = new_state(np.random.SeedSequence(config.seed).spawn(1)[0])
        self.scan = 0
        self.log_step_beta0 = np.zeros(data.q)
        self.log_step_beta = np.zeros((data.q, data.p_x))
        self.log_step_v = np.full(data.q, np.log(config.mh_step_v))
        self.acc = np.zeros((len(K.ACC_NAMES), 2))
        self._y = _yf(data)
        self._log_offset = _log_offset(data)

    def run(self, n: int) -> None:
        st, h, d = self.state, self.hyper, self.data
        scalars = np.array([st.sigma2_beta0, st.sigma2_alpha0])
        status, kernel, scan = _scan_block(
            self.rs, n, self.scan, self.config.adapt_stop, self.config.target_accept, self.config.mh_step_beta,
            self._y, d.x, d.z, self._log_offset,
            h.mu_beta0, h.mu_alpha0, h.a_beta0, h.b_beta0, h.a_alpha0, h.b_alpha0, h.v_beta, h.v_alpha,
            h.a_beta, h.b_beta, h.a_alpha, h.b_alpha, h.omega_beta, h.omega_alpha, h.psi0, h.rho0,
            h.forced_in_count, h.forced_in_binary, *h.r_prior_terms,
            st.beta0, st.alpha0, st.b_mat, st.a_mat, st.gamma, st.delta, st.v_rand, st.sigma_v, st.r_corr,
            st.w_lat, st.sigma2_beta, st.sigma2_alpha, scalars,
            self.log_step_beta0, self.log_step_beta, self.log_step_v, self.acc)
        st.sigma2_beta0, st.sigma2_alpha0 = float(scalars[0]), float(scalars[1])
        if status:
            raise InvalidState(f"kernel {KERNEL_NAMES[kernel]} failed at scan {scan} (code {status})")
        self.scan += n


def _acceptance_dict(acc: np.ndarray) -> dict:
    return {name: {"accepted": int(acc[i, 0]), "proposed": int(acc[i, 1]),
                   "rate": float(acc[i, 0] / acc[i, 1]) if acc[i, 1] else None}
            for i, name in enumerate(K.ACC_NAMES)}


def run_chain(data: Dataset, hyper: Hyperparameters, config: SamplerConfig,
              state: Optional[ModelState] = None) -> ChainArchive:
    """Run one chain and archive the thinned post-burn-in scans."""
    t0 = time.perf_counter()
    runner = ChainRunner(data, hyper, config, state)
    st = runner.state
    kept = range(config.burn_in, config.n_scans, config.thin)
    n_keep = len(kept)
    q, p_x, p_z, n = data.q, data.p_x, data.p_z, data.n
    blocks = {
        "beta0": np.empty((n_keep, q)), "alpha0": np.empty((n_keep, q)),
        "b_mat": np.empty((n_keep, p_x, q)), "a_mat": np.empty((n_keep, p_z, q)),
        "gamma": np.empty((n_keep, q, p_x), np.int8), "delta": np.empty((n_keep, q, p_z), np.int8),
        "sigma2_beta": np.empty((n_keep, p_x)), "sigma2_alpha": np.empty((n_keep, p_z)),
        "sigma2_beta0": np.empty(n_keep), "sigma2_alpha0": np.empty(n_keep),
    }
    if config.store_covariances:
        blocks["r_corr"] = np.empty((n_keep, q, q))
        blocks["sigma_v"] = np.empty((n_keep, q, q))
    if config.store_latent:
        blocks["v_rand"] = np.empty((n_keep, n, q))
        blocks["w_lat"] = np.empty((n_keep, n, q))
    trace = np.empty((n_keep, len(K.ACC_NAMES), 2))

    if config.burn_in:
        runner.run(config.burn_in)
    for s in range(n_keep):
        runner.run(1)
        for name, arr in blocks.items():
            arr[s] = getattr(st, name)
        trace[s] = runner.acc
        if s + 1 < n_keep:
            runner.run(config.thin - 1)
    tail = config.n_scans - runner.scan
    if tail > 0:
        runner.run(tail)
    validate_state(st, data)
    dims = {"n": n, "q": q, "p_x": p_x, "p_z": p_z}
    names = {"outcomes": list(data.outcome_names), "covariates_x": list(data.covariate_names_x),
             "covariates_z": list(data.covariate_names_z)}
    return ChainArchive(
        config=config.to_dict(), hyperparameters=hyper.to_dict(), dims=dims, names=names, blocks=blocks,
        acceptance=_acceptance_dict(runner.acc), acceptance_trace=trace,
        wall_seconds=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------- summaries

@dataclass
class SelectionSummary:
    """Per (outcome, covariate) inclusion probabilities and conditional effect moments.

    Arrays are (q, p_x) for the count part and (q, p_z) for the binary part;
    conditional moments are NaN when the indicator was never 1.
    """

    prob_gamma: np.ndarray
    prob_delta: np.ndarray
    pm_beta: np.ndarray
    sd_beta: np.ndarray
    pm_alpha: np.ndarray
    sd_alpha: np.ndarray
    selected_gamma: np.ndarray
    selected_delta: np.ndarray
    cutoff: float


def _conditional_moments(values: np.ndarray, ind: np.ndarray):
    cnt = ind.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(cnt > 0, (values * ind).sum(axis=0) / cnt, np.nan)
        var = np.where(cnt > 1, ((values - np.nan_to_num(mean)) ** 2 * ind).sum(axis=0) / np.maximum(cnt - 1, 1),
                       np.where(cnt == 1, 0.0, np.nan))
    return mean, np.sqrt(var)


def summarize_selection(chain: ChainArchive, cutoff: float = 0.5) -> SelectionSummary:
    """Inclusion probability = scan average of each indicator; selected when
    probability > cutoff (strict), forced-in covariates always selected."""
    if chain.n_stored == 0:
        raise InvalidArgument("chain is empty")
    gamma = chain.blocks["gamma"].astype(float)
    delta = chain.blocks["delta"].astype(float)
    beta = np.swapaxes(chain.blocks["b_mat"], 1, 2)
    alpha = np.swapaxes(chain.blocks["a_mat"], 1, 2)
    pg, pd_ = gamma.mean(axis=0), delta.mean(axis=0)
    pmb, sdb = _conditional_moments(beta, gamma)
    pma, sda = _conditional_moments(alpha, delta)
    fc = np.asarray(chain.hyperparameters["forced_in_count"], bool)
    fb = np.asarray(chain.hyperparameters["forced_in_binary"], bool)
    pg[:, fc] = 1.0
    pd_[:, fb] = 1.0
    sel_g = pg > cutoff
    sel_d = pd_ > cutoff
    sel_g[:, fc] = True
    sel_d[:, fb] = True
    return SelectionSummary(pg, pd_, pmb, sdb, pma, sda, sel_g, sel_d, cutoff)
