"""Independent reference computations (closed forms and 1-D quadrature) for kernel checks."""
import numpy as np
from scipy import integrate, special, stats

from mzip import sampler
from mzip.model import Dataset, Hyperparameters, ModelState


def tiny_hyper(q, p_x, p_z, omega=0.5, v=1.0, a=3.0, b=2.0):
    return Hyperparameters(
        mu_beta0=np.zeros(q), mu_alpha0=np.zeros(q), a_beta0=a, b_beta0=b, a_alpha0=a, b_alpha0=b,
        v_beta=np.full(q, v), v_alpha=np.full(q, v), a_beta=np.full(p_x, a), b_beta=np.full(p_x, b),
        a_alpha=np.full(p_z, a), b_alpha=np.full(p_z, b), omega_beta=np.full(p_x, omega),
        omega_alpha=np.full(p_z, omega), psi0=np.eye(q), rho0=q + 2.0,
        forced_in_count=np.zeros(p_x, bool), forced_in_binary=np.zeros(p_z, bool))


def blank_state(n, q, p_x, p_z):
    return ModelState(
        beta0=np.zeros(q), alpha0=np.zeros(q), b_mat=np.zeros((p_x, q)), a_mat=np.zeros((p_z, q)),
        gamma=np.zeros((q, p_x), np.int64), delta=np.zeros((q, p_z), np.int64), v_rand=np.zeros((n, q)),
        sigma_v=np.eye(q), r_corr=np.eye(q), w_lat=np.zeros((n, q)), sigma2_beta=np.ones(p_x),
        sigma2_alpha=np.ones(p_z), sigma2_beta0=1.0, sigma2_alpha0=1.0)


# ---------------------------------------------------------------- binary part

def alpha_inclusion_problem(seed=3, n=30):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n, 1))
    w = 0.3 + 0.35 * z[:, 0] + rng.normal(size=n)
    data = Dataset(y=np.zeros((n, 1), np.int64), x=z.copy(), z=z, offset=np.ones(n))
    hyper = tiny_hyper(1, 1, 1, omega=0.3, v=1.0)
    st = blank_state(n, 1, 1, 1)
    st.alpha0[:] = 0.3
    st.w_lat[:, 0] = w
    st.sigma2_alpha[:] = 0.5
    return data, hyper, st


def alpha_inclusion_quadrature(data, hyper, st):
    """P(delta = 1 | w, alpha0, R = 1) by integrating the slab numerically."""
    w = st.w_lat[:, 0]
    z = data.z[:, 0]
    r = w - st.alpha0[0]
    tau = hyper.v_alpha[0] * np.sqrt(st.sigma2_alpha[0])
    om = hyper.omega_alpha[0]
    base = stats.norm.logpdf(r).sum()

    def ratio(a):
        return np.exp(stats.norm.logpdf(r - a * z).sum() - base) * stats.norm.pdf(a, 0, tau)

    slab, _ = integrate.quad(ratio, -8 * tau, 8 * tau, points=[0.0], limit=400, epsabs=1e-13)
    return om * slab / (om * slab + (1 - om))


def alpha_inclusion_empirical(data, hyper, st, draws, seed=0):
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(draws):
        s = st.copy()
        sampler.update_alpha_delta(s, data, hyper, rng)
        hits += int(s.delta[0, 0])
    return hits / draws


# ---------------------------------------------------------------- count part

def beta_inclusion_problem(seed=5, n=25, effect=0.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 1))
    y = rng.poisson(np.exp(1.0 + effect * x[:, 0]))[:, None]
    data = Dataset(y=y.astype(np.int64), x=x, z=x.copy(), offset=np.ones(n))
    hyper = tiny_hyper(1, 1, 1, omega=0.5, v=1.0)
    st = blank_state(n, 1, 1, 1)
    st.beta0[:] = 1.0
    st.w_lat[:, 0] = 1.0
    st.w_lat[:3, 0] = np.where(y[:3, 0] > 0, 1.0, -1.0)  # a few non-susceptible subjects
    st.sigma2_beta[:] = 0.25
    return data, hyper, st


def beta_inclusion_quadrature(data, hyper, st):
    act = st.w_lat[:, 0] >= 0
    y = data.y[act, 0]
    x = data.x[act, 0]
    eta0 = st.beta0[0] + st.v_rand[act, 0]
    tau = hyper.v_beta[0] * np.sqrt(st.sigma2_beta[0])
    om = hyper.omega_beta[0]

    def ll(b):
        e = eta0 + x * b
        return np.sum(y * e - np.exp(e))

    l0 = ll(0.0)
    slab, _ = integrate.quad(lambda b: np.exp(ll(b) - l0) * stats.norm.pdf(b, 0, tau), -8 * tau, 8 * tau,
                             points=[0.0], limit=400, epsabs=1e-13)
    return om * slab / (om * slab + (1 - om))


def beta_inclusion_chain(data, hyper, st, scans, seed=0):
    """Run the birth/death/refresh kernel alone on a fixed conditional; return the gamma frequency."""
    rng = np.random.default_rng(seed)
    s = st.copy()
    log_step = np.zeros((1, 1))
    hits = 0
    for _ in range(scans):
        sampler.update_beta_gamma(s, data, hyper, rng, log_step=log_step)
        hits += int(s.gamma[0, 0])
    return hits / scans


# ---------------------------------------------------------------- conjugate draws

def iw_moments(scale, dof):
    """Mean and elementwise variance of IW(scale, dof) (q x q)."""
    q = scale.shape[0]
    c = dof - q - 1
    mean = scale / c
    d = np.diag(scale)
    var = ((c + 2) * scale ** 2 + c * np.outer(d, d)) / (c * c * (c + 1) * (c - 2))
    # diagonal simplifies to 2 s_ii^2 / (c^2 (c - 2))
    return mean, var


def sigma_v_draws(draws, seed=0):
    rng = np.random.default_rng(seed)
    n, q = 100, 2
    v = rng.multivariate_normal([0, 0], [[1.0, 0.4], [0.4, 0.8]], size=n)
    hyper = tiny_hyper(q, 1, 1)
    st = blank_state(n, q, 1, 1)
    st.v_rand[:] = v
    out = np.empty((draws, q, q))
    for t in range(draws):
        out[t] = sampler.update_sigma_v(st, hyper, rng)
    scale = hyper.psi0 + v.T @ v
    return out, scale, hyper.rho0 + n


def alpha0_draws(draws, seed=0):
    rng = np.random.default_rng(seed)
    n, q = 12, 2
    r = np.array([[1.0, 0.5], [0.5, 1.0]])
    z = rng.normal(size=(n, 1))
    data = Dataset(y=np.zeros((n, q), np.int64), x=z.copy(), z=z, offset=np.ones(n))
    hyper = tiny_hyper(q, 1, 1)
    hyper.mu_alpha0 = np.array([0.2, -0.1])
    st = blank_state(n, q, 1, 1)
    st.r_corr[:] = r
    st.a_mat[0] = [0.3, -0.2]
    st.delta[:, 0] = 1
    st.w_lat[:] = rng.normal(size=(n, q)) + 0.5
    st.sigma2_alpha0 = 0.7
    out = np.empty((draws, q))
    for t in range(draws):
        out[t] = sampler.update_alpha0(st, data, hyper, rng)
    prec = n + 1.0 / st.sigma2_alpha0
    mean = ((st.w_lat - z @ st.a_mat).sum(axis=0) + hyper.mu_alpha0 / st.sigma2_alpha0) / prec
    cov = r / prec
    return out, mean, cov


def sigma2_hyper_draws(draws, seed=0):
    """One active beta equal to 1 with v = 1 and a = b = 0.7: sigma2_beta ~ IG(1.2, 1.2)."""
    rng = np.random.default_rng(seed)
    hyper = tiny_hyper(1, 1, 1, v=1.0, a=0.7, b=0.7)
    st = blank_state(5, 1, 1, 1)
    st.gamma[0, 0] = 1
    st.b_mat[0, 0] = 1.0
    st.beta0[:] = 0.4
    out = np.empty((draws, 4))
    for t in range(draws):
        s2b, s2a, s2b0, s2a0 = sampler.update_sigma2_hypers(st, hyper, rng)
        out[t] = [s2b[0], s2a[0], s2b0, s2a0]
    # closed forms: sigma2_beta IG(1.2, 1.2); sigma2_alpha prior IG(0.7, 0.7);
    # sigma2_beta0 IG(0.7 + 0.5, 0.7 + 0.4^2/2); sigma2_alpha0 IG(1.2, 0.7)
    refs = [(1.2, 1.2), (0.7, 0.7), (1.2, 0.7 + 0.08), (1.2, 0.7)]
    return out, refs


def mc_z(sample, target):
    """z-score of a sample mean against a known expectation."""
    sample = np.asarray(sample, float)
    return (sample.mean() - target) / (sample.std(ddof=1) / np.sqrt(sample.size))


# ---------------------------------------------------------------- IDR

def idr_monte_carlo(beta_k, alpha0, alpha_k, alpha_other, z_other, beta0=0.5, s_v=0.5, m=400_000, seed=0):
    """Ratio of simulated marginal means at covariate 0 and 1. Returns (ratio, se)."""
    rng = np.random.default_rng(seed)
    means, vars_ = [], []
    for xval in (0.0, 1.0):
        lin = alpha0 + alpha_other @ z_other + alpha_k * xval
        u = rng.random(m) < special.ndtr(lin)
        lam = np.exp(beta0 + beta_k * xval + s_v * rng.standard_normal(m))
        y = np.where(u, rng.poisson(lam), 0)
        means.append(y.mean())
        vars_.append(y.var(ddof=1) / m)
    ratio = means[1] / means[0]
    se = ratio * np.sqrt(vars_[1] / means[1] ** 2 + vars_[0] / means[0] ** 2)
    return ratio, se
