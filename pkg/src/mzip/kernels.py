"""Compiled MCMC transition kernels.

Every kernel works on plain arrays, mutates the state arrays it owns in
place and draws from the explicit stream ``rs`` (see :mod:`mzip.prng`),
always its first argument. The Python-facing wrappers live in
:mod:`mzip.sampler`.

Kernels return an integer status: 0 on success, otherwise one of the
``ERR_*`` codes below.
"""
import math

import numpy as np
from numba import njit

from .normal import norm_logcdf
from .prng import chisquare, gamma, std_normal, truncnorm_negative, truncnorm_positive, uniform

ERR_NOT_PD = 1
ERR_IW_FAILED = 2

# rows of the acceptance ledger: [accepted, proposed]
ACC_BETA0, ACC_BIRTH, ACC_DEATH, ACC_REFRESH, ACC_V, ACC_PXDA = range(6)
ACC_NAMES = ("beta0_rw", "beta_birth", "beta_death", "beta_refresh", "v_rw", "r_pxda")

LOG_2PI = math.log(2.0 * math.pi)


# ---------------------------------------------------------------- linear algebra

@njit(cache=True)
def cholesky(a, out):
    """Lower Cholesky factor of ``a`` written to ``out``; False if not PD."""
    q = a.shape[0]
    out[:, :] = 0.0
    for j in range(q):
        s = a[j, j]
        for k in range(j):
            s -= out[j, k] * out[j, k]
        if not (s > 0.0) or not np.isfinite(s):
            return False
        out[j, j] = math.sqrt(s)
        for i in range(j + 1, q):
            t = a[i, j]
            for k in range(j):
                t -= out[i, k] * out[j, k]
            out[i, j] = t / out[j, j]
    return True


@njit(cache=True)
def tri_inverse(lower):
    q = lower.shape[0]
    inv = np.zeros((q, q))
    for j in range(q):
        inv[j, j] = 1.0 / lower[j, j]
        for i in range(j + 1, q):
            s = 0.0
            for k in range(j, i):
                s -= lower[i, k] * inv[k, j]
            inv[i, j] = s / lower[i, i]
    return inv


@njit(cache=True)
def pd_inverse(lower):
    """Inverse of ``L L^T`` given its Cholesky factor."""
    li = tri_inverse(lower)
    return li.T @ li


@njit(cache=True)
def logdet_from_chol(lower):
    s = 0.0
    for i in range(lower.shape[0]):
        s += math.log(lower[i, i])
    return 2.0 * s


@njit(cache=True)
def pd_inverse_checked(a):
    q = a.shape[0]
    lower = np.empty((q, q))
    if not cholesky(a, lower):
        return False, np.zeros((q, q)), np.zeros((q, q))
    return True, pd_inverse(lower), lower


# ---------------------------------------------------------------- distributions

@njit(cache=True)
def inv_gamma_draw(rs, shape, rate):
    return rate / gamma(rs, shape)


@njit(cache=True)
def inv_wishart_draw(rs, scale, dof, out):
    """Sigma ~ IW(scale, dof) via the Bartlett factor of a Wishart(dof, scale^-1).

    Density ∝ |Sigma|^{-(dof+q+1)/2} exp(-tr(scale Sigma^-1)/2). Returns False if
    ``scale`` or the draw is numerically non-PD.
    """
    q = scale.shape[0]
    u = np.empty((q, q))
    if not cholesky(scale, u):
        return False
    bart = np.zeros((q, q))
    for i in range(q):
        bart[i, i] = math.sqrt(chisquare(rs, dof - i))
        for k in range(i):
            bart[i, k] = std_normal(rs)
    t = u @ tri_inverse(bart).T
    draw = t @ t.T
    for i in range(q):
        for k in range(i):
            avg = 0.5 * (draw[i, k] + draw[k, i])
            draw[i, k] = avg
            draw[k, i] = avg
    chk = np.empty((q, q))
    if not cholesky(draw, chk):
        return False
    out[:, :] = draw
    return True


@njit(cache=True)
def inv_wishart_logpdf_unnorm(sigma, scale, dof):
    """log IW density up to terms that depend on (q, dof) only."""
    q = sigma.shape[0]
    ls = np.empty((q, q))
    lsig = np.empty((q, q))
    if not cholesky(scale, ls) or not cholesky(sigma, lsig):
        return -np.inf
    sig_inv = pd_inverse(lsig)
    tr = 0.0
    for i in range(q):
        for k in range(q):
            tr += scale[i, k] * sig_inv[k, i]
    return 0.5 * dof * logdet_from_chol(ls) - 0.5 * (dof + q + 1) * logdet_from_chol(lsig) - 0.5 * tr


@njit(cache=True)
def slab_log_bayes_factor(precision, linear, tau2):
    """log of  ∫ N(b; 0, tau2) exp(linear b - precision_lik b^2 / 2) db  relative to b = 0,
    where ``precision`` already includes the ``1 / tau2`` prior term."""
    return -0.5 * math.log(tau2 * precision) + 0.5 * linear * linear / precision


@njit(cache=True)
def _sigmoid(v):
    if v >= 0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


# ---------------------------------------------------------------- linear predictors

@njit(cache=True)
def count_predictor(x, log_offset, beta0, b_mat, v_rand):
    n, q = v_rand.shape
    p = x.shape[1]
    eta = np.empty((n, q))
    for i in range(n):
        for j in range(q):
            s = beta0[j] + log_offset[i] + v_rand[i, j]
            for k in range(p):
                s += x[i, k] * b_mat[k, j]
            eta[i, j] = s
    return eta


@njit(cache=True)
def probit_mean(z, alpha0, a_mat):
    n = z.shape[0]
    q = alpha0.shape[0]
    p = z.shape[1]
    mu = np.empty((n, q))
    for i in range(n):
        for j in range(q):
            s = alpha0[j]
            for l in range(p):
                s += z[i, l] * a_mat[l, j]
            mu[i, j] = s
    return mu


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def impute_w(rs, y, x, z, log_offset, beta0, b_mat, v_rand, alpha0, a_mat, r_corr, w):
    n, q = y.shape
    ok, omega, _ = pd_inverse_checked(r_corr)
    if not ok:
        return ERR_NOT_PD
    mu = probit_mean(z, alpha0, a_mat)
    eta = count_predictor(x, log_offset, beta0, b_mat, v_rand)
    for i in range(n):
        for j in range(q):
            acc = 0.0
            for k in range(q):
                if k != j:
                    acc += omega[j, k] * (w[i, k] - mu[i, k])
            s = 1.0 / math.sqrt(omega[j, j])
            m = mu[i, j] - acc / omega[j, j]
            if y[i, j] > 0:
                w[i, j] = truncnorm_positive(rs, m, s)
            else:
                t = m / s
                lam = math.exp(eta[i, j])
                # log-odds of w >= 0 is below -lam + t^2/2 + |t| + 1; past -60 the
                # probability is under 1e-26, far below the resolution of a uniform draw
                if t * t * 0.5 + abs(t) + 1.0 - lam < -60.0:
                    p1 = 0.0
                else:
                    p1 = _sigmoid(norm_logcdf(t) - lam - norm_logcdf(-t))
                if p1 > 0.0 and uniform(rs) < p1:
                    w[i, j] = truncnorm_positive(rs, m, s)
                else:
                    w[i, j] = truncnorm_negative(rs, m, s)
    return 0


@njit(cache=True)
def update_alpha_delta(rs, w, z, alpha0, a_mat, delta, r_corr, sigma2_alpha, v_alpha, omega_alpha, forced_binary):
    n, q = w.shape
    p = z.shape[1]
    ok, omega, _ = pd_inverse_checked(r_corr)
    if not ok:
        return ERR_NOT_PD
    mu = probit_mean(z, alpha0, a_mat)
    t = np.empty(n)
    r = np.empty(n)
    for j in range(q):
        ojj = omega[j, j]
        s2 = 1.0 / ojj
        for i in range(n):
            acc = 0.0
            for k in range(q):
                if k != j:
                    acc += omega[j, k] * (w[i, k] - mu[i, k])
            t[i] = w[i, j] - alpha0[j] + acc / ojj
        for l in range(p):
            zz = 0.0
            zr = 0.0
            for i in range(n):
                s = t[i]
                for m in range(p):
                    if m != l:
                        s -= z[i, m] * a_mat[m, j]
                r[i] = s
                zz += z[i, l] * z[i, l]
                zr += z[i, l] * s
            tau2 = v_alpha[j] * v_alpha[j] * sigma2_alpha[l]
            prec = zz / s2 + 1.0 / tau2
            lin = zr / s2
            if forced_binary[l]:
                take = True
            else:
                logit = math.log(omega_alpha[l] / (1.0 - omega_alpha[l])) + slab_log_bayes_factor(prec, lin, tau2)
                take = uniform(rs) < _sigmoid(logit)
            if take:
                delta[j, l] = 1
                a_mat[l, j] = lin / prec + std_normal(rs) / math.sqrt(prec)
            else:
                delta[j, l] = 0
                a_mat[l, j] = 0.0
        for i in range(n):
            s = alpha0[j]
            for l in range(p):
                s += z[i, l] * a_mat[l, j]
            mu[i, j] = s
    return 0


@njit(cache=True)
def update_alpha0(rs, w, z, a_mat, r_corr, mu_alpha0, sigma2_alpha0, alpha0):
    n, q = w.shape
    chol = np.empty((q, q))
    if not cholesky(r_corr, chol):
        return ERR_NOT_PD
    zero = np.zeros(q)
    mu = probit_mean(z, zero, a_mat)
    kap = n + 1.0 / sigma2_alpha0
    mean = mu_alpha0 / sigma2_alpha0
    for i in range(n):
        for j in range(q):
            mean[j] += w[i, j] - mu[i, j]
    mean /= kap
    eps = np.empty(q)
    for j in range(q):
        eps[j] = std_normal(rs)
    alpha0[:] = mean + (chol @ eps) / math.sqrt(kap)
    return 0


@njit(cache=True)
def _px_log_h(d, r_corr, alpha0_t, a_t, delta, sigma2_alpha, v_alpha, sigma2_alpha0, mu_alpha0, dkappa, dlam):
    """Log of the expanded-space factors that are not inverse-Wishart conjugate:
    the alpha0 prior (general mean), the slab densities of A and the ratio of
    the chosen R prior to the marginally uniform working prior."""
    q = d.shape[0]
    p = a_t.shape[0]
    lower = np.empty((q, q))
    if not cholesky(r_corr, lower):
        return -np.inf
    rinv = pd_inverse(lower)
    logdet = logdet_from_chol(lower)
    c = np.empty(q)
    out = 0.0
    for j in range(q):
        c[j] = alpha0_t[j] / d[j] - mu_alpha0[j]
        out -= math.log(d[j])
    quad = 0.0
    for j in range(q):
        for k in range(q):
            quad += c[j] * rinv[j, k] * c[k]
    out += -0.5 * quad / sigma2_alpha0 - 0.5 * logdet
    for j in range(q):
        for l in range(p):
            if delta[j, l]:
                a = a_t[l, j] / d[j]
                out += -0.5 * a * a / (v_alpha[j] * v_alpha[j] * sigma2_alpha[l]) - math.log(d[j])
    if dkappa != 0.0:
        out += dkappa * logdet
    if dlam != 0.0:
        for j in range(q):
            out += dlam * math.log(rinv[j, j])
    return out


@njit(cache=True)
def update_r_pxda(rs, w, z, alpha0, a_mat, delta, r_corr, sigma2_alpha, v_alpha, sigma2_alpha0, mu_alpha0,
                  r_kappa, r_lam, acc):
    """Parameter-expanded (marginal augmentation) update of the correlation matrix.

    Working scales d are drawn from their conditional under Sigma = D R D ~ IW(I, q+1)
    (d_j^-2 ~ Gamma((q+1)/2, (R^-1)_jj / 2)); the expanded latent D w keeps the sign
    pattern of w, so Sigma has the conjugate proposal IW(I + sum D e e' D, q+1+n).
    The non-conjugate factors (alpha0 prior, slabs of A, prior ratio when R's prior
    is not the marginally uniform one) enter a Metropolis-Hastings correction.
    On acceptance R, w, alpha0 and A are reduced by the new scales.
    """
    n, q = w.shape
    p = z.shape[1]
    if q == 1:
        return 0
    ok, rinv, _ = pd_inverse_checked(r_corr)
    if not ok:
        return ERR_NOT_PD
    nu0 = q + 1.0
    d = np.empty(q)
    for j in range(q):
        d[j] = 1.0 / math.sqrt(gamma(rs, 0.5 * nu0) / (0.5 * rinv[j, j]))
    mu = probit_mean(z, alpha0, a_mat)
    scale = np.zeros((q, q))
    for i in range(n):
        for j in range(q):
            ej = (w[i, j] - mu[i, j]) * d[j]
            for k in range(j + 1):
                scale[j, k] += ej * (w[i, k] - mu[i, k]) * d[k]
    for j in range(q):
        scale[j, j] += 1.0
        for k in range(j):
            scale[k, j] = scale[j, k]
    sigma = np.empty((q, q))
    drawn = False
    for attempt in range(5):
        if inv_wishart_draw(rs, scale, nu0 + n, sigma):
            drawn = True
            break
        for j in range(q):
            scale[j, j] += 1e-8 * (attempt + 1) * (scale[j, j] + 1.0)
    if not drawn:
        return ERR_IW_FAILED
    d_new = np.empty(q)
    for j in range(q):
        d_new[j] = math.sqrt(sigma[j, j])
    r_new = np.empty((q, q))
    for j in range(q):
        for k in range(q):
            r_new[j, k] = sigma[j, k] / (d_new[j] * d_new[k])
        r_new[j, j] = 1.0

    alpha0_t = alpha0 * d
    a_t = np.empty_like(a_mat)
    for l in range(p):
        for j in range(q):
            a_t[l, j] = a_mat[l, j] * d[j]
    dkappa = r_kappa + nu0
    dlam = r_lam + 0.5 * nu0
    log_ratio = _px_log_h(d_new, r_new, alpha0_t, a_t, delta, sigma2_alpha, v_alpha, sigma2_alpha0, mu_alpha0,
                          dkappa, dlam)
    log_ratio -= _px_log_h(d, r_corr, alpha0_t, a_t, delta, sigma2_alpha, v_alpha, sigma2_alpha0, mu_alpha0,
                           dkappa, dlam)
    acc[ACC_PXDA, 1] += 1.0
    if math.log(1.0 - uniform(rs)) < log_ratio:
        acc[ACC_PXDA, 0] += 1.0
        r_corr[:, :] = r_new
        for j in range(q):
            f = d[j] / d_new[j]
            alpha0[j] *= f
            for l in range(p):
                a_mat[l, j] *= f
            for i in range(n):
                w[i, j] *= f
    return 0


@njit(cache=True)
def update_beta_gamma(rs, y, x, log_offset, w, beta0, b_mat, gamma, v_rand, sigma2_beta, v_beta, omega_beta,
                      forced_count, log_step_beta, birth_scale, adapt_weight, target_accept, acc):
    """Birth/death toggle of gamma given V and w, then a random-walk refresh of
    any active coefficient. Only subjects with w >= 0 enter the likelihood."""
    n, q = y.shape
    p = x.shape[1]
    eta0 = np.empty(n)
    act = np.empty(n, dtype=np.bool_)
    for j in range(q):
        for k in range(p):
            tau2 = v_beta[j] * v_beta[j] * sigma2_beta[k]
            cur = b_mat[k, j]
            l0 = 0.0
            g0 = 0.0
            h0 = 1.0 / tau2
            for i in range(n):
                act[i] = w[i, j] >= 0.0
                if act[i]:
                    s = beta0[j] + log_offset[i] + v_rand[i, j]
                    for m in range(p):
                        if m != k:
                            s += x[i, m] * b_mat[m, j]
                    eta0[i] = s
                    lam = math.exp(s)
                    l0 += y[i, j] * s - lam
                    g0 += x[i, k] * (y[i, j] - lam)
                    h0 += x[i, k] * x[i, k] * lam
            centre = g0 / h0
            sd_birth = birth_scale / math.sqrt(h0)
            sd_rw = math.exp(log_step_beta[j, k]) / math.sqrt(h0)

            l_cur = l0
            if cur != 0.0:
                l_cur = 0.0
                for i in range(n):
                    if act[i]:
                        e = eta0[i] + x[i, k] * cur
                        l_cur += y[i, j] * e - math.exp(e)
            if not forced_count[k]:
                lodds = math.log(omega_beta[k] / (1.0 - omega_beta[k]))
                if gamma[j, k] == 0:
                    prop = centre + sd_birth * std_normal(rs)
                    l_prop = 0.0
                    for i in range(n):
                        if act[i]:
                            e = eta0[i] + x[i, k] * prop
                            l_prop += y[i, j] * e - math.exp(e)
                    zb = (prop - centre) / sd_birth
                    log_a = (l_prop - l0) - 0.5 * prop * prop / tau2 - 0.5 * math.log(tau2) + lodds \
                        + 0.5 * zb * zb + math.log(sd_birth)
                    acc[ACC_BIRTH, 1] += 1.0
                    if math.log(1.0 - uniform(rs)) < log_a and prop != 0.0:
                        acc[ACC_BIRTH, 0] += 1.0
                        gamma[j, k] = 1
                        b_mat[k, j] = prop
                        cur = prop
                        l_cur = l_prop
                else:
                    zb = (cur - centre) / sd_birth
                    log_a = (l0 - l_cur) + 0.5 * cur * cur / tau2 + 0.5 * math.log(tau2) - lodds \
                        - 0.5 * zb * zb - math.log(sd_birth)
                    acc[ACC_DEATH, 1] += 1.0
                    if math.log(1.0 - uniform(rs)) < log_a:
                        acc[ACC_DEATH, 0] += 1.0
                        gamma[j, k] = 0
                        b_mat[k, j] = 0.0
                        cur = 0.0
                        l_cur = l0
            if gamma[j, k] == 1:
                prop = cur + sd_rw * std_normal(rs)
                l_prop = 0.0
                for i in range(n):
                    if act[i]:
                        e = eta0[i] + x[i, k] * prop
                        l_prop += y[i, j] * e - math.exp(e)
                log_a = (l_prop - l_cur) - 0.5 * (prop * prop - cur * cur) / tau2
                acc[ACC_REFRESH, 1] += 1.0
                accepted = math.log(1.0 - uniform(rs)) < log_a and prop != 0.0
                if accepted:
                    acc[ACC_REFRESH, 0] += 1.0
                    b_mat[k, j] = prop
                if adapt_weight > 0.0:
                    log_step_beta[j, k] += adapt_weight * ((1.0 if accepted else 0.0) - target_accept)
    return 0


@njit(cache=True)
def update_beta0(rs, y, x, log_offset, w, beta0, b_mat, v_rand, mu_beta0, sigma2_beta0,
                 log_step_beta0, adapt_weight, target_accept, acc):
    n, q = y.shape
    p = x.shape[1]
    eta0 = np.empty(n)
    for j in range(q):
        sy = 0.0
        for i in range(n):
            s = log_offset[i] + v_rand[i, j]
            for k in range(p):
                s += x[i, k] * b_mat[k, j]
            eta0[i] = s
            if w[i, j] >= 0.0:
                sy += y[i, j]
        sd = math.exp(log_step_beta0[j]) / math.sqrt(sy + 1.0 / sigma2_beta0)
        cur = beta0[j]
        prop = cur + sd * std_normal(rs)
        log_a = -0.5 * ((prop - mu_beta0[j]) ** 2 - (cur - mu_beta0[j]) ** 2) / sigma2_beta0
        for i in range(n):
            if w[i, j] >= 0.0:
                log_a += y[i, j] * (prop - cur) - math.exp(eta0[i] + prop) + math.exp(eta0[i] + cur)
        acc[ACC_BETA0, 1] += 1.0
        accepted = math.log(1.0 - uniform(rs)) < log_a
        if accepted:
            acc[ACC_BETA0, 0] += 1.0
            beta0[j] = prop
        if adapt_weight > 0.0:
            log_step_beta0[j] += adapt_weight * ((1.0 if accepted else 0.0) - target_accept)
    return 0


@njit(cache=True)
def update_v(rs, y, x, log_offset, w, beta0, b_mat, v_rand, sigma_v, log_step_v, adapt_weight, target_accept, acc):
    """Scalar random-walk MH for each V_ij, with proposal scale preconditioned by
    the (state-independent) curvature y_ij 1(w_ij >= 0) + 1/s_j^2."""
    n, q = y.shape
    p = x.shape[1]
    ok, omega, _ = pd_inverse_checked(sigma_v)
    if not ok:
        return ERR_NOT_PD
    for j in range(q):
        ojj = omega[j, j]
        s2 = 1.0 / ojj
        step = math.exp(log_step_v[j])
        n_acc = 0
        for i in range(n):
            acc_m = 0.0
            for k in range(q):
                if k != j:
                    acc_m += omega[j, k] * v_rand[i, k]
            m = -acc_m / ojj
            active = w[i, j] >= 0.0
            h = 1.0 / s2
            base = 0.0
            if active:
                h += y[i, j]
                base = beta0[j] + log_offset[i]
                for k in range(p):
                    base += x[i, k] * b_mat[k, j]
            cur = v_rand[i, j]
            prop = cur + step / math.sqrt(h) * std_normal(rs)
            log_a = -0.5 * ((prop - m) ** 2 - (cur - m) ** 2) / s2
            if active:
                log_a += y[i, j] * (prop - cur) - math.exp(base + prop) + math.exp(base + cur)
            if math.log(1.0 - uniform(rs)) < log_a:
                v_rand[i, j] = prop
                n_acc += 1
        acc[ACC_V, 0] += n_acc
        acc[ACC_V, 1] += n
        if adapt_weight > 0.0 and n > 0:
            log_step_v[j] += adapt_weight * (n_acc / n - target_accept)
    return 0


@njit(cache=True)
def update_count_shift(rs, x, beta0, b_mat, gamma, v_rand, sigma_v, mu_beta0, sigma2_beta0, sigma2_beta, v_beta,
                       omega_beta, forced_count):
    """Exact Gibbs moves along directions that keep every log-mean fixed.

    (a) beta0_j + t together with V_.j - t;
    (b) (gamma_jk, beta_jk) jointly with V_.j, holding V_.j + x_.k beta_jk fixed.

    The Poisson likelihood is constant on these lines, so the conditionals are
    Gaussian (slab) or point-mass (spike) times the random-effect prior.
    """
    n, q = v_rand.shape
    p = x.shape[1]
    ok, omega, _ = pd_inverse_checked(sigma_v)
    if not ok:
        return ERR_NOT_PD
    colsum = np.zeros(q)
    for i in range(n):
        for k in range(q):
            colsum[k] += v_rand[i, k]
    for j in range(q):
        prec = n * omega[j, j] + 1.0 / sigma2_beta0
        lin = -(beta0[j] - mu_beta0[j]) / sigma2_beta0
        for k in range(q):
            lin += omega[j, k] * colsum[k]
        t = lin / prec + std_normal(rs) / math.sqrt(prec)
        beta0[j] += t
        for i in range(n):
            v_rand[i, j] -= t
        colsum[j] -= n * t

    g = np.empty(n)
    for j in range(q):
        for i in range(n):
            s = 0.0
            for k in range(q):
                s += omega[j, k] * v_rand[i, k]
            g[i] = s
        for k in range(p):
            cur = b_mat[k, j]
            sxx = 0.0
            gx = 0.0
            for i in range(n):
                xi = x[i, k]
                sxx += xi * xi
                gx += xi * (g[i] + omega[j, j] * xi * cur)
            tau2 = v_beta[j] * v_beta[j] * sigma2_beta[k]
            prec = omega[j, j] * sxx + 1.0 / tau2
            if forced_count[k]:
                take = True
            else:
                logit = math.log(omega_beta[k] / (1.0 - omega_beta[k])) + slab_log_bayes_factor(prec, gx, tau2)
                take = uniform(rs) < _sigmoid(logit)
            new = 0.0
            if take:
                new = gx / prec + std_normal(rs) / math.sqrt(prec)
            gamma[j, k] = 1 if take else 0
            b_mat[k, j] = new
            diff = cur - new
            if diff != 0.0:
                for i in range(n):
                    v_rand[i, j] += x[i, k] * diff
                    g[i] += omega[j, j] * x[i, k] * diff
    return 0


@njit(cache=True)
def update_sigma_v(rs, v_rand, psi0, rho0, sigma_v):
    n, q = v_rand.shape
    scale = psi0.copy()
    for i in range(n):
        for j in range(q):
            for k in range(q):
                scale[j, k] += v_rand[i, j] * v_rand[i, k]
    for attempt in range(5):
        if inv_wishart_draw(rs, scale, rho0 + n, sigma_v):
            return 0
    return ERR_IW_FAILED


@njit(cache=True)
def update_sigma2_hypers(rs, beta0, alpha0, b_mat, a_mat, gamma, delta, r_corr, v_beta, v_alpha, mu_beta0, mu_alpha0,
                         a_beta, b_beta, a_alpha, b_alpha, a_beta0, b_beta0, a_alpha0, b_alpha0,
                         sigma2_beta, sigma2_alpha):
    """Conjugate inverse-Gamma draws; returns (sigma2_beta0, sigma2_alpha0)."""
    q = beta0.shape[0]
    for k in range(b_mat.shape[0]):
        shape = a_beta[k]
        rate = b_beta[k]
        for j in range(q):
            if gamma[j, k]:
                shape += 0.5
                rate += b_mat[k, j] ** 2 / (2.0 * v_beta[j] ** 2)
        sigma2_beta[k] = inv_gamma_draw(rs, shape, rate)
    for l in range(a_mat.shape[0]):
        shape = a_alpha[l]
        rate = b_alpha[l]
        for j in range(q):
            if delta[j, l]:
                shape += 0.5
                rate += a_mat[l, j] ** 2 / (2.0 * v_alpha[j] ** 2)
        sigma2_alpha[l] = inv_gamma_draw(rs, shape, rate)
    rate = b_beta0
    for j in range(q):
        rate += 0.5 * (beta0[j] - mu_beta0[j]) ** 2
    s2b0 = inv_gamma_draw(rs, a_beta0 + 0.5 * q, rate)
    ok, rinv, _ = pd_inverse_checked(r_corr)
    if not ok:
        return -1.0, -1.0
    c = alpha0 - mu_alpha0
    quad = 0.0
    for j in range(q):
        for k in range(q):
            quad += c[j] * rinv[j, k] * c[k]
    s2a0 = inv_gamma_draw(rs, a_alpha0 + 0.5 * q, b_alpha0 + 0.5 * quad)
    return s2b0, s2a0
