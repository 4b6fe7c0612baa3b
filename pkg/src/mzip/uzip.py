"""Univariate zero-inflated Poisson maximum likelihood, one outcome at a time.

The zero part is logistic. Coefficients are reported on the scale of the
*susceptible* probability, P(U = 1) = expit(g0 + z'g), so their signs line up
with the probit coefficients of the multivariate model. (R's pscl models the
structural-zero probability instead; its zero-part coefficients are the
negatives of these.)

Fitting is EM; standard errors come from the observed information of the
marginal likelihood at the optimum.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import special, stats

from .errors import InvalidArgument
from .model import Dataset


@dataclass
class UzipFit:
    """One outcome. ``zero_coef``/``count_coef`` include the intercept first."""

    zero_coef: np.ndarray
    zero_se: np.ndarray
    count_coef: np.ndarray
    count_se: np.ndarray
    loglik: float
    converged: bool
    n_iter: int
    degenerate: bool = False
    separation: bool = False
    loglik_trace: List[float] = field(default_factory=list)

    @property
    def usable(self) -> bool:
        return self.converged and not self.separation


def _loglik(y, lgam, zeta, eta):
    lam = np.exp(eta)
    pos = y > 0
    ll = np.where(pos, -np.logaddexp(0.0, -zeta) + y * eta - lam - lgam,
                  np.logaddexp(-np.logaddexp(0.0, zeta), -np.logaddexp(0.0, -zeta) - lam))
    return float(ll.sum())


def _newton(design, objective, max_iter=50, tol=1e-10):
    """Maximize a concave objective(beta) -> (value, grad, hess) from ``design`` (the start)."""
    b = design.copy()
    val, g, h = objective(b)
    for _ in range(max_iter):
        try:
            step = np.linalg.solve(-h, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(-h, g, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            nb = b + t * step
            nval, ng, nh = objective(nb)
            if np.isfinite(nval) and nval >= val - 1e-12:
                break
            t *= 0.5
        else:
            break
        b, done = nb, abs(nval - val) < tol * (1.0 + abs(val))
        val, g, h = nval, ng, nh
        if done:
            break
    return b, val


def poisson_fit(y, X, log_offset, weights=None, start=None):
    """Weighted Poisson regression by Newton; returns (coef, loglik-like objective)."""
    wts = np.ones(len(y)) if weights is None else weights
    b0 = np.zeros(X.shape[1]) if start is None else np.asarray(start, float)
    if start is None:
        m = max(np.average(y, weights=wts) if wts.sum() > 0 else 1.0, 1e-8)
        b0[0] = np.log(m) - np.average(log_offset, weights=wts) if wts.sum() > 0 else 0.0

    def obj(b):
        eta = np.clip(X @ b + log_offset, -700, 700)
        lam = np.exp(eta)
        val = float(np.sum(wts * (y * eta - lam)))
        g = X.T @ (wts * (y - lam))
        h = -(X * (wts * lam)[:, None]).T @ X
        return val, g, h

    return _newton(b0, obj)


def logistic_fit(r, Z, start=None):
    """Fractional-response logistic regression of r in [0, 1] on Z."""
    b0 = np.zeros(Z.shape[1]) if start is None else np.asarray(start, float)

    def obj(b):
        zeta = Z @ b
        val = float(np.sum(r * -np.logaddexp(0.0, -zeta) + (1 - r) * -np.logaddexp(0.0, zeta)))
        p = special.expit(zeta)
        g = Z.T @ (r - p)
        h = -(Z * (p * (1 - p))[:, None]).T @ Z
        return val, g, h

    return _newton(b0, obj)


def _observed_information(y, Zd, Xd, zeta, eta):
    lam = np.exp(eta)
    pi = special.expit(zeta)
    pos = y > 0
    r = np.where(pos, 1.0, special.expit(zeta - lam))
    rr = r * (1 - r)
    h_zz = rr - pi * (1 - pi)
    h_ze = -rr * lam
    h_ee = -lam * r + lam * lam * rr
    h_zz[pos] = -pi[pos] * (1 - pi[pos])
    h_ze[pos] = 0.0
    h_ee[pos] = -lam[pos]
    top = np.hstack([(Zd * h_zz[:, None]).T @ Zd, (Zd * h_ze[:, None]).T @ Xd])
    bot = np.hstack([(Xd * h_ze[:, None]).T @ Zd, (Xd * h_ee[:, None]).T @ Xd])
    return -np.vstack([top, bot])


def uzip_em_fit(y, x, z, offset=None, max_iter: int = 2000, tol: float = 1e-10) -> UzipFit:
    y = np.asarray(y, float)
    n = y.size
    x = np.asarray(x, float).reshape(n, -1)
    z = np.asarray(z, float).reshape(n, -1)
    log_off = np.zeros(n) if offset is None else np.log(np.asarray(offset, float))
    Xd = np.column_stack([np.ones(n), x])
    Zd = np.column_stack([np.ones(n), z])
    pz, px = Zd.shape[1], Xd.shape[1]
    lgam = special.gammaln(y + 1)
    pos = y > 0

    if pos.all() or not pos.any():
        # the mixture collapses: no zeros -> plain Poisson; all zeros -> nothing to fit
        nan_z = np.full(pz, np.nan)
        if not pos.any():
            return UzipFit(nan_z, nan_z.copy(), np.full(px, np.nan), np.full(px, np.nan), 0.0, False, 0,
                           degenerate=True)
        b, _ = poisson_fit(y, Xd, log_off)
        lam = np.exp(Xd @ b + log_off)
        cov = np.linalg.inv((Xd * lam[:, None]).T @ Xd)
        ll = float(np.sum(y * np.log(lam) - lam - lgam))
        return UzipFit(nan_z, nan_z.copy(), b, np.sqrt(np.diag(cov)), ll, True, 0, degenerate=True)

    g, _ = logistic_fit(pos.astype(float), Zd)
    b, _ = poisson_fit(y[pos], Xd[pos], log_off[pos])
    zeta, eta = Zd @ g, Xd @ b + log_off
    ll = _loglik(y, lgam, zeta, eta)
    trace = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        r = np.where(pos, 1.0, special.expit(zeta - np.exp(eta)))
        g, _ = logistic_fit(r, Zd, start=g)
        b, _ = poisson_fit(y, Xd, log_off, weights=r, start=b)
        zeta, eta = Zd @ g, Xd @ b + log_off
        new = _loglik(y, lgam, zeta, eta)
        trace.append(new)
        if abs(new - ll) < tol * (1.0 + abs(ll)):
            ll = new
            converged = True
            break
        ll = new
    separation = bool(np.max(np.abs(g)) > 25.0)
    info = _observed_information(y, Zd, Xd, zeta, eta)
    try:
        cov = np.linalg.inv(info)
        se = np.sqrt(np.diag(cov))
    except np.linalg.LinAlgError:
        se = np.full(pz + px, np.nan)
    if not np.all(np.isfinite(se)) or np.any(se <= 0):
        separation = True
    if not converged:
        warnings.warn(f"UZIP EM did not converge in {max_iter} iterations")
    return UzipFit(g, se[:pz], b, se[pz:], ll, converged, it, separation=separation, loglik_trace=trace)


def uzip_fit_all(data: Dataset, **kw) -> List[UzipFit]:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return [uzip_em_fit(data.y[:, j], data.x, data.z, data.offset, **kw) for j in range(data.q)]


def bh_adjust(p_values, level: float = 0.05):
    """Benjamini-Hochberg step-up. Returns (rejected flags, adjusted p-values)."""
    p = np.asarray(p_values, float)
    m = p.size
    if m == 0:
        return np.zeros(0, bool), np.zeros(0)
    if np.any((p < 0) | (p > 1)) or np.any(~np.isfinite(p)):
        raise InvalidArgument("p-values must lie in [0, 1]")
    if not 0 < level < 1:
        raise InvalidArgument("level must lie in (0, 1)")
    order = np.argsort(p, kind="stable")
    ps = p[order]
    ok = ps <= np.arange(1, m + 1) * level / m
    reject = np.zeros(m, bool)
    if ok.any():
        kmax = np.flatnonzero(ok)[-1]
        reject[order[: kmax + 1]] = True
    adj_sorted = np.minimum.accumulate((ps * m / np.arange(1, m + 1))[::-1])[::-1]
    adj = np.empty(m)
    adj[order] = np.minimum(adj_sorted, 1.0)
    return reject, adj


def wald_p_values(fits: List[UzipFit], part: str) -> np.ndarray:
    """(q, p) two-sided Wald p-values for the slopes; NaN for unusable fits."""
    if part not in ("binary", "count"):
        raise InvalidArgument("part must be 'binary' or 'count'")
    rows = []
    for f in fits:
        coef, se = (f.zero_coef, f.zero_se) if part == "binary" else (f.count_coef, f.count_se)
        usable = f.usable and np.all(np.isfinite(se[1:]))
        rows.append(2 * stats.norm.sf(np.abs(coef[1:] / se[1:])) if usable else np.full(coef.size - 1, np.nan))
    return np.vstack(rows)


def uzip_select(fits: List[UzipFit], part: str, level: float = 0.05) -> np.ndarray:
    """(q, p) selection flags: BH across outcomes separately for every covariate.

    Unusable fits (non-converged, separated, degenerate zero part) are never selected.
    """
    pv = wald_p_values(fits, part)
    sel = np.zeros(pv.shape, bool)
    for k in range(pv.shape[1]):
        ok = np.isfinite(pv[:, k])
        if ok.any():
            sel[ok, k] = bh_adjust(pv[ok, k], level)[0]
    return sel
