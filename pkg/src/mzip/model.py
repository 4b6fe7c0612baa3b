"""Domain types, likelihood and incidence-density-ratio (IDR) calculations for the
multivariate zero-inflated Poisson (MZIP) model.

Notation follows the code rather than any text: outcome ``j`` in ``0..q-1``,
count covariates ``x`` (``p_x`` columns) and binary-part covariates ``z``
(``p_z`` columns). Nothing here draws random numbers.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import special

from .errors import InvalidArgument, InvalidState, NumericOverflow

IDR_MODES = ("at-means", "over-distribution", "empirical", "per-profile")


def _as_design(a, n: int, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((n, 0))
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] != n:
        raise InvalidArgument(f"{name} has {a.shape[0] if a.ndim else 0} rows, y has {n}")
    return a


@dataclass(frozen=True)
class Dataset:
    y: np.ndarray
    x: np.ndarray
    z: np.ndarray
    offset: np.ndarray
    outcome_names: tuple = ()
    covariate_names_x: tuple = ()
    covariate_names_z: tuple = ()
    subject_ids: tuple = ()

    def __post_init__(self):
        y = np.asarray(self.y)
        if y.ndim != 2:
            raise InvalidArgument(f"y must be a matrix, got shape {y.shape}")
        if not np.all(np.isfinite(y)) or np.any(y < 0) or np.any(y != np.round(y)):
            raise InvalidArgument("counts must be non-negative integers")
        n, q = y.shape
        x = _as_design(self.x, n, "x")
        z = _as_design(self.z, n, "z")
        offset = np.asarray(self.offset, dtype=float).reshape(-1)
        for name, arr in (("x", x), ("z", z)):
            if arr.shape[0] != n:
                raise InvalidArgument(f"{name} has {arr.shape[0]} rows, y has {n}")
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument(f"{name} contains non-finite values")
        if offset.shape[0] != n:
            raise InvalidArgument(f"offset has length {offset.shape[0]}, y has {n} rows")
        if np.any(~np.isfinite(offset)) or np.any(offset <= 0):
            raise InvalidArgument("offsets must be strictly positive")
        object.__setattr__(self, "y", y.astype(np.int64))
        object.__setattr__(self, "x", np.ascontiguousarray(x))
        object.__setattr__(self, "z", np.ascontiguousarray(z))
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "outcome_names", tuple(self.outcome_names) or tuple(f"y{j + 1}" for j in range(q)))
        object.__setattr__(
            self, "covariate_names_x", tuple(self.covariate_names_x) or tuple(f"x{k + 1}" for k in range(x.shape[1]))
        )
        object.__setattr__(
            self, "covariate_names_z", tuple(self.covariate_names_z) or tuple(f"z{k + 1}" for k in range(z.shape[1]))
        )
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids) or tuple(str(i + 1) for i in range(n)))
        if len(self.outcome_names) != q:
            raise InvalidArgument("outcome_names length does not match q")
        if len(self.covariate_names_x) != x.shape[1] or len(self.covariate_names_z) != z.shape[1]:
            raise InvalidArgument("covariate name vectors do not match covariate matrices")

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def q(self) -> int:
        return self.y.shape[1]

    @property
    def p_x(self) -> int:
        return self.x.shape[1]

    @property
    def p_z(self) -> int:
        return self.z.shape[1]


R_PRIORS = ("marginal-uniform", "jeffreys", "uniform")


@dataclass
class Hyperparameters:
    """Fixed prior constants.

    ``r_prior`` picks the correlation-matrix prior, written as
    ``pi(R) ∝ |R|^kappa * prod_j ((R^-1)_jj)^lam``:

    * ``"marginal-uniform"`` (default): the law of corr(Sigma) for
      Sigma ~ IW(I, q + 1); proper, every r_jk marginally uniform on (-1, 1);
      kappa = -(q + 1), lam = -(q + 1) / 2.
    * ``"jeffreys"``: ``|R|^{-(q+1)/2}``. Improper, and with binary-only
      information on w the posterior of R is improper too: chains drift to
      singular R. Kept for comparison only.
    * ``"uniform"``: flat over positive-definite correlation matrices.
    """

    mu_beta0: np.ndarray
    mu_alpha0: np.ndarray
    a_beta0: float
    b_beta0: float
    a_alpha0: float
    b_alpha0: float
    v_beta: np.ndarray
    v_alpha: np.ndarray
    a_beta: np.ndarray
    b_beta: np.ndarray
    a_alpha: np.ndarray
    b_alpha: np.ndarray
    omega_beta: np.ndarray
    omega_alpha: np.ndarray
    psi0: np.ndarray
    rho0: float
    forced_in_count: np.ndarray
    forced_in_binary: np.ndarray
    r_prior: str = "marginal-uniform"

    @classmethod
    def default(cls, q: int, p_x: int, p_z: int, omega: float = 0.1, psi: float = 3.0,
                forced_in_count=None, forced_in_binary=None) -> "Hyperparameters":
        """Noninformative defaults used for the simulation studies."""
        return cls(
            mu_beta0=np.zeros(q), mu_alpha0=np.zeros(q),
            a_beta0=0.7, b_beta0=0.7, a_alpha0=0.7, b_alpha0=0.7,
            v_beta=np.full(q, 10.0), v_alpha=np.full(q, 10.0),
            a_beta=np.full(p_x, 0.7), b_beta=np.full(p_x, 0.7),
            a_alpha=np.full(p_z, 0.7), b_alpha=np.full(p_z, 0.7),
            omega_beta=np.full(p_x, omega), omega_alpha=np.full(p_z, omega),
            psi0=psi * np.eye(q), rho0=q + psi + 1.0,
            forced_in_count=np.zeros(p_x, bool) if forced_in_count is None else forced_in_count,
            forced_in_binary=np.zeros(p_z, bool) if forced_in_binary is None else forced_in_binary,
        )

    def __post_init__(self):
        for name in ("mu_beta0", "mu_alpha0", "v_beta", "v_alpha", "a_beta", "b_beta",
                     "a_alpha", "b_alpha", "omega_beta", "omega_alpha"):
            setattr(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        self.psi0 = np.atleast_2d(np.asarray(self.psi0, dtype=float))
        self.forced_in_count = np.atleast_1d(np.asarray(self.forced_in_count, dtype=bool))
        self.forced_in_binary = np.atleast_1d(np.asarray(self.forced_in_binary, dtype=bool))
        for name in ("a_beta0", "b_beta0", "a_alpha0", "b_alpha0", "rho0"):
            setattr(self, name, float(getattr(self, name)))
        self.validate()

    @property
    def q(self) -> int:
        return self.mu_beta0.shape[0]

    @property
    def r_prior_terms(self) -> Tuple[float, float]:
        """(kappa, lam) of the correlation prior, see the class docstring."""
        q = self.q
        if self.r_prior == "marginal-uniform":
            return -(q + 1.0), -(q + 1.0) / 2.0
        if self.r_prior == "jeffreys":
            return -(q + 1.0) / 2.0, 0.0
        return 0.0, 0.0

    def validate(self, data: Optional[Dataset] = None) -> None:
        q = self.q
        for name in ("mu_alpha0", "v_beta", "v_alpha"):
            if getattr(self, name).shape != (q,):
                raise InvalidArgument(f"{name} must have length q={q}")
        scales = [self.a_beta0, self.b_beta0, self.a_alpha0, self.b_alpha0]
        if min(scales) <= 0:
            raise InvalidArgument("intercept inverse-Gamma parameters must be positive")
        for name in ("v_beta", "v_alpha", "a_beta", "b_beta", "a_alpha", "b_alpha"):
            if np.any(getattr(self, name) <= 0):
                raise InvalidArgument(f"{name} must be strictly positive")
        if self.a_beta.shape != self.b_beta.shape or self.a_beta.shape != self.omega_beta.shape:
            raise InvalidArgument("count-part hyperparameter vectors must share length p_x")
        if self.a_alpha.shape != self.b_alpha.shape or self.a_alpha.shape != self.omega_alpha.shape:
            raise InvalidArgument("binary-part hyperparameter vectors must share length p_z")
        if self.forced_in_count.shape != self.omega_beta.shape or self.forced_in_binary.shape != self.omega_alpha.shape:
            raise InvalidArgument("forced-in flags must match covariate counts")
        for name in ("omega_beta", "omega_alpha"):
            om = getattr(self, name)
            if np.any(om <= 0) or np.any(om >= 1):
                raise InvalidArgument(f"{name} entries must lie in (0, 1)")
        if self.psi0.shape != (q, q) or not np.allclose(self.psi0, self.psi0.T):
            raise InvalidArgument("psi0 must be a symmetric q x q matrix")
        if np.linalg.eigvalsh(self.psi0).min() <= 0:
            raise InvalidArgument("psi0 must be positive-definite")
        if self.r_prior not in R_PRIORS:
            raise InvalidArgument(f"r_prior must be one of {R_PRIORS}")
        if self.rho0 <= q - 1:
            raise InvalidArgument(f"rho0 must exceed q-1={q - 1}")
        if data is not None:
            if data.q != q or data.p_x != self.a_beta.shape[0] or data.p_z != self.a_alpha.shape[0]:
                raise InvalidArgument("hyperparameter dimensions do not match the dataset")

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparameters":
        return cls(**d)


@dataclass
class ModelState:
    beta0: np.ndarray
    alpha0: np.ndarray
    b_mat: np.ndarray
    a_mat: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray
    v_rand: np.ndarray
    sigma_v: np.ndarray
    r_corr: np.ndarray
    w_lat: np.ndarray
    sigma2_beta: np.ndarray
    sigma2_alpha: np.ndarray
    sigma2_beta0: float
    sigma2_alpha0: float

    def copy(self) -> "ModelState":
        return ModelState(**{f.name: np.copy(getattr(self, f.name)) if isinstance(getattr(self, f.name), np.ndarray)
                             else getattr(self, f.name) for f in dataclasses.fields(self)})

    def u(self) -> np.ndarray:
        """Susceptibility indicators, always derived from the sign of ``w_lat``."""
        return (self.w_lat >= 0).astype(np.int8)

    def log_lambda(self, data: Dataset) -> np.ndarray:
        return self.beta0 + data.x @ self.b_mat + np.log(data.offset)[:, None] + self.v_rand


def _is_pd(m: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return False
    return True


def validate_state(state: ModelState, data: Optional[Dataset] = None, atol: float = 1e-10) -> None:
    """Raise :class:`InvalidState` unless ``state`` is a valid point of the model."""
    q = state.beta0.shape[0]
    p_x, p_z = state.b_mat.shape[0], state.a_mat.shape[0]
    if state.b_mat.shape != (p_x, q) or state.gamma.shape != (q, p_x):
        raise InvalidState("b_mat / gamma shapes inconsistent")
    if state.a_mat.shape != (p_z, q) or state.delta.shape != (q, p_z):
        raise InvalidState("a_mat / delta shapes inconsistent")
    if np.any((state.b_mat.T == 0) != (state.gamma == 0)):
        raise InvalidState("b_mat must be exactly zero where gamma is 0 and nonzero elsewhere")
    if np.any((state.a_mat.T == 0) != (state.delta == 0)):
        raise InvalidState("a_mat must be exactly zero where delta is 0 and nonzero elsewhere")
    r = state.r_corr
    if r.shape != (q, q) or not np.allclose(r, r.T, atol=atol) or not np.allclose(np.diag(r), 1.0, atol=atol):
        raise InvalidState("r_corr must be a symmetric unit-diagonal matrix")
    if not _is_pd(r):
        raise InvalidState("r_corr is not positive-definite")
    if not np.allclose(state.sigma_v, state.sigma_v.T, atol=atol) or not _is_pd(state.sigma_v):
        raise InvalidState("sigma_v must be symmetric positive-definite")
    if np.any(state.sigma2_beta <= 0) or np.any(state.sigma2_alpha <= 0):
        raise InvalidState("variance components must be positive")
    if state.sigma2_beta0 <= 0 or state.sigma2_alpha0 <= 0:
        raise InvalidState("intercept variances must be positive")
    if data is not None:
        if state.w_lat.shape != data.y.shape or state.v_rand.shape != data.y.shape:
            raise InvalidState("latent matrices do not match the data dimensions")
        if np.any((data.y > 0) & (state.w_lat < 0)):
            raise InvalidState("a positive count requires w >= 0")


def poisson_log_pmf(y, lam):
    """``y log(lam) - lam - log(y!)`` (vectorised); log-gamma is used for the factorial."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise InvalidArgument("lambda must be finite and positive")
    y = np.asarray(y, dtype=float)
    out = special.xlogy(y, lam) - lam - special.gammaln(y + 1.0)
    return out if out.ndim else float(out)


def mvn_logpdf_rows(resid: np.ndarray, cov: np.ndarray) -> np.ndarray:
    """Row-wise log N(resid_i; 0, cov)."""
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise InvalidState("covariance matrix is not positive-definite") from exc
    sol = np.linalg.solve(chol, resid.T)
    q = cov.shape[0]
    return -0.5 * np.sum(sol * sol, axis=0) - np.sum(np.log(np.diag(chol))) - 0.5 * q * np.log(2 * np.pi)


def augmented_log_likelihood(state: ModelState, data: Dataset) -> float:
    """Log of the augmented-data likelihood of ``(y, w)`` given the parameters."""
    if state.w_lat.shape != data.y.shape or state.b_mat.shape != (data.p_x, data.q) \
            or state.a_mat.shape != (data.p_z, data.q) or state.v_rand.shape != data.y.shape:
        raise InvalidArgument("state dimensions do not match the dataset")
    w = state.w_lat
    if np.any((w < 0) & (data.y > 0)):
        return -np.inf
    active = w >= 0
    eta = state.log_lambda(data)
    lam = np.exp(eta)
    count_part = np.sum(np.where(active, data.y * eta - lam - special.gammaln(data.y + 1.0), 0.0))
    mean = state.alpha0 + data.z @ state.a_mat
    return float(count_part + mvn_logpdf_rows(w - mean, state.r_corr).sum())


def conditional_mean(state: ModelState, data: Dataset, i: int, j: int) -> float:
    """E[Y_ij | V_ij]: Poisson mean times the probit susceptibility probability."""
    if not (0 <= i < data.n and 0 <= j < data.q):
        raise IndexError(f"subject {i} / outcome {j} out of range")
    eta = state.beta0[j] + data.x[i] @ state.b_mat[:, j] + np.log(data.offset[i]) + state.v_rand[i, j]
    lin = state.alpha0[j] + data.z[i] @ state.a_mat[:, j]
    return float(np.exp(eta) * special.ndtr(lin))


@dataclass
class IdrQuery:
    """One-unit change of a covariate shared by both model parts.

    ``count_covariate`` indexes columns of ``x``, ``binary_covariate`` columns of
    ``z``; either may be None when the covariate enters one part only.
    ``profile`` holds the remaining ``z`` columns (in order, with the binary
    covariate removed). Exactly one of ``profile`` / ``mode`` is set.
    """

    outcome: int
    count_covariate: Optional[int]
    binary_covariate: Optional[int]
    baseline: float = 0.0
    profile: Optional[np.ndarray] = None
    mode: Optional[str] = None

    def __post_init__(self):
        if (self.profile is None) == (self.mode is None):
            raise InvalidArgument("set exactly one of profile / mode")
        if self.mode is not None and self.mode not in IDR_MODES:
            raise InvalidArgument(f"unknown marginalization mode {self.mode!r}; choose from {IDR_MODES}")
        if self.profile is not None:
            self.profile = np.atleast_1d(np.asarray(self.profile, dtype=float))

    def check(self, q: int, p_x: int, p_z: int) -> None:
        if not 0 <= self.outcome < q:
            raise InvalidArgument(f"outcome index {self.outcome} out of range")
        kc, kb = self.count_covariate, self.binary_covariate
        if kc is None and kb is None:
            raise InvalidArgument("covariate is absent from both model parts")
        if (kc is not None and not 0 <= kc < p_x) or (kb is not None and not 0 <= kb < p_z):
            raise InvalidArgument("covariate index out of range")
        n_other = p_z - (kb is not None)
        if self.profile is not None and self.profile.shape[0] != n_other:
            raise InvalidArgument(f"profile must have {n_other} entries")


def _idr_from_draws(beta_k, alpha0_j, a_col, k_bin, baseline, profile_rows, count_weights=None):
    """IDR per draw, averaging numerator and denominator over ``profile_rows``.

    beta_k, alpha0_j: (S,); a_col: (S, p_z); profile_rows: (m, p_z - 1);
    count_weights: (S, m) multiplicative count-part factors for each row, or None.
    """
    others = np.delete(a_col, k_bin, axis=1)  # (S, p_z-1)
    base = alpha0_j[:, None] + others @ profile_rows.T  # (S, m)
    ak = a_col[:, k_bin][:, None]
    log_num = special.log_ndtr(base + (baseline + 1.0) * ak)
    log_den = special.log_ndtr(base + baseline * ak)
    if np.any(~np.isfinite(log_den)):
        bad = (base + baseline * ak)[~np.isfinite(log_den)]
        raise NumericOverflow(f"probit denominator underflows at linear predictor {bad.flat[0]!r}")
    if count_weights is None:
        count_weights = np.ones_like(base)
    logw = np.log(count_weights)
    num = special.logsumexp(log_num + logw, axis=1)
    den = special.logsumexp(log_den + logw, axis=1)
    with np.errstate(over="ignore"):
        out = np.exp(beta_k + num - den)
    if not np.all(np.isfinite(out)):
        bad = (base + baseline * ak)[~np.isfinite(out)]
        raise NumericOverflow(f"IDR overflows at probit linear predictor {bad.flat[0]!r}")
    return out


def conditional_idr(state: ModelState, query: IdrQuery) -> float:
    """Ratio of marginal means for a one-unit covariate increase at an explicit profile."""
    if query.profile is None:
        raise InvalidArgument("conditional_idr needs an explicit covariate profile")
    q = state.beta0.shape[0]
    query.check(q, state.b_mat.shape[0], state.a_mat.shape[0])
    j = query.outcome
    beta_k, a_col, kb = _one_part_views(state.b_mat[None, :, j], state.a_mat[None, :, j], query)
    val = _idr_from_draws(beta_k, np.array([state.alpha0[j]]), a_col, kb, query.baseline, query.profile[None, :])
    return float(val[0])


def _one_part_views(b_draws, a_draws, query):
    """(S, p_x) / (S, p_z) coefficient draws -> (beta_k, a_col, kb); a covariate
    missing from a part acts as a zero coefficient there."""
    s = b_draws.shape[0]
    beta_k = np.zeros(s) if query.count_covariate is None else b_draws[:, query.count_covariate]
    if query.binary_covariate is None:
        return beta_k, np.hstack([a_draws, np.zeros((s, 1))]), a_draws.shape[1]
    return beta_k, a_draws, query.binary_covariate


def _summary(values: np.ndarray) -> dict:
    med, lo, hi = np.quantile(values, [0.5, 0.025, 0.975])
    return {"median": float(med), "lower": float(lo), "upper": float(hi)}


def marginal_idr(chain, query: IdrQuery, data: Dataset):
    """Posterior summary (median, 2.5%, 97.5%) of the IDR evaluated at every stored scan.

    ``at-means`` plugs in column means of the other binary-part covariates;
    ``empirical`` (also used for ``over-distribution``) averages the expected
    counts at ``x`` and ``x + 1`` over the observed covariate rows before taking
    the ratio; ``per-profile`` returns ``[(profile, summary), ...]`` over the
    unique rows of the other covariates.
    """
    if chain.n_stored == 0:
        raise InvalidArgument("chain is empty")
    q, p_x, p_z = data.q, data.p_x, data.p_z
    query.check(q, p_x, p_z)
    j, kc = query.outcome, query.count_covariate
    beta_k, a_col, kb = _one_part_views(chain.b_mat[:, :, j], chain.a_mat[:, :, j], query)
    alpha0_j = chain.alpha0[:, j]
    z_other = data.z if query.binary_covariate is None else np.delete(data.z, kb, axis=1)
    if query.profile is not None:
        return _summary(_idr_from_draws(beta_k, alpha0_j, a_col, kb, query.baseline, query.profile[None, :]))
    if query.mode == "at-means":
        prof = z_other.mean(axis=0)[None, :]
        return _summary(_idr_from_draws(beta_k, alpha0_j, a_col, kb, query.baseline, prof))
    if query.mode in ("empirical", "over-distribution"):
        x_other = data.x if kc is None else np.delete(data.x, kc, axis=1)
        b_other = chain.b_mat[:, :, j] if kc is None else np.delete(chain.b_mat[:, :, j], kc, axis=1)
        weights = np.exp(b_other @ x_other.T) * data.offset[None, :]
        return _summary(_idr_from_draws(beta_k, alpha0_j, a_col, kb, query.baseline, z_other, weights))
    profiles = np.unique(z_other, axis=0)
    return [(row, _summary(_idr_from_draws(beta_k, alpha0_j, a_col, kb, query.baseline, row[None, :])))
            for row in profiles]
