"""Simulation scenarios, operating characteristics and replicate studies."""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .errors import InvalidArgument, InvalidState
from .io import atomic_write_text, format_table
from .model import Dataset, Hyperparameters
from .sampler import SamplerConfig, SelectionSummary, run_chain, summarize_selection
from .uzip import uzip_fit_all, uzip_select

log = logging.getLogger(__name__)

SCENARIOS = ("I", "II", "III", "IV", "V", "VI")
_SIGNED = np.array([0.05, 0.10, 0.15, 0.20, 0.25, -0.05, -0.10, -0.15, -0.20, -0.25] + [0.0] * 10)
_COUNT_ONLY = np.array([0.05, 0.10, 0.15, 0.20, 0.25] + [0.0] * 15)
_BINARY_ONLY = np.array([0.0] * 5 + [0.05, 0.10, 0.15, 0.20, 0.25] + [0.0] * 10)
_CORR = {"I": (0.70, 0.30, 0.20), "II": (0.40, 0.05, 0.10), "III": (0.20, 0.70, 0.30),
         "IV": (0.70, 0.30, 0.20), "V": (0.70, 0.30, 0.20), "VI": (0.0, 0.0, 0.0)}


def block_correlation(q: int, c1: float, c2: float, c3: float) -> np.ndarray:
    """Exchangeable c1 within the first q//2 outcomes, c2 within the rest, c3 across."""
    if q < 1:
        raise InvalidArgument("q must be positive")
    h = q // 2
    r = np.full((q, q), float(c3))
    r[:h, :h] = c1
    r[h:, h:] = c2
    np.fill_diagonal(r, 1.0)
    ev = np.linalg.eigvalsh(r).min()
    if ev <= 0:
        raise InvalidArgument(f"block correlation ({c1}, {c2}, {c3}) is not positive-definite "
                              f"(smallest eigenvalue {ev:.4g})")
    return r


@dataclass
class ScenarioSpec:
    scenario_id: str
    n: int = 300
    q: int = 20
    b_true: Optional[np.ndarray] = None  # (p_x, q)
    a_true: Optional[np.ndarray] = None  # (p_z, q)
    c1: Optional[float] = None
    c2: Optional[float] = None
    c3: Optional[float] = None
    overdispersed: Optional[bool] = None
    alpha0_true: Optional[np.ndarray] = None
    beta0_true: Optional[np.ndarray] = None
    covariate_sd: float = float(np.sqrt(2.0))
    n_replicates: int = 100
    seed: int = 0

    def __post_init__(self):
        sid = str(self.scenario_id).upper()
        if sid not in SCENARIOS:
            raise InvalidArgument(f"scenario_id must be one of {SCENARIOS}")
        self.scenario_id = sid
        q = self.q
        if q < 1 or self.n < 1:
            raise InvalidArgument("n and q must be positive")
        if self.b_true is None or self.a_true is None:
            if q > 20:
                raise InvalidArgument("default effects are defined for q <= 20; pass b_true and a_true")
            b, a = {"IV": (_COUNT_ONLY, _BINARY_ONLY), "V": (0 * _SIGNED, 0 * _SIGNED)}.get(sid, (_SIGNED, _SIGNED))
            if self.b_true is None:
                self.b_true = b[:q][None, :].copy()
            if self.a_true is None:
                self.a_true = a[:q][None, :].copy()
        self.b_true = np.atleast_2d(np.asarray(self.b_true, float))
        self.a_true = np.atleast_2d(np.asarray(self.a_true, float))
        if self.b_true.shape[1] != q or self.a_true.shape[1] != q:
            raise InvalidArgument("b_true and a_true need q columns")
        c = _CORR[sid]
        self.c1 = c[0] if self.c1 is None else float(self.c1)
        self.c2 = c[1] if self.c2 is None else float(self.c2)
        self.c3 = c[2] if self.c3 is None else float(self.c3)
        if self.overdispersed is None:
            self.overdispersed = sid != "VI"
        self.alpha0_true = np.ones(q) if self.alpha0_true is None else np.broadcast_to(
            np.asarray(self.alpha0_true, float), (q,)).copy()
        self.beta0_true = np.full(q, 5.0) if self.beta0_true is None else np.broadcast_to(
            np.asarray(self.beta0_true, float), (q,)).copy()
        if self.covariate_sd <= 0:
            raise InvalidArgument("covariate_sd must be positive")
        if self.n_replicates < 1:
            raise InvalidArgument("n_replicates must be positive")
        self.correlation  # validates positive-definiteness

    @property
    def correlation(self) -> np.ndarray:
        return block_correlation(self.q, self.c1, self.c2, self.c3)

    @property
    def tau(self) -> Dict[str, np.ndarray]:
        """Number of truly associated outcomes per covariate, by part."""
        return {"binary": (self.a_true != 0).sum(axis=1), "count": (self.b_true != 0).sum(axis=1)}

    def to_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


@dataclass
class SimulatedData:
    data: Dataset
    w: np.ndarray
    v: np.ndarray
    truth_count: np.ndarray  # (q, p_x) bool
    truth_binary: np.ndarray  # (q, p_z) bool


def generate_dataset(spec: ScenarioSpec, replicate_index: int) -> SimulatedData:
    """Draw one replicate; the stream depends only on (spec.seed, replicate_index)."""
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, replicate_index]))
    n, q = spec.n, spec.q
    p_x, p_z = spec.b_true.shape[0], spec.a_true.shape[0]
    # one covariate serves both parts when p_x == p_z (as in the scenarios)
    x = rng.normal(0.0, spec.covariate_sd, (n, p_x))
    z = x.copy() if p_z == p_x else rng.normal(0.0, spec.covariate_sd, (n, p_z))
    if spec.overdispersed:
        corr = spec.correlation
        chol = np.linalg.cholesky(corr)
        w = spec.alpha0_true + z @ spec.a_true + rng.standard_normal((n, q)) @ chol.T
        v = rng.standard_normal((n, q)) @ chol.T
    else:
        w = spec.alpha0_true + z @ spec.a_true + rng.standard_normal((n, q))
        v = np.zeros((n, q))
    lam = np.exp(spec.beta0_true + x @ spec.b_true + v)
    y = np.where(w >= 0, rng.poisson(lam), 0).astype(np.int64)
    names = tuple(f"y{j + 1}" for j in range(q))
    data = Dataset(y=y, x=x, z=z, offset=np.ones(n), outcome_names=names,
                   covariate_names_x=tuple(f"x{k + 1}" for k in range(p_x)),
                   covariate_names_z=tuple(f"z{l + 1}" for l in range(p_z)))
    return SimulatedData(data, w, v, (spec.b_true != 0).T.copy(), (spec.a_true != 0).T.copy())


@dataclass
class OperatingCharacteristics:
    tp: int
    fp: int
    tau: int
    q: int
    tpr: Optional[float]
    fpr: Optional[float]
    ppv: Optional[float]
    npv: Optional[float]
    q_sel: int

    @property
    def fn(self) -> int:
        return self.tau - self.tp

    @property
    def tn(self) -> int:
        return self.q - self.tau - self.fp


def _ratio(a, b) -> Optional[float]:
    return None if b == 0 else a / b


def evaluate_selection(selected, truth) -> OperatingCharacteristics:
    selected = np.asarray(selected, bool).ravel()
    truth = np.asarray(truth, bool).ravel()
    if selected.shape != truth.shape:
        raise InvalidArgument("selected and truth must have equal length")
    q = truth.size
    tau = int(truth.sum())
    tp = int(np.sum(selected & truth))
    fp = int(np.sum(selected & ~truth))
    return OperatingCharacteristics(tp=tp, fp=fp, tau=tau, q=q, tpr=_ratio(tp, tau), fpr=_ratio(fp, q - tau),
                                    ppv=_ratio(tp, tp + fp), npv=_ratio(q - tau - fp, q - tp - fp), q_sel=tp + fp)


# ---------------------------------------------------------------- studies

OC_FIELDS = ("tpr", "fpr", "ppv", "npv", "q_sel")


@dataclass
class ReplicateResult:
    index: int
    ok: bool
    error: str = ""
    mzip: Dict[str, OperatingCharacteristics] = field(default_factory=dict)
    uzip: Dict[str, OperatingCharacteristics] = field(default_factory=dict)
    selection: Optional[SelectionSummary] = None
    uzip_coef: Optional[Dict[str, np.ndarray]] = None
    acceptance: Optional[dict] = None
    seconds: float = 0.0


@dataclass
class StudyReport:
    spec: ScenarioSpec
    hyper: Hyperparameters
    config: SamplerConfig
    cutoff: float
    level: float
    replicates: List[ReplicateResult]

    @property
    def completed(self) -> List[ReplicateResult]:
        return [r for r in self.replicates if r.ok]

    def mean_sd(self, method: str, part: str, name: str):
        """Mean and SD over completed replicates where the rate is defined (None if never)."""
        vals = [getattr(getattr(r, method)[part], name) for r in self.completed if part in getattr(r, method)]
        vals = np.array([v for v in vals if v is not None], float)
        if vals.size == 0:
            return None, None
        return float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0

    def operating_table(self) -> str:
        """Operating characteristics: one row per (method, part), mean and SD of each characteristic (%)."""
        methods = ["mzip"] + (["uzip"] if any(r.uzip for r in self.completed) else [])
        tau = {p: int(self.spec.tau[p].sum()) for p in ("binary", "count")}
        header = ["scenario", "method", "part"]
        for f in OC_FIELDS:
            header += [f"{f}_mean", f"{f}_sd"]
        header += ["replicates"]
        rows = []
        for m in methods:
            for part in ("binary", "count"):
                row = [self.spec.scenario_id, m, part]
                for f in OC_FIELDS:
                    mu, sd = self.mean_sd(m, part, f)
                    absent = f in ("tpr", "ppv") and tau[part] == 0
                    scale = 1.0 if f == "q_sel" else 100.0
                    row += [None, None] if (mu is None or absent) else [round(mu * scale, 6), round(sd * scale, 6)]
                row.append(len(self.completed))
                rows.append(row)
        return format_table(header, rows)

    def estimates_table(self) -> str:
        """Per-outcome estimates: per outcome and part, medians of MZIP conditional PM/SD and
        mean inclusion probability; UZIP median estimate/SE, empirical SD and selection rate."""
        done = [r for r in self.completed if r.selection is not None]
        header = ["outcome", "part", "true", "mzip_pm", "mzip_sd", "mzip_incl", "uzip_est", "uzip_se",
                  "uzip_emp_sd", "uzip_sel_rate"]
        rows = []
        if not done:
            return format_table(header, rows)
        q = self.spec.q
        for part, key, truth in (("binary", "alpha", self.spec.a_true), ("count", "beta", self.spec.b_true)):
            ind = "delta" if part == "binary" else "gamma"
            pm = np.array([getattr(r.selection, f"pm_{key}")[:, 0] for r in done])
            sd = np.array([getattr(r.selection, f"sd_{key}")[:, 0] for r in done])
            pr = np.array([getattr(r.selection, f"prob_{ind}")[:, 0] for r in done])
            with_u = [r for r in done if r.uzip_coef is not None]
            for j in range(q):
                row = [j + 1, part, float(truth[0, j]), _nanmedian(pm[:, j]), _nanmedian(sd[:, j]),
                       float(pr[:, j].mean())]
                if with_u:
                    est = np.array([r.uzip_coef[f"{part}_est"][j] for r in with_u])
                    se = np.array([r.uzip_coef[f"{part}_se"][j] for r in with_u])
                    sel = np.array([r.uzip_coef[f"{part}_sel"][j] for r in with_u])
                    row += [_nanmedian(est), _nanmedian(se), float(np.nanstd(est, ddof=1)) if len(est) > 1 else None,
                            float(sel.mean())]
                else:
                    row += [None] * 4
                rows.append(row)
        return format_table(header, rows)

    def replicate_table(self) -> str:
        header = ["replicate", "ok", "method", "part", "tp", "fp", "tau"] + list(OC_FIELDS) + ["error"]
        rows = []
        for r in self.replicates:
            if not r.ok:
                rows.append([r.index, 0, None, None, None, None, None] + [None] * len(OC_FIELDS) + [r.error])
                continue
            for m in ("mzip", "uzip"):
                for part, oc in getattr(r, m).items():
                    rows.append([r.index, 1, m, part, oc.tp, oc.fp, oc.tau] + [getattr(oc, f) for f in OC_FIELDS]
                                + [""])
        return format_table(header, rows)

    def summary(self) -> dict:
        out = {"scenario": self.spec.to_dict(), "hyperparameters": self.hyper.to_dict(),
               "sampler": self.config.to_dict(), "cutoff": self.cutoff, "fdr_level": self.level,
               "replicates_total": len(self.replicates), "replicates_completed": len(self.completed),
               "failed": [{"replicate": r.index, "error": r.error} for r in self.replicates if not r.ok],
               "aggregate": {}}
        for m in ("mzip", "uzip"):
            for part in ("binary", "count"):
                agg = {}
                for f in OC_FIELDS:
                    mu, sd = self.mean_sd(m, part, f)
                    agg[f] = None if mu is None else {"mean": mu, "sd": sd}
                out["aggregate"][f"{m}_{part}"] = agg
        return out

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        atomic_write_text(out / "operating.tsv", self.operating_table())
        atomic_write_text(out / "estimates.tsv", self.estimates_table())
        atomic_write_text(out / "replicates.tsv", self.replicate_table())
        atomic_write_text(out / "summary.json", json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        return out


def _nanmedian(a):
    a = np.asarray(a, float)
    return None if np.all(np.isnan(a)) else float(np.nanmedian(a))


def replicate_seed(spec: ScenarioSpec, config: SamplerConfig, index: int) -> int:
    """Chain seed for a replicate: a function of (study seed, sampler seed, replicate index)."""
    ss = np.random.SeedSequence([spec.seed, config.seed, index, 1])
    return int(ss.generate_state(1, np.uint64)[0])


def run_replicate(spec: ScenarioSpec, hyper: Hyperparameters, config: SamplerConfig, index: int,
                  cutoff: float = 0.5, level: float = 0.05, uzip: bool = True, keep_chain: bool = False):
    t0 = time.perf_counter()
    sim = generate_dataset(spec, index)
    cfg = dataclasses.replace(config, seed=replicate_seed(spec, config, index))
    res = ReplicateResult(index=index, ok=True)
    chain = None
    try:
        chain = run_chain(sim.data, hyper, cfg)
    except (InvalidState, ArithmeticError, ValueError) as exc:
        res.ok = False
        res.error = f"{type(exc).__name__}: {exc}"
        log.warning("replicate %d failed: %s", index, res.error)
        return (res, None) if keep_chain else res
    sel = summarize_selection(chain, cutoff)
    res.selection = sel
    res.acceptance = chain.acceptance
    # one covariate per part in the scenarios; the evaluation is per covariate column
    res.mzip = {"binary": evaluate_selection(sel.selected_delta[:, 0], sim.truth_binary[:, 0]),
                "count": evaluate_selection(sel.selected_gamma[:, 0], sim.truth_count[:, 0])}
    if uzip:
        fits = uzip_fit_all(sim.data)
        coef = {}
        for part in ("binary", "count"):
            s = uzip_select(fits, part, level)
            truth = sim.truth_binary if part == "binary" else sim.truth_count
            res.uzip[part] = evaluate_selection(s[:, 0], truth[:, 0])
            est = [(f.zero_coef if part == "binary" else f.count_coef)[1] for f in fits]
            se = [(f.zero_se if part == "binary" else f.count_se)[1] for f in fits]
            coef[f"{part}_est"] = np.array(est)
            coef[f"{part}_se"] = np.array(se)
            coef[f"{part}_sel"] = s[:, 0]
        res.uzip_coef = coef
    res.seconds = time.perf_counter() - t0
    return (res, chain) if keep_chain else res


def run_study(spec: ScenarioSpec, hyper: Hyperparameters, config: SamplerConfig, cutoff: float = 0.5,
              level: float = 0.05, uzip: bool = True, replicates: Optional[List[int]] = None,
              workers: int = 1) -> StudyReport:
    """Fit every replicate and collect the operating characteristics.

    Failed fits are kept in the report with their error and excluded from the aggregates.
    """
    hyper.validate()
    idx = list(range(spec.n_replicates)) if replicates is None else list(replicates)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_replicate, [spec] * len(idx), [hyper] * len(idx), [config] * len(idx), idx,
                                  [cutoff] * len(idx), [level] * len(idx), [uzip] * len(idx)))
    else:
        results = []
        for i in idx:
            r = run_replicate(spec, hyper, config, i, cutoff, level, uzip)
            log.info("replicate %d done in %.1fs", i, r.seconds)
            results.append(r)
    return StudyReport(spec, hyper, config, cutoff, level, results)


def default_hyper(spec: ScenarioSpec, omega: float = 0.1) -> Hyperparameters:
    return Hyperparameters.default(spec.q, spec.b_true.shape[0], spec.a_true.shape[0], omega=omega)
