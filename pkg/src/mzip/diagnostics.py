"""Convergence diagnostics: effective sample size, Geweke z-scores, trace export."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .archive import ChainArchive
from .errors import InvalidArgument


def autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased (1/n) autocovariance at every lag, via FFT."""
    x = np.asarray(x, float)
    n = x.size
    xc = x - x.mean()
    m = 1 << int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(xc, m)
    return np.fft.irfft(f * np.conj(f), m)[:n] / n


def ess(x: np.ndarray) -> tuple:
    """Effective sample size by Geyer's initial monotone sequence estimator.

    Returns ``(ess, constant)``; a constant series reports its length and a flag.
    """
    x = np.asarray(x, float)
    n = x.size
    if n == 0:
        raise InvalidArgument("empty series")
    if n < 4 or np.ptp(x) == 0.0:
        return float(n), bool(np.ptp(x) == 0.0)
    acov = autocovariance(x)
    rho = acov / acov[0]
    # pair sums Gamma_k = rho_{2k} + rho_{2k+1}, truncated at the first non-positive pair
    npairs = n // 2
    pairs = rho[: 2 * npairs].reshape(npairs, 2).sum(axis=1)
    neg = np.flatnonzero(pairs <= 0)
    m = neg[0] if neg.size else npairs
    if m == 0:
        return float(n), False
    pairs = np.minimum.accumulate(pairs[:m])
    tau = -1.0 + 2.0 * pairs.sum()
    tau = max(tau, 1.0 / np.log10(max(n, 10)))
    return float(n / tau), False


def geweke_z(x: np.ndarray, first: float = 0.1, last: float = 0.5) -> float:
    """Difference of window means over its standard error (first 10% vs last 50%)."""
    x = np.asarray(x, float)
    n = x.size
    if not (0 < first < 1 and 0 < last < 1 and first + last <= 1):
        raise InvalidArgument("window fractions must be in (0, 1) and sum to at most 1")
    a = x[: max(int(first * n), 2)]
    b = x[n - max(int(last * n), 2):]
    var = 0.0
    for w in (a, b):
        if np.ptp(w) > 0:
            e, _ = ess(w)
            var += w.var() / e
    if var == 0.0:
        return 0.0
    return float((a.mean() - b.mean()) / np.sqrt(var))


def scalar_series(chain: ChainArchive) -> Dict[str, np.ndarray]:
    """Flatten the stored blocks into named scalar traces (latents skipped)."""
    out = {}
    names = chain.names
    outs = names.get("outcomes") or [f"y{j + 1}" for j in range(chain.dims["q"])]
    cx = names.get("covariates_x") or [f"x{k + 1}" for k in range(chain.dims["p_x"])]
    cz = names.get("covariates_z") or [f"z{l + 1}" for l in range(chain.dims["p_z"])]
    b = chain.blocks
    for j, o in enumerate(outs):
        out[f"beta0[{o}]"] = b["beta0"][:, j]
        out[f"alpha0[{o}]"] = b["alpha0"][:, j]
        for k, c in enumerate(cx):
            out[f"beta[{o},{c}]"] = b["b_mat"][:, k, j]
            out[f"gamma[{o},{c}]"] = b["gamma"][:, j, k].astype(float)
        for l, c in enumerate(cz):
            out[f"alpha[{o},{c}]"] = b["a_mat"][:, l, j]
            out[f"delta[{o},{c}]"] = b["delta"][:, j, l].astype(float)
    for k, c in enumerate(cx):
        out[f"sigma2_beta[{c}]"] = b["sigma2_beta"][:, k]
    for l, c in enumerate(cz):
        out[f"sigma2_alpha[{c}]"] = b["sigma2_alpha"][:, l]
    out["sigma2_beta0"] = b["sigma2_beta0"]
    out["sigma2_alpha0"] = b["sigma2_alpha0"]
    for key, tag in (("r_corr", "R"), ("sigma_v", "Sigma_V")):
        if key in b:
            q = b[key].shape[1]
            for j in range(q):
                for jj in range(j if key == "sigma_v" else j + 1, q):
                    out[f"{tag}[{outs[j]},{outs[jj]}]"] = b[key][:, j, jj]
    return out


@dataclass
class DiagnosticRow:
    name: str
    mean: float
    sd: float
    ess: float
    geweke_z: float
    constant: bool


def diagnostics(chain: ChainArchive) -> List[DiagnosticRow]:
    if chain.n_stored == 0:
        raise InvalidArgument("empty chain")
    rows = []
    for name, x in scalar_series(chain).items():
        e, const = ess(x)
        z = 0.0 if const else geweke_z(x)
        rows.append(DiagnosticRow(name, float(x.mean()), float(x.std(ddof=1)) if x.size > 1 else 0.0, e, z, const))
    return rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def diagnostics_table(rows: List[DiagnosticRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["parameter", "mean", "sd", "ess", "geweke_z", "constant"])
    for r in rows:
        w.writerow([r.name, _fmt(r.mean), _fmt(r.sd), _fmt(r.ess), _fmt(r.geweke_z), _fmt(r.constant)])
    return buf.getvalue()


def trace_table(chain: ChainArchive, names: Optional[List[str]] = None) -> str:
    """Tab-separated traces: one column per scalar, one row per stored scan."""
    series = scalar_series(chain)
    keys = list(series) if names is None else names
    missing = [k for k in keys if k not in series]
    if missing:
        raise InvalidArgument(f"unknown trace columns: {missing}")
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(["scan"] + keys)
    mat = np.column_stack([series[k] for k in keys])
    for s in range(mat.shape[0]):
        w.writerow([s] + [repr(float(v)) for v in mat[s]])
    return buf.getvalue()


def write_trace(chain: ChainArchive, path, names=None) -> Path:
    from .io import atomic_write_text

    return atomic_write_text(path, trace_table(chain, names))
