import numpy as np
import pytest
from scipy import signal

from mzip.diagnostics import autocovariance, diagnostics, diagnostics_table, ess, geweke_z, trace_table
from mzip.errors import InvalidArgument
from mzip.sampler import SamplerConfig, run_chain
from mzip.simulation import ScenarioSpec, default_hyper, generate_dataset


def test_autocovariance_lag0_is_variance():
    x = np.random.default_rng(0).normal(size=500)
    assert autocovariance(x)[0] == pytest.approx(x.var())


def test_ess_white_noise():
    x = np.random.default_rng(1).normal(size=10_000)
    e, const = ess(x)
    assert not const
    assert abs(e - 10_000) < 0.15 * 10_000


@pytest.mark.parametrize("seed", [2, 3])
def test_ess_ar1(seed):
    rho, n = 0.9, 10_000
    eps = np.random.default_rng(seed).normal(size=n + 500)
    x = signal.lfilter([1.0], [1.0, -rho], eps)[500:]
    e, _ = ess(x)
    target = n * (1 - rho) / (1 + rho)
    assert abs(e - target) < 0.25 * target


def test_constant_series_flagged():
    e, const = ess(np.full(300, 2.5))
    assert const and np.isfinite(e)
    assert geweke_z(np.full(300, 2.5)) == 0.0


def test_geweke_z_detects_drift():
    rng = np.random.default_rng(4)
    assert abs(geweke_z(rng.normal(size=5000))) < 4
    assert abs(geweke_z(rng.normal(size=5000) + np.linspace(0, 3, 5000))) > 10
    with pytest.raises(InvalidArgument):
        geweke_z(rng.normal(size=100), first=0.6, last=0.6)


def test_chain_diagnostics_tables():
    spec = ScenarioSpec("VI", n=30, q=3, seed=1)
    ch = run_chain(generate_dataset(spec, 0).data, default_hyper(spec), SamplerConfig(n_scans=200, burn_in=50))
    rows = diagnostics(ch)
    names = [r.name for r in rows]
    assert "beta0[y1]" in names and "R[y1,y2]" in names and "Sigma_V[y1,y1]" in names
    assert all(np.isfinite(r.ess) and np.isfinite(r.geweke_z) for r in rows)
    txt = diagnostics_table(rows)
    assert txt.splitlines()[0].split("\t") == ["parameter", "mean", "sd", "ess", "geweke_z", "constant"]
    tr = trace_table(ch, ["beta0[y1]", "sigma2_beta0"])
    assert len(tr.splitlines()) == ch.n_stored + 1
    with pytest.raises(InvalidArgument):
        trace_table(ch, ["nope"])
