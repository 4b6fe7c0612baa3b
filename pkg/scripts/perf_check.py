"""Wall time per scan as n and q grow."""
import time

import numpy as np

from mzip.sampler import SamplerConfig, run_chain
from mzip.simulation import ScenarioSpec, default_hyper, generate_dataset


def timed(n, q, p, scans):
    rng = np.random.default_rng(0)
    eff = np.round(rng.uniform(-0.25, 0.25, (p, q)) * (rng.random((p, q)) < 0.3), 2)
    spec = ScenarioSpec("I", n=n, q=q, b_true=eff, a_true=eff)
    data = generate_dataset(spec, 0).data
    hyper = default_hyper(spec, 0.5)
    run_chain(data, hyper, SamplerConfig(n_scans=4, burn_in=2))
    t = time.perf_counter()
    run_chain(data, hyper, SamplerConfig(n_scans=scans, burn_in=scans // 2, thin=10))
    return (time.perf_counter() - t) / scans * 1e3


for n, q, p in [(100, 20, 1), (200, 20, 1), (400, 20, 1), (800, 20, 1), (254, 44, 2)]:
    print(f"n={n:4d} q={q:3d} p={p}: {timed(n, q, p, 2000):6.2f} ms/scan")
