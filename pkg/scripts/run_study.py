"""Replicate simulation study for one scenario; writes operating, estimates, replicates and summary files."""
import argparse
import logging

from mzip.sampler import SamplerConfig
from mzip.simulation import ScenarioSpec, default_hyper, run_study

ap = argparse.ArgumentParser()
ap.add_argument("--scenario", default="I")
ap.add_argument("--q", type=int, default=20)
ap.add_argument("--replicates", type=int, default=10)
ap.add_argument("--scans", type=int, default=100_000)
ap.add_argument("--thin", type=int, default=10)
ap.add_argument("--omega", type=float, default=0.1)
ap.add_argument("--seed", type=int, default=2024)
ap.add_argument("--workers", type=int, default=1)
ap.add_argument("--out", default="study_out")
a = ap.parse_args()
logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

spec = ScenarioSpec(a.scenario, q=a.q, n_replicates=a.replicates, seed=a.seed)
cfg = SamplerConfig(n_scans=a.scans, burn_in=a.scans // 2, thin=a.thin, seed=1)
rep = run_study(spec, default_hyper(spec, a.omega), cfg, workers=a.workers)
rep.write(a.out)
print(rep.operating_table())
