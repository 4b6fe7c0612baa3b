"""Joint-distribution test of the full sampler on a small problem; prints every z-score."""
import argparse

import numpy as np

from mzip.geweke import joint_test

ap = argparse.ArgumentParser()
ap.add_argument("--iters", type=int, default=2000)
ap.add_argument("--prior-draws", type=int, default=20_000)
ap.add_argument("--sweeps", type=int, default=1)
ap.add_argument("--seed", type=int, default=1)
a = ap.parse_args()

res = joint_test(n_iter=a.iters, n_prior=a.prior_draws, sweeps=a.sweeps, seed=a.seed)
for name, z, pm, cm, e in zip(res.names, res.z, res.prior_mean, res.chain_mean, res.chain_ess):
    print(f"{name:22s} z={z:+6.2f}  prior {pm:+.4f}  chain {cm:+.4f}  ess {e:8.0f}")
print(f"within |z|<=4: {res.fraction_within:.1%}; max |z| {np.max(np.abs(res.z)):.2f}")
