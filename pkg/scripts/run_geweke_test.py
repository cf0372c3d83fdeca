#!/usr/bin/env python3
"""
Prior-reproduction (Geweke) check of the full Gibbs sweep

Runs the successive-conditional simulator on a small fixed design and
compares each parameter's marginal with independent prior draws using the
two-sample Kolmogorov-Smirnov distance.

Successive sweeps are autocorrelated, theta_1 most of all, so only every
`--thin`-th sweep is kept and the prior sample is drawn at the kept size.
The pass limit is the KS critical value at `--alpha` for those two sizes.

Usage:
  $ python scripts/run_geweke_test.py
  $ python scripts/run_geweke_test.py --sweeps 400000 --thin 40
  $ python scripts/run_geweke_test.py --kernel matern
"""

import os
import sys
import math
import argparse

import numpy as np
from scipy import stats

# Add the parent directory to the Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from core.correlation.kernels import KernelKind
from core.data.dataset import build_dataset
from core.data.distances import median_distance, pairwise_distances
from core.mcmc.sampler import successive_conditional_sweeps
from core.model.params import Hyperparams, param_names
from core.model.priors import sample_prior
from core.stats.rng import make_rng

COORDS = np.array([[0.0, 0.0], [1.0, 0.3], [0.4, 1.2], [1.6, 1.1], [0.9, 2.0]])
COVARIATE = np.array([0.5, -1.0, 1.3, 0.2, -0.4])


def ks_limit(n: int, m: int, alpha: float) -> float:
    """Asymptotic two-sample KS critical value"""
    return math.sqrt(-0.5 * math.log(alpha / 2.0)) * math.sqrt((n + m) / (n * m))


def main():
    parser = argparse.ArgumentParser(description="Geweke prior-reproduction test")
    parser.add_argument("--sweeps", type=int, default=200000, help="Number of recorded sweeps")
    parser.add_argument("--burn", type=int, default=1000, help="Sweeps discarded at the start")
    parser.add_argument("--thin", type=int, default=20, help="Keep every n-th recorded sweep")
    parser.add_argument("--alpha", type=float, default=0.001, help="Per-parameter KS level")
    parser.add_argument("--kernel", choices=[k.value for k in KernelKind], default="exponential")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    if args.thin < 1 or args.sweeps < args.thin:
        parser.error("--thin must be >= 1 and no larger than --sweeps")

    print("🧪 Geweke prior-reproduction test")
    print("=" * 60)

    data = build_dataset(COORDS, np.zeros(len(COORDS)), COVARIATE.reshape(-1, 1))
    kind = KernelKind(args.kernel)
    n_theta = 2 if kind is KernelKind.MATERN else 1
    # informative enough that every block moves in a few sweeps
    hyper = Hyperparams(c1=1.0, c2=3.0, c3=2.0, c4=1.0, c5=1.5, c6=0.5, c7=1.5, c8=1.0, c9=1.0,
                        gamma_gig=1.0)
    rng = make_rng(args.seed)

    sweeps = successive_conditional_sweeps(data, kind, hyper, args.sweeps + args.burn, rng)
    draws = sweeps[args.burn::args.thin]
    med_d = median_distance(pairwise_distances(data.coords))
    prior = np.array([sample_prior(hyper, data.p, n_theta, med_d, rng).as_vector()
                      for _ in range(len(draws))])
    limit = ks_limit(len(draws), len(prior), args.alpha)
    print(f"📊 {len(draws)} kept sweeps (thin {args.thin}), KS limit {limit:.4f}")

    failed = 0
    for j, name in enumerate(param_names(data.p, n_theta)):
        result = stats.ks_2samp(draws[:, j], prior[:, j])
        ok = result.statistic < limit
        failed += not ok
        print(f"{'✅' if ok else '❌'} {name:>8}: KS = {result.statistic:.4f}  p = {result.pvalue:.4f}")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
