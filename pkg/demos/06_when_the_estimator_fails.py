#!/usr/bin/env python3
"""A matrix family that defeats the determinant estimator.

The estimator is unbiased, but unbiasedness is a linear-scale statement.
What a single run actually lands near is exp(E log det^2), and Jensen's
inequality says E log det^2 <= log E det^2 = log per.  For most
well-connected matrices the gap is modest.  Not here: take unit diagonal
and alpha/n off the diagonal.  Its permanent stays near 1, yet almost
every draw of det^2(sqrt(B) o G) is dominated by the diagonal Gaussians
and lands around exp(-1.27 n).  The gap grows linearly in n, so the
estimator concentrates exponentially far below the true permanent --
while being perfectly unbiased the whole time.
"""

import numpy as np

from permest import (
    SeedSpec,
    jensen_gap_experiment,
    permanent_ryser,
    run_estimator,
)

ALPHA = 0.1
TRIALS = 10_000

print(f"unit diagonal + {ALPHA}/n off-diagonal, {TRIALS} draws per size\n")
print(f"{'n':>4} {'log per':>9} {'E log det^2':>12} {'gap':>8} {'gap/n':>7}")
for n in (6, 10, 14, 18):
    rep = jensen_gap_experiment(n, ALPHA, TRIALS, SeedSpec(1000 + n))
    print(
        f"{n:>4} {rep.log_per:>9.4f} {rep.mean_log_det2:>12.3f} "
        f"{rep.gap:>8.3f} {rep.gap_per_n:>7.3f}"
    )

print("\ngap/n settles near a positive constant: the failure is Omega(n).")

print("\nControl: the uniform doubly stochastic matrix of the same size")
n = 10
uniform = np.full((n, n), 1.0 / n)
run = run_estimator(uniform, TRIALS, SeedSpec(2024))
gap = permanent_ryser(uniform).log_magnitude - float(run.samples.mean())
print(f"uniform n={n}: gap/n = {gap / n:.3f} -- several times smaller, and it")
print("keeps shrinking relative to n as the dimension grows.")
print("\nMoral: a broadly connected support graph keeps the estimator honest;")
print("a lonely dominant diagonal does not, even though the matrix is")
print("approximately doubly stochastic and its threshold graph is complete.")
