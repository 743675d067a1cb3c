#!/usr/bin/env python3
"""Small-ball probabilities of the smallest and intermediate singular values.

The determinant estimator lives or dies by how close W = A o G comes to
singular: log det^2 = 2 sum log s_i, so tiny singular values drag the log
determinant down.  For broadly connected support the smallest singular
value obeys P(s_n sqrt(n) <= t) <~ t, and the m-th singular value of a
square matrix obeys P(s_m <= t (n-m)/sqrt(n)) <~ t^{(n-m)/4}.  The
constants are not explicit, so we probe the functional form: near-linear
growth for the smallest value, a much steeper power law at codimension 4.
"""

from permest import (
    SeedSpec,
    TailExperimentConfig,
    VarianceProfile,
    intermediate_sv_tail,
    smallest_sv_tail,
)

N = 16
TRIALS = 10_000
profile = VarianceProfile.complete(N)

print(f"complete profile, n={N}, {TRIALS} trials\n")
print("=== smallest singular value: P(s_n sqrt(n) <= t) ===")
curve = smallest_sv_tail(
    TailExperimentConfig(
        profile=profile, codim=0, trials=TRIALS,
        grid=(0.01, 0.02, 0.05, 0.1), seed=SeedSpec(42),
    )
)
print(f"{'t':>6} {'freq':>9} {'95% Wilson interval':>24}")
for t, f, lo, hi in zip(curve.thresholds, curve.freqs, curve.wilson_low, curve.wilson_high):
    print(f"{t:>6} {f:>9.4f}       [{lo:.4f}, {hi:.4f}]")
for i in range(len(curve.freqs) - 1):
    ratio = curve.freqs[i + 1] / curve.freqs[i]
    step = curve.thresholds[i + 1] / curve.thresholds[i]
    print(f"  t x{step:.1f} multiplies the tail by {ratio:.2f}  (linear would give {step:.1f})")

print("\n=== intermediate singular value s_m, m = 12 (codimension 4) ===")
rep = intermediate_sv_tail(
    TailExperimentConfig(
        profile=profile, codim=4, trials=TRIALS,
        grid=(1.1, 1.25, 1.4, 1.6), seed=SeedSpec(43),
    )
)
print(f"{'t':>6} {'freq':>9}")
for t, f in zip(rep.curve.thresholds, rep.curve.freqs):
    print(f"{t:>6} {f:>9.4f}")
print(
    f"\nfitted log-log slope: {rep.slope:.2f} "
    f"(bootstrap 95% CI [{rep.slope_ci_low:.2f}, {rep.slope_ci_high:.2f}])"
)
print("the guaranteed exponent at this codimension is only (n-m)/4 = 1;")
print("the realized decay is far steeper, which is what lets the truncated")
print("log-determinant ignore all but a handful of small singular values.")
