#!/usr/bin/env python3
"""Truncated log-determinants and concentration of log det^2.

log det^2 is not a Lipschitz function of the matrix (the log blows up at
singularity), so raw Gaussian concentration does not apply to it.  The fix
is a level-dependent floor: singular value s_{n-l} is replaced by
max(s_{n-l}, eps(l)), with floors from the geometric schedule
n_k = n 2^{-4k}, eps_k = c0 n_k / sqrt(n).  The floored sum is Lipschitz,
and with overwhelming probability it differs from the raw value by at most
(3/2) l* log n, where l* is the deepest level size.

Empirically the spread of log det^2 grows far slower than n: the
dimension sweep below fits a log-log slope well under linear.
"""

from permest import SeedSpec, concentration_experiment, truncation_schedule

print("=== the schedule at n = 4096, two levels, c0 = 1 ===")
s = truncation_schedule(4096, 2, c0=1.0)
print(f"level sizes n_k:  {s.sizes}")
print(f"level floors eps_k: {s.floors}")
print(f"tail size l* = {s.tail_size}")
for l in (1, 16, 17, 256, 257, 4096):
    print(f"  codimension {l:>4}: floor eps(l) = {s.floor_for_codim(l)}")

print("\n=== dimension sweep: complete profile, 1000 draws per n ===")
rep = concentration_experiment([8, 16, 32, 64], trials=1000, seed=SeedSpec(777))
print(f"{'n':>4} {'std log det^2':>14} {'std truncated':>14} {'within 3/2 l* log n':>20}")
for e in rep.entries:
    print(
        f"{e.n:>4} {e.std_log_det2:>14.3f} {e.std_truncated:>14.3f} "
        f"{e.within_truncation_bound_fraction:>19.1%}"
    )
print(f"\nlog-log slope of std vs n: {rep.std_slope:.3f} (anything <= 0.6 is")
print("consistent with the (n log n)^(1/3)-type growth; a naive sum of n")
print("independent log terms would give slope 0.5, i.i.d.-matrix theory even less)")

print("\n=== deviation quantiles are roughly symmetric ===")
e = rep.entries[-1]
qs = dict(zip(rep.quantile_probs, e.deviation_quantiles))
print(f"n={e.n}: " + "  ".join(f"q{int(p*100):02d}={v:+.2f}" for p, v in qs.items()))
