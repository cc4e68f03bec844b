"""Unbiased Monte Carlo estimates from uniform random permutations.

The spread shrinks like 1/sqrt(samples), which is slow next to BP.
"""
import math

import numpy as np

from bethe_permanent import RngSpec, random_uniform_matrix, ryser_permanent, sample_permanent

w = random_uniform_matrix(7, rng=RngSpec(5).generator())
true = ryser_permanent(w).value
print(f"exact {true:.6e}")

for s in (10**3, 10**4, 10**5):
    runs = [math.exp(sample_permanent(w, samples=s, rng=r).log_estimate)
            for r in RngSpec(s).spawn(30)]
    print(f"s={s:>6}: mean/true {np.mean(runs) / true:.4f}, "
          f"sd/true {np.std(runs, ddof=1) / true:.4f}")

r = sample_permanent(w, seconds=0.05, rng=RngSpec(1))
print(f"50 ms budget drew {r.samples} samples, estimate/true {math.exp(r.log_estimate) / true:.4f}")
