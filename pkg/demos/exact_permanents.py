"""Exact permanents by enumeration and by Ryser's formula.

Both agree to rounding on small matrices; Ryser stays usable to n around 25.
"""
import time

import numpy as np

from bethe_permanent import (RngSpec, brute_force_permanent, determinant,
                             random_uniform_matrix, ryser_permanent, scaled_diagonal)

w = np.array([[1.0, 2.0], [3.0, 4.0]])
print("per =", ryser_permanent(w).value, " det =", determinant(w).value)

gen = RngSpec(0).generator()
w = random_uniform_matrix(8, rng=gen)
print("n=8 brute:", brute_force_permanent(w).value)
print("n=8 ryser:", ryser_permanent(w).value)
print("n=8 diag :", scaled_diagonal(w).value)

for n in (16, 20, 22):
    w = random_uniform_matrix(n, rng=gen)
    t = time.perf_counter()
    log_per = ryser_permanent(w).log_magnitude
    print(f"n={n}: log per = {log_per:.4f} in {time.perf_counter() - t:.2f}s")
