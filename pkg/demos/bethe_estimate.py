"""Estimate a permanent with belief propagation and compare to the exact value."""
import numpy as np

from bethe_permanent import (BPConfig, RngSpec, compute_beliefs, extract_belief_matrix,
                             random_uniform_matrix, run_bp, ryser_permanent)

w = random_uniform_matrix(12, rng=RngSpec(3).generator())
state, result = run_bp(w)
exact = ryser_permanent(w).log_magnitude

print(f"converged after {result.iterations} sweeps (residual {result.residual:.1e})")
print(f"log per  exact {exact:.6f}")
print(f"log per  bethe {result.log_estimate:.6f}")
print(f"ratio bethe/exact = {np.exp(result.log_estimate - exact):.4f}")

# beliefs form a doubly stochastic matrix
b = extract_belief_matrix(compute_beliefs(w, state))
print("row sums", np.round(b.sum(axis=1), 8))
print("col sums", np.round(b.sum(axis=0), 8))

# the fixed point does not depend on where the messages start
for seed in range(3):
    _, r = run_bp(w, BPConfig(init="random", seed=seed))
    print(f"random init {seed}: F = {r.f_bethe:.10f}")
